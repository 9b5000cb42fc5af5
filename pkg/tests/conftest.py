from pathlib import Path

import pytest

from argrid.pipeline import RunConfig, Workspace
from argrid.store import SnapshotStore, parse_snapshot

CORPUS_DIR = Path(__file__).resolve().parent.parent / "data" / "synthetic-city"


def load_corpus_store(root: Path) -> SnapshotStore:
    store = SnapshotStore(root)
    lines = (CORPUS_DIR / "snapshots.ndjson").read_text(encoding="utf-8").splitlines()
    store.append_many(parse_snapshot(line) for line in lines if line.strip())
    return store


def corpus_config(store_dir: Path) -> RunConfig:
    return RunConfig(
        grid_path=str(CORPUS_DIR / "grid.csv"),
        sites_path=str(CORPUS_DIR / "sites.csv"),
        store_path=str(store_dir),
    )


@pytest.fixture(scope="session")
def corpus_store_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("corpus-store")
    load_corpus_store(root)
    return root


@pytest.fixture(scope="session")
def workspace(corpus_store_dir) -> Workspace:
    return Workspace.open(corpus_config(corpus_store_dir))
