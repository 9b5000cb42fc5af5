import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from argrid.cli import cli

from .conftest import CORPUS_DIR, load_corpus_store


@pytest.fixture(scope="module")
def store_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("cli-store")
    load_corpus_store(root)
    return root


def base_args(store_dir):
    return [
        "--grid", str(CORPUS_DIR / "grid.csv"),
        "--sites", str(CORPUS_DIR / "sites.csv"),
        "--store", str(store_dir),
    ]


class TestComputeCommand:
    def test_writes_artifacts(self, store_dir, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            cli,
            ["compute", *base_args(store_dir), "--at", "2022-03-16T08:00:00Z",
             "--out", str(tmp_path / "out")],
            catch_exceptions=False,
        )
        assert result.exit_code == 0, result.output
        written = list((tmp_path / "out").iterdir())
        assert len(written) == 3

    def test_missing_snapshots_exit_1(self, store_dir, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            cli,
            ["compute", *base_args(store_dir), "--at", "2020-01-01T00:00:00Z",
             "--out", str(tmp_path / "out")],
        )
        assert result.exit_code == 1
        assert "no snapshot" in result.output

    def test_missing_grid_exit_2(self, store_dir, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            cli,
            ["compute", "--grid", "/nope/grid.csv",
             "--sites", str(CORPUS_DIR / "sites.csv"), "--store", str(store_dir),
             "--at", "2022-03-16T08:00:00Z", "--out", str(tmp_path / "out")],
        )
        assert result.exit_code == 2

    def test_bad_timestamp_exit_2(self, store_dir, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            cli,
            ["compute", *base_args(store_dir), "--at", "today", "--out", str(tmp_path / "o")],
        )
        assert result.exit_code == 2

    def test_env_var_override(self, store_dir, tmp_path, monkeypatch):
        runner = CliRunner()
        result = runner.invoke(
            cli,
            ["compute", *base_args(store_dir), "--at", "2022-03-16T08:00:00Z",
             "--out", str(tmp_path / "out")],
            env={"ARGRID_COMPUTE_GAMMA": "-1.0"},
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        summary = next((tmp_path / "out").glob("*_summary.json"))
        assert json.loads(summary.read_text())["parameters"]["gamma"] == -1.0


class TestImpactCommand:
    def test_writes_report(self, store_dir, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            cli,
            ["impact", *base_args(store_dir), "--at", "2022-03-16T08:00:00Z",
             "--out", str(tmp_path / "imp")],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        csv_path = next((tmp_path / "imp").glob("impact_*.csv"))
        assert csv_path.read_text().splitlines()[0] == "cell_id,A,A_hat,worst_site,impact"


class TestTestCommand:
    def test_reports_counts(self, store_dir, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            cli,
            ["test", *base_args(store_dir),
             "--from", "2022-03-07T00:00:00Z", "--to", "2022-03-21T00:00:00Z",
             "--out", str(tmp_path / "t")],
            catch_exceptions=False,
        )
        assert result.exit_code == 0, result.output
        assert "rejections[bonferroni]" in result.output
        assert "rejections[bh]" in result.output

    def test_bad_slot_exit_2(self, store_dir, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            cli,
            ["test", *base_args(store_dir),
             "--from", "2022-03-07T00:00:00Z", "--to", "2022-03-21T00:00:00Z",
             "--slot", "26-30", "--out", str(tmp_path / "t")],
        )
        assert result.exit_code == 2


class TestCompareCommand:
    def test_side_by_side_csv(self, store_dir, tmp_path):
        runner = CliRunner()
        result = runner.invoke(
            cli,
            ["compare", *base_args(store_dir), "--at", "2022-03-16T08:00:00Z",
             "--out", str(tmp_path / "cmp.csv")],
            catch_exceptions=False,
        )
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "cmp.csv").read_text().splitlines()
        assert lines[0] == "cell_id,joint_ar,gravity,two_step_fca"
        assert len(lines) == 1 + 225


class TestIngestCommand:
    def test_replay_and_idempotent_rerun(self, tmp_path):
        runner = CliRunner()
        store = tmp_path / "store"
        args = ["ingest", "--store", str(store), "--replay",
                str(CORPUS_DIR / "snapshots.ndjson")]
        first = runner.invoke(cli, args, catch_exceptions=False)
        assert first.exit_code == 0
        assert "appended: 10752" in first.output
        second = runner.invoke(cli, args, catch_exceptions=False)
        assert "appended: 0" in second.output
        assert "duplicates: 10752" in second.output

    def test_requires_exactly_one_source(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(cli, ["ingest", "--store", str(tmp_path / "s")])
        assert result.exit_code == 2
        both = runner.invoke(
            cli,
            ["ingest", "--store", str(tmp_path / "s"), "--replay", "x", "--url", "http://y"],
        )
        assert both.exit_code == 2


class TestSynthCommand:
    def test_deterministic_by_seed(self, tmp_path):
        runner = CliRunner()
        for name in ("a", "b"):
            result = runner.invoke(
                cli,
                ["synth", "--out", str(tmp_path / name), "--days", "2", "--seed", "99"],
                catch_exceptions=False,
            )
            assert result.exit_code == 0
        for fname in ("grid.csv", "sites.csv", "snapshots.ndjson"):
            assert (tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" / fname).read_bytes()
