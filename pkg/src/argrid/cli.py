"""Command-line entry points.

Every flag can also be set through an ``ARGRID_``-prefixed environment
variable (e.g. ``ARGRID_COMPUTE_GAMMA=-1.5``).  Exit codes: 0 ok,
1 data error (the stores/inputs cannot answer), 2 configuration error.
"""

from __future__ import annotations

import logging
import sys
from datetime import datetime, timezone
from functools import wraps
from pathlib import Path

import click

from .errors import ConfigError, DataError
from .geometry import save_grid_csv, save_sites_csv
from .ingest import FileReplaySource, HttpSource, RetryPolicy, SyntheticSource, poll_and_append
from .pipeline import (
    DEFAULT_SLOT_HOURS,
    RunConfig,
    Workspace,
    compute_artifacts,
    impact_artifacts,
    differential_artifacts,
)
from .store import SnapshotStore
from .synthetic import OccupancyModel, default_profiles, make_radial_city

log = logging.getLogger(__name__)


def _parse_ts(value: str) -> datetime:
    try:
        ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError as exc:
        raise click.BadParameter(f"not an ISO timestamp: {value!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _parse_slot(value: str) -> tuple[int, int]:
    try:
        h0, h1 = (int(part) for part in value.split("-"))
    except ValueError as exc:
        raise click.BadParameter(f"slot must look like '19-20', got {value!r}") from exc
    if not 0 <= h0 < h1 <= 24:
        raise click.BadParameter(f"slot hours must satisfy 0 <= start < end <= 24, got {value!r}")
    return h0, h1


def _exit_codes(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except DataError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def config_options(fn):
    fn = click.option("--grid", "grid_path", required=True, help="Grid CSV path.")(fn)
    fn = click.option("--sites", "sites_path", required=True, help="Sites CSV path.")(fn)
    fn = click.option("--store", "store_path", required=True, help="Snapshot store directory.")(fn)
    fn = click.option("--gamma", default=-2.0, show_default=True, help="Distance-decay exponent.")(fn)
    fn = click.option("--tau-km", default=5.0, show_default=True, help="Catchment radius (km).")(fn)
    fn = click.option(
        "--extpop-mode",
        default="facility_pool",
        show_default=True,
        type=click.Choice(["facility_pool", "cell_aggregated"]),
    )(fn)
    fn = click.option(
        "--metric",
        "decay_metric",
        default="projected_euclidean",
        show_default=True,
        type=click.Choice(["projected_euclidean", "haversine"]),
        help="Distance metric for both catchment and decay.",
    )(fn)
    fn = click.option("--alpha", default=0.05, show_default=True, help="Significance level.")(fn)
    fn = click.option("--timezone", "tz", default="Europe/Rome", show_default=True)(fn)
    fn = click.option("--cell-size-km", default=1.0, show_default=True)(fn)
    return fn


def _build_config(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode,
                  decay_metric, alpha, tz, cell_size_km) -> RunConfig:
    return RunConfig(
        grid_path=grid_path,
        sites_path=sites_path,
        store_path=store_path,
        gamma=gamma,
        tau_km=tau_km,
        extpop_mode=extpop_mode,
        catchment_metric=decay_metric,
        decay_metric=decay_metric,
        alpha=alpha,
        timezone=tz,
        cell_size_km=cell_size_km,
    )


@click.group(context_settings={"auto_envvar_prefix": "ARGRID"})
def cli():
    """Spatial accessibility-reachability analytics."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@config_options
@click.option("--at", required=True, help="Instant to evaluate (ISO 8601, UTC assumed if naive).")
@click.option("--out", required=True, help="Output directory.")
@_exit_codes
def compute(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode, decay_metric,
            alpha, tz, cell_size_km, at, out):
    """Write the matrix CSV, accessibility/reachability GeoJSON, and summary."""
    config = _build_config(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode,
                           decay_metric, alpha, tz, cell_size_km)
    ws = Workspace.open(config)
    paths = compute_artifacts(ws, _parse_ts(at), out)
    for name, path in paths.items():
        click.echo(f"{name}: {path}")


@cli.command()
@config_options
@click.option("--at", required=True, help="Instant to evaluate.")
@click.option("--out", required=True, help="Output directory.")
@_exit_codes
def impact(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode, decay_metric,
           alpha, tz, cell_size_km, at, out):
    """Worst single-facility saturation sweep: report CSV, GeoJSON, scatter data."""
    config = _build_config(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode,
                           decay_metric, alpha, tz, cell_size_km)
    ws = Workspace.open(config)
    paths = impact_artifacts(ws, _parse_ts(at), out)
    for name, path in paths.items():
        click.echo(f"{name}: {path}")


@cli.command()
@config_options
@click.option("--from", "start", required=True, help="Window start (inclusive).")
@click.option("--to", "end", required=True, help="Window end (exclusive).")
@click.option("--slot", default="19-20", show_default=True, help="Wall-clock hour slot, e.g. 19-20.")
@click.option(
    "--tail",
    default="b_greater",
    show_default=True,
    type=click.Choice(["two_sided", "a_greater", "b_greater"]),
    help="Group a holds weekend samples, group b weekday samples; the default "
    "b_greater tests for weekday mean > weekend mean (a weekend drop).",
)
@click.option("--variant", default="welch", show_default=True,
              type=click.Choice(["welch", "student_pooled"]))
@click.option("--sample-unit", default="daily_mean", show_default=True,
              type=click.Choice(["daily_mean", "snapshot"]))
@click.option("--out", required=True, help="Output directory.")
@_exit_codes
def test(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode, decay_metric,
         alpha, tz, cell_size_km, start, end, slot, tail, variant, sample_unit, out):
    """Weekend-vs-weekday accessibility differentials with corrections."""
    config = _build_config(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode,
                           decay_metric, alpha, tz, cell_size_km)
    ws = Workspace.open(config)
    paths, report = differential_artifacts(
        ws, _parse_ts(start), _parse_ts(end), out,
        slot_hours=_parse_slot(slot), variant=variant, tail=tail, sample_unit=sample_unit,
    )
    for method, count in report.rejection_counts().items():
        click.echo(f"rejections[{method}]: {count}")
    for name, path in paths.items():
        click.echo(f"{name}: {path}")


@cli.command()
@config_options
@click.option("--at", required=True, help="Instant to evaluate.")
@click.option("--d0-km", default=5.0, show_default=True,
              help="Catchment radius for the two-step FCA baseline.")
@click.option("--out", required=True, help="Output CSV path.")
@_exit_codes
def compare(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode, decay_metric,
            alpha, tz, cell_size_km, at, d0_km, out):
    """Side-by-side per-cell accessibility: joint engine vs classical baselines."""
    from .baselines import GravityAccessibility, PowerDecay, TwoStepFCA
    from .engine import accessibility as row_sums
    from .exports import write_method_comparison_csv

    config = _build_config(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode,
                           decay_metric, alpha, tz, cell_size_km)
    ws = Workspace.open(config)
    supply, _ = ws.supply_at(_parse_ts(at))
    decay = PowerDecay(gamma)
    columns = {
        "joint_ar": row_sums(ws.ar_at(_parse_ts(at))),
        "gravity": GravityAccessibility(decay=decay, metric=decay_metric)
        .fit(ws.grid, ws.sites)
        .accessibility(supply),
        "two_step_fca": TwoStepFCA(d0_km=d0_km, decay=decay, metric=decay_metric)
        .fit(ws.grid, ws.sites)
        .accessibility(supply),
    }
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_method_comparison_csv(ws.grid, columns, out_path)
    click.echo(f"comparison: {out_path}")


@cli.command()
@click.option("--store", "store_path", required=True, help="Snapshot store directory.")
@click.option("--replay", "replay_path", default=None, help="NDJSON file to replay.")
@click.option("--url", default=None, help="HTTP endpoint to poll for snapshots.")
@click.option("--interval", default=300.0, show_default=True, help="Poll interval (seconds).")
@click.option("--max-batches", default=None, type=int, help="Stop after N batches (HTTP polling).")
@click.option("--retries", default=3, show_default=True, help="Attempts before a failure is permanent.")
@_exit_codes
def ingest(store_path, replay_path, url, interval, max_batches, retries):
    """Append snapshots from a replay file or a polled HTTP endpoint."""
    if (replay_path is None) == (url is None):
        raise ConfigError("provide exactly one of --replay or --url")
    store = SnapshotStore(store_path)
    if replay_path is not None:
        source = FileReplaySource(replay_path)
    else:
        source = HttpSource(url)
    stats = poll_and_append(
        source, store,
        retry=RetryPolicy(max_attempts=retries),
        poll_interval_s=interval,
        max_batches=max_batches,
    )
    click.echo(f"batches: {stats.batches} appended: {stats.appended} duplicates: {stats.duplicates}")


@cli.command()
@config_options
@click.option("--bind", default="127.0.0.1:8000", show_default=True, help="host:port to serve on.")
@click.option("--static-dir", default=None, help="Optional static bundle to serve at /ui.")
@_exit_codes
def serve(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode, decay_metric,
          alpha, tz, cell_size_km, bind, static_dir):
    """Run the HTTP service backing batch users and the shock-explorer UI."""
    import uvicorn

    from .service import create_app

    config = _build_config(grid_path, sites_path, store_path, gamma, tau_km, extpop_mode,
                           decay_metric, alpha, tz, cell_size_km)
    app = create_app(Workspace.open(config), static_dir=static_dir)
    try:
        host, port = bind.rsplit(":", 1)
        port_num = int(port)
    except ValueError as exc:
        raise ConfigError(f"--bind must look like host:port, got {bind!r}") from exc
    uvicorn.run(app, host=host, port=port_num)


@cli.command()
@click.option("--out", required=True, help="Directory for grid.csv, sites.csv, snapshots.ndjson.")
@click.option("--days", default=14, show_default=True, help="Days of snapshots to generate.")
@click.option("--start", default="2022-03-07T00:00:00Z", show_default=True,
              help="First snapshot instant (ISO 8601).")
@click.option("--interval", default=900.0, show_default=True, help="Snapshot cadence (seconds).")
@click.option("--rows", default=15, show_default=True)
@click.option("--cols", default=15, show_default=True)
@click.option("--seed", default=20220307, show_default=True)
@_exit_codes
def synth(out, days, start, interval, rows, cols, seed):
    """Generate a deterministic synthetic city corpus for demos and tests."""
    from datetime import timedelta

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid, sites = make_radial_city(n_rows=rows, n_cols=cols)
    save_grid_csv(grid, out_dir / "grid.csv")
    save_sites_csv(sites, out_dir / "sites.csv")
    model = OccupancyModel(default_profiles(sites, seed=seed), seed=seed)
    begin = _parse_ts(start)
    snapshots = model.generate(begin, begin + timedelta(days=days), interval)
    from .store import serialize_snapshot

    with (out_dir / "snapshots.ndjson").open("w", encoding="utf-8") as fh:
        for snapshot in snapshots:
            fh.write(serialize_snapshot(snapshot) + "\n")
    click.echo(f"cells: {len(grid)} sites: {len(sites)} snapshots: {len(snapshots)}")
    click.echo(f"wrote {out_dir}/grid.csv, sites.csv, snapshots.ndjson")


def main():
    cli()


if __name__ == "__main__":
    main()
