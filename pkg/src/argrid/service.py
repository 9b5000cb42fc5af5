"""HTTP service exposing the engine to the UI and to batch users.

Stateless across requests apart from the read-only store and the
workspace's matrix cache; identical requests return identical payloads
while the store is unchanged.  Shock what-ifs never mutate anything:
they zero columns of a cached standardized matrix.

Status codes: 400 malformed parameters, 404 unknown site, 409 the store
cannot answer for the requested instant/window.
"""

from __future__ import annotations

from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from . import exports
from .engine import accessibility, reachability
from .errors import DataError
from .pipeline import DEFAULT_SLOT_HOURS, Workspace
from .stats import ADJUST_METHODS


def _parse_ts(raw: str | None, name: str) -> datetime:
    if raw is None:
        raise HTTPException(status_code=400, detail=f"missing query parameter {name!r}")
    try:
        ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError:
        raise HTTPException(status_code=400, detail=f"{name}: not an ISO timestamp: {raw!r}")
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _parse_slot(raw: str) -> tuple[int, int]:
    try:
        h0, h1 = (int(part) for part in raw.split("-"))
    except ValueError:
        raise HTTPException(status_code=400, detail=f"slot must look like '19-20', got {raw!r}")
    if not 0 <= h0 < h1 <= 24:
        raise HTTPException(status_code=400, detail=f"slot hours out of range: {raw!r}")
    return h0, h1


def create_app(ws: Workspace, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="argrid", docs_url=None, redoc_url=None)

    @app.exception_handler(DataError)
    async def _data_error(_: Request, exc: DataError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "cells": len(ws.grid), "sites": len(ws.sites)}

    @app.get("/grid")
    def grid():
        return {
            "parameters": {
                "gamma": ws.config.gamma,
                "tau_km": ws.config.tau_km,
                "extpop_mode": ws.config.extpop_mode,
                "timezone": ws.config.timezone,
            },
            "cells": exports.cells_feature_collection(ws.grid, {}),
            "sites": exports.sites_feature_collection(ws.sites),
        }

    @app.get("/ar")
    def ar(at: str | None = None):
        ts = _parse_ts(at, "at")
        matrix = ws.ar_at(ts)
        return {
            "parameters": ws.parameters(matrix, ts),
            "cells": exports.cells_feature_collection(
                ws.grid, {"accessibility": accessibility(matrix)}
            ),
            "sites": exports.sites_feature_collection(
                ws.sites, {"reachability": reachability(matrix)}
            ),
        }

    @app.post("/shock")
    async def shock(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="body must be a JSON object")
        ts = _parse_ts(body.get("at"), "at")
        saturated = body.get("saturated_sites")
        if not isinstance(saturated, list) or not saturated or not all(
            isinstance(s, str) for s in saturated
        ):
            raise HTTPException(
                status_code=400, detail="saturated_sites must be a non-empty list of site ids"
            )
        try:
            return ws.shock_scenario(ts, saturated)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0]))

    @app.get("/test")
    def test(
        request: Request,
        slot: str = "19-20",
        method: str = "bh",
        variant: str = "welch",
        tail: str = "b_greater",
        sample_unit: str = "daily_mean",
    ):
        params = request.query_params
        start = _parse_ts(params.get("from"), "from")
        end = _parse_ts(params.get("to"), "to")
        if method not in ADJUST_METHODS:
            raise HTTPException(
                status_code=400, detail=f"method must be one of {list(ADJUST_METHODS)}"
            )
        try:
            report = ws.differential(
                start, end, _parse_slot(slot), variant=variant, tail=tail,
                sample_unit=sample_unit,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "parameters": {
                "gamma": ws.config.gamma,
                "tau_km": ws.config.tau_km,
                "from": start.astimezone(timezone.utc).isoformat().replace("+00:00", "Z"),
                "to": end.astimezone(timezone.utc).isoformat().replace("+00:00", "Z"),
                "slot": slot,
                "timezone": ws.config.timezone,
                "variant": report.variant,
                "tail": report.tail,
                "alpha": report.alpha,
            },
            "method": method,
            "m": report.m,
            "rejection_counts": report.rejection_counts(),
            "cells": [
                {
                    "cell_id": cell_id,
                    "t": float(report.statistic[i]),
                    "df": float(report.df[i]),
                    "p": float(report.p_value[i]),
                    "adjusted": {
                        name: float(report.adjusted[name][i]) for name in ADJUST_METHODS
                    },
                    "rejected": {
                        name: bool(report.rejected[name][i]) for name in ADJUST_METHODS
                    },
                    "rejected_selected": bool(report.rejected[method][i]),
                }
                for i, cell_id in enumerate(report.cell_ids)
            ],
            "skipped": [list(pair) for pair in report.skipped],
        }

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
