"""HTTP JSON API over a loaded experiment run.

The server holds one immutable :class:`~pcpriv.harness.RunState`; every request
is a pure function of that state, so responses for identical requests are
identical and match the batch CLI exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles

from ..harness import AttackerNotTrained, InvalidParameter, ObjectNotFound, RunState, evaluate_one
from ..regen import PrivilegeLevel, RegenSpec, ZeroPrivilege, privilege_to_epoch
from .models import (
    CloudResponse,
    EvaluateRequest,
    EvaluateResponse,
    HealthResponse,
    ObjectInfo,
    ObjectsResponse,
)


def _decimate(points: np.ndarray, max_points: int | None) -> np.ndarray:
    if max_points is None or points.shape[0] <= max_points:
        return points
    idx = np.linspace(0, points.shape[0] - 1, max_points).astype(int)
    return points[idx]


def create_app(state: RunState, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="pcpriv", version="0.1.0")

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse()

    @app.get("/objects", response_model=ObjectsResponse)
    def objects():
        space = state.corpus.label_space()
        return ObjectsResponse(
            objects=[ObjectInfo(object_id=o.intra_class, super_class=o.super_class)
                     for o in state.corpus],
            attackers=sorted(state.models),
            e_max=state.config.e_max,
            num_super_classes=len(space.super_classes),
            objects_per_class={k: len(v) for k, v in sorted(space.intra_classes.items())},
        )

    @app.get("/object/{object_id}", response_model=CloudResponse)
    def object_cloud(object_id: str,
                     l: float | None = Query(default=None),
                     seed: int = Query(default=0),
                     max_points: int | None = Query(default=None, ge=1)):
        try:
            obj = state.corpus.by_id(object_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown object '{object_id}'")
        if l is None:
            pts = _decimate(obj.cloud.points, max_points)
            return CloudResponse(object_id=object_id, count=pts.shape[0], points=pts.tolist())
        try:
            priv = PrivilegeLevel(l)
        except (ZeroPrivilege, ValueError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        epoch = privilege_to_epoch(priv, state.config.e_max)
        spec = RegenSpec(level=priv, epoch=epoch, seed=seed)
        cloud = state.regenerator.regenerate(object_id, obj.cloud, spec)
        pts = _decimate(cloud.points, max_points)
        return CloudResponse(object_id=object_id, l=priv.value, epoch=epoch, seed=seed,
                             count=pts.shape[0], points=pts.tolist())

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate(req: EvaluateRequest):
        space = state.corpus.label_space()
        rho1 = req.rho1 if req.rho1 is not None else 1.0 / len(space.super_classes)
        try:
            obj = state.corpus.by_id(req.object_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown object '{req.object_id}'")
        rho2 = req.rho2 if req.rho2 is not None else 1.0 / len(space.intra_classes[obj.super_class])
        try:
            result = evaluate_one(state, req.object_id, req.l, req.seed, req.attacker, rho1, rho2)
        except ObjectNotFound as e:
            raise HTTPException(status_code=404, detail=str(e))
        except (InvalidParameter, ZeroPrivilege) as e:
            raise HTTPException(status_code=400, detail=str(e))
        except AttackerNotTrained as e:
            raise HTTPException(status_code=409, detail=str(e))
        pts = _decimate(result["points"], req.max_points)
        return EvaluateResponse(
            object_id=result["object_id"], super_class=result["super_class"],
            l=result["l"], epoch=result["epoch"], seed=result["seed"],
            attacker=result["attacker"], rho1=result["rho1"], rho2=result["rho2"],
            pi1=result["pi1"], pi2=result["pi2"], q1=result["q1"],
            q2_static=result["q2_static"], q2_dynamic=result["q2_dynamic"],
            chamfer=result["chamfer"], count=pts.shape[0], points=pts.tolist(),
            super_hypothesis=result["super_hypothesis"],
            intra_hypothesis=result["intra_hypothesis"],
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
