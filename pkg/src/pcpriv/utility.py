"""Utility metrics: bounding-box IoU, plane-anchoring quality, tradeoff AUC.

The anchoring metric min-max-normalizes each raw plane-discrepancy component
over the whole evaluation population of a run before weighting, so its values
are comparable within a run and reproducible from the persisted stats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import WorkbenchError
from .geometry import PointCloud, aabb, iou
from .planes import PlaneErrorComponents

_COMPONENTS = ("angle", "offset", "area", "cd")


class DegenerateCurve(WorkbenchError):
    """All utility values coincide; the curve has no span to integrate over."""


def q1_bbox(original: PointCloud, regen: PointCloud) -> float:
    """IoU of the axis-aligned bounding boxes of original and regeneration."""
    return iou(aabb(original), aabb(regen))


@dataclass(frozen=True)
class MinMaxStats:
    """Per-component min/max of the raw plane terms over a fitting population."""

    mins: dict[str, float]
    maxs: dict[str, float]

    def __post_init__(self):
        for key in _COMPONENTS:
            if key not in self.mins or key not in self.maxs:
                raise ValueError(f"missing component '{key}'")
            if self.mins[key] > self.maxs[key]:
                raise ValueError(f"component '{key}' has min > max")

    def normalized(self, components: PlaneErrorComponents) -> dict[str, float]:
        """Min-max normalize each raw term; a zero-width component maps to 0."""
        raw = components.as_dict()
        out = {}
        for key in _COMPONENTS:
            width = self.maxs[key] - self.mins[key]
            out[key] = 0.0 if width == 0.0 else (raw[key] - self.mins[key]) / width
        return out

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps({"mins": self.mins, "maxs": self.maxs}, sort_keys=True))

    @classmethod
    def from_json(cls, path: str | Path) -> "MinMaxStats":
        d = json.loads(Path(path).read_text())
        return cls(mins=d["mins"], maxs=d["maxs"])


def fit_minmax(population: Sequence[PlaneErrorComponents]) -> MinMaxStats:
    """Record per-component min/max over the run's evaluation records."""
    if not population:
        raise ValueError("min-max population is empty")
    rows = [c.as_dict() for c in population]
    mins = {k: min(r[k] for r in rows) for k in _COMPONENTS}
    maxs = {k: max(r[k] for r in rows) for k in _COMPONENTS}
    return MinMaxStats(mins=mins, maxs=maxs)


def q2(components: PlaneErrorComponents, stats: MinMaxStats) -> tuple[float, float]:
    """(static, dynamic) anchoring quality, each 1 minus a weighted normalized error.

    Static weights angle and offset 0.5 each; dynamic weights all four
    components 0.25 each.
    """
    n = stats.normalized(components)
    err_static = 0.5 * n["angle"] + 0.5 * n["offset"]
    err_dynamic = 0.25 * (n["angle"] + n["offset"] + n["area"] + n["cd"])
    return 1.0 - err_static, 1.0 - err_dynamic


@dataclass(frozen=True)
class UtilityRecord:
    """One evaluated (original, regeneration) pair."""

    query_id: str
    level: float
    epoch: int
    q1: float
    q2_static: float
    q2_dynamic: float
    chamfer: float


def auc_privacy_utility(points: Sequence[tuple[float, float]]) -> float:
    """Area under the privacy-vs-utility curve, normalized by the utility span.

    Points are (utility, privacy) pairs with utility in [0, 1] (map a raw
    Chamfer axis into [0, 1] by dividing by its maximum first). Privacy values
    at duplicate utilities are averaged, the curve is sorted by utility, and a
    trapezoidal integral over the span is taken, so a constant-privacy curve
    integrates to that constant.
    """
    if len(points) < 2:
        raise ValueError("need at least 2 curve points")
    by_u: dict[float, list[float]] = {}
    for u, p in points:
        if not -1e-9 <= u <= 1.0 + 1e-9:
            raise ValueError(f"utility value {u} outside [0, 1]")
        by_u.setdefault(float(u), []).append(float(p))
    us = np.array(sorted(by_u))
    ps = np.array([float(np.mean(by_u[u])) for u in us])
    span = float(us[-1] - us[0])
    if span == 0.0:
        raise DegenerateCurve("all utility values are equal")
    area = float(np.sum(0.5 * (ps[1:] + ps[:-1]) * np.diff(us)))
    return area / span
