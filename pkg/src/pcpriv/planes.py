"""RANSAC extraction of the dominant horizontal plane and plane-discrepancy terms.

The anchoring-utility metric compares the most prominent horizontal plane of an
original cloud against the one recovered from its regeneration; this module
finds those planes and computes the four raw discrepancy terms (normal angle,
perpendicular offset, hull area, Chamfer) that the utility layer normalizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import WorkbenchError
from .geometry import PointCloud, chamfer, hull_area_2d

VERTICAL = np.array([0.0, 0.0, 1.0])


class NoHorizontalPlane(WorkbenchError):
    """No sampled plane lay within the horizontality cone with enough inliers."""


@dataclass(frozen=True)
class RansacParams:
    """Knobs for the horizontal-plane search; serialized inside experiment configs."""

    iterations: int = 500
    threshold: float = 0.02
    min_inlier_fraction: float = 0.05
    horizontality_deg: float = 15.0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.threshold <= 0:
            raise ValueError("threshold must be > 0")
        if not 0 <= self.min_inlier_fraction <= 1:
            raise ValueError("min_inlier_fraction must lie in [0, 1]")
        if not 0 < self.horizontality_deg < 90:
            raise ValueError("horizontality_deg must lie in (0, 90)")

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "threshold": self.threshold,
            "min_inlier_fraction": self.min_inlier_fraction,
            "horizontality_deg": self.horizontality_deg,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RansacParams":
        return cls(**d)


@dataclass(frozen=True)
class PlanePatch:
    """A fitted plane: its inlier points, unit normal, offset vector and hull area.

    ``origin_offset`` is the perpendicular vector from the origin to the plane,
    i.e. (n . c) n for any point c on the plane.
    """

    inliers: PointCloud
    unit_normal: np.ndarray
    origin_offset: np.ndarray
    hull_area: float

    def __post_init__(self):
        n = np.asarray(self.unit_normal, dtype=np.float64).reshape(3)
        r = np.asarray(self.origin_offset, dtype=np.float64).reshape(3)
        if abs(float(np.linalg.norm(n)) - 1.0) > 1e-9:
            raise ValueError("unit_normal must have length 1")
        rn = float(np.linalg.norm(r))
        if rn > 0 and float(np.linalg.norm(np.cross(r, n))) > 1e-9 * rn:
            raise ValueError("origin_offset must be parallel to unit_normal")
        n.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "unit_normal", n)
        object.__setattr__(self, "origin_offset", r)


@dataclass(frozen=True)
class PlaneErrorComponents:
    """The four raw plane-discrepancy terms, all >= 0."""

    angle_term: float   # |1 - n . n'|
    offset_term: float  # |r - r'|
    area_term: float    # |A - A'|
    cd_term: float      # Chamfer between the inlier sets

    def as_dict(self) -> dict:
        return {
            "angle": self.angle_term,
            "offset": self.offset_term,
            "area": self.area_term,
            "cd": self.cd_term,
        }


def ransac_horizontal_plane(
    cloud: PointCloud, params: RansacParams = RansacParams(), seed: int = 0
) -> PlanePatch:
    """Find the horizontal plane with the most inliers.

    Candidate planes come from random 3-point samples; a candidate is kept only
    if its normal lies within ``horizontality_deg`` of the vertical axis
    (normals are canonicalized to point upward). Deterministic for a given
    (cloud, params, seed). Raises :class:`NoHorizontalPlane` when no candidate
    is horizontal or the best one has fewer than ``min_inlier_fraction * n``
    inliers.
    """
    pts = cloud.points
    n_pts = pts.shape[0]
    if n_pts < 3:
        raise NoHorizontalPlane("need at least 3 points to fit a plane")

    rng = np.random.Generator(np.random.PCG64(seed))
    triples = rng.integers(0, n_pts, size=(params.iterations, 3))
    p0, p1, p2 = pts[triples[:, 0]], pts[triples[:, 1]], pts[triples[:, 2]]
    normals = np.cross(p1 - p0, p2 - p0)
    lengths = np.linalg.norm(normals, axis=1)
    ok = lengths > 1e-12
    # flip so every candidate normal has a non-negative vertical component
    with np.errstate(invalid="ignore", divide="ignore"):
        normals = np.where(ok[:, None], normals / np.where(ok, lengths, 1.0)[:, None], 0.0)
    normals[normals[:, 2] < 0] *= -1.0

    cos_cone = math.cos(math.radians(params.horizontality_deg))
    horizontal = ok & (normals[:, 2] >= cos_cone)
    if not horizontal.any():
        raise NoHorizontalPlane("no sampled candidate within the horizontality cone")

    cand_normals = normals[horizontal]
    cand_d = np.einsum("ij,ij->i", cand_normals, p0[horizontal])
    # distances of every point to every candidate plane: (n_pts, n_cand)
    dist = np.abs(pts @ cand_normals.T - cand_d[None, :])
    counts = (dist <= params.threshold).sum(axis=0)
    best = int(np.argmax(counts))  # ties resolve to the earliest candidate

    min_inliers = params.min_inlier_fraction * n_pts
    if counts[best] < min_inliers:
        raise NoHorizontalPlane(
            f"best horizontal candidate has {counts[best]} inliers, "
            f"below the minimum of {min_inliers:.1f}"
        )

    normal = cand_normals[best]
    d = float(cand_d[best])
    inlier_pts = pts[dist[:, best] <= params.threshold]
    return _build_patch(inlier_pts, normal, d)


def _build_patch(inlier_pts: np.ndarray, normal: np.ndarray, d: float) -> PlanePatch:
    offset = d * normal
    u, v = _plane_basis(normal)
    flat = np.column_stack((inlier_pts @ u, inlier_pts @ v))
    return PlanePatch(
        inliers=PointCloud(inlier_pts),
        unit_normal=normal,
        origin_offset=offset,
        hull_area=hull_area_2d(flat),
    )


def _plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # pick the world axis least aligned with the normal to seed the frame
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(normal)))] = 1.0
    u = np.cross(normal, axis)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    return u, v


def plane_error_components(p: PlanePatch, q: PlanePatch) -> PlaneErrorComponents:
    """Raw discrepancy terms between two fitted planes: angle, offset, area, Chamfer."""
    return PlaneErrorComponents(
        angle_term=abs(1.0 - float(np.dot(p.unit_normal, q.unit_normal))),
        offset_term=float(np.linalg.norm(p.origin_offset - q.origin_offset)),
        area_term=abs(p.hull_area - q.hull_area),
        cd_term=chamfer(p.inliers, q.inliers),
    )
