"""Point-cloud primitives: normalization, bounding boxes, IoU, Chamfer distance, hull areas.

Everything here is pure and operates on immutable double-precision data; these
functions are the numeric substrate for all privacy and utility metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import WorkbenchError


class DegenerateCloud(WorkbenchError):
    """All points coincide, so a normalization scale cannot be defined."""


@dataclass(frozen=True)
class PointCloud:
    """Immutable (n, 3) float64 point set.

    Coordinates must be finite. Pipeline ingestion additionally requires
    n >= 4 (see the loaders' ``min_points``); the type itself accepts any
    non-empty cloud so that small hand-built fixtures remain expressible.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"expected an (n, 3) array of points, got shape {pts.shape}")
        if pts.shape[0] < 1:
            raise ValueError("point cloud is empty")
        if not np.isfinite(pts).all():
            raise ValueError("point cloud contains non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box; ``lo`` <= ``hi`` componentwise."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64).reshape(3)
        hi = np.asarray(self.hi, dtype=np.float64).reshape(3)
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("bounding box corners must be finite")
        if np.any(lo > hi):
            raise ValueError("bounding box has lo > hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))


def normalize(cloud: PointCloud) -> PointCloud:
    """Center a cloud at its centroid and scale the farthest point to radius 1.

    Idempotent to within 1e-12 and order-preserving. Raises
    :class:`DegenerateCloud` when every point coincides (no scale exists).
    """
    pts = cloud.points
    centered = pts - pts.mean(axis=0)
    radius = float(np.sqrt((centered * centered).sum(axis=1)).max())
    if radius == 0.0:
        raise DegenerateCloud("all points coincide; normalization scale undefined")
    return PointCloud(centered / radius)


def aabb(cloud: PointCloud) -> Aabb:
    """Componentwise min/max box of the cloud."""
    pts = cloud.points
    return Aabb(pts.min(axis=0), pts.max(axis=0))


def iou(a: Aabb, b: Aabb) -> float:
    """3D intersection-over-union of two axis-aligned boxes, in [0, 1].

    Zero-volume degenerate pairs: identical boxes give 1.0, anything else 0.0
    (avoids the 0/0 form; IoU is continuous everywhere else).
    """
    inter_lo = np.maximum(a.lo, b.lo)
    inter_hi = np.minimum(a.hi, b.hi)
    inter = float(np.prod(np.clip(inter_hi - inter_lo, 0.0, None)))
    va, vb = a.volume, b.volume
    union = va + vb - inter
    if union == 0.0:
        identical = bool(np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi))
        return 1.0 if identical else 0.0
    return inter / union


def chamfer(a: PointCloud, b: PointCloud) -> float:
    """Symmetric sum of squared nearest-neighbor distances between two clouds.

    Uses a kd-tree to find each nearest neighbor, then recomputes the squared
    distance directly from coordinates so the result is bit-identical to a
    brute-force double loop over all pairs. No square root, no averaging.
    """
    pa, pb = a.points, b.points
    ia = cKDTree(pb).query(pa)[1]
    ib = cKDTree(pa).query(pb)[1]
    da = np.sum((pa - pb[ia]) ** 2, axis=1)
    db = np.sum((pb - pa[ib]) ** 2, axis=1)
    return float(np.sum(da) + np.sum(db))


def hull_area_2d(points: np.ndarray) -> float:
    """Area of the 2D convex hull of ``points`` (shape (n, 2)); 0 when degenerate."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) array, got shape {pts.shape}")
    if pts.shape[0] < 3:
        return 0.0
    try:
        return float(ConvexHull(pts).volume)  # in 2D "volume" is the area
    except QhullError:
        return 0.0  # collinear or otherwise flat input has no area


# ---------------------------------------------------------------------------
# File formats: text "xyz" (one `x y z` per line) and raw little-endian f32.

def load_xyz(path: str | Path, min_points: int = 4) -> PointCloud:
    """Read a whitespace-separated `x y z` text file into a float64 cloud."""
    pts = np.loadtxt(path, dtype=np.float64, ndmin=2)
    if pts.shape[1] != 3:
        raise ValueError(f"{path}: expected 3 columns per line, got {pts.shape[1]}")
    return _ingest(pts, path, min_points)


def save_xyz(path: str | Path, cloud: PointCloud) -> None:
    np.savetxt(path, cloud.points, fmt="%.17g")


def load_bin(path: str | Path, min_points: int = 4) -> PointCloud:
    """Read little-endian float32 xyz triplets; the count is implied by file size."""
    raw = np.fromfile(path, dtype="<f4")
    if raw.size % 3 != 0:
        raise ValueError(f"{path}: byte length is not a whole number of xyz triplets")
    return _ingest(raw.reshape(-1, 3).astype(np.float64), path, min_points)


def save_bin(path: str | Path, cloud: PointCloud) -> None:
    cloud.points.astype("<f4").tofile(path)


def load_cloud(path: str | Path, min_points: int = 4) -> PointCloud:
    """Dispatch on extension: ``.xyz``/``.txt`` text, anything else binary."""
    suffix = Path(path).suffix.lower()
    if suffix in (".xyz", ".txt"):
        return load_xyz(path, min_points)
    return load_bin(path, min_points)


def _ingest(pts: np.ndarray, path, min_points: int) -> PointCloud:
    if pts.shape[0] < min_points:
        raise ValueError(
            f"{path}: cloud has {pts.shape[0]} points, below the ingestion minimum of {min_points}"
        )
    if not np.isfinite(pts).all():
        raise ValueError(f"{path}: cloud contains non-finite coordinates")
    return PointCloud(pts)


def rotation_about_z(angle: float) -> np.ndarray:
    """Rotation matrix about the vertical axis (yaw)."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
