"""Privilege-controlled regeneration: the slider-to-epoch map and regenerators.

A privilege level l in (0, 1] selects an epoch from a bank of regenerator
states; lower epochs produce coarser, more private regenerations. Two
regenerators satisfy that contract here: a deterministic surrogate
(quantize + jitter + resample, fidelity rising with epoch) and a loader that
serves externally produced regenerations from a manifest.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import WorkbenchError
from .geometry import PointCloud, load_cloud

DEFAULT_E_MAX = 300
DEFAULT_REGEN_COUNT = 2048

_M64 = (1 << 64) - 1


class ZeroPrivilege(WorkbenchError):
    """l <= 0 means no privilege: nothing is released."""


class MissingEpoch(WorkbenchError):
    """The external regeneration bank has no entry for the requested epoch."""


class ManifestError(WorkbenchError):
    """External-regeneration manifest is malformed; message carries the position."""


@dataclass(frozen=True)
class PrivilegeLevel:
    """Scalar privilege in (0, 1]; 0 is rejected as "no release"."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise ValueError("privilege level must be finite")
        if v <= 0.0:
            raise ZeroPrivilege("privilege level 0 allows no release")
        if v > 1.0:
            raise ValueError(f"privilege level must be <= 1, got {v}")
        object.__setattr__(self, "value", v)


def privilege_to_epoch(level: PrivilegeLevel | float, e_max: int = DEFAULT_E_MAX) -> int:
    """Map privilege l to an epoch index: ceil(l * e_max), clamped to [1, e_max].

    Monotone non-decreasing in l. With e_max=300 the boundaries fall at exactly
    l = 50/300 and l = 70/300, the edges of the low/medium/high bands; boundary
    levels land in the lower band.
    """
    if not isinstance(level, PrivilegeLevel):
        level = PrivilegeLevel(level)
    if e_max < 1:
        raise ValueError("e_max must be >= 1")
    return min(max(math.ceil(level.value * e_max), 1), e_max)


@dataclass(frozen=True)
class RegenSpec:
    """Identifies one regeneration: privilege level, epoch, and RNG seed."""

    level: PrivilegeLevel
    epoch: int
    seed: int

    def __post_init__(self):
        if self.epoch < 1:
            raise ValueError("epoch must be >= 1")

    @classmethod
    def for_level(cls, level: PrivilegeLevel | float, seed: int, e_max: int = DEFAULT_E_MAX) -> "RegenSpec":
        if not isinstance(level, PrivilegeLevel):
            level = PrivilegeLevel(level)
        return cls(level=level, epoch=privilege_to_epoch(level, e_max), seed=seed)

    def sidecar(self, object_id: str) -> dict:
        return {"object_id": object_id, "l": self.level.value, "epoch": self.epoch, "seed": self.seed}


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def mix_seed(*parts: int | str) -> int:
    """Fold integers and strings into one 64-bit seed, stably across processes."""
    state = 0
    for part in parts:
        if isinstance(part, str):
            for byte in part.encode("utf-8"):
                state = _splitmix64(state ^ byte)
        else:
            state = _splitmix64(state ^ (int(part) & _M64))
    return state


def surrogate_regenerate(
    cloud: PointCloud,
    spec: RegenSpec,
    e_max: int = DEFAULT_E_MAX,
    count: int = DEFAULT_REGEN_COUNT,
) -> PointCloud:
    """Deterministic stand-in for an epoch-banked regenerator.

    Fidelity grows with epoch: points are snapped to a voxel grid whose
    resolution rises with epoch (2 + floor(30 * epoch/e_max) cells per unit),
    perturbed by isotropic Gaussian jitter with sigma = 0.08 * (1 - epoch/e_max),
    then resampled with replacement to ``count`` points.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    epoch = min(max(spec.epoch, 1), e_max)
    frac = epoch / e_max
    resolution = 2 + math.floor(30.0 * frac)
    sigma = 0.08 * (1.0 - frac)

    quantized = np.round(cloud.points * resolution) / resolution
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    jittered = quantized + rng.normal(0.0, sigma, size=quantized.shape) if sigma > 0 else quantized
    idx = rng.integers(0, jittered.shape[0], size=count)
    return PointCloud(jittered[idx])


class SurrogateRegenerator:
    """Regenerator backed by :func:`surrogate_regenerate`."""

    def __init__(self, e_max: int = DEFAULT_E_MAX, count: int = DEFAULT_REGEN_COUNT):
        self.e_max = e_max
        self.count = count

    def regenerate(self, object_id: str, cloud: PointCloud, spec: RegenSpec) -> PointCloud:
        return surrogate_regenerate(cloud, spec, e_max=self.e_max, count=self.count)


class ExternalRegenerator:
    """Serves regenerations produced outside this package (e.g. a trained AAE).

    The manifest maps object_id -> epoch -> list of replicate cloud files.
    ``regenerate`` picks the replicate ``seed % len(replicates)``.
    """

    def __init__(self, entries: dict[str, dict[int, list[Path]]]):
        self._entries = entries
        self._cache: dict[Path, PointCloud] = {}

    @property
    def object_ids(self) -> list[str]:
        return sorted(self._entries)

    def epochs_for(self, object_id: str) -> list[int]:
        return sorted(self._entries.get(object_id, {}))

    def regenerate(self, object_id: str, cloud: PointCloud | None, spec: RegenSpec) -> PointCloud:
        by_epoch = self._entries.get(object_id)
        if by_epoch is None:
            raise MissingEpoch(f"object '{object_id}' not present in the regeneration bank")
        replicates = by_epoch.get(spec.epoch)
        if not replicates:
            raise MissingEpoch(
                f"object '{object_id}' has no stored regeneration for epoch {spec.epoch} "
                f"(available: {sorted(by_epoch)})"
            )
        path = replicates[spec.seed % len(replicates)]
        if path not in self._cache:
            self._cache[path] = load_cloud(path)
        return self._cache[path]


def load_external_regenerations(manifest_path: str | Path) -> ExternalRegenerator:
    """Parse a manifest of stored regenerations, rejecting malformed entries with position info."""
    manifest_path = Path(manifest_path)
    try:
        raw = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise ManifestError(f"{manifest_path}: invalid JSON at line {e.lineno}, column {e.colno}") from e
    if not isinstance(raw, dict):
        raise ManifestError(f"{manifest_path}: top level must be an object mapping object_id to epochs")

    base = manifest_path.parent
    entries: dict[str, dict[int, list[Path]]] = {}
    for object_id, epochs in raw.items():
        if not isinstance(epochs, dict):
            raise ManifestError(f"{manifest_path}: ['{object_id}'] must map epoch to a list of files")
        by_epoch: dict[int, list[Path]] = {}
        for epoch_key, files in epochs.items():
            try:
                epoch = int(epoch_key)
            except ValueError:
                raise ManifestError(
                    f"{manifest_path}: ['{object_id}']['{epoch_key}'] is not an integer epoch"
                ) from None
            if epoch < 1:
                raise ManifestError(f"{manifest_path}: ['{object_id}']['{epoch_key}'] must be >= 1")
            if not isinstance(files, list) or not files:
                raise ManifestError(
                    f"{manifest_path}: ['{object_id}']['{epoch_key}'] must be a non-empty list of paths"
                )
            paths = []
            for i, f in enumerate(files):
                if not isinstance(f, str):
                    raise ManifestError(
                        f"{manifest_path}: ['{object_id}']['{epoch_key}'][{i}] must be a string path"
                    )
                paths.append(base / f)
            by_epoch[epoch] = paths
        entries[object_id] = by_epoch
    return ExternalRegenerator(entries)
