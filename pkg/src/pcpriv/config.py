"""Experiment configuration: JSON in, fully resolved echo out.

A config captures everything a run needs so that rerunning it reproduces the
outputs byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .planes import RansacParams

DEFAULT_PRIVILEGE_GRID = (0.03, 0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class CorpusSpec:
    source: str = "synthetic"              # "synthetic" | "directory"
    path: str | None = None                # directory root or manifest, for "directory"
    num_classes: int = 4
    objects_per_class: int = 8
    points_per_cloud: int = 512
    families: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.source not in ("synthetic", "directory"):
            raise ValueError(f"corpus source must be synthetic|directory, got {self.source!r}")
        if self.source == "directory" and not self.path:
            raise ValueError("directory corpus needs a path")
        if self.num_classes < 2 or self.objects_per_class < 2:
            raise ValueError("need >= 2 classes and >= 2 objects per class")
        if self.points_per_cloud < 4:
            raise ValueError("points_per_cloud must be >= 4")


@dataclass(frozen=True)
class DescriptorSpec:
    bins: int = 64
    max_dist: float = 2.0
    tau: float = 0.05

    def __post_init__(self):
        if self.bins < 8:
            raise ValueError("descriptor bins must be >= 8")
        if self.max_dist <= 0 or self.tau <= 0:
            raise ValueError("max_dist and tau must be > 0")


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: CorpusSpec = CorpusSpec()
    e_max: int = 60
    regen_count: int | None = None         # None: match points_per_cloud
    external_manifest: str | None = None   # use stored regenerations instead of the surrogate
    attackers: tuple[str, ...] = ("J1", "J2", "J3", "J4")
    count_per_object: int = 100
    test_replicates: int = 2
    privilege_grid: tuple[float, ...] | None = DEFAULT_PRIVILEGE_GRID  # None: every even epoch
    rho1_grid: tuple[float, ...] | None = None  # None: top-1, 0.5, 1.0
    rho2_grid: tuple[float, ...] | None = None
    auc_attacker: str = "J1"
    j1_noise_sigma: float = 0.01
    seed: int = 7
    ransac: RansacParams = field(default_factory=RansacParams)
    descriptor: DescriptorSpec = DescriptorSpec()
    output_dir: str = "results"

    def __post_init__(self):
        if self.e_max < 2:
            raise ValueError("e_max must be >= 2")
        if self.count_per_object < 1 or self.test_replicates < 1:
            raise ValueError("count_per_object and test_replicates must be >= 1")
        if not self.attackers:
            raise ValueError("at least one attacker profile required")
        for a in self.attackers:
            if a not in ("J1", "J2", "J3", "J4"):
                raise ValueError(f"unknown attacker profile {a!r}")
        if self.privilege_grid is not None:
            if not self.privilege_grid:
                raise ValueError("privilege_grid must be non-empty or null")
            for l in self.privilege_grid:
                if not 0 < l <= 1:
                    raise ValueError(f"privilege level {l} outside (0, 1]")
        for grid in (self.rho1_grid, self.rho2_grid):
            if grid is not None:
                for r in grid:
                    if not 0 < r <= 1:
                        raise ValueError(f"rho value {r} outside (0, 1]")

    @property
    def effective_regen_count(self) -> int:
        return self.regen_count if self.regen_count is not None else self.corpus.points_per_cloud

    def resolved_rho1(self, n_super: int) -> tuple[float, ...]:
        return self.rho1_grid if self.rho1_grid is not None else (1.0 / n_super, 0.5, 1.0)

    def resolved_rho2(self, n_intra: int) -> tuple[float, ...]:
        return self.rho2_grid if self.rho2_grid is not None else (1.0 / n_intra, 0.5, 1.0)

    def to_dict(self) -> dict:
        return {
            "corpus": {
                "source": self.corpus.source,
                "path": self.corpus.path,
                "num_classes": self.corpus.num_classes,
                "objects_per_class": self.corpus.objects_per_class,
                "points_per_cloud": self.corpus.points_per_cloud,
                "families": list(self.corpus.families) if self.corpus.families else None,
            },
            "e_max": self.e_max,
            "regen_count": self.regen_count,
            "external_manifest": self.external_manifest,
            "attackers": list(self.attackers),
            "count_per_object": self.count_per_object,
            "test_replicates": self.test_replicates,
            "privilege_grid": list(self.privilege_grid) if self.privilege_grid is not None else None,
            "rho1_grid": list(self.rho1_grid) if self.rho1_grid is not None else None,
            "rho2_grid": list(self.rho2_grid) if self.rho2_grid is not None else None,
            "auc_attacker": self.auc_attacker,
            "j1_noise_sigma": self.j1_noise_sigma,
            "seed": self.seed,
            "ransac": self.ransac.to_dict(),
            "descriptor": {"bins": self.descriptor.bins, "max_dist": self.descriptor.max_dist,
                           "tau": self.descriptor.tau},
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        corpus = d.pop("corpus", {}) or {}
        families = corpus.get("families")
        spec = CorpusSpec(
            source=corpus.get("source", "synthetic"),
            path=corpus.get("path"),
            num_classes=corpus.get("num_classes", 4),
            objects_per_class=corpus.get("objects_per_class", 8),
            points_per_cloud=corpus.get("points_per_cloud", 512),
            families=tuple(families) if families else None,
        )
        ransac = RansacParams.from_dict(d.pop("ransac")) if "ransac" in d and d["ransac"] else RansacParams()
        desc_d = d.pop("descriptor", None) or {}
        desc = DescriptorSpec(**desc_d) if desc_d else DescriptorSpec()
        for key in ("attackers", "privilege_grid", "rho1_grid", "rho2_grid"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        known = {f for f in cls.__dataclass_fields__ if f not in ("corpus", "ransac", "descriptor")}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(corpus=spec, ransac=ransac, descriptor=desc, **d)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    def with_output_dir(self, output_dir: str | Path) -> "ExperimentConfig":
        return replace(self, output_dir=str(output_dir))
