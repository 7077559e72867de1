"""Reidentification attacker: shape descriptors, score functions, hypotheses.

An attacker learns a reference set (public originals for J1, intercepted
regenerations for J2-J4), trains one super-class scorer plus one intra-class
scorer per super-class, and for a query cloud forms a basket of candidate
labels maximizing total score mass. Scorers here are trainingless
nearest-centroid models over pairwise-distance histograms; anything emitting
a unit-sum score distribution (e.g. an imported softmax table) plugs in
behind the same interface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .errors import WorkbenchError
from .geometry import PointCloud, normalize, rotation_about_z
from .regen import RegenSpec, mix_seed

D2_BINS = 64
D2_MAX_DIST = 2.0
SOFTMAX_TAU = 0.05
J1_NOISE_SIGMA = 0.01

# Epoch bands as fractions of e_max; at e_max=300 these are (0,50], [50,70], [70,300].
_BAND_FRACTIONS = {"J2": (0.0, 50.0 / 300.0), "J3": (50.0 / 300.0, 70.0 / 300.0), "J4": (70.0 / 300.0, 1.0)}

PROFILE_KINDS = ("J1", "J2", "J3", "J4")


class EmptyClass(WorkbenchError):
    """A label in the expected label set has no reference examples."""


@dataclass(frozen=True)
class LabelSpace:
    """Known super-classes and, per super-class, the intra-class object ids."""

    super_classes: tuple[str, ...]
    intra_classes: dict[str, tuple[str, ...]]

    def __post_init__(self):
        supers = tuple(self.super_classes)
        if len(supers) < 2:
            raise ValueError("need at least 2 super-classes")
        if len(set(supers)) != len(supers):
            raise ValueError("super-class ids must be unique")
        intra = {k: tuple(v) for k, v in self.intra_classes.items()}
        if set(intra) != set(supers):
            raise ValueError("intra_classes keys must match super_classes")
        all_members = [m for v in intra.values() for m in v]
        if len(set(all_members)) != len(all_members):
            raise ValueError("intra-class ids must be globally unique")
        for k, members in intra.items():
            if len(members) < 2:
                raise ValueError(f"super-class '{k}' needs at least 2 members")
        object.__setattr__(self, "super_classes", supers)
        object.__setattr__(self, "intra_classes", intra)


@dataclass(frozen=True)
class ScoreDistribution:
    """Per-label probability mass; components in [0, 1] summing to 1 (+-1e-9)."""

    scores: dict[str, float]

    def __post_init__(self):
        scores = dict(self.scores)
        vals = np.array(list(scores.values()), dtype=np.float64)
        if vals.size == 0:
            raise ValueError("score distribution is empty")
        if np.any(vals < -1e-12) or np.any(vals > 1.0 + 1e-9):
            raise ValueError("scores must lie in [0, 1]")
        if abs(float(vals.sum()) - 1.0) > 1e-9:
            raise ValueError(f"scores must sum to 1, got {float(vals.sum())!r}")
        object.__setattr__(self, "scores", scores)

    def __getitem__(self, label: str) -> float:
        return self.scores[label]

    def __len__(self) -> int:
        return len(self.scores)

    def labels(self) -> list[str]:
        return sorted(self.scores)

    def top1(self) -> str:
        return min(self.scores, key=lambda k: (-self.scores[k], k))


@dataclass(frozen=True)
class Hypothesis:
    """A basket of candidate labels with its total score mass and size ratio."""

    labels: tuple[str, ...]
    likelihood: float
    rho: float


@dataclass(frozen=True)
class AttackerProfile:
    """One of the four attacker kinds; J2-J4 carry an epoch interception band."""

    kind: str

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown attacker kind {self.kind!r}")

    @property
    def uses_regenerations(self) -> bool:
        return self.kind != "J1"

    def epoch_band(self, e_max: int) -> tuple[int, int] | None:
        """Inclusive integer epoch range this attacker intercepts, or None for J1."""
        if self.kind == "J1":
            return None
        lo_f, hi_f = _BAND_FRACTIONS[self.kind]
        lo = max(1, round(lo_f * e_max)) if lo_f > 0 else 1
        hi = max(lo, round(hi_f * e_max))
        return lo, hi


def band_of_epoch(epoch: int, e_max: int) -> str:
    """Which interception band (J2/J3/J4) a test epoch falls into; edges go low."""
    for kind in ("J2", "J3", "J4"):
        lo, hi = AttackerProfile(kind).epoch_band(e_max)
        if lo <= epoch <= hi:
            return kind
    raise ValueError(f"epoch {epoch} outside (0, {e_max}]")


def d2_descriptor(cloud: PointCloud, bins: int = D2_BINS, max_dist: float = D2_MAX_DIST) -> np.ndarray:
    """Histogram of all pairwise point distances, normalized to sum 1.

    Rotation- and permutation-invariant by construction. Zero-length pairs
    (coincident points, common after resampling) carry no shape information
    and are skipped.
    """
    if bins < 8:
        raise ValueError("bins must be >= 8")
    d = pdist(cloud.points)
    d = d[d > 0.0]
    if d.size == 0:
        raise ValueError("cloud has no two distinct points; descriptor undefined")
    idx = np.minimum((d * (bins / max_dist)).astype(np.intp), bins - 1)
    hist = np.bincount(idx, minlength=bins).astype(np.float64)
    return hist / hist.sum()


class CentroidClassifier:
    """Nearest-centroid scorer: softmax over negative scaled descriptor distances."""

    def __init__(self, labels: Sequence[str], centroids: np.ndarray, tau: float = SOFTMAX_TAU,
                 bins: int = D2_BINS, max_dist: float = D2_MAX_DIST):
        self.labels = tuple(labels)
        self.centroids = np.asarray(centroids, dtype=np.float64)
        if self.centroids.shape[0] != len(self.labels):
            raise ValueError("one centroid per label required")
        self.tau = tau
        self.bins = bins
        self.max_dist = max_dist

    def score_descriptor(self, descriptor: np.ndarray) -> ScoreDistribution:
        dist = np.linalg.norm(self.centroids - descriptor[None, :], axis=1)
        z = -dist / self.tau
        z -= z.max()
        e = np.exp(z)
        p = e / e.sum()
        return ScoreDistribution(dict(zip(self.labels, p.tolist())))

    def score(self, cloud: PointCloud) -> ScoreDistribution:
        return self.score_descriptor(d2_descriptor(cloud, self.bins, self.max_dist))

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "centroids": [c.tolist() for c in self.centroids],
            "tau": self.tau,
            "bins": self.bins,
            "max_dist": self.max_dist,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CentroidClassifier":
        return cls(d["labels"], np.array(d["centroids"]), d["tau"], d["bins"], d["max_dist"])


def fit_classifier(
    reference: Iterable[tuple[np.ndarray, str]],
    expected_labels: Sequence[str] | None = None,
    tau: float = SOFTMAX_TAU,
    bins: int = D2_BINS,
    max_dist: float = D2_MAX_DIST,
) -> CentroidClassifier:
    """Average the reference descriptors per label into centroids.

    Raises :class:`EmptyClass` if any expected label has no examples; at least
    two labels are required.
    """
    by_label: dict[str, list[np.ndarray]] = {}
    for desc, label in reference:
        by_label.setdefault(label, []).append(np.asarray(desc, dtype=np.float64))
    labels = sorted(expected_labels) if expected_labels is not None else sorted(by_label)
    if len(labels) < 2:
        raise ValueError("need at least 2 labels to fit a classifier")
    missing = [l for l in labels if not by_label.get(l)]
    if missing:
        raise EmptyClass(f"labels with no reference examples: {missing}")
    centroids = np.stack([np.mean(by_label[l], axis=0) for l in labels])
    return CentroidClassifier(labels, centroids, tau=tau, bins=bins, max_dist=max_dist)


def score_superclass(classifier: CentroidClassifier, cloud: PointCloud) -> ScoreDistribution:
    """Super-class score distribution for a query cloud."""
    return classifier.score(cloud)


def score_intraclass(classifier_for_super: CentroidClassifier, cloud: PointCloud) -> ScoreDistribution:
    """Intra-class score distribution under a given super-class."""
    return classifier_for_super.score(cloud)


def hypothesize_topn(scores: ScoreDistribution | Mapping[str, float], n: int) -> Hypothesis:
    """The size-n basket maximizing total score: top-n labels, ties to the lower id.

    Equivalent to exhaustive search over all size-n subsets. The basket is
    ordered by rank; its likelihood is accumulated over ascending label id so
    independent transcriptions reproduce it bit-for-bit.
    """
    table = scores.scores if isinstance(scores, ScoreDistribution) else dict(scores)
    if not 1 <= n <= len(table):
        raise ValueError(f"basket size {n} outside [1, {len(table)}]")
    ranked = sorted(table, key=lambda k: (-table[k], k))
    basket = tuple(ranked[:n])
    likelihood = 0.0
    for label in sorted(basket):
        likelihood += table[label]
    return Hypothesis(labels=basket, likelihood=likelihood, rho=n / len(table))


def basket_size(rho: float, n_labels: int) -> int:
    """ceil(rho * |labels|), clamped to [1, |labels|]."""
    if not 0 < rho <= 1:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    return min(max(math.ceil(rho * n_labels), 1), n_labels)


# ---------------------------------------------------------------------------
# Reference sets


@dataclass
class ReferenceSample:
    descriptor: np.ndarray
    super_class: str
    intra_class: str
    source: str            # "augmented" | "regenerated"
    epoch: int | None
    seed: int | None


@dataclass
class ReferenceSet:
    profile: AttackerProfile
    samples: list[ReferenceSample] = field(default_factory=list)

    def seeds(self) -> set[int]:
        return {s.seed for s in self.samples if s.seed is not None}

    def manifest_rows(self) -> list[dict]:
        return [
            {
                "super_class": s.super_class,
                "intra_class": s.intra_class,
                "source": s.source,
                **({"epoch": s.epoch} if s.epoch is not None else {}),
                **({"seed": s.seed} if s.seed is not None else {}),
            }
            for s in self.samples
        ]


def build_reference_set(
    profile: AttackerProfile,
    corpus: Sequence[tuple[str, str, PointCloud]],
    regenerator,
    count_per_object: int,
    seed: int,
    e_max: int,
    noise_sigma: float = J1_NOISE_SIGMA,
    bins: int = D2_BINS,
    max_dist: float = D2_MAX_DIST,
) -> ReferenceSet:
    """Build the attacker's labeled reference set.

    J1 gets ``count_per_object`` yaw-rotated, noised, renormalized augmentations
    of each original; J2-J4 get regenerations at epochs drawn uniformly with
    replacement from the profile's interception band. ``corpus`` rows are
    (super_class, intra_class, normalized cloud).
    """
    ref = ReferenceSet(profile=profile)
    band = profile.epoch_band(e_max)
    for super_class, intra_class, cloud in corpus:
        rng = np.random.Generator(np.random.PCG64(mix_seed(seed, "reference", profile.kind, intra_class)))
        if band is None:
            for _ in range(count_per_object):
                yaw = rng.uniform(0.0, 2.0 * math.pi)
                pts = cloud.points @ rotation_about_z(yaw).T
                pts = pts + rng.normal(0.0, noise_sigma, size=pts.shape)
                aug = normalize(PointCloud(pts))
                ref.samples.append(ReferenceSample(
                    descriptor=d2_descriptor(aug, bins, max_dist),
                    super_class=super_class, intra_class=intra_class,
                    source="augmented", epoch=None, seed=None,
                ))
        else:
            lo, hi = band
            epochs = rng.integers(lo, hi + 1, size=count_per_object)
            for j, epoch in enumerate(epochs):
                sample_seed = mix_seed(seed, "reference", profile.kind, intra_class, int(epoch), j)
                spec = RegenSpec.for_level(int(epoch) / e_max, seed=sample_seed, e_max=e_max)
                regen = regenerator.regenerate(intra_class, cloud, spec)
                ref.samples.append(ReferenceSample(
                    descriptor=d2_descriptor(regen, bins, max_dist),
                    super_class=super_class, intra_class=intra_class,
                    source="regenerated", epoch=int(epoch), seed=sample_seed,
                ))
    return ref


@dataclass
class AttackerModel:
    """A trained attacker: one super-class scorer plus one intra-class scorer per super-class."""

    profile: AttackerProfile
    super_classifier: CentroidClassifier
    intra_classifiers: dict[str, CentroidClassifier]

    def sigma1(self, cloud: PointCloud) -> ScoreDistribution:
        return score_superclass(self.super_classifier, cloud)

    def sigma2(self, cloud: PointCloud, super_class: str) -> ScoreDistribution:
        return score_intraclass(self.intra_classifiers[super_class], cloud)

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        payload = {
            "profile": self.profile.kind,
            "super": self.super_classifier.to_dict(),
            "intra": {k: c.to_dict() for k, c in sorted(self.intra_classifiers.items())},
        }
        (directory / "classifiers.json").write_text(json.dumps(payload))

    @classmethod
    def load(cls, directory: str | Path) -> "AttackerModel":
        payload = json.loads((Path(directory) / "classifiers.json").read_text())
        return cls(
            profile=AttackerProfile(payload["profile"]),
            super_classifier=CentroidClassifier.from_dict(payload["super"]),
            intra_classifiers={k: CentroidClassifier.from_dict(v) for k, v in payload["intra"].items()},
        )


def fit_attacker(reference: ReferenceSet, label_space: LabelSpace,
                 tau: float = SOFTMAX_TAU) -> AttackerModel:
    """Fit the 1 + |K| centroid classifiers from one reference set."""
    first = reference.samples[0]
    bins, max_dist = first.descriptor.shape[0], D2_MAX_DIST
    super_ref = [(s.descriptor, s.super_class) for s in reference.samples]
    super_clf = fit_classifier(super_ref, label_space.super_classes, tau=tau, bins=bins, max_dist=max_dist)
    intra_clfs = {}
    for k in label_space.super_classes:
        rows = [(s.descriptor, s.intra_class) for s in reference.samples if s.super_class == k]
        intra_clfs[k] = fit_classifier(rows, label_space.intra_classes[k], tau=tau, bins=bins, max_dist=max_dist)
    return AttackerModel(profile=reference.profile, super_classifier=super_clf, intra_classifiers=intra_clfs)


def load_score_table(path: str | Path) -> dict[str, ScoreDistribution]:
    """Import externally produced score tables: JSON {query_id: {label: score}}."""
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected an object mapping query_id to scores")
    return {qid: ScoreDistribution(scores) for qid, scores in raw.items()}


def save_score_table(path: str | Path, table: Mapping[str, ScoreDistribution]) -> None:
    payload = {qid: {k: v for k, v in sorted(dist.scores.items())} for qid, dist in sorted(table.items())}
    Path(path).write_text(json.dumps(payload))
