"""Super-class and intra-class privacy metrics over attacker score distributions.

Both metrics are expected-hypothesis-error expressions computed verbatim from
their defining formulas. Note the resulting sign convention: a confident,
correct attacker with a full basket drives the metrics toward 1. Trend checks
elsewhere are therefore phrased on accuracy and likelihood, which carry no
convention. See README for discussion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .attacker import AttackerModel, Hypothesis, ScoreDistribution, basket_size, hypothesize_topn
from .geometry import PointCloud


def likelihood(scores: ScoreDistribution | Mapping[str, float], subset: Iterable[str]) -> float:
    """Total score mass the attacker places on a label subset.

    Accumulated over ascending label id so independent transcriptions agree
    bit-for-bit.
    """
    table = scores.scores if isinstance(scores, ScoreDistribution) else scores
    total = 0.0
    for label in sorted(set(subset)):
        total += table[label]
    return total


def pi1(true_super: str, hypothesis: Hypothesis) -> float:
    """Super-class privacy: delta * L + (1 - delta) * (1 - L)."""
    delta = 1.0 if true_super in hypothesis.labels else 0.0
    lh = hypothesis.likelihood
    return delta * lh + (1.0 - delta) * (1.0 - lh)


def pi2(
    true_super: str,
    true_intra: str,
    sigma1: ScoreDistribution,
    intra_hypothesis: Hypothesis,
    sigma2_true_super: ScoreDistribution,
) -> float:
    """Intra-class privacy; the intra hypothesis is conditioned on the true super-class.

    Sum of the super-class mass placed elsewhere, plus the mass on the true
    super-class weighted by the intra-level expected-error term.
    """
    off_mass = 0.0
    for k in sorted(sigma1.scores):
        if k != true_super:
            off_mass += sigma1.scores[k]
    lh2 = likelihood(sigma2_true_super, intra_hypothesis.labels)
    delta = 1.0 if true_intra in intra_hypothesis.labels else 0.0
    inner = delta * lh2 + (1.0 - delta) * (1.0 - lh2)
    return off_mass + sigma1.scores[true_super] * inner


@dataclass(frozen=True)
class PrivacyRecord:
    """One evaluated query at one basket-size setting."""

    query_id: str
    super_class: str
    intra_class: str
    level: float
    epoch: int
    rho1: float
    rho2: float
    pi1: float
    pi2: float
    top1_super_hit: bool
    top1_intra_hit: bool


def evaluate_privacy(
    query_id: str,
    true_super: str,
    true_intra: str,
    sigma1: ScoreDistribution,
    sigma2_true: ScoreDistribution,
    rho1: float,
    rho2: float,
    level: float,
    epoch: int,
) -> PrivacyRecord:
    """Form both hypotheses at the given basket ratios and score the record."""
    n1 = basket_size(rho1, len(sigma1))
    n2 = basket_size(rho2, len(sigma2_true))
    h1 = hypothesize_topn(sigma1, n1)
    h2 = hypothesize_topn(sigma2_true, n2)
    return PrivacyRecord(
        query_id=query_id,
        super_class=true_super,
        intra_class=true_intra,
        level=level,
        epoch=epoch,
        rho1=rho1,
        rho2=rho2,
        pi1=pi1(true_super, h1),
        pi2=pi2(true_super, true_intra, sigma1, h2, sigma2_true),
        top1_super_hit=sigma1.top1() == true_super,
        top1_intra_hit=sigma2_true.top1() == true_intra,
    )


@dataclass(frozen=True)
class BaselineResult:
    """Mean privacy of original (non-regenerated) releases against an attacker."""

    rho1: float
    rho2: float
    pi1_mean: float
    pi2_mean: float
    top1_super_accuracy: float
    top1_intra_accuracy: float
    count: int


def baseline_privacy(
    attacker: AttackerModel,
    originals: Sequence[tuple[str, str, PointCloud]],
    rho1: float,
    rho2: float,
) -> BaselineResult:
    """Attack the original clouds directly, as a user releasing raw data would suffer.

    ``originals`` rows are (super_class, intra_class, cloud).
    """
    if not originals:
        raise ValueError("baseline needs at least one original cloud")
    records = []
    for super_class, intra_class, cloud in originals:
        s1 = attacker.sigma1(cloud)
        s2 = attacker.sigma2(cloud, super_class)
        records.append(evaluate_privacy(
            query_id=intra_class, true_super=super_class, true_intra=intra_class,
            sigma1=s1, sigma2_true=s2, rho1=rho1, rho2=rho2, level=1.0, epoch=0,
        ))
    n = len(records)
    return BaselineResult(
        rho1=rho1,
        rho2=rho2,
        pi1_mean=sum(r.pi1 for r in records) / n,
        pi2_mean=sum(r.pi2 for r in records) / n,
        top1_super_accuracy=sum(r.top1_super_hit for r in records) / n,
        top1_intra_accuracy=sum(r.top1_intra_hit for r in records) / n,
        count=n,
    )
