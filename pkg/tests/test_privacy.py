import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcpriv.attacker import (
    AttackerProfile,
    Hypothesis,
    ScoreDistribution,
    build_reference_set,
    fit_attacker,
    hypothesize_topn,
)
from pcpriv.corpus import generate_synthetic_corpus
from pcpriv.privacy import baseline_privacy, evaluate_privacy, likelihood, pi1, pi2
from pcpriv.regen import SurrogateRegenerator


def uniform_scores(labels):
    return ScoreDistribution({l: 1.0 / len(labels) for l in labels})


class TestLikelihood:
    def test_uniform_subset(self):
        s = uniform_scores([f"k{i}" for i in range(10)])
        assert likelihood(s, ["k0", "k1", "k2"]) == pytest.approx(0.3, abs=1e-12)

    def test_empty(self):
        s = uniform_scores(["a", "b"])
        assert likelihood(s, []) == 0.0

    def test_full(self):
        s = uniform_scores([f"k{i}" for i in range(7)])
        assert likelihood(s, s.labels()) == pytest.approx(1.0, abs=1e-9)


def hyp(labels, lh, rho=0.1):
    return Hypothesis(labels=tuple(labels), likelihood=lh, rho=rho)


class TestPi1:
    def test_member_low_likelihood(self):
        assert pi1("k1", hyp(["k1"], 0.1)) == pytest.approx(0.1, abs=1e-15)

    def test_nonmember_low_likelihood(self):
        assert pi1("k9", hyp(["k1"], 0.1)) == pytest.approx(0.9, abs=1e-15)

    def test_member_full_likelihood(self):
        assert pi1("k1", hyp(["k1", "k2"], 1.0)) == pytest.approx(1.0, abs=1e-15)


class TestPi2:
    def test_no_mass_on_true_super(self):
        sigma1 = ScoreDistribution({"k1": 0.0, "k2": 0.6, "k3": 0.4})
        sigma2 = uniform_scores(["m1", "m2"])
        h2 = hypothesize_topn(sigma2, 1)
        assert pi2("k1", "m1", sigma1, h2, sigma2) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_hand_computation(self):
        sigma1 = uniform_scores([f"k{i}" for i in range(10)])
        sigma2 = uniform_scores([f"m{i:02d}" for i in range(100)])
        h2 = hyp(["m00"], likelihood(sigma2, ["m00"]))
        assert pi2("k0", "m00", sigma1, h2, sigma2) == pytest.approx(0.901, abs=1e-12)

    def test_certain_and_correct(self):
        sigma1 = ScoreDistribution({"k1": 1.0, "k2": 0.0})
        sigma2 = ScoreDistribution({"m1": 1.0, "m2": 0.0})
        h2 = hyp(["m1"], 1.0)
        assert pi2("k1", "m1", sigma1, h2, sigma2) == pytest.approx(1.0, abs=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_range(self, seed):
        rng = np.random.default_rng(seed)
        s1 = rng.dirichlet(np.ones(5))
        s2 = rng.dirichlet(np.ones(8))
        sigma1 = ScoreDistribution({f"k{i}": float(v) for i, v in enumerate(s1)})
        sigma2 = ScoreDistribution({f"m{i}": float(v) for i, v in enumerate(s2)})
        n2 = int(rng.integers(1, 9))
        h2 = hypothesize_topn(sigma2, n2)
        v = pi2("k0", "m0", sigma1, h2, sigma2)
        assert -1e-9 <= v <= 1.0 + 1e-9
        v1 = pi1("k0", hypothesize_topn(sigma1, int(rng.integers(1, 6))))
        assert -1e-9 <= v1 <= 1.0 + 1e-9


class TestEvaluatePrivacy:
    def test_record_fields(self):
        sigma1 = ScoreDistribution({"k1": 0.7, "k2": 0.3})
        sigma2 = ScoreDistribution({"m1": 0.6, "m2": 0.4})
        r = evaluate_privacy("q", "k1", "m1", sigma1, sigma2,
                             rho1=0.5, rho2=0.5, level=0.4, epoch=24)
        assert r.top1_super_hit and r.top1_intra_hit
        assert r.pi1 == pytest.approx(0.7)
        # basket of 1 over 2 labels at rho=0.5
        assert r.rho1 == 0.5


@pytest.fixture(scope="module")
def trained_j1():
    corpus = generate_synthetic_corpus(2, 3, 128, seed=11)
    regen = SurrogateRegenerator(e_max=60, count=128)
    ref = build_reference_set(AttackerProfile("J1"), corpus.rows(), regen,
                              count_per_object=15, seed=5, e_max=60)
    return corpus, fit_attacker(ref, corpus.label_space())


class TestBaseline:
    def test_separable_accuracy(self, trained_j1):
        corpus, model = trained_j1
        b = baseline_privacy(model, corpus.rows(), rho1=0.5, rho2=1.0 / 3)
        assert b.top1_super_accuracy == 1.0
        assert b.count == len(corpus)

    def test_single_object_equals_record(self, trained_j1):
        corpus, model = trained_j1
        row = corpus.rows()[0]
        b = baseline_privacy(model, [row], rho1=0.5, rho2=1.0 / 3)
        s1 = model.sigma1(row[2])
        s2 = model.sigma2(row[2], row[0])
        r = evaluate_privacy("x", row[0], row[1], s1, s2, 0.5, 1.0 / 3, 1.0, 0)
        assert b.pi1_mean == pytest.approx(r.pi1, abs=1e-15)
        assert b.pi2_mean == pytest.approx(r.pi2, abs=1e-15)

    def test_full_basket_pi1_is_one(self, trained_j1):
        corpus, model = trained_j1
        b = baseline_privacy(model, corpus.rows(), rho1=1.0, rho2=1.0 / 3)
        assert b.pi1_mean == pytest.approx(1.0, abs=1e-9)

    def test_empty_corpus_rejected(self, trained_j1):
        _, model = trained_j1
        with pytest.raises(ValueError):
            baseline_privacy(model, [], 0.5, 0.5)
