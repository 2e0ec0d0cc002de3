from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz.dist import make_distribution, sample_exponential_scenario, sample_lognormal_scenario, uniform
from orlicz.errors import InvalidParams, LengthMismatch, NonPositiveArgs, ParamOutOfRange
from orlicz.murphy import (
    ElementaryScoreSpec,
    crossings,
    default_thresholds,
    elementary_score,
    expected_elementary,
    expectile_kernel,
    generic_kernel,
    mixture_reconstruction,
    murphy_curve,
    pnorm_kernel,
    population_murphy_exponential,
    population_murphy_lognormal,
    scenario_kernel,
)
from orlicz.orliczfn import CATALOG, catalog_lookup
from orlicz.premium import orlicz_premium
from orlicz.scoring import family, score

from conftest import CATALOG_PARAMS, random_dists

QLIKE_1_E = 0.7182818284590451


class TestElementaryScore:
    def test_outside_interval(self):
        k = pnorm_kernel(1.0)
        assert elementary_score(ElementaryScoreSpec(k, 0.5), 1.0, 2.0) == 0.0
        assert elementary_score(ElementaryScoreSpec(k, 2.0), 1.0, 2.0) == 0.0  # z = y: half-open
        assert elementary_score(ElementaryScoreSpec(k, 1.0), 1.0, 2.0) > 0.0  # z = x counts

    def test_pnorm(self):
        assert elementary_score(ElementaryScoreSpec(pnorm_kernel(1.0), 1.5), 1.0, 2.0) == pytest.approx(0.5)

    def test_expectile(self):
        es = ElementaryScoreSpec(expectile_kernel(0.9), 1.5)
        assert elementary_score(es, 2.0, 1.0) == pytest.approx(0.05, rel=1e-14)
        assert elementary_score(ElementaryScoreSpec(expectile_kernel(0.9), 1.5), 1.0, 2.0) == pytest.approx(0.45)

    def test_generic(self):
        es = ElementaryScoreSpec(generic_kernel(catalog_lookup("lce")), 1.5)
        assert elementary_score(es, 1.0, 3.0) == pytest.approx(math.log(2.0), rel=1e-14)

    def test_invalid_threshold(self):
        with pytest.raises(NonPositiveArgs):
            ElementaryScoreSpec(pnorm_kernel(1.0), 0.0)

    def test_invalid_kernels(self):
        with pytest.raises(ParamOutOfRange):
            expectile_kernel(1.0)
        with pytest.raises(ParamOutOfRange):
            pnorm_kernel(-1.0)

    @given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(0.01, 100),
           st.sampled_from(["generic", "pnorm", "expectile"]))
    @settings(max_examples=300)
    def test_nonnegative_and_zero_at_truth(self, x, y, z, kind):
        k = {"generic": generic_kernel(catalog_lookup("pnorm", p=2.0)), "pnorm": pnorm_kernel(2.0),
             "expectile": expectile_kernel(0.3)}[kind]
        es = ElementaryScoreSpec(k, z)
        assert elementary_score(es, x, y) >= 0.0
        assert elementary_score(es, x, x) == 0.0


class TestMurphyCurve:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.y = rng.lognormal(0, 0.5, 300)
        self.x = self.y * rng.lognormal(0, 0.3, 300)

    def test_identical_forecasters(self):
        c = murphy_curve(pnorm_kernel(1.0), {"a": self.x, "b": self.x.copy()}, self.y)
        assert np.array_equal(c.scores["a"], c.scores["b"])

    def test_perfect_is_zero(self):
        c = murphy_curve(expectile_kernel(0.7), {"p": self.y}, self.y)
        assert np.all(c.scores["p"] == 0.0)

    def test_shape_and_ordering(self):
        c = murphy_curve(pnorm_kernel(2.0), {"a": self.x}, self.y)
        assert c.thresholds.size == 101 and np.all(np.diff(c.thresholds) > 0)
        assert np.all(c.scores["a"] >= 0)
        assert c.n == 300 and c.forecasters == ["a"]
        assert len(list(c.rows())) == 101

    def test_default_grid(self):
        z = default_thresholds(self.y, {"a": self.x})
        pooled = np.concatenate([self.y, self.x])
        assert z[0] == pytest.approx(0.5 * np.quantile(pooled, 0.01))
        assert z[-1] == pytest.approx(2.0 * np.quantile(pooled, 0.99))

    def test_matches_direct_mean(self):
        z = np.geomspace(0.2, 5, 17)
        k = generic_kernel(catalog_lookup("lce"))
        c = murphy_curve(k, {"a": self.x}, self.y, z)
        direct = [np.mean([elementary_score(ElementaryScoreSpec(k, t), a, b) for a, b in zip(self.x, self.y)])
                  for t in z]
        assert np.allclose(c.scores["a"], direct, rtol=1e-13, atol=1e-15)

    @pytest.mark.parametrize("kernel", [pnorm_kernel(2.0), expectile_kernel(0.8),
                                        generic_kernel(catalog_lookup("lce"))], ids=lambda k: k.label)
    def test_dense_equals_intervals(self, kernel):
        z = np.geomspace(0.1, 10, 50)
        a = murphy_curve(kernel, {"a": self.x}, self.y, z, method="dense")
        b = murphy_curve(kernel, {"a": self.x}, self.y, z, method="intervals")
        assert np.allclose(a.scores["a"], b.scores["a"], rtol=1e-12, atol=1e-14)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            murphy_curve(pnorm_kernel(1.0), {"a": self.x[:5]}, self.y)

    def test_single_threshold(self):
        c = murphy_curve(pnorm_kernel(1.0), {"a": self.x, "b": self.y}, self.y, [1.0])
        assert len(list(c.rows())) == 2

    def test_mean_over_thresholds_recovers_score(self):
        # the mean elementary score integrated against dH gives the mean score
        fam = family("pnorm", p=1.0)
        k = pnorm_kernel(1.0)
        z = np.geomspace(min(self.x.min(), self.y.min()), max(self.x.max(), self.y.max()), 20001)
        c = murphy_curve(k, {"a": self.x}, self.y, z)
        g = c.scores["a"] * fam.h(z) / z  # z^-p reweighting with p = 1
        integral = np.sum(0.5 * (g[1:] + g[:-1]) * np.diff(z))
        target = np.mean([score(fam, a, b) for a, b in zip(self.x, self.y)])
        assert integral == pytest.approx(target, rel=2e-3)


class TestPopulationDominance:
    @pytest.mark.parametrize("name,kernel", [
        ("lce", generic_kernel(catalog_lookup("lce"))),
        ("pnorm2", pnorm_kernel(2.0)),
        ("expectile0.8", expectile_kernel(0.8)),
        ("pnorm-log", generic_kernel(catalog_lookup("pnorm-log", p=1.0))),
    ])
    def test_constant_bias(self, name, kernel):
        spec = {"lce": catalog_lookup("lce"), "pnorm2": catalog_lookup("pnorm", p=2.0),
                "expectile0.8": catalog_lookup("expectile", q=0.8),
                "pnorm-log": catalog_lookup("pnorm-log", p=1.0)}[name]
        for d in random_dists(41, 5):
            h = orlicz_premium(d, spec).value
            z = np.geomspace(0.5 * d.min, 2 * d.max, 200)
            perfect = expected_elementary(kernel, h, d, z)
            for c in (0.7, 1.3):
                biased = expected_elementary(kernel, c * h, d, z)
                assert np.all(biased >= perfect - 1e-12 * max(1.0, perfect.max()))
                assert np.any(biased > perfect + 1e-9)

    @pytest.mark.parametrize("p", [0.0, 1.0, 2.0, 3.0])
    def test_lognormal(self, p):
        z = np.geomspace(0.3, 3.5, 101)
        c = population_murphy_lognormal(p, z)
        for name, s in c.scores.items():
            assert np.all(c.scores["perfect"] <= s)
        # competitors cross somewhere, as the figure captions note
        assert crossings(c.scores["unconditional"], c.scores["unfocused"], 1e-12) >= 1
        assert crossings(c.scores["unfocused"], c.scores["sign-reversed"], 1e-12) >= 1

    @pytest.mark.parametrize("q", [0.5, 0.7, 0.9, 0.95])
    def test_exponential(self, q):
        z = np.geomspace(0.05, 10, 101)
        c = population_murphy_exponential(q, z)
        for s in c.scores.values():
            assert np.all(c.scores["perfect"] <= s)
        assert crossings(c.scores["unfocused"], c.scores["mean-reversed"], 1e-12) >= 1

    def test_monte_carlo_converges_to_population(self):
        s = sample_lognormal_scenario(8000, 11, p=2.0, n_obs=50)
        y, f = s.flat()
        mc = murphy_curve(scenario_kernel("lognormal", 2.0), f, y)
        pop = population_murphy_lognormal(2.0, mc.thresholds)
        for k in mc.scores:
            assert np.max(np.abs(mc.scores[k] - pop.scores[k])) <= 0.05 * pop.scores[k].max()

        s = sample_exponential_scenario(8000, 11, q=0.9, n_obs=50)
        y, f = s.flat()
        mc = murphy_curve(scenario_kernel("exponential", 0.9), f, y)
        pop = population_murphy_exponential(0.9, mc.thresholds)
        for k in mc.scores:
            assert np.max(np.abs(mc.scores[k] - pop.scores[k])) <= 0.05 * pop.scores[k].max()

    def test_crossings_helper(self):
        assert crossings(np.array([1, 2, 3.0]), np.array([2, 2, 2.0])) == 1
        assert crossings(np.array([1, 3, 1.0]), np.array([2, 2, 2.0])) == 2
        assert crossings(np.array([1, 1.0]), np.array([2, 2.0])) == 0


class TestMixture:
    def test_qlike(self):
        assert mixture_reconstruction(family("mean"), 1.0, math.e) == pytest.approx(QLIKE_1_E, abs=1e-10)

    def test_equal_args(self):
        assert mixture_reconstruction(family("lce"), 2.0, 2.0) == 0.0

    def test_pnorm_reweighting(self):
        fam = family("pnorm", p=2.0)
        for x, y in [(1.0, 2.0), (3.0, 0.4), (0.2, 7.0)]:
            a = mixture_reconstruction(fam, x, y, kind="pnorm")
            b = mixture_reconstruction(fam, x, y, kind="generic")
            assert a == pytest.approx(b, abs=1e-6)
            assert a == pytest.approx(score(fam, x, y), abs=1e-6)

    def test_expectile_kernel(self):
        fam = family("expectile", q=0.7)
        for x, y in [(1.0, 2.0), (3.0, 0.4)]:
            assert mixture_reconstruction(fam, x, y, kind="expectile") == pytest.approx(score(fam, x, y), abs=1e-8)

    @pytest.mark.parametrize("name", list(CATALOG))
    def test_all_families(self, name):
        fam = family(name, **{k: {**CATALOG_PARAMS, "alpha": 0.05}[k] for k in CATALOG[name]})
        rng = np.random.default_rng(7)
        for x, y in rng.uniform(0.1, 10, size=(10, 2)):
            closed = score(fam, x, y)
            assert abs(mixture_reconstruction(fam, x, y) - closed) <= 1e-6 * max(1.0, abs(closed))

    def test_kind_checks(self):
        with pytest.raises(InvalidParams):
            mixture_reconstruction(family("mean"), 1.0, 2.0, kind="pnorm")
        with pytest.raises(InvalidParams):
            mixture_reconstruction(family("mean"), 1.0, 2.0, kind="expectile")
        with pytest.raises(InvalidParams):
            mixture_reconstruction(family("mean"), 1.0, 2.0, kind="bogus")
        with pytest.raises(NonPositiveArgs):
            mixture_reconstruction(family("mean"), -1.0, 2.0)


def test_scenario_kernels():
    assert scenario_kernel("lognormal", 0).label == "lce"
    assert scenario_kernel("lognormal", 2).label == "pnorm(p=2)"
    assert scenario_kernel("exponential", 0.9).label == "expectile(q=0.9)"
    with pytest.raises(InvalidParams):
        scenario_kernel("gamma", 1.0)
