"""Acceptance criteria 1-9. Each test records a PASS/FAIL line, printed in
the pytest terminal summary, before asserting."""

from __future__ import annotations

import math
import time

import numpy as np
from scipy import optimize

from orlicz.dist import (
    discretize_gamma,
    exponential_expectile_factor,
    make_distribution,
    point_mass,
    sample_exponential_scenario,
    sample_lognormal_scenario,
    uniform,
)
from orlicz.murphy import (
    default_thresholds,
    mixture_reconstruction,
    murphy_curve,
    population_murphy_exponential,
    population_murphy_lognormal,
    scenario_kernel,
)
from orlicz.orliczfn import CATALOG, catalog_lookup, check_shape, expectile_root, lambert_w
from orlicz.orrisk import avar_inner, expectation_inner, or_property_check, or_risk, orlicz_inner
from orlicz.premium import orlicz_premium
from orlicz.scoring import family, score, verify_consistency

from conftest import CATALOG_PARAMS, random_dists

SEED = 20240601
# ||X||_2 + 1 - ||X + 1||_2 on uniform{1,2}, from the brute-force oracle
PNORM2_SHIFT_GAP = 0.03162907328779774


def test_criterion_1_closed_form_vs_bisection(acceptance):
    specs = [catalog_lookup("mean"), catalog_lookup("lce"),
             *[catalog_lookup("quantile", alpha=a) for a in (0.1, 0.5, 0.9)],
             *[catalog_lookup("expectile", q=q) for q in (0.1, 0.5, 0.7, 0.9)],
             *[catalog_lookup("pnorm", p=p) for p in (0.5, 1.0, 2.0, 3.0)],
             *[catalog_lookup("mean-variance", lambda_mix=lam, p=p) for lam in (0.0, 0.4, 1.0) for p in (1.0, 2.0)]]
    assert all(s.closed_form_premium is not None for s in specs)
    t0 = time.perf_counter()
    worst = 0.0
    for d in random_dists(SEED, 50):
        for spec in specs:
            a = orlicz_premium(d, spec, "closed_form").value
            b = orlicz_premium(d, spec, "bisection").value
            worst = max(worst, abs(a - b) / a)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5
    acceptance(1, ok, f"max rel diff {worst:.2e} over 50 dists x {len(specs)} specs in {elapsed:.2f}s")
    assert ok


def test_criterion_2_consistency(acceptance):
    fams = [family(name, **{k: CATALOG_PARAMS[k] for k in keys}) for name, keys in CATALOG.items()]
    fams += [family("expectile", q=0.2), family("pnorm", p=0.5), family("quantile", alpha=0.8)]
    t0 = time.perf_counter()
    worst = 0.0
    for d in random_dists(SEED + 1, 20):
        for fam in fams:
            r = verify_consistency(fam, d, grid=400)  # raises on failure
            worst = max(worst, r.offset / r.step)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1.0 and elapsed < 30
    acceptance(2, ok, f"{len(fams)} families x 20 dists, worst offset {worst:.2f} grid steps, {elapsed:.2f}s")
    assert ok


def test_criterion_3_mixture(acceptance):
    cases = [(family("mean"), "generic"), (family("lce"), "generic"),
             (family("pnorm", p=2.0), "generic"), (family("pnorm", p=2.0), "pnorm"),
             (family("expectile", q=0.7), "generic"), (family("expectile", q=0.7), "expectile")]
    rng = np.random.default_rng(SEED + 2)
    pairs = rng.uniform(0.1, 10, size=(50, 2))
    t0 = time.perf_counter()
    worst = 0.0
    for fam, kind in cases:
        for x, y in pairs:
            worst = max(worst, abs(mixture_reconstruction(fam, x, y, kind=kind) - score(fam, x, y)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 10
    acceptance(3, ok, f"max abs diff {worst:.2e} on 50 pairs x {len(cases)} cases, {elapsed:.2f}s")
    assert ok


def _dominance(curve):
    perfect = curve.scores["perfect"]
    return {k: float(np.mean(perfect <= s)) for k, s in curve.scores.items() if k != "perfect"}


def test_criterion_4_murphy(acceptance):
    t0 = time.perf_counter()
    worst_mc, pop_ok, lines = 1.0, True, []
    cases = [("lognormal", p) for p in (0.0, 1.0, 2.0, 3.0)] + [("exponential", q) for q in (0.5, 0.7, 0.9, 0.95)]
    for scenario, param in cases:
        if scenario == "lognormal":
            s = sample_lognormal_scenario(500, SEED, p=param, n_obs=500)
        else:
            s = sample_exponential_scenario(500, SEED, q=param, n_obs=500)
        y, fc = s.flat()
        curve = murphy_curve(scenario_kernel(scenario, param), fc, y)
        frac = min(_dominance(curve).values())
        worst_mc = min(worst_mc, frac)

        z = default_thresholds(y, fc)
        if scenario == "lognormal":
            pop = population_murphy_lognormal(param, z, n_nodes=10_000)
        else:
            pop = population_murphy_exponential(param, z, n_nodes=10_000)
        exact = min(_dominance(pop).values()) == 1.0
        pop_ok &= exact
        lines.append(f"{scenario}({param:g}) mc={frac:.2f} pop={'exact' if exact else 'VIOLATED'}")
    elapsed = time.perf_counter() - t0
    ok = worst_mc >= 0.95 and pop_ok and elapsed < 120
    acceptance(4, ok, f"min MC dominance {worst_mc:.2f}, population exact={pop_ok}, {elapsed:.1f}s; "
               + "; ".join(lines))
    assert ok


def _brentq_expectile(d, q):
    f = lambda e: q * np.dot(d.weights, np.maximum(d.support - e, 0)) - (1 - q) * np.dot(  # noqa: E731
        d.weights, np.maximum(e - d.support, 0))
    if d.is_degenerate:
        return d.min
    return optimize.brentq(f, d.min, d.max, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def test_criterion_5_expectile_identity(acceptance):
    worst = 0.0
    for d in random_dists(SEED + 5, 50):
        for q in (0.1, 0.5, 0.9):
            spec = catalog_lookup("expectile", q=q)
            direct = _brentq_expectile(d, q)
            for method in ("bisection", "closed_form"):
                worst = max(worst, abs(orlicz_premium(d, spec, method).value - direct))
            worst = max(worst, abs(expectile_root(d.support, d.weights, q) - direct))
    ok = worst <= 1e-9
    acceptance(5, ok, f"max abs diff vs direct root {worst:.2e} (50 dists, q in 0.1/0.5/0.9)")
    assert ok


def test_criterion_6_translation(acceptance):
    worst = 0.0
    for d in random_dists(SEED + 6, 30):
        for q in (0.1, 0.5, 0.7, 0.9):
            spec = catalog_lookup("expectile", q=q)
            base = orlicz_premium(d, spec).value
            for c in (0.1, 1.0, 5.0):
                worst = max(worst, abs(orlicz_premium(d.shifted(c), spec).value - (base + c)))
    u12 = uniform([1, 2])
    pn = catalog_lookup("pnorm", p=2.0)
    gap = abs(orlicz_premium(u12.shifted(1.0), pn).value - orlicz_premium(u12, pn).value - 1.0)
    ok = worst <= 1e-9 and gap > 1e-3 and abs(gap - PNORM2_SHIFT_GAP) <= 1e-12
    acceptance(6, ok, f"expectile shift error {worst:.2e}; pnorm(2) violation on uniform{{1,2}}, c=1: {gap:.6f}")
    assert ok


def _tail_average(d, level):
    # independent oracle: sort descending, average the top (1 - level) mass
    order = np.argsort(d.support)[::-1]
    v, w = d.support[order], d.weights[order]
    remaining, total = 1.0 - level, 0.0
    for vi, wi in zip(v, w):
        take = min(wi, remaining)
        total += take * vi
        remaining -= take
        if remaining <= 0:
            break
    return total / (1.0 - level)


def test_criterion_7_or_avar(acceptance):
    worst = 0.0
    for d in random_dists(SEED + 7, 50):
        for level in (0.5, 0.9, 0.95):
            worst = max(worst, abs(or_risk(d, avar_inner(level)).value - _tail_average(d, level)))
    grid = uniform(np.arange(1, 101) / 10)
    ex = or_risk(grid, avar_inner(0.9)).value
    ok = worst <= 1e-9 and abs(ex - 9.55) <= 1e-9
    acceptance(7, ok, f"max abs diff vs tail-average oracle {worst:.2e}; AV@R_0.9 on grid = {ex:.12g}")
    assert ok


def test_criterion_8_property_suites(acceptance):
    specs = [catalog_lookup(name, {k: CATALOG_PARAMS[k] for k in keys}) for name, keys in CATALOG.items()]
    dists = random_dists(SEED + 8, 10)
    failures = []
    for spec in specs:
        for d in dists:
            base = orlicz_premium(d, spec).value
            for lam in (0.1, 1.0, 7.3):
                if abs(orlicz_premium(d.scaled(lam), spec).value - lam * base) > 1e-9 * lam * base:
                    failures.append(f"homogeneity {spec.label}")
            for c in (0.01, 1.0):
                if orlicz_premium(d.shifted(c), spec).value < base * (1 - 1e-12):
                    failures.append(f"monotonicity {spec.label}")
        if spec.normalized and abs(orlicz_premium(point_mass(1.0), spec).value - 1.0) > 1e-12:
            failures.append(f"normalization {spec.label}")
        if not check_shape(spec).consistent:
            failures.append(f"shape flags {spec.label}")

    lce = check_shape(catalog_lookup("lce")).observed
    if not (lce["ga_convex"] and not lce["convex"]):
        failures.append("lce GA/convex diagnostics")
    if check_shape(catalog_lookup("expectile", q=0.3)).observed["convex"]:
        failures.append("expectile q<1/2 convexity diagnostic")

    rng = np.random.default_rng(SEED + 8)
    for spec in (s for s in specs if s.is_ga_convex):
        for _ in range(10):
            n = int(rng.integers(2, 20))
            w = rng.dirichlet(np.ones(n))
            x, y = rng.uniform(0.1, 10, n), rng.uniform(0.1, 10, n)
            hx = orlicz_premium(make_distribution(x, w), spec).value
            hy = orlicz_premium(make_distribution(y, w), spec).value
            hg = orlicz_premium(make_distribution(np.sqrt(x * y), w), spec).value
            if hg > math.sqrt(hx * hy) + 1e-9:
                failures.append(f"geometric convexity {spec.label}")

    pairs = list(zip(dists[:4], dists[4:8]))
    for inner in (avar_inner(0.9), expectation_inner(), orlicz_inner(catalog_lookup("pnorm", p=2.0))):
        rep = or_property_check(pairs, inner)
        if not rep.passed:
            failures.append(f"OR properties {inner.name}: {rep.witnesses}")

    ok = not failures
    acceptance(8, ok, "homogeneity, shift monotonicity, normalization, GA/convexity diagnostics, OR properties"
               + ("" if ok else f"; failures: {sorted(set(failures))}"))
    assert ok, failures


def test_criterion_9_lambert_w(acceptance):
    neg = -1 / math.e + np.geomspace(1e-6, 1 / math.e, 300)[:-1]
    pos = np.geomspace(1e-12, 1e6, 600)
    args = np.concatenate([neg, [0.0], pos])
    worst_res = max(lambert_w(float(a)).residual / max(1.0, abs(a)) for a in args)

    worst_fc = 0.0
    lams = sample_exponential_scenario(3, SEED, n_obs=1).latent["lambda"]
    for q in (0.5, 0.7, 0.9, 0.95):
        c = exponential_expectile_factor(q)
        spec = catalog_lookup("expectile", q=q)
        for lam in [1.0, *lams]:
            d = discretize_gamma(1.0, lam, n=100_000)
            worst_fc = max(worst_fc, abs(c / lam - orlicz_premium(d, spec).value))
    ok = worst_res <= 1e-12 and worst_fc <= 1e-3
    acceptance(9, ok, f"max relative W residual {worst_res:.2e} on {args.size} args; "
               f"scenario forecast vs discretized Exp expectile {worst_fc:.2e}")
    assert ok
