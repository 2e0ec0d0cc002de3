"""Optimized return (OR) risk measures rho(X) = inf_x {x + inner((X - x)+)}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .dist import DiscreteDistribution, comonotone_sum, independent_sum
from .errors import InnerEvaluationFailure, OrliczError, ParamOutOfRange, PropertyViolation
from .orliczfn import OrliczFunctionSpec
from .premium import premium_of_arrays

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class InnerFunctional:
    """Positively homogeneous, monotone functional on nonnegative discrete laws.

    ``fn(values, weights)`` must return 0 for the all-zero law.
    ``piecewise_linear`` marks functionals for which x -> x + inner((X-x)+)
    is linear between atoms, so only atoms need to be probed.
    """

    name: str
    fn: Callable[[np.ndarray, np.ndarray], float]
    convex: bool = True
    piecewise_linear: bool = False

    def __call__(self, values, weights) -> float:
        return self.fn(values, weights)


def avar_inner(level: float) -> InnerFunctional:
    """E[Y] / (1 - level); the OR measure is then AV@R at ``level``."""
    if not 0 <= level < 1:
        raise ParamOutOfRange(f"AV@R level must lie in [0, 1), got {level}")
    c = 1.0 / (1.0 - level)
    return InnerFunctional(f"avar({level:g})", lambda v, w: c * float(np.dot(w, v)), True, True)


def expectation_inner() -> InnerFunctional:
    return InnerFunctional("expectation", lambda v, w: float(np.dot(w, v)), True, True)


def orlicz_inner(spec: OrliczFunctionSpec) -> InnerFunctional:
    return InnerFunctional(f"hg({spec.label})", lambda v, w: premium_of_arrays(v, w, spec).value,
                           convex=spec.is_convex)


@dataclass(frozen=True)
class ORResult:
    value: float
    minimizer: float
    evaluations: int
    boundary_flag: bool = False

    def to_dict(self) -> dict:
        return {"value": self.value, "minimizer": self.minimizer, "boundary_flag": self.boundary_flag}


def _golden(g, a, b, ga, gb, tol):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    gc, gd = g(c), g(d)
    best = min((ga, a), (gb, b), (gc, c), (gd, d))
    while b - a > tol:
        if gc <= gd:
            b, d, gd = d, c, gc
            c = b - GOLDEN * (b - a)
            gc = g(c)
            best = min(best, (gc, c))
        else:
            a, c, gc = c, d, gd
            d = a + GOLDEN * (b - a)
            gd = g(d)
            best = min(best, (gd, d))
    return best


def or_risk(dist: DiscreteDistribution, inner: InnerFunctional) -> ORResult:
    """Minimize g(x) = x + inner((X - x)+) over [min - range, max].

    g has kinks only at atoms, so it is probed at every atom and at the left
    bracket end, then refined by golden section inside each gap unless the
    inner functional is piecewise linear. Ties prefer the largest x.
    """
    s, w = dist.support, dist.weights
    evals = 0

    def g(x):
        nonlocal evals
        evals += 1
        try:
            val = inner(np.maximum(s - x, 0.0), w)
        except OrliczError as exc:
            raise InnerEvaluationFailure(f"inner functional failed at x={x!r}: {exc}") from exc
        if not math.isfinite(val):
            raise InnerEvaluationFailure(f"inner functional returned {val!r} at x={x!r}")
        return x + val

    if dist.is_degenerate:
        c = dist.min
        return ORResult(g(c), c, evals, False)

    span = dist.max - dist.min
    knots = np.concatenate([[dist.min - span], s])
    gk = [g(float(x)) for x in knots]
    scale = max(abs(v) for v in gk) + span
    cands = list(zip(gk, knots.tolist()))
    if not inner.piecewise_linear:
        tol = 1e-12 * span
        for i in range(knots.size - 1):
            cands.append(_golden(g, float(knots[i]), float(knots[i + 1]), gk[i], gk[i + 1], tol))

    best_val = min(v for v, _ in cands)
    tie = 1e-13 * scale
    x_star = max(x for v, x in cands if v <= best_val + tie)
    val = min(v for v, x in cands if x == x_star)
    boundary = x_star == knots[0]
    return ORResult(val, x_star, evals, bool(boundary))


def avar_oracle(dist: DiscreteDistribution, level: float) -> float:
    """(1/(1-level)) int_level^1 q_a da, integrating the step quantile exactly."""
    cum = np.cumsum(dist.weights)
    prev = np.concatenate([[0.0], cum[:-1]])
    cover = np.clip(cum, level, 1.0) - np.clip(prev, level, 1.0)
    return float(np.dot(cover, dist.support) / (1.0 - level))


# --- property checks -----------------------------------------------------------------

@dataclass
class ORPropertyReport:
    inner: str
    checks: dict[str, bool] = field(default_factory=dict)
    witnesses: dict[str, dict] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def record(self, prop: str, ok: bool, witness: dict) -> None:
        self.checks[prop] = self.checks.get(prop, True) and ok
        if not ok and prop not in self.witnesses:
            self.witnesses[prop] = witness

    def raise_for_violation(self) -> None:
        for prop, ok in self.checks.items():
            if not ok:
                raise PropertyViolation(prop, self.witnesses[prop])


def or_property_check(dists: Sequence[DiscreteDistribution] | Iterable[tuple[DiscreteDistribution, DiscreteDistribution]],
                      inner: InnerFunctional, scales: Sequence[float] = (0.1, 3.0, 7.3),
                      shifts: Sequence[float] = (0.5, 2.5), rtol: float = 1e-8,
                      strict: bool = False) -> ORPropertyReport:
    """Check monotonicity, positive homogeneity, translation invariance and,
    for convex inner functionals, subadditivity on comonotone and independent
    couplings of each pair.

    ``dists`` is a sequence of pairs (X, Y); bare distributions are paired
    with themselves.
    """
    report = ORPropertyReport(inner.name)
    for item in dists:
        X, Y = item if isinstance(item, tuple) else (item, item)
        rx = or_risk(X, inner).value
        tol = rtol * max(1.0, abs(rx))
        for c in shifts:
            shifted = or_risk(X.shifted(c), inner).value
            report.record("monotonicity", shifted >= rx - tol, {"shift": c, "rho": rx, "rho_shifted": shifted})
            report.record("translation", abs(shifted - (rx + c)) <= tol * max(1.0, c),
                          {"shift": c, "rho": rx, "rho_shifted": shifted})
        for lam in scales:
            scaled = or_risk(X.scaled(lam), inner).value
            report.record("homogeneity", abs(scaled - lam * rx) <= rtol * max(1.0, abs(lam * rx)),
                          {"scale": lam, "rho": rx, "rho_scaled": scaled})
        if inner.convex:
            ry = or_risk(Y, inner).value
            for coupling, total in (("comonotone", comonotone_sum(X, Y)), ("independent", independent_sum(X, Y))):
                rs = or_risk(total, inner).value
                report.record("subadditivity", rs <= rx + ry + rtol * max(1.0, abs(rx + ry)),
                              {"coupling": coupling, "rho_sum": rs, "rho_x": rx, "rho_y": ry})
    if strict:
        report.raise_for_violation()
    return report
