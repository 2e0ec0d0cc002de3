"""Strictly consistent scoring functions for Orlicz premia.

The general family is S(x, y) = int_x^y h(z) (phi(y/z) - 1) dz for a
positive weight h. With h(z) = 1/z it reduces to varphi(log(y/x)) where
varphi(t) = int_0^t (phi(e^s) - 1) ds; with h(z) = 1/z^2 it reduces to
int_1^{y/x} (phi(t) - 1) / y dt. Catalog entries carry closed forms for the
weight they were derived under.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .dist import DiscreteDistribution
from .errors import ConsistencyViolation, LengthMismatch, NonPositiveArgs, ParamOutOfRange
from .orliczfn import INVZ, INVZ2, OrliczFunctionSpec, catalog_lookup
from .premium import orlicz_premium
from .quadrature import adaptive_simpson

Weight = Union[str, Callable[[float], float]]


@dataclass(frozen=True, eq=False)
class ScoringFamily:
    spec: OrliczFunctionSpec
    weight: Weight = INVZ
    closed_form: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    scale: float = 1.0

    @property
    def label(self) -> str:
        w = self.weight if isinstance(self.weight, str) else "custom"
        if self.scale != 1.0:
            w = f"{self.scale:g}*{w}"
        return f"{self.spec.label}[{w}]"

    def h(self, z: float) -> float:
        if self.weight == INVZ:
            return self.scale / z
        if self.weight == INVZ2:
            return self.scale / (z * z)
        return self.scale * float(self.weight(z))


def family(name: str, weight: Optional[Weight] = None, **params) -> ScoringFamily:
    """Scoring family for catalog entry ``name``.

    The weight defaults to the one the closed form was derived under; asking
    for a different weight drops the closed form and scores by quadrature.
    """
    spec = catalog_lookup(name, params)
    return family_for(spec, weight)


def family_for(spec: OrliczFunctionSpec, weight: Optional[Weight] = None) -> ScoringFamily:
    if weight is None:
        weight = spec.default_weight
    if isinstance(weight, str) and weight not in (INVZ, INVZ2):
        raise ParamOutOfRange(f"unknown weight {weight!r}; use {INVZ!r} or {INVZ2!r}")
    if weight == spec.default_weight:
        return ScoringFamily(spec, weight, spec.closed_form_score, spec.score_scale)
    return ScoringFamily(spec, weight)


def _check_pos(x, y):
    if not (x > 0 and y > 0) or not (math.isfinite(x) and math.isfinite(y)):
        raise NonPositiveArgs(f"scores need x, y > 0, got x={x!r}, y={y!r}")


def quadrature_score(fam: ScoringFamily, x: float, y: float, abs_tol: float = 1e-10) -> float:
    """int_x^y h(z)(phi(y/z) - 1) dz, integrated in u = log z."""
    _check_pos(x, y)
    if x == y:
        return 0.0
    phi, h = fam.spec, fam.h

    def integrand(u):
        z = math.exp(u)
        return h(z) * z * (float(phi(y / z)) - 1.0)

    return adaptive_simpson(integrand, math.log(x), math.log(y), abs_tol=abs_tol)


def reduced_score(fam: ScoringFamily, x: float, y: float, abs_tol: float = 1e-10) -> float:
    """Score through the one-dimensional reductions of the two canonical weights."""
    _check_pos(x, y)
    if x == y:
        return 0.0
    phi, c = fam.spec, fam.scale
    if fam.weight == INVZ:
        return c * varphi(phi, math.log(y / x), abs_tol / c)
    if fam.weight == INVZ2:
        return c * adaptive_simpson(lambda t: (float(phi(t)) - 1.0) / y, 1.0, y / x, abs_tol=abs_tol / c)
    return quadrature_score(fam, x, y, abs_tol)


def varphi(spec: OrliczFunctionSpec, t: float, abs_tol: float = 1e-10) -> float:
    """varphi(t) = int_0^t (phi(e^s) - 1) ds."""
    return adaptive_simpson(lambda s: float(spec(math.exp(s))) - 1.0, 0.0, t, abs_tol=abs_tol)


def score(fam: ScoringFamily, x: float, y: float) -> float:
    """S(x, y): closed form when the family has one, quadrature otherwise."""
    _check_pos(x, y)
    if fam.closed_form is not None:
        if x == y:
            return 0.0
        with np.errstate(over="ignore"):
            return float(fam.closed_form(np.float64(x), np.float64(y)))
    return quadrature_score(fam, x, y)


def scores(fam: ScoringFamily, x, y) -> np.ndarray:
    """Vectorized scores over broadcast arrays ``x`` and ``y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise NonPositiveArgs("scores need x, y > 0")
    if fam.closed_form is not None:
        x, y = np.broadcast_arrays(x, y)
        with np.errstate(over="ignore"):
            out = np.asarray(fam.closed_form(x, y), dtype=float)
        return np.where(x == y, 0.0, out)
    return np.vectorize(lambda a, b: quadrature_score(fam, a, b), otypes=[float])(x, y)


def expectile_score_literal(q: float, x, y) -> np.ndarray:
    """q (r - log r - 1)^+ + (1 - q)(r - log r - 1)^-, r = y/x, taken literally.

    The bracket is never negative, so this is q * QLIKE: a multiple of the
    mean's score, consistent for the mean rather than the q-expectile. The
    ``expectile`` family instead weights QLIKE by q above and 1 - q below the
    forecast, which is what the elementary-score mixture integrates to.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = y / x
    t = r - np.log(r) - 1.0
    return q * np.maximum(t, 0.0) + (1.0 - q) * np.maximum(-t, 0.0)


@dataclass(frozen=True, eq=False)
class ScoreReport:
    forecaster: str
    scores: np.ndarray
    mean: float

    @property
    def n(self) -> int:
        return self.scores.size


def mean_score(fam: ScoringFamily, forecasts: Sequence[float], outcomes: Sequence[float],
               forecaster: str = "forecast") -> ScoreReport:
    x = np.asarray(forecasts, dtype=float).ravel()
    y = np.asarray(outcomes, dtype=float).ravel()
    if x.size != y.size:
        raise LengthMismatch(f"{x.size} forecasts vs {y.size} outcomes")
    if x.size == 0:
        raise LengthMismatch("need at least one forecast/outcome pair")
    s = scores(fam, x, y)
    return ScoreReport(forecaster, s, float(np.sum(s) / s.size))


def expected_score(fam: ScoringFamily, dist: DiscreteDistribution, xs) -> np.ndarray:
    """Population expected score E[S(x, Y)] for each x in ``xs``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    return scores(fam, xs[:, None], dist.support[None, :]) @ dist.weights


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    family: str
    grid: np.ndarray
    expected: np.ndarray
    minimizer: float
    premium: float
    step: float

    @property
    def offset(self) -> float:
        return abs(self.minimizer - self.premium)


def verify_consistency(fam: ScoringFamily, dist: DiscreteDistribution, grid: int = 400,
                       tol: float = 1e-10) -> ConsistencyReport:
    """Check that E[S(x, Y)] over a grid on [min/2, 2 max] is minimized at the premium.

    Raises :class:`ConsistencyViolation` if the grid minimizer is more than
    one step from the premium, or if the expected score fails to decrease
    (increase) left (right) of the minimizer by more than ``tol`` relative.
    """
    if grid < 200:
        raise ParamOutOfRange("consistency grid needs at least 200 points")
    xs = np.linspace(0.5 * dist.min, 2.0 * dist.max, grid)
    step = float(xs[1] - xs[0])
    es = expected_score(fam, dist, xs)
    k = int(np.argmin(es))
    premium = orlicz_premium(dist, fam.spec).value
    report = ConsistencyReport(fam.label, xs, es, float(xs[k]), premium, step)

    if abs(xs[k] - premium) > step * (1 + 1e-9):
        raise ConsistencyViolation(f"{fam.label}: grid minimizer {xs[k]!r} is not within one step of "
                                   f"premium {premium!r}", float(xs[k]))
    if np.isnan(es).any():
        raise ConsistencyViolation(f"{fam.label}: expected score is NaN", float(xs[np.isnan(es)][0]))
    with np.errstate(invalid="ignore"):
        d = np.diff(es)
    d[np.isnan(d)] = 0.0  # inf -> inf far from the premium: overflowed, treated as flat
    slack = tol * np.maximum(1.0, np.abs(es[1:]))
    bad_left = np.nonzero(d[:k] > slack[:k])[0]
    if bad_left.size:
        raise ConsistencyViolation(f"{fam.label}: expected score increases left of the minimizer",
                                   float(xs[bad_left[0] + 1]))
    bad_right = np.nonzero(d[k:] < -slack[k:])[0]
    if bad_right.size:
        raise ConsistencyViolation(f"{fam.label}: expected score decreases right of the minimizer",
                                   float(xs[k + bad_right[0] + 1]))
    return report
