"""Orlicz premia H(X) = inf{k > 0 : E[phi(X/k)] <= 1}."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .dist import DiscreteDistribution, make_distribution
from .errors import (
    BracketFailure,
    NonConvergence,
    NonPositiveK,
    NonPositiveX,
    ParamOutOfRange,
    ValidationError,
)
from .orliczfn import OrliczFunctionSpec

MAX_ITER = 200
RESIDUAL_STOP = 1e-12

MonetaryFunctional = Callable[[np.ndarray, np.ndarray], float]


@dataclass(frozen=True)
class PremiumResult:
    value: float
    method: str  # "closed_form" or "bisection"
    residual: float
    bracket: Optional[tuple[float, float]] = None
    iterations: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bracket"] = list(self.bracket) if self.bracket else None
        return d


@dataclass(frozen=True)
class IdentificationResidual:
    x: float
    residual: float


def _expected_phi(values, weights, spec, k):
    return float(np.dot(weights, spec(values / k)))


def expected_phi(dist: DiscreteDistribution, spec: OrliczFunctionSpec, k: float) -> float:
    """E[phi(X/k)] as an exact finite sum."""
    if not k > 0:
        raise NonPositiveK(f"k must be > 0, got {k!r}")
    return _expected_phi(dist.support, dist.weights, spec, k)


def _bisect(values, weights, spec, lo, hi):
    """Smallest k with E[phi(X/k)] <= 1, by bisection on a validated bracket."""
    g = lambda k: _expected_phi(values, weights, spec, k)  # noqa: E731

    g_lo, g_hi = g(lo), g(hi)
    for _ in range(MAX_ITER):
        if g_hi <= 1.0:
            break
        hi *= 2.0
        g_hi = g(hi)
    for _ in range(MAX_ITER):
        if g_lo > 1.0:
            break
        lo *= 0.5
        g_lo = g(lo)
    if not (g_lo > 1.0 and g_hi <= 1.0):
        raise BracketFailure("could not bracket the premium", lo, hi, g_lo, g_hi)

    # E[phi(X/k)] is strictly decreasing in k only for increasing phi; with flat
    # stretches (indicator rows) a zero residual does not locate the infimum.
    early_stop = spec.is_increasing
    for it in range(1, MAX_ITER + 1):
        if early_stop and abs(g_hi - 1.0) <= RESIDUAL_STOP:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = g(mid)
        if g_mid <= 1.0:
            hi, g_hi = mid, g_mid
        else:
            lo, g_lo = mid, g_mid
    else:
        raise NonConvergence(f"bisection did not converge in {MAX_ITER} iterations; bracket [{lo}, {hi}]")
    return hi, abs(g_hi - 1.0), (lo, hi), it


def premium_of_arrays(values, weights, spec: OrliczFunctionSpec, method: str = "auto") -> PremiumResult:
    """Premium of a finitely supported law given as raw arrays.

    Unlike :func:`orlicz_premium` this accepts atoms at zero, which is what
    the optimized-return construction needs for (X - x)+. The all-zero law
    has premium 0.
    """
    s = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if np.any(s < 0):
        raise ValidationError("premium needs nonnegative values")
    pos = s > 0
    if not np.any(pos[w > 0]):
        return PremiumResult(0.0, "closed_form", 0.0)
    if method not in ("auto", "closed_form", "bisection"):
        raise ParamOutOfRange(f"unknown premium method {method!r}")

    smin, smax = float(s[pos].min()), float(s.max())
    if smin == smax and np.all(pos):
        return PremiumResult(smin, "closed_form", abs(_expected_phi(s, w, spec, smin) - 1.0))

    use_closed = method == "closed_form" or (method == "auto" and spec.closed_form_premium is not None)
    if use_closed:
        if spec.closed_form_premium is None:
            raise ValidationError(f"{spec.label} has no closed-form premium for discrete laws")
        k = spec.closed_form_premium(s, w)
        if k == 0.0:
            # e.g. exp(E log X) with an atom at zero; E[phi(X/k)] is undefined there
            return PremiumResult(0.0, "closed_form", 0.0)
        return PremiumResult(k, "closed_form", abs(_expected_phi(s, w, spec, k) - 1.0))

    if not spec.is_increasing and method == "auto":
        raise ValidationError(f"{spec.label} is not increasing; bisection premium undefined")
    k, res, bracket, it = _bisect(s, w, spec, smin, smax)
    return PremiumResult(k, "bisection", res, bracket, it)


def orlicz_premium(dist: DiscreteDistribution, spec: OrliczFunctionSpec, method: str = "auto") -> PremiumResult:
    """Orlicz premium of ``dist``.

    ``method="auto"`` uses the catalog closed form when one exists and
    bisection on [min support, max support] otherwise. The quantile row's
    closed form is the left-continuous empirical quantile and the expectile
    row's is the exact root of the expectile balance equation.
    """
    return premium_of_arrays(dist.support, dist.weights, spec, method)


def identification_residual(dist: DiscreteDistribution, spec: OrliczFunctionSpec, x: float) -> IdentificationResidual:
    """E[phi(Y/x)] - 1: zero at the premium, positive below it, negative above."""
    if not x > 0:
        raise NonPositiveX(f"x must be > 0, got {x!r}")
    return IdentificationResidual(float(x), expected_phi(dist, spec, x) - 1.0)


# --- log/exp correspondence with monetary functionals ---------------------------

def expectation(values: np.ndarray, weights: np.ndarray) -> float:
    return float(np.dot(weights, values))


def worst_case(values: np.ndarray, weights: np.ndarray) -> float:
    return float(np.max(values[weights > 0]))


def entropic(gamma: float) -> MonetaryFunctional:
    """(1/gamma) log E[exp(gamma X)], evaluated with a log-sum-exp shift."""
    if not gamma > 0:
        raise ParamOutOfRange("entropic gamma must be > 0")

    def rho(values, weights):
        m = float(np.max(values))
        return m + math.log(float(np.dot(weights, np.exp(gamma * (values - m))))) / gamma
    return rho


def log_transform_premium(dist: DiscreteDistribution, monetary_rho: MonetaryFunctional) -> float:
    """exp(rho(log X)) for a monetary functional ``rho`` on real-valued laws."""
    return math.exp(monetary_rho(np.log(dist.support), dist.weights))


def exp_transform(dist_values: np.ndarray, weights: np.ndarray, return_rho) -> float:
    """log(rho~(exp X)): the monetary functional attached to a return risk measure."""
    d = make_distribution(np.exp(dist_values), weights)
    return math.log(return_rho(d))


# --- parametric closed forms from continuous families ----------------------------

def exp_alpha_gamma_premium(alpha: float, shape: float, rate: float) -> float:
    """Premium of (e^{alpha x}-1)/(e^alpha-1) for Y ~ Gamma(shape, rate)."""
    return alpha / (rate * -math.expm1(-alpha / shape))


def gauss_tail_halfnormal_premium(alpha: float, sigma: float) -> float:
    """Premium of x e^{alpha(x^2-1)} for Y = |Z|, Z ~ N(0, sigma^2)."""
    return math.sqrt(2 / math.pi) * (0.5 * math.exp(-alpha)
                                     + math.sqrt(0.25 * math.exp(-2 * alpha) + math.pi * alpha)) * sigma
