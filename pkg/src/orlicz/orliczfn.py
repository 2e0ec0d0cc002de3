"""Catalog of Orlicz functions, shape diagnostics and the Lambert W function.

Each catalog entry carries its evaluation rule, declared shape flags and,
where one exists, a closed-form premium for discrete laws and a closed-form
scoring function. All rules are vectorized over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NonConvergence, ParamOutOfRange, UnknownFunction

E = math.e

# weights h(z) of the general scoring family
INVZ = "invz"    # h(z) = 1/z
INVZ2 = "invz2"  # h(z) = 1/z^2


@dataclass(frozen=True, eq=False)
class OrliczFunctionSpec:
    name: str
    params: dict
    phi: Callable[[np.ndarray], np.ndarray]
    is_increasing: bool
    is_convex: bool
    is_ga_convex: bool
    normalized: bool = True  # phi(1) == 1
    default_weight: str = INVZ
    # multiplies the default weight h; the tabulated LCE score uses h(z) = 2/z
    score_scale: float = 1.0
    closed_form_premium: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    closed_form_score: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    premium_note: str = field(default="", compare=False)

    def __call__(self, x):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            return self.phi(np.asarray(x, dtype=float))

    def evaluate(self, x):
        out = self(x)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.name}({inner})"


# --- closed-form premia on discrete laws -------------------------------------

def expectile_root(support: np.ndarray, weights: np.ndarray, q: float) -> float:
    """Solve q E[(X-e)+] = (1-q) E[(e-X)+] exactly.

    The balance is piecewise linear in e with kinks at the atoms, so the root
    is located between two atoms and the linear piece solved in closed form.
    """
    s = np.asarray(support, dtype=float)
    w = np.asarray(weights, dtype=float)
    if s.size == 1:
        return float(s[0])
    ws = w * s
    # C_k, D_k: mass and first moment at or below atom k; A_k, B_k: strictly above
    C = np.cumsum(w)
    D = np.cumsum(ws)
    B = w.sum() - C
    A = ws.sum() - D
    bal = q * (A - B * s) - (1 - q) * (C * s - D)
    k = int(np.searchsorted(-bal, 0.0, side="left"))  # first atom with bal <= 0
    if k < s.size and bal[k] == 0.0:
        return float(s[k])
    k -= 1  # root lies in (s[k], s[k+1])
    return float((q * A[k] + (1 - q) * D[k]) / (q * B[k] + (1 - q) * C[k]))


def _quantile_premium(alpha):
    def rule(s, w):
        cum = np.cumsum(w)
        i = int(np.searchsorted(cum, alpha, side="left"))
        return float(s[min(i, s.size - 1)])
    return rule


def _pnorm_premium(p):
    def rule(s, w):
        return float(np.dot(w, s**p) ** (1.0 / p))
    return rule


def _mean_variance_premium(lam, p):
    def rule(s, w):
        m1 = float(np.dot(w, s**p))
        m2 = float(np.dot(w, s ** (2 * p)))
        k_p = 0.5 * (lam * m1 + math.sqrt(lam**2 * m1**2 + 4 * (1 - lam) * m2))
        return k_p ** (1.0 / p)
    return rule


def _lce_premium(s, w):
    with np.errstate(divide="ignore"):
        return float(math.exp(np.dot(w, np.log(s))))


# --- closed-form scores --------------------------------------------------------

def _qlike(x, y):
    r = y / x
    return r - np.log(r) - 1.0


def _pnorm_score(p):
    def score(x, y):
        r = y / x
        return (r**p - 1.0) / p - np.log(r)
    return score


def _expectile_score(q):
    # Weighted QLIKE: weight q when the outcome exceeds the forecast, 1-q otherwise.
    def score(x, y):
        return np.where(y > x, q, 1.0 - q) * _qlike(x, y)
    return score


def _quantile_score(alpha):
    def score(x, y):
        return (np.where(x >= y, 1.0, 0.0) - alpha) * np.log(x / y)
    return score


def _lce_score(x, y):
    return np.log(y / x) ** 2


def _mean_variance_score(lam, p):
    def score(x, y):
        r = y / x
        return ((1 - lam) / (2 * p) * r ** (2 * p) + lam / p * r**p - np.log(r)
                - (lam + 1) / (2 * p))
    return score


def _entropic_log_score(x, y):
    r = y / x
    u = r + E - 1.0
    return u * (np.log(u) - 1.0) - np.log(r)


def _pnorm_log_score(p):
    def score(x, y):
        r = y / x
        lr = np.log(r)
        rp = r**p
        base = -lr + (rp - 1.0) / p
        return base + np.where(y > x, rp * lr / p - (rp - 1.0) / p**2, 0.0)
    return score


def _exp_alpha_score(alpha):
    c = -1.0 / math.expm1(-alpha)  # e^a / (e^a - 1)

    def score(x, y):
        return c * (np.expm1(alpha * (y / x - 1.0)) / (alpha * y) + 1.0 / y - 1.0 / x)
    return score


def _gauss_tail_score(alpha):
    def score(x, y):
        return np.expm1(alpha * ((y / x) ** 2 - 1.0)) / (2 * alpha * y) + 1.0 / y - 1.0 / x
    return score


def _exp_centered_score(x, y):
    return ((np.exp(y / x) - 0.5) / y + ((2 - 2 * E) * x - y) / (2 * x**2)) / (E - 2)


# --- catalog -----------------------------------------------------------------

def _require(params, name, key, lo=None, hi=None, lo_open=True, hi_open=True):
    if key not in params:
        raise ParamOutOfRange(f"{name}: missing parameter {key!r}")
    v = float(params[key])
    if not math.isfinite(v):
        raise ParamOutOfRange(f"{name}: {key} must be finite")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ParamOutOfRange(f"{name}: {key}={v} out of range")
    if hi is not None and (v > hi or (hi_open and v == hi)):
        raise ParamOutOfRange(f"{name}: {key}={v} out of range")
    return v


def _build(name: str, params: dict) -> OrliczFunctionSpec:
    P = params
    if name == "mean":
        return OrliczFunctionSpec(name, {}, lambda x: x, True, True, True,
                                  closed_form_premium=lambda s, w: float(np.dot(w, s)),
                                  closed_form_score=_qlike)
    if name == "quantile":
        a = _require(P, name, "alpha", 0, 1)
        return OrliczFunctionSpec(name, {"alpha": a}, lambda x: a + (x > 1.0), False, False, False,
                                  normalized=False, closed_form_premium=_quantile_premium(a),
                                  closed_form_score=_quantile_score(a))
    if name == "expectile":
        q = _require(P, name, "q", 0, 1)
        return OrliczFunctionSpec(
            name, {"q": q},
            lambda x: 1.0 + q * np.maximum(x - 1.0, 0.0) - (1 - q) * np.maximum(1.0 - x, 0.0),
            True, q >= 0.5, q >= 0.5,
            closed_form_premium=lambda s, w: expectile_root(s, w, q),
            closed_form_score=_expectile_score(q))
    if name == "lce":
        return OrliczFunctionSpec(name, {}, lambda x: 1.0 + np.log(x), True, False, True,
                                  score_scale=2.0, closed_form_premium=_lce_premium,
                                  closed_form_score=_lce_score)
    if name == "pnorm":
        p = _require(P, name, "p", 0)
        return OrliczFunctionSpec(name, {"p": p}, lambda x: x**p, True, p >= 1, True,
                                  closed_form_premium=_pnorm_premium(p),
                                  closed_form_score=_pnorm_score(p))
    if name == "mean-variance":
        lam = _require(P, name, "lambda_mix", 0, 1, lo_open=False, hi_open=False)
        p = _require({"p": 1.0, **P}, name, "p", 1, lo_open=False)
        return OrliczFunctionSpec(name, {"lambda_mix": lam, "p": p},
                                  lambda x: lam * x**p + (1 - lam) * x ** (2 * p), True, True, True,
                                  closed_form_premium=_mean_variance_premium(lam, p),
                                  closed_form_score=_mean_variance_score(lam, p))
    if name == "entropic-log":
        return OrliczFunctionSpec(name, {}, lambda x: x * np.log(E - 1.0 + x), True, True, True,
                                  closed_form_score=_entropic_log_score)
    if name == "pnorm-log":
        p = _require(P, name, "p", 1, lo_open=False)
        return OrliczFunctionSpec(
            name, {"p": p},
            lambda x: x**p + np.where(x > 1.0, x**p * np.log(np.maximum(x, 1.0)), 0.0),
            True, True, True, closed_form_score=_pnorm_log_score(p))
    if name == "exp-alpha":
        a = _require(P, name, "alpha", 0)
        return OrliczFunctionSpec(name, {"alpha": a}, lambda x: np.expm1(a * x) / math.expm1(a),
                                  True, True, True, default_weight=INVZ2,
                                  closed_form_score=_exp_alpha_score(a),
                                  premium_note="closed form for Gamma laws only")
    if name == "gauss-tail":
        a = _require(P, name, "alpha", 0)
        return OrliczFunctionSpec(name, {"alpha": a}, lambda x: x * np.exp(a * (x * x - 1.0)),
                                  True, True, True, default_weight=INVZ2,
                                  closed_form_score=_gauss_tail_score(a),
                                  premium_note="closed form for half-normal laws only")
    if name == "exp-centered":
        return OrliczFunctionSpec(name, {}, lambda x: (np.exp(x) - x - 1.0) / (E - 2.0),
                                  True, True, True, default_weight=INVZ2,
                                  closed_form_score=_exp_centered_score)
    raise UnknownFunction(f"unknown Orlicz function {name!r}; choose from {', '.join(CATALOG)}")


CATALOG: dict[str, tuple[str, ...]] = {
    "mean": (),
    "quantile": ("alpha",),
    "expectile": ("q",),
    "lce": (),
    "pnorm": ("p",),
    "mean-variance": ("lambda_mix", "p"),
    "entropic-log": (),
    "pnorm-log": ("p",),
    "exp-alpha": ("alpha",),
    "gauss-tail": ("alpha",),
    "exp-centered": (),
}


def catalog_lookup(name: str, params: Optional[dict] = None, **kwargs) -> OrliczFunctionSpec:
    """Build the catalog entry ``name`` with the given parameters.

    >>> catalog_lookup("pnorm", p=2).evaluate(3.0)
    9.0
    """
    params = {**(params or {}), **kwargs}
    if name not in CATALOG:
        raise UnknownFunction(f"unknown Orlicz function {name!r}; choose from {', '.join(CATALOG)}")
    extra = set(params) - set(CATALOG[name])
    if extra:
        raise ParamOutOfRange(f"{name}: unexpected parameter(s) {sorted(extra)}")
    return _build(name, params)


# --- Lambert W -----------------------------------------------------------------

@dataclass(frozen=True)
class LambertWResult:
    value: float
    iterations: int
    residual: float


def _lambert_initial(a: float) -> float:
    if a < -0.25:
        # branch-point series in p = sqrt(2(ea + 1))
        p = math.sqrt(max(2.0 * (E * a + 1.0), 0.0))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    if a < 3.0:
        return math.log1p(a) * (1.0 - math.log1p(math.log1p(a)) / (2.0 + math.log1p(a)))
    l1 = math.log(a)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambert_w(arg: float, max_iter: int = 100) -> LambertWResult:
    """Principal branch W0 by Halley iteration.

    Initial guess: the branch-point series near -1/e, a log1p form for
    moderate arguments and the asymptotic log expansion for large ones.
    """
    a = float(arg)
    if math.isnan(a) or a < -1.0 / E - 1e-16:
        raise DomainError(f"Lambert W0 needs arg >= -1/e, got {arg!r}")
    if a <= -1.0 / E:
        return LambertWResult(-1.0, 0, abs(-1.0 / E - a))
    if a == 0.0:
        return LambertWResult(0.0, 0, 0.0)
    if math.isinf(a):
        raise DomainError("Lambert W of +inf")
    w = _lambert_initial(a)
    best = (abs(w * math.exp(w) - a), w)
    prev = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        ew = math.exp(w)
        f = w * ew - a
        wp1 = w + 1.0
        if f == 0.0 or wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= step
        best = min(best, (abs(w * math.exp(w) - a), w))
        # converged, or stalled at rounding level (ill-conditioned near -1/e)
        if abs(step) <= 4e-16 * (1.0 + abs(w)) or (it > 3 and abs(step) >= abs(prev)):
            break
        prev = step
    residual, w = best
    if residual > 1e-12 * max(1.0, abs(a)):
        raise NonConvergence(f"Lambert W did not converge for arg={a!r} (residual {residual:.3g})")
    return LambertWResult(w, it, residual)


# --- shape diagnostics ---------------------------------------------------------

@dataclass(frozen=True)
class ShapeReport:
    name: str
    n_points: int
    n_nonfinite: int
    monotonicity_violations: int
    convexity_violations: int
    ga_convexity_violations: int
    declared: dict
    observed: dict

    @property
    def consistent(self) -> bool:
        return self.declared == self.observed


def check_shape(spec: OrliczFunctionSpec, grid: int = 64, lo: float = 1e-3, hi: float = 1e3,
                tol: float = 1e-10) -> ShapeReport:
    """Check declared shape flags on a log-spaced grid.

    Monotonicity is strict increase between neighbours. Convexity and
    GA-convexity are midpoint checks over all grid pairs, with slack
    ``tol * max(1, |rhs|)``. Grid points where phi overflows are skipped.
    """
    if grid < 64:
        raise ParamOutOfRange("shape grid needs at least 64 points")
    x = np.geomspace(lo, hi, grid)
    f = spec(x)
    ok = np.isfinite(f)
    x, f = x[ok], f[ok]
    mono = int(np.sum(np.diff(f) <= 0))

    i, j = np.triu_indices(x.size, k=1)
    rhs = 0.5 * (f[i] + f[j])
    slack = tol * np.maximum(1.0, np.abs(rhs))
    arith = spec(0.5 * (x[i] + x[j]))
    geo = spec(np.sqrt(x[i] * x[j]))
    conv = int(np.sum(np.isfinite(arith) & (arith > rhs + slack)))
    ga = int(np.sum(np.isfinite(geo) & (geo > rhs + slack)))

    declared = {"increasing": spec.is_increasing, "convex": spec.is_convex,
                "ga_convex": spec.is_ga_convex}
    observed = {"increasing": mono == 0, "convex": conv == 0, "ga_convex": ga == 0}
    return ShapeReport(spec.label, int(x.size), int((~ok).sum()), mono, conv, ga, declared, observed)
