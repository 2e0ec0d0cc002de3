"""Elementary scores, Murphy diagrams and the mixture representation.

Elementary kernel at threshold z:

    S_z(x, y) = |phi(y/z) - 1|   on {x <= z < y} or {y <= z < x}, else 0

with the p-norm variant |y^p - z^p| and the expectile variant
q (y - z) 1{x <= z < y} + (1 - q)(z - y) 1{y <= z < x}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .dist import DiscreteDistribution, exponential_expectile_factor
from .errors import InvalidParams, LengthMismatch, NonPositiveArgs, ParamOutOfRange, QuadratureFailure
from .orliczfn import OrliczFunctionSpec, catalog_lookup
from .scoring import ScoringFamily


@dataclass(frozen=True, eq=False)
class ElementaryKernel:
    """Threshold-free description of an elementary score family."""

    kind: str  # "generic", "pnorm" or "expectile"
    spec: Optional[OrliczFunctionSpec] = None
    p: Optional[float] = None
    q: Optional[float] = None

    def __post_init__(self):
        if self.kind == "generic" and self.spec is None:
            raise InvalidParams("generic kernel needs an Orlicz function")
        if self.kind == "pnorm" and not (self.p is not None and self.p > 0):
            raise ParamOutOfRange(f"pnorm kernel needs p > 0, got {self.p}")
        if self.kind == "expectile" and not (self.q is not None and 0 < self.q < 1):
            raise ParamOutOfRange(f"expectile kernel needs 0 < q < 1, got {self.q}")
        if self.kind not in ("generic", "pnorm", "expectile"):
            raise InvalidParams(f"unknown kernel kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "generic":
            return self.spec.label
        return f"{self.kind}(p={self.p:g})" if self.kind == "pnorm" else f"{self.kind}(q={self.q:g})"

    def upper(self, y, z):
        """Contribution on {x <= z < y}."""
        if self.kind == "generic":
            return np.abs(self.spec(y / z) - 1.0)
        if self.kind == "pnorm":
            return np.abs(y**self.p - z**self.p)
        return self.q * (y - z)

    def lower(self, y, z):
        """Contribution on {y <= z < x}."""
        if self.kind == "generic":
            return np.abs(self.spec(y / z) - 1.0)
        if self.kind == "pnorm":
            return np.abs(y**self.p - z**self.p)
        return (1.0 - self.q) * (z - y)

    def __call__(self, x, y, z):
        x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, y, z)))
        up = (x <= z) & (z < y)
        lo = (y <= z) & (z < x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.where(up, self.upper(y, z), 0.0) + np.where(lo, self.lower(y, z), 0.0)
        return out


def generic_kernel(spec: OrliczFunctionSpec) -> ElementaryKernel:
    return ElementaryKernel("generic", spec=spec)


def pnorm_kernel(p: float) -> ElementaryKernel:
    return ElementaryKernel("pnorm", p=p)


def expectile_kernel(q: float) -> ElementaryKernel:
    return ElementaryKernel("expectile", q=q)


@dataclass(frozen=True)
class ElementaryScoreSpec:
    kernel: ElementaryKernel
    z: float

    def __post_init__(self):
        if not self.z > 0:
            raise NonPositiveArgs(f"threshold z must be > 0, got {self.z!r}")


def elementary_score(es: ElementaryScoreSpec, x, y):
    xa, ya = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any(~(xa > 0)) or np.any(~(ya > 0)):
        raise NonPositiveArgs("elementary scores need x, y > 0")
    out = es.kernel(xa, ya, es.z)
    return float(out) if out.ndim == 0 else out


# --- Murphy curves -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MurphyCurve:
    kernel: str
    thresholds: np.ndarray
    scores: dict[str, np.ndarray]
    n: int
    meta: dict = field(default_factory=dict)

    @property
    def forecasters(self) -> list[str]:
        return list(self.scores)

    def rows(self):
        for name, s in self.scores.items():
            for z, v in zip(self.thresholds, s):
                yield float(z), name, float(v)


def default_thresholds(outcomes, forecasts: Mapping[str, np.ndarray], count: int = 101) -> np.ndarray:
    """Log-spaced grid over [q_0.01 / 2, 2 q_0.99] of pooled outcomes and forecasts."""
    pooled = np.concatenate([np.ravel(outcomes)] + [np.ravel(v) for v in forecasts.values()])
    lo, hi = np.quantile(pooled, [0.01, 0.99])
    return np.geomspace(0.5 * lo, 2.0 * hi, count)


def _separable(kernel: ElementaryKernel):
    # (a, b, c_up, c_lo) with upper = c_up (a(y) - b(z)) and lower = c_lo (b(z) - a(y))
    if kernel.kind == "pnorm":
        p = kernel.p
        return (lambda v: v**p), (lambda v: v**p), 1.0, 1.0
    if kernel.kind == "expectile":
        return (lambda v: v), (lambda v: v), kernel.q, 1.0 - kernel.q
    if kernel.spec.name == "lce":
        return np.log, np.log, 1.0, 1.0
    return None


def _range_sums(starts, stops, values, nz):
    """For each threshold index i, sum of ``values`` over intervals [start, stop) containing i."""
    diff = np.bincount(starts, weights=values, minlength=nz + 1)
    diff -= np.bincount(stops, weights=values, minlength=nz + 1)
    return np.cumsum(diff)[:nz]


DENSE_LIMIT = 100_000_000


def _curve_one(kernel, x, y, z, chunk=16384, method="auto"):
    # Dense accumulation sums identical per-pair terms, so forecasters whose
    # events coincide get bitwise-equal curves; the interval-sum path is
    # O(n + nz) but rounds differently per forecaster.
    nz = z.size
    sep = _separable(kernel)
    if method == "auto":
        method = "intervals" if sep is not None and x.size * nz > DENSE_LIMIT else "dense"
    if method == "intervals":
        if sep is None:
            raise InvalidParams(f"kernel {kernel.label} has no interval-sum form")
        a, b, c_up, c_lo = sep
        ix = np.searchsorted(z, x, side="left")
        iy = np.searchsorted(z, y, side="left")
        up = ix < iy
        lo = iy < ix
        ay = a(y)
        bz = b(z)
        cnt_up = _range_sums(ix[up], iy[up], np.ones(up.sum()), nz)
        sum_up = _range_sums(ix[up], iy[up], ay[up], nz)
        cnt_lo = _range_sums(iy[lo], ix[lo], np.ones(lo.sum()), nz)
        sum_lo = _range_sums(iy[lo], ix[lo], ay[lo], nz)
        total = c_up * (sum_up - cnt_up * bz) + c_lo * (cnt_lo * bz - sum_lo)
        return np.maximum(total, 0.0) / x.size
    total = np.zeros(nz)
    for s in range(0, x.size, chunk):
        total += kernel(x[s:s + chunk, None], y[s:s + chunk, None], z[None, :]).sum(axis=0)
    return total / x.size


def murphy_curve(kernel: ElementaryKernel, forecasts: Mapping[str, Sequence[float]], outcomes: Sequence[float],
                 thresholds: Optional[Sequence[float]] = None, meta: Optional[dict] = None,
                 method: str = "auto") -> MurphyCurve:
    """Mean elementary score per forecaster at each threshold.

    ``method`` is ``"dense"``, ``"intervals"`` (thresholds located by binary
    search, contributions accumulated as range sums; p-norm, expectile and LCE
    kernels only) or ``"auto"``, which switches to intervals for very large
    inputs.
    """
    y = np.asarray(outcomes, dtype=float).ravel()
    fc = {k: np.asarray(v, dtype=float).ravel() for k, v in forecasts.items()}
    if not fc:
        raise InvalidParams("need at least one forecaster")
    for k, v in fc.items():
        if v.size != y.size:
            raise LengthMismatch(f"forecaster {k!r} has {v.size} forecasts for {y.size} outcomes")
        if np.any(~(v > 0)):
            raise NonPositiveArgs(f"forecaster {k!r} has nonpositive forecasts")
    if y.size == 0 or np.any(~(y > 0)):
        raise NonPositiveArgs("outcomes must be nonempty and positive")
    z = default_thresholds(y, fc) if thresholds is None else np.asarray(thresholds, dtype=float).ravel()
    if z.size == 0:
        raise InvalidParams("threshold grid is empty")
    if np.any(~(z > 0)) or np.any(np.diff(z) <= 0):
        raise InvalidParams("thresholds must be positive and strictly ascending")
    scores = {k: _curve_one(kernel, v, y, z, method=method) for k, v in fc.items()}
    return MurphyCurve(kernel.label, z, scores, int(y.size), dict(meta or {}))


def expected_elementary(kernel: ElementaryKernel, x: float, dist: DiscreteDistribution, thresholds) -> np.ndarray:
    """E[S_z(x, Y)] for a constant forecast x, exactly over a discrete law."""
    z = np.asarray(thresholds, dtype=float)
    return kernel(x, dist.support[:, None], z[None, :]).T @ dist.weights


def crossings(a: np.ndarray, b: np.ndarray, tol: float = 0.0) -> int:
    """Number of sign changes of a - b, ignoring entries with |a - b| <= tol."""
    d = np.asarray(a) - np.asarray(b)
    s = np.sign(d[np.abs(d) > tol])
    return int(np.sum(s[1:] != s[:-1]))


# --- mixture representation ----------------------------------------------------------

def mixture_reconstruction(fam: ScoringFamily, x: float, y: float, kind: str = "generic",
                           tol: float = 1e-12) -> float:
    """Rebuild S(x, y) as int S_z(x, y) dH(z) with dH = h(z) dz (Gauss-Kronrod).

    ``kind="pnorm"`` integrates |y^p - z^p| against z^{-p} h(z) dz and
    ``kind="expectile"`` integrates the expectile kernel against h(z)/z dz.
    """
    if not (x > 0 and y > 0):
        raise NonPositiveArgs(f"need x, y > 0, got x={x!r}, y={y!r}")
    if x == y:
        return 0.0
    spec = fam.spec
    if kind == "generic":
        kernel, reweight = generic_kernel(spec), (lambda z: 1.0)
    elif kind == "pnorm":
        if spec.name != "pnorm":
            raise InvalidParams("pnorm reconstruction needs a pnorm family")
        p = spec.params["p"]
        kernel, reweight = pnorm_kernel(p), (lambda z: z**-p)
    elif kind == "expectile":
        if spec.name != "expectile":
            raise InvalidParams("expectile reconstruction needs an expectile family")
        kernel, reweight = expectile_kernel(spec.params["q"]), (lambda z: 1.0 / z)
    else:
        raise InvalidParams(f"unknown kernel kind {kind!r}")

    # integrate in u = log z; dz = z du
    def integrand(u):
        z = math.exp(u)
        return float(kernel(x, y, z)) * fam.h(z) * reweight(z) * z

    lo, hi = math.log(min(x, y)), math.log(max(x, y))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, lo, hi, epsabs=tol, epsrel=tol, limit=500)
    if not math.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
        raise QuadratureFailure(f"mixture quadrature error estimate {err:.3g} too large")
    return val


# --- population Murphy curves for the two scenarios --------------------------------------

def _lognormal_nodes(sigma_mu, n_nodes):
    m = n_nodes // 2
    mu = sigma_mu * special.ndtri((np.arange(m) + 0.5) / m)
    mu = np.concatenate([mu, mu])
    tau = np.concatenate([np.full(m, 0.2), np.full(m, -0.2)])
    return mu, tau


def population_murphy_lognormal(p: float, thresholds, sigma_y: float = 0.2, sigma_mu: float = 0.2,
                                n_nodes: int = 10_000) -> MurphyCurve:
    """Expected elementary scores in the log-normal scenario.

    The inner expectation over Y given mu is analytic; mu (and tau) are
    discretized on ``n_nodes`` equal-weight quantile nodes. ``p = 0`` uses the
    log-certainty-equivalent kernel |log(y/z)|, ``p > 0`` the p-norm kernel.
    """
    z = np.asarray(thresholds, dtype=float)[None, :]
    mu, tau = _lognormal_nodes(sigma_mu, n_nodes)
    s = sigma_y
    m = mu[:, None]
    if p == 0:
        c = np.log(z)
        d = (m - c) / s
        pdf = np.exp(-0.5 * d * d) / math.sqrt(2 * math.pi)
        above = s * pdf + (m - c) * special.ndtr(d)
        below = s * pdf - (m - c) * special.ndtr(-d)
        label = "lce"
    else:
        K = z**p
        d2 = (p * m - p * np.log(z)) / (p * s)
        d1 = d2 + p * s
        ev = np.exp(p * m + 0.5 * (p * s) ** 2)
        above = ev * special.ndtr(d1) - K * special.ndtr(d2)
        below = K * special.ndtr(-d2) - ev * special.ndtr(-d1)
        label = f"pnorm(p={p:g})"
    sy2 = s * s
    fc = {
        "perfect": np.exp(mu + sy2 * p / 2),
        "unconditional": np.full(mu.size, math.exp((sigma_mu**2 + sy2) * p / 2)),
        "unfocused": np.exp(mu + tau / 2 + sy2 * p / 4),
        "sign-reversed": np.exp(-mu + sy2 * p / 2),
    }
    scores = {k: np.where(v[:, None] <= z, above, below).mean(axis=0) for k, v in fc.items()}
    return MurphyCurve(label, z.ravel(), scores, n_nodes, {"population": True})


def population_murphy_exponential(q: float, thresholds, sigma_lambda: float = 0.2,
                                  n_nodes: int = 10_000) -> MurphyCurve:
    """Expected expectile elementary scores in the exponential scenario."""
    z = np.asarray(thresholds, dtype=float)[None, :]
    half = n_nodes // 2
    lam = np.exp(sigma_lambda * special.ndtri((np.arange(half) + 0.5) / half))
    lam = np.concatenate([lam, lam])
    tau = np.concatenate([np.full(half, 1.25), np.full(half, 0.8)])
    L = lam[:, None]
    above = q * np.exp(-L * z) / L
    below = (1 - q) * (z + np.expm1(-L * z) / L)
    c = exponential_expectile_factor(q)
    fc = {"perfect": c / lam, "unfocused": c / (tau * lam), "mean-reversed": c * lam}
    scores = {k: np.where(v[:, None] <= z, above, below).mean(axis=0) for k, v in fc.items()}
    return MurphyCurve(f"expectile(q={q:g})", z.ravel(), scores, n_nodes, {"population": True})


def scenario_kernel(scenario: str, param: float) -> ElementaryKernel:
    """Kernel used for a scenario: LCE/p-norm for log-normal, expectile for exponential."""
    if scenario == "lognormal":
        return generic_kernel(catalog_lookup("lce")) if param == 0 else pnorm_kernel(param)
    if scenario == "exponential":
        return expectile_kernel(param)
    raise InvalidParams(f"unknown scenario {scenario!r}")
