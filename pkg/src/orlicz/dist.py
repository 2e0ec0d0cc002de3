"""Discrete distributions on (0, inf), seeded samplers and the two
hierarchical forecasting scenarios used for Murphy diagrams."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import special, stats

from .errors import (
    InvalidParams,
    LengthMismatch,
    NegativeWeight,
    NonPositiveSupport,
    ValidationError,
    WeightSumMismatch,
)
from .orliczfn import lambert_w

WEIGHT_SUM_TOL = 1e-9
MIN_SUPPORT = 1e-300


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Finitely supported law on (0, inf).

    Always built through :func:`make_distribution`, which sorts the support,
    merges duplicate atoms, drops zero-weight atoms and renormalizes.
    """

    support: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.support.size

    def __repr__(self) -> str:
        return f"DiscreteDistribution(n={len(self)}, support=[{self.min}, {self.max}])"

    @property
    def min(self) -> float:
        return float(self.support[0])

    @property
    def max(self) -> float:
        return float(self.support[-1])

    @property
    def is_degenerate(self) -> bool:
        return self.support.size == 1

    def expect(self, fn=None) -> float:
        """E[fn(X)]; E[X] when ``fn`` is omitted."""
        vals = self.support if fn is None else fn(self.support)
        return float(np.dot(self.weights, vals))

    def mean(self) -> float:
        return self.expect()

    def scaled(self, lam: float) -> "DiscreteDistribution":
        return make_distribution(self.support * lam, self.weights)

    def shifted(self, c: float) -> "DiscreteDistribution":
        return make_distribution(self.support + c, self.weights)

    def cdf(self, x: float) -> float:
        i = np.searchsorted(self.support, x, side="right")
        return float(self.weights[:i].sum())

    def quantile(self, alpha: float) -> float:
        """Left-continuous inverse inf{x : F(x) >= alpha}."""
        if not 0.0 < alpha <= 1.0:
            raise InvalidParams(f"alpha must lie in (0, 1], got {alpha}")
        cum = np.cumsum(self.weights)
        i = int(np.searchsorted(cum, alpha, side="left"))
        return float(self.support[min(i, len(self) - 1)])

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["value", "weight"])
            for v, p in zip(self.support, self.weights):
                w.writerow([repr(float(v)), repr(float(p))])


def make_distribution(support: Sequence[float], weights: Sequence[float]) -> DiscreteDistribution:
    x = np.asarray(support, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if x.size != w.size:
        raise LengthMismatch(f"support has {x.size} values but weights has {w.size}")
    if x.size == 0:
        raise ValidationError("distribution needs at least one atom")
    if not np.all(np.isfinite(x)) or np.any(x < MIN_SUPPORT):
        bad = x[~(np.isfinite(x) & (x >= MIN_SUPPORT))][0]
        raise NonPositiveSupport(f"support values must be finite and > 0, got {bad!r}")
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite")
    if np.any(w < 0):
        raise NegativeWeight(f"negative weight {w[w < 0][0]!r}")
    total = math.fsum(w)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise WeightSumMismatch(f"weights sum to {total!r}, expected 1")

    values, inverse = np.unique(x, return_inverse=True)
    merged = np.bincount(inverse, weights=w, minlength=values.size)
    keep = merged > 0
    values, merged = values[keep], merged[keep]
    merged = merged / math.fsum(merged)
    return DiscreteDistribution(_frozen(values), _frozen(merged))


def point_mass(c: float) -> DiscreteDistribution:
    return make_distribution([c], [1.0])


def uniform(values: Iterable[float]) -> DiscreteDistribution:
    v = np.asarray(list(values), dtype=float)
    return make_distribution(v, np.full(v.size, 1.0 / v.size))


def read_distribution(path: str | Path) -> DiscreteDistribution:
    """Read a ``value,weight`` CSV (header required)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or {"value", "weight"} - set(reader.fieldnames):
            raise ValidationError(f"{path}: expected header 'value,weight'")
        rows = list(reader)
    try:
        values = [float(r["value"]) for r in rows]
        weights = [float(r["weight"]) for r in rows]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from None
    return make_distribution(values, weights)


@dataclass(frozen=True, eq=False)
class Sample:
    values: np.ndarray
    seed_provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValidationError("sample must be nonempty")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise NonPositiveSupport("sample values must be finite and > 0")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self) -> int:
        return self.values.size

    def empirical(self) -> DiscreteDistribution:
        return uniform(self.values)


def read_sample(path: str | Path) -> Sample:
    """One positive real per line; blank lines and ``#`` comments skipped."""
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            try:
                vals.append(float(s))
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: not a number: {s!r}") from None
    return Sample(np.array(vals), {"source": str(path)})


# --- couplings on a shared sample space ----------------------------------

def comonotone_sum(a: DiscreteDistribution, b: DiscreteDistribution) -> DiscreteDistribution:
    """Law of F_a^{-1}(U) + F_b^{-1}(U)."""
    ca, cb = np.cumsum(a.weights), np.cumsum(b.weights)
    ca[-1] = cb[-1] = 1.0
    cuts = np.union1d(ca, cb)
    widths = np.diff(np.concatenate([[0.0], cuts]))
    mids = cuts - widths / 2
    ia = np.minimum(np.searchsorted(ca, mids), len(a) - 1)
    ib = np.minimum(np.searchsorted(cb, mids), len(b) - 1)
    return make_distribution(a.support[ia] + b.support[ib], widths)


def independent_sum(a: DiscreteDistribution, b: DiscreteDistribution) -> DiscreteDistribution:
    vals = np.add.outer(a.support, b.support).ravel()
    w = np.multiply.outer(a.weights, b.weights).ravel()
    return make_distribution(vals, w)


# --- deterministic discretization of continuous laws ----------------------

def _discretize(mass_cdf, partial_mean, upper: float, n: int) -> DiscreteDistribution:
    # n-1 equal-width cells on [0, upper] plus one tail cell; each atom sits at
    # the conditional mean of its cell so the first moment is preserved.
    if n < 2:
        raise InvalidParams("discretization needs n >= 2")
    edges = np.concatenate([np.linspace(0.0, upper, n), [np.inf]])
    mass = np.diff(mass_cdf(edges))
    pm = np.diff(partial_mean(edges))
    ok = mass > 0
    atoms = pm[ok] / mass[ok]
    lo, hi = edges[:-1][ok], edges[1:][ok]
    atoms = np.clip(atoms, np.maximum(lo, MIN_SUPPORT), hi)
    return make_distribution(atoms, mass[ok] / mass[ok].sum())


def discretize_gamma(shape: float, rate: float, n: int = 10_000, tail: float = 1e-15) -> DiscreteDistribution:
    if shape <= 0 or rate <= 0:
        raise InvalidParams("gamma shape and rate must be > 0")
    upper = stats.gamma.isf(tail, shape, scale=1.0 / rate)

    def cdf(x):
        return special.gammainc(shape, rate * x)

    def partial_mean(x):
        return shape / rate * special.gammainc(shape + 1.0, rate * x)

    return _discretize(cdf, partial_mean, upper, n)


def discretize_halfnormal(sigma: float, n: int = 10_000, tail: float = 1e-15) -> DiscreteDistribution:
    if sigma <= 0:
        raise InvalidParams("sigma must be > 0")
    upper = stats.halfnorm.isf(tail, scale=sigma)

    def cdf(x):
        return special.erf(x / (sigma * math.sqrt(2.0)))

    def partial_mean(x):
        return sigma * math.sqrt(2.0 / math.pi) * (1.0 - np.exp(-0.5 * (x / sigma) ** 2))

    return _discretize(cdf, partial_mean, upper, n)


# --- seeded streams ---------------------------------------------------------

def replication_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for replication ``index``; independent of run order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def open_uniforms(rng: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1) with 53-bit resolution."""
    k = rng.integers(0, 2**53, size=size, dtype=np.int64)
    return (k + 0.5) / 2.0**53


# --- forecasting scenarios -------------------------------------------------

LOGNORMAL_FORECASTERS = ("perfect", "unconditional", "unfocused", "sign-reversed")
EXPONENTIAL_FORECASTERS = ("perfect", "unfocused", "mean-reversed")


@dataclass(frozen=True)
class ForecastScenario:
    """Hierarchical outcome law plus named point-forecast rules.

    ``params`` holds the generator parameters (``sigma_y``/``sigma_mu`` or
    ``sigma_lambda``) and the target functional parameter (``p`` or ``q``).
    """

    name: str
    params: dict
    forecasters: tuple[str, ...]

    def __post_init__(self):
        if not self.forecasters:
            raise InvalidParams("scenario needs at least one forecaster")
        for key in ("sigma_y", "sigma_mu", "sigma_lambda"):
            if key in self.params and not self.params[key] > 0:
                raise InvalidParams(f"{key} must be > 0, got {self.params[key]}")

    def draw(self, n: int, seed: int, n_obs: int = 1000) -> "ScenarioSample":
        if self.name == "lognormal":
            return sample_lognormal_scenario(n, seed, n_obs=n_obs, **self.params)
        if self.name == "exponential":
            return sample_exponential_scenario(n, seed, n_obs=n_obs, **self.params)
        raise InvalidParams(f"unknown scenario {self.name!r}")


def lognormal_scenario(sigma_y=0.2, sigma_mu=0.2, p=0.0) -> ForecastScenario:
    return ForecastScenario("lognormal", {"sigma_y": sigma_y, "sigma_mu": sigma_mu, "p": p},
                            LOGNORMAL_FORECASTERS)


def exponential_scenario(sigma_lambda=0.2, q=0.5) -> ForecastScenario:
    return ForecastScenario("exponential", {"sigma_lambda": sigma_lambda, "q": q},
                            EXPONENTIAL_FORECASTERS)


@dataclass(frozen=True, eq=False)
class ScenarioSample:
    """Output of a scenario generator.

    ``outcomes`` has shape (n, n_obs). Forecasts are constant within a
    replication, so each entry of ``forecasts`` has shape (n,).
    ``latent`` records the per-replication draws (mu or lambda, and tau).
    """

    scenario: str
    seed: int
    outcomes: np.ndarray
    forecasts: dict[str, np.ndarray]
    latent: dict[str, np.ndarray]

    @property
    def n(self) -> int:
        return self.outcomes.shape[0]

    def replication(self, i: int) -> tuple[Sample, dict[str, float]]:
        s = Sample(self.outcomes[i], {"seed": self.seed, "stream": i})
        return s, {k: float(v[i]) for k, v in self.forecasts.items()}

    def flat(self) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        """Outcomes and forecasts broadcast to one observation per entry."""
        n_obs = self.outcomes.shape[1]
        y = self.outcomes.ravel()
        return y, {k: np.repeat(v, n_obs) for k, v in self.forecasts.items()}


def _check_counts(n, n_obs):
    if int(n) < 1 or int(n_obs) < 1:
        raise InvalidParams(f"need n >= 1 and n_obs >= 1, got n={n}, n_obs={n_obs}")


def _draw_replications(n: int, n_obs: int, seed: int, workers: int) -> np.ndarray:
    """(n, n_obs + 2) open uniforms, one independent stream per row.

    Rows depend only on (seed, row), so the result is identical for any
    ``workers``.
    """
    if int(workers) < 1:
        raise InvalidParams(f"workers must be >= 1, got {workers}")
    u = np.empty((n, n_obs + 2))

    def fill(rows):
        for i in rows:
            u[i] = open_uniforms(replication_rng(seed, i), n_obs + 2)

    if workers == 1 or n < 2:
        fill(range(n))
    else:
        from concurrent.futures import ThreadPoolExecutor

        chunks = np.array_split(np.arange(n), min(int(workers), n))
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            list(pool.map(fill, chunks))
    return u


def sample_lognormal_scenario(n: int, seed: int, *, sigma_y: float = 0.2, sigma_mu: float = 0.2,
                              p: float = 0.0, n_obs: int = 1000, workers: int = 1) -> ScenarioSample:
    """log Y | mu ~ N(mu, sigma_y^2), mu ~ N(0, sigma_mu^2).

    Per replication: one mu, one tau in {+0.2, -0.2} and ``n_obs`` outcomes.
    ``p = 0`` gives the log-certainty-equivalent forecasts.
    """
    _check_counts(n, n_obs)
    if not (sigma_y > 0 and sigma_mu > 0):
        raise InvalidParams("sigma_y and sigma_mu must be > 0")
    if not (math.isfinite(p) and p >= 0):
        raise InvalidParams(f"p must be >= 0, got {p}")
    u = _draw_replications(n, n_obs, seed, workers)
    mu = sigma_mu * special.ndtri(u[:, 0])
    tau = np.where(u[:, 1] < 0.5, 0.2, -0.2)
    y = np.exp(mu[:, None] + sigma_y * special.ndtri(u[:, 2:]))
    sy2 = sigma_y**2
    forecasts = {
        "perfect": np.exp(mu + sy2 * p / 2),
        "unconditional": np.full(n, math.exp((sigma_mu**2 + sy2) * p / 2)),
        "unfocused": np.exp(mu + tau / 2 + sy2 * p / 4),
        "sign-reversed": np.exp(-mu + sy2 * p / 2),
    }
    return ScenarioSample("lognormal", seed, y, forecasts, {"mu": mu, "tau": tau})


def exponential_expectile_factor(q: float) -> float:
    """1 + W((2q-1)/((1-q)e)): the q-expectile of Exp(1)."""
    if not 0 < q < 1:
        raise InvalidParams(f"q must lie in (0, 1), got {q}")
    return 1.0 + lambert_w((2 * q - 1) / ((1 - q) * math.e)).value


def sample_exponential_scenario(n: int, seed: int, *, sigma_lambda: float = 0.2, q: float = 0.5,
                                n_obs: int = 1000, workers: int = 1) -> ScenarioSample:
    """Y | lambda ~ Exp(lambda), log(lambda) ~ N(0, sigma_lambda^2).

    Per replication: one lambda, one tau in {5/4, 4/5} and ``n_obs`` outcomes.
    """
    _check_counts(n, n_obs)
    if not sigma_lambda > 0:
        raise InvalidParams("sigma_lambda must be > 0")
    c = exponential_expectile_factor(q)
    u = _draw_replications(n, n_obs, seed, workers)
    lam = np.exp(sigma_lambda * special.ndtri(u[:, 0]))
    tau = np.where(u[:, 1] < 0.5, 1.25, 0.8)
    y = -np.log1p(-u[:, 2:]) / lam[:, None]
    forecasts = {
        "perfect": c / lam,
        "unfocused": c / (tau * lam),
        "mean-reversed": c * lam,
    }
    return ScenarioSample("exponential", seed, y, forecasts, {"lambda": lam, "tau": tau})
