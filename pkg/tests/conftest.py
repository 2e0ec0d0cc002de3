from __future__ import annotations

import numpy as np
import pytest

from orlicz.dist import make_distribution

_ACCEPTANCE: list[tuple[int, bool, str]] = []

# Default parameters used when a test sweeps the whole catalog.
CATALOG_PARAMS = {"p": 2.0, "q": 0.7, "alpha": 0.3, "lambda_mix": 0.4}


def random_dist(rng: np.random.Generator, lo=0.1, hi=10.0, size=(2, 50)):
    n = int(rng.integers(size[0], size[1] + 1))
    return make_distribution(rng.uniform(lo, hi, n), rng.dirichlet(np.ones(n)))


def random_dists(seed: int, count: int, **kw):
    rng = np.random.default_rng(seed)
    return [random_dist(rng, **kw) for _ in range(count)]


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE.append((number, bool(ok), detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
