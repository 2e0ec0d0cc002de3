from __future__ import annotations

import math

import pytest

from orlicz.errors import QuadratureFailure
from orlicz.quadrature import adaptive_simpson


@pytest.mark.parametrize("f,a,b,exact", [
    (math.exp, 0.0, 1.0, math.e - 1),
    (math.sin, 0.0, math.pi, 2.0),
    (lambda x: 1 / x, 1.0, 100.0, math.log(100.0)),
    (lambda x: math.sqrt(x), 0.0, 1.0, 2 / 3),
    (lambda x: abs(x - 0.3), 0.0, 1.0, 0.045 + 0.245),
])
def test_known_integrals(f, a, b, exact):
    assert adaptive_simpson(f, a, b) == pytest.approx(exact, abs=1e-9)


def test_orientation_and_empty():
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(1 - math.e, abs=1e-10)
    assert adaptive_simpson(math.exp, 2.0, 2.0) == 0.0


def test_step_function():
    # a jump is resolved to within the tolerance by bisection of the panel
    assert adaptive_simpson(lambda x: 1.0 if x > 0.3 else 0.0, 0.0, 1.0, abs_tol=1e-9) == pytest.approx(0.7, abs=1e-8)


def test_nonfinite():
    with pytest.raises(QuadratureFailure):
        adaptive_simpson(lambda x: math.inf, 0.0, 1.0)


def test_budget():
    with pytest.raises(QuadratureFailure):
        adaptive_simpson(lambda x: math.sin(1e4 * x * x), 0.0, 10.0, abs_tol=1e-14, max_evals=1000)
