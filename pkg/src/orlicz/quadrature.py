"""Adaptive Simpson quadrature."""

from __future__ import annotations

import math
from typing import Callable

from .errors import QuadratureFailure


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, *, abs_tol: float = 1e-10,
                     rel_tol: float = 1e-13, max_depth: int = 60, max_evals: int = 2_000_000) -> float:
    """Integrate ``f`` over [a, b] with Richardson-corrected adaptive Simpson.

    A panel is accepted when |S_left + S_right - S_whole| <= 15 * tol_panel,
    where the tolerance is split in half at each bisection. The global target
    is ``max(abs_tol, rel_tol * |coarse estimate|)``. Orientation is honoured:
    ``b < a`` returns the negated integral.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    if not math.isfinite(whole):
        raise QuadratureFailure(f"non-finite integrand on [{a}, {b}]")
    tol = max(abs_tol, rel_tol * abs(whole))

    total = 0.0
    comp = 0.0  # Kahan compensation
    unresolved = 0.0
    evals = 3
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        evals += 2
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s
        if not math.isfinite(delta):
            raise QuadratureFailure(f"non-finite integrand near [{lo}, {hi}]")
        if depth >= 4 and (abs(delta) <= 15.0 * eps or depth >= max_depth or mid in (lo, hi)):
            if abs(delta) > 15.0 * eps:
                unresolved += abs(delta) / 15.0
            y = left + right + delta / 15.0 - comp
            t = total + y
            comp = (t - total) - y
            total = t
            continue
        if evals > max_evals:
            raise QuadratureFailure(f"evaluation budget exhausted ({max_evals})")
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    if unresolved > tol:
        raise QuadratureFailure(f"unresolved error {unresolved:.3g} exceeds tolerance {tol:.3g} on [{a}, {b}]")
    return sign * total
