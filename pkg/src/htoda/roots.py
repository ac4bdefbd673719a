"""Safeguarded Newton iteration for increasing scalar functions.

Every inverse map in the package (numeric Legendre conjugation, the
generalized exponential) reduces to solving ``fn(x) = target`` with ``fn``
strictly increasing on an open interval, so a single kernel handles all
of them: bracket by geometric expansion from a seed, then Newton steps
that fall back to bisection whenever they leave the bracket or stall.
"""

from __future__ import annotations

import math
from typing import Callable

from .errors import ConvergenceError, DomainError

MARGIN = 1e-10
XTOL = 1e-12
MAXITER = 200
_MAX_EXPAND = 2200


def _residual(fn, x, target):
    r = float(fn(x)) - target
    if math.isnan(r):
        raise DomainError(f"function is NaN at x={x!r}")
    return r


def bracket_increasing(
    fn: Callable[[float], float],
    target: float,
    lo: float = -math.inf,
    hi: float = math.inf,
    seed: float | None = None,
) -> tuple[float, float, float, float]:
    """Return ``(a, b, fa, fb)`` with ``fa <= 0 <= fb`` (residuals ``fn - target``).

    Raises DomainError when ``target`` is not in the image of ``fn`` over
    the usable part of ``(lo, hi)``.
    """
    lo_eff, hi_eff = lo + 2 * MARGIN, hi - 2 * MARGIN
    if seed is None:
        if math.isfinite(lo) and math.isfinite(hi):
            seed = 0.5 * (lo + hi)
        elif math.isfinite(lo):
            seed = lo + 1.0
        elif math.isfinite(hi):
            seed = hi - 1.0
        else:
            seed = 0.0
    x = min(max(seed, lo_eff), hi_eff)
    r = _residual(fn, x, target)
    if r == 0.0:
        return x, x, r, r
    direction = 1.0 if r < 0 else -1.0
    edge = hi_eff if direction > 0 else lo_eff
    step = max(1.0, abs(x))
    a, ra = x, r
    for _ in range(_MAX_EXPAND):
        if math.isfinite(edge):
            if a == edge:
                break
            cand = a + direction * step
            if direction * (cand - edge) >= 0:
                gap = abs(edge - a)
                cand = edge if gap <= 1e-13 * max(1.0, abs(edge)) else a + 0.5 * (edge - a)
        else:
            cand = a + direction * step
            if not math.isfinite(cand):
                break
        rc = _residual(fn, cand, target)
        if rc == 0.0:
            return cand, cand, rc, rc
        if (rc > 0) == (direction > 0):
            if direction > 0:
                return a, cand, ra, rc
            return cand, a, rc, ra
        a, ra = cand, rc
        step *= 2.0
    raise DomainError(f"target {target!r} is outside the image of the gradient map")


def solve_increasing(
    fn: Callable[[float], float],
    dfn: Callable[[float], float],
    target: float,
    lo: float = -math.inf,
    hi: float = math.inf,
    seed: float | None = None,
    xtol: float = XTOL,
    maxiter: int = MAXITER,
) -> float:
    """Solve ``fn(x) = target`` for strictly increasing ``fn`` on ``(lo, hi)``."""
    a, b, fa, fb = bracket_increasing(fn, target, lo, hi, seed)
    if a == b:
        return a
    x = a if abs(fa) < abs(fb) else b
    fx = fa if x == a else fb
    dx_old = b - a
    for _ in range(maxiter):
        d = float(dfn(x))
        newton = x - fx / d if d > 0 and math.isfinite(d) else math.nan
        if (
            not math.isfinite(newton)
            or not (a < newton < b)
            or abs(2.0 * fx) > abs(dx_old * d)
        ):
            x_new = 0.5 * (a + b)
        else:
            x_new = newton
        dx_old = x_new - x
        if abs(dx_old) <= xtol * max(1.0, abs(x)) or b - a <= xtol * max(1.0, abs(x)):
            return x_new
        x = x_new
        fx = _residual(fn, x, target)
        if fx == 0.0:
            return x
        if fx < 0:
            a = x
        else:
            b = x
    raise ConvergenceError(
        f"safeguarded Newton did not converge in {maxiter} iterations (target={target!r})"
    )
