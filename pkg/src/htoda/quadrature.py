"""Adaptive Simpson quadrature."""

from __future__ import annotations

import math
from typing import Callable

from .errors import QuadratureError

MAX_DEPTH = 48


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = MAX_DEPTH,
) -> float:
    """Integrate ``f`` over ``[a, b]``.

    ``tol`` is relative to the magnitude of the integral (absolute when the
    integral is below one). Raises QuadratureError when an interval would need
    more than ``max_depth`` bisections.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    if not math.isfinite(whole):
        raise QuadratureError(f"integrand not finite on [{a}, {b}]")
    eps = tol * max(1.0, abs(whole))
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, eps, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, e, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        h = hi - lo
        left = h / 12.0 * (flo + 4.0 * flm + fmid)
        right = h / 12.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - est
        if abs(delta) <= 15.0 * e or h <= 1e-14 * max(1.0, abs(mid)):
            if not math.isfinite(delta):
                raise QuadratureError(f"integrand not finite near {mid}")
            total += left + right + delta / 15.0
            continue
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson exceeded depth {max_depth} near {mid} (tol={tol})"
            )
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * e, depth + 1))
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * e, depth + 1))
    return sign * total
