"""Finite differences: pointwise derivative checks and time derivatives on uniform grids."""

from __future__ import annotations

import numpy as np

from .errors import GridError


def fd_step(x):
    """Central-difference step ``max(1e-5, 1e-5 |x|)``."""
    return np.maximum(1e-5, 1e-5 * np.abs(x))


def central_diff(f, x):
    h = fd_step(x)
    return (f(x + h) - f(x - h)) / (2.0 * h)


def central_diff4(f, x, h):
    """Fourth-order five-point central difference; ``f`` may return arrays."""
    return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)


def ddt(y, dt):
    """First time derivative along axis 0; one-sided second order at both ends."""
    y = np.asarray(y, dtype=float)
    if y.shape[0] < 3:
        raise GridError(f"need at least 3 samples, got {y.shape[0]}")
    return np.gradient(y, dt, axis=0, edge_order=2)


def d2dt2(y, dt):
    """Second time derivative along axis 0 (3-point interior, 4-point one-sided ends)."""
    y = np.asarray(y, dtype=float)
    if y.shape[0] < 4:
        raise GridError(f"need at least 4 samples, got {y.shape[0]}")
    out = np.empty_like(y)
    out[1:-1] = y[2:] - 2.0 * y[1:-1] + y[:-2]
    out[0] = 2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]
    out[-1] = 2.0 * y[-1] - 5.0 * y[-2] + 4.0 * y[-3] - y[-4]
    return out / dt**2


def cumulative_trapezoid(y, dt):
    """Running trapezoidal integral along axis 0, starting at 0."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * dt * (y[1:] + y[:-1]), axis=0)
    return out
