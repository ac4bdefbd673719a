"""Hessian metrics, cubic forms and alpha-connection coefficients at a point.

Index placement is carried by ``coordinate_tag``: arrays computed in the
primal (``p`` or ``q``) coordinates are tagged ``"primal"``, those in the
dual coordinates ``"dual"``. The flat connections of the primal and dual
affine coordinates have vanishing coefficients and are not stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .convex import ConjugatePair, Energy, QuadraticForm, as_energy
from .errors import ConvexityError, DomainError
from .finite_diff import central_diff4, fd_step

PD_THRESHOLD = 1e-10


@dataclass(frozen=True)
class MetricComponents:
    g: np.ndarray
    coordinate_tag: str = "primal"
    energy_tag: str = "U"

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def inverse(self) -> "MetricComponents":
        tag = "dual" if self.coordinate_tag == "primal" else "primal"
        inv = np.linalg.inv(self.g)
        return MetricComponents(0.5 * (inv + inv.T), tag, self.energy_tag)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.g)


@dataclass(frozen=True)
class CubicComponents:
    C: np.ndarray
    coordinate_tag: str = "primal"
    energy_tag: str = "U"

    @property
    def n(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class ConnectionCoefficients:
    Gamma: np.ndarray
    alpha: float
    coordinate_tag: str = "dual"

    @property
    def n(self) -> int:
        return self.Gamma.shape[0]


def check_positive_definite(g: np.ndarray, what: str = "metric") -> np.ndarray:
    """Return eigenvalues of symmetric ``g``; raise ConvexityError unless all exceed 1e-10."""
    if not np.allclose(g, g.T, rtol=0, atol=1e-12):
        raise ConvexityError(f"{what} is not symmetric")
    lam = np.linalg.eigvalsh(g)
    if lam[0] <= PD_THRESHOLD:
        worst = 0.0 if abs(lam[0]) < PD_THRESHOLD else lam[0]
        raise ConvexityError(
            f"{what} is not positive definite: eigenvalue {worst:.6g} <= {PD_THRESHOLD:g} "
            f"(spectrum {np.array2string(lam, precision=6)})"
        )
    return lam


def _point(f: Energy, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not f.contains(x):
        raise DomainError(f"point {x.tolist()} outside the domain of {f.label}")
    return x


def metric_at(f, x, coordinate_tag: str = "primal", energy_tag: str = "U") -> MetricComponents:
    """Hessian of ``f`` at ``x`` (diagonal for separable energies, ``M`` for quadratics)."""
    f = as_energy(f, np.size(x))
    x = _point(f, x)
    g = np.asarray(f.hessian(x), dtype=float)
    check_positive_definite(g)
    return MetricComponents(g, coordinate_tag, energy_tag)


def cubic_at(f, x, coordinate_tag: str = "primal", energy_tag: str = "U") -> CubicComponents:
    f = as_energy(f, np.size(x))
    x = _point(f, x)
    return CubicComponents(np.asarray(f.third(x), dtype=float), coordinate_tag, energy_tag)


def alpha_connection(cubic: CubicComponents, alpha: float) -> ConnectionCoefficients:
    """``Gamma^(alpha) = (1 - alpha)/2 * C``."""
    return ConnectionCoefficients(0.5 * (1.0 - alpha) * cubic.C, float(alpha), cubic.coordinate_tag)


def metric_derivative_fd(metric_field: Callable[[np.ndarray], MetricComponents], x) -> np.ndarray:
    """``D[a, b, c] = d g_bc / d x_a`` by five-point central differences.

    Fourth order keeps truncation below round-off even where the metric
    varies steeply, e.g. close to a domain edge.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    out = np.empty((n, n, n))
    for a in range(n):
        e = np.zeros(n)
        e[a] = 1.0
        out[a] = central_diff4(lambda s: metric_field(x + s * e).g, 0.0, float(fd_step(x[a])))
    return out


def connection_duality_residual(
    cubic: CubicComponents,
    metric_field: Callable[[np.ndarray], MetricComponents],
    x,
    alpha: float,
) -> float:
    """``max |Gamma^(alpha) + Gamma^(-alpha) - d h|`` with the metric derivative by finite differences."""
    lhs = alpha_connection(cubic, alpha).Gamma + alpha_connection(cubic, -alpha).Gamma
    return float(np.max(np.abs(lhs - metric_derivative_fd(metric_field, x))))


def metric_field_of(f, coordinate_tag: str = "primal", energy_tag: str = "U"):
    def field_(x):
        return metric_at(f, x, coordinate_tag, energy_tag)

    return field_


def basis_pairing_check(pair: ConjugatePair, x) -> float:
    """Deviation of ``h(d/dq, d/dq*)`` from the identity.

    The Jacobian ``dq/dq*`` is the dual Hessian at ``q* = f'(q)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = np.asarray(pair.primal.d2(x), dtype=float)
    jac = np.asarray(pair.dual.d2(pair.primal.d1(x)), dtype=float)
    return float(np.max(np.abs(h * jac - 1.0)))


@dataclass
class GeometryReport:
    point: np.ndarray
    metric: np.ndarray
    inverse_metric: np.ndarray
    cubic: np.ndarray
    gamma_alpha: dict[float, np.ndarray] = field(default_factory=dict)
    coordinate_tag: str = "primal"
    eigenvalues: np.ndarray | None = None

    def to_json(self) -> dict:
        out = {
            "point": np.atleast_1d(self.point).tolist(),
            "coordinate_tag": self.coordinate_tag,
            "metric": self.metric.tolist(),
            "inverse_metric": self.inverse_metric.tolist(),
            "cubic": self.cubic.tolist(),
            "gamma_alpha": {repr(float(a)): g.tolist() for a, g in self.gamma_alpha.items()},
        }
        if self.eigenvalues is not None:
            out["eigenvalues"] = self.eigenvalues.tolist()
        return out


def geometry_report(f, x, alphas: Iterable[float] = (-1.0, 0.0, 1.0), coordinate_tag: str = "primal") -> GeometryReport:
    f = as_energy(f, np.size(x))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    metric = metric_at(f, x, coordinate_tag)
    cubic = cubic_at(f, x, coordinate_tag)
    return GeometryReport(
        point=x,
        metric=metric.g,
        inverse_metric=metric.inverse().g,
        cubic=cubic.C,
        gamma_alpha={float(a): alpha_connection(cubic, a).Gamma for a in alphas},
        coordinate_tag=coordinate_tag,
        eigenvalues=metric.eigenvalues() if isinstance(f, QuadraticForm) else None,
    )
