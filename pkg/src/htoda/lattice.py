"""Chain lattices, Toda's dual transform chi, and tau-function diagnostics.

Momenta ``p_a`` with ``dp_a/dt = f_a`` and bond stretches ``q_a`` obey
``H = K(p) + U(q)`` with ``K = (1/2m) sum (p_{i+1} - p_i)^2`` and
``U = sum phi(q_i)``. With fixed ends (``p_0 = p_{N+1} = 0``) the kinetic
Hessian is the tridiagonal ``(2, -1)/m`` matrix; a periodic chain gives the
circulant matrix, whose zero eigenvalue (uniform translation of ``p``)
breaks strict convexity of ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex import ConjugatePair, QuadraticForm, separable
from .dynamics import (
    NESTED_TRIM,
    SeparableHamiltonian,
    Trajectory,
    VerificationReport,
    make_report,
)
from .errors import ConvexityError, DomainError, HypothesisError, ParameterError
from .finite_diff import cumulative_trapezoid, d2dt2, ddt
from .geometry import PD_THRESHOLD

BOUNDARIES = ("fixed", "periodic")


@dataclass(frozen=True)
class LatticeSpec:
    N: int
    m: float
    phi: ConjugatePair
    boundary: str = "fixed"

    def __post_init__(self):
        if self.N < 2:
            raise ParameterError(f"lattice needs N >= 2, got {self.N}")
        if not self.m > 0:
            raise ParameterError(f"mass must be positive, got {self.m}")
        if self.boundary not in BOUNDARIES:
            raise ParameterError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")


@dataclass(frozen=True)
class ChainHessian:
    N: int
    m: float
    boundary: str
    matrix: np.ndarray
    eigenvalues: np.ndarray

    @property
    def positive_definite(self) -> bool:
        return bool(self.eigenvalues[0] > PD_THRESHOLD)


def chain_matrix(N: int, m: float, boundary: str = "fixed") -> np.ndarray:
    """Hessian of ``(1/2m) sum_bonds (p_j - p_i)^2`` for the chosen boundary."""
    H = np.zeros((N, N))
    if boundary == "fixed":
        bonds = [(i, i + 1) for i in range(-1, N)]
    elif boundary == "periodic":
        bonds = [(i, (i + 1) % N) for i in range(N)]
    else:
        raise ParameterError(f"unknown boundary {boundary!r}")
    for i, j in bonds:
        for a, b, s in ((i, i, 1), (j, j, 1), (i, j, -1), (j, i, -1)):
            if 0 <= a < N and 0 <= b < N:
                H[a, b] += s
    return H / m


def chain_hessian(N: int, m: float, boundary: str = "fixed") -> ChainHessian:
    if N < 2 or not m > 0:
        raise ParameterError(f"chain needs N >= 2 and m > 0, got N={N}, m={m}")
    H = chain_matrix(N, m, boundary)
    return ChainHessian(N, m, boundary, H, np.linalg.eigvalsh(H))


def build_lattice_hamiltonian(spec: LatticeSpec) -> SeparableHamiltonian:
    ch = chain_hessian(spec.N, spec.m, spec.boundary)
    if not ch.positive_definite:
        lam = ch.eigenvalues[0]
        lam = 0.0 if abs(lam) < PD_THRESHOLD else lam
        raise ConvexityError(
            f"{spec.boundary} chain kinetic Hessian is not positive definite: "
            f"eigenvalue {lam:.6g} (K is not strictly convex)"
        )
    return SeparableHamiltonian(QuadraticForm(ch.matrix), separable(spec.phi, spec.N))


def chi(spec: LatticeSpec, p_dot):
    """``chi(p_dot) = -m dphi*/dq* at q* = -p_dot``."""
    return -spec.m * spec.phi.dual.d1(-np.asarray(p_dot, dtype=float))


def stencil(p: np.ndarray) -> np.ndarray:
    """``p_{a+1} + p_{a-1} - 2 p_a`` with ``p_0 = p_{N+1} = 0``."""
    padded = np.pad(p, [(0, 0), (1, 1)])
    return padded[:, 2:] + padded[:, :-2] - 2.0 * p


def verify_dual_lattice(traj: Trajectory, spec: LatticeSpec, tolerance=None) -> VerificationReport:
    """``d/dt chi(p_dot_a) = p_{a+1} + p_{a-1} - 2 p_a`` site by site."""
    p_dot = ddt(traj.p, traj.dt)
    try:
        c = chi(spec, p_dot)
    except DomainError as exc:
        raise DomainError(f"p_dot left the domain of chi: {exc}") from None
    lhs = ddt(c, traj.dt)
    return make_report("toda_dual", lhs - stencil(traj.p), traj.t, traj.dt, lhs, tolerance, trim=NESTED_TRIM)


def _require_unit_toda(spec: LatticeSpec):
    params = spec.phi.params
    if spec.phi.kind != "toda" or params.get("A") != 1 or params.get("B") != 1 or spec.m != 1:
        raise HypothesisError("tau-function identity is stated for the Toda potential with A = B = m = 1")


def tau_log(p: np.ndarray, dt: float) -> np.ndarray:
    """``ln tau_a(t) = int_{t0}^t p_a ds`` (trapezoidal, ``tau_a(t0) = 1``)."""
    return cumulative_trapezoid(p, dt)


def tau_invariant(traj: Trajectory) -> np.ndarray:
    """``ln(1 + p_dot_a) - ln(tau_{a+1} tau_{a-1} / tau_a^2)``, constant along solutions."""
    p_dot = ddt(traj.p, traj.dt)
    if np.any(1.0 + p_dot <= 0):
        raise DomainError("1 + p_dot <= 0: outside the domain of the Toda chi")
    return np.log1p(p_dot) - stencil(tau_log(traj.p, traj.dt))


def verify_tau(traj: Trajectory, spec: LatticeSpec, tolerance=None) -> VerificationReport:
    """Deviation of the tau invariant from its own time mean, per site."""
    _require_unit_toda(spec)
    inv = tau_invariant(traj)
    const = inv.mean(axis=0)
    dev = inv - const
    notes = f"per-site constants {const.tolist()} (0 means the bilinear identity holds exactly)"
    return make_report("tau", dev, traj.t, traj.dt, inv, tolerance, notes)


tau_diagnostic = verify_tau


def bilinear_residual(tau: np.ndarray, dt: float) -> np.ndarray:
    """``tau'' tau - tau'^2 - (tau_{a+1} tau_{a-1} - tau_a^2)`` with ``tau_0 = tau_{N+1} = 1``."""
    padded = np.pad(tau, [(0, 0), (1, 1)], constant_values=1.0)
    d1 = ddt(tau, dt)
    return d2dt2(tau, dt) * tau - d1**2 - (padded[:, 2:] * padded[:, :-2] - tau**2)
