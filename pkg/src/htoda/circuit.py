"""Series LC circuit as a natural Hamiltonian system.

The state ``(Q, Phi)`` plays the role of ``(q, p)``: the capacitor energy
``E_C(Q)`` is the potential, the inductor energy ``E_L(Phi)`` the kinetic
term, so ``dQ/dt = I = E_L'(Phi)`` and ``dPhi/dt = -V = -E_C'(Q)``. The
co-energies ``E*_C(V)`` and ``E*_L(I)`` are the Legendre duals, making the
voltage ``V`` and current ``I`` the dual coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex import (
    ConjugatePair,
    ConvexScalarFunction,
    SeparableConvexFunction,
    make_quadratic,
)
from .dynamics import (
    NESTED_TRIM,
    SeparableHamiltonian,
    Trajectory,
    VerificationReport,
    integrate,
    make_report,
)
from .errors import HypothesisError, ParameterError
from .finite_diff import d2dt2, ddt


@dataclass(frozen=True)
class CircuitSpec:
    """Co-energy pairs: ``EC_star.primal = E*_C(V)``, ``EC_star.dual = E_C(Q)``; same for L."""

    EL_star: ConjugatePair
    EC_star: ConjugatePair

    def hamiltonian(self) -> SeparableHamiltonian:
        K = SeparableConvexFunction((self.EL_star.dual,), None, (self.EL_star.primal,), "E_L")
        U = SeparableConvexFunction((self.EC_star.dual,), None, (self.EC_star.primal,), "E_C")
        return SeparableHamiltonian(K, U)

    def voltage(self, Q):
        return self.EC_star.dual.d1(Q)

    def current(self, Phi):
        return self.EL_star.dual.d1(Phi)

    def charge(self, V):
        return self.EC_star.primal.d1(V)

    def flux(self, I):
        return self.EL_star.primal.d1(I)


@dataclass(frozen=True)
class CircuitState:
    Q: float
    Phi: float
    spec: CircuitSpec

    @property
    def V(self) -> float:
        return float(self.spec.voltage(self.Q))

    @property
    def I(self) -> float:  # noqa: E743
        return float(self.spec.current(self.Phi))


def _inductor(L: float) -> ConjugatePair:
    """``E*_L(I) = L I^2 / 2`` paired with ``E_L(Phi) = Phi^2 / (2L)``."""
    pair = make_quadratic(L)
    return ConjugatePair(pair.primal, pair.dual, kind="quadratic", params={"L": L, "k": L})


def make_linear_circuit(L: float, C0: float) -> CircuitSpec:
    if not (L > 0 and C0 > 0):
        raise ParameterError(f"L and C0 must be positive, got L={L}, C0={C0}")
    cap = make_quadratic(C0)
    return CircuitSpec(_inductor(L), ConjugatePair(cap.primal, cap.dual, kind="quadratic", params={"C0": C0, "k": C0}))


def make_log_capacitor_circuit(L: float, Q0: float, V0: float) -> CircuitSpec:
    """Linear inductor with the capacitor law ``Q(V) = Q0 ln(1 + V/V0)`` on ``V > -V0``."""
    if not (L > 0 and Q0 > 0 and V0 > 0):
        raise ParameterError(f"L, Q0, V0 must be positive, got L={L}, Q0={Q0}, V0={V0}")

    def r(V):
        return 1.0 + np.asarray(V, dtype=float) / V0

    co_energy = ConvexScalarFunction(
        lambda V: Q0 * V0 * (r(V) * np.log(r(V)) - (r(V) - 1.0)),
        lambda V: Q0 * np.log(r(V)),
        lambda V: Q0 / (np.asarray(V, dtype=float) + V0),
        lambda V: -Q0 / (np.asarray(V, dtype=float) + V0) ** 2,
        domain_lo=-V0,
        label=f"E*_C(Q0={Q0},V0={V0})",
    )

    def ex(Q):
        return np.exp(np.asarray(Q, dtype=float) / Q0)

    energy = ConvexScalarFunction(
        lambda Q: V0 * (Q0 * ex(Q) - np.asarray(Q, dtype=float) - Q0),
        lambda Q: V0 * (ex(Q) - 1.0),
        lambda Q: V0 / Q0 * ex(Q),
        lambda Q: V0 / Q0**2 * ex(Q),
        label=f"E_C(Q0={Q0},V0={V0})",
    )
    cap = ConjugatePair(co_energy, energy, kind="log_capacitor", params={"Q0": Q0, "V0": V0})
    return CircuitSpec(_inductor(L), cap)


def simulate_lc(spec: CircuitSpec, Q0_init: float, Phi0_init: float, dt: float, steps: int) -> Trajectory:
    return integrate(spec.hamiltonian(), [Q0_init], [Phi0_init], dt, steps)


def _inductor_curvature(spec: CircuitSpec) -> tuple[float, float]:
    """``(h_L, E_L'(0))`` for a quadratic inductor energy; HypothesisError otherwise."""
    EL = spec.EL_star.dual
    if not EL.is_quadratic:
        probe = np.array([-0.5, 0.0, 0.5])
        if not (np.allclose(EL.d3fn(probe), 0.0) and np.ptp(EL.d2fn(probe)) == 0):
            raise HypothesisError("requires constant d^2 E_L / dPhi^2 (quadratic inductor energy)")
    return float(EL.d2fn(0.0)), float(EL.dfn(0.0))


def verify_lc_thm_3_1(traj: Trajectory, spec: CircuitSpec, tolerance=None) -> VerificationReport:
    """``d/dt [dE*_C/dV at V = -dPhi/dt] = h_L Phi + const``, const = ``E_L'(0)``."""
    h_L, const = _inductor_curvature(spec)
    Phi = traj.p[:, 0]
    V = -ddt(Phi, traj.dt)
    lhs = ddt(spec.charge(V), traj.dt)
    rhs = h_L * Phi + const
    return make_report("lc_3_1", lhs - rhs, traj.t, traj.dt, lhs, tolerance, f"h_L={h_L}, const={const}", trim=NESTED_TRIM)


def verify_lc_thm_3_2(traj: Trajectory, spec: CircuitSpec, tolerance=None) -> VerificationReport:
    """``C*(V') ^2 + h*_C V'' = -h_L V`` with ``V = E_C'(Q)`` along the trajectory."""
    V = spec.voltage(traj.q[:, 0])
    Vd, Vdd = ddt(V, traj.dt), d2dt2(V, traj.dt)
    cap = spec.EC_star.primal
    h_L = spec.EL_star.dual.d2(traj.p[:, 0])
    lhs = cap.d3(V) * Vd**2 + cap.d2(V) * Vdd
    return make_report("lc_3_2", lhs + h_L * V, traj.t, traj.dt, lhs, tolerance)


def circuit_table(traj: Trajectory, spec: CircuitSpec) -> np.ndarray:
    """Columns ``t, Q, Phi, V, I, energy``."""
    Q, Phi = traj.q[:, 0], traj.p[:, 0]
    energy = spec.EC_star.dual.eval(Q) + spec.EL_star.dual.eval(Phi)
    return np.column_stack([traj.t, Q, Phi, spec.voltage(Q), spec.current(Phi), energy])
