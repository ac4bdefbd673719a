"""Convex conjugate pairs, Hessian geometry and dual-coordinate checks for natural Hamiltonians."""

from .circuit import CircuitSpec, make_linear_circuit, make_log_capacitor_circuit, simulate_lc
from .convex import (
    ConjugatePair,
    ConvexScalarFunction,
    QuadraticForm,
    SeparableConvexFunction,
    bregman_divergence,
    conjugate_numeric,
    make_phi_deformed,
    make_power_potential,
    make_quadratic,
    make_toda_potential,
    potential_from_spec,
)
from .dynamics import SeparableHamiltonian, Trajectory, VerificationReport, integrate
from .errors import (
    ConvergenceError,
    ConvexityError,
    DomainError,
    GridError,
    HtodaError,
    HypothesisError,
    MonotonicityError,
    ParameterError,
    QuadratureError,
)
from .geometry import alpha_connection, cubic_at, geometry_report, metric_at
from .lattice import LatticeSpec, build_lattice_hamiltonian, chain_hessian

__version__ = "0.1.0"
