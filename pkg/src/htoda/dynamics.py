"""Natural Hamiltonian systems ``H = K(p) + U(q)``: integration and residual checks.

Every ``verify_*`` function differentiates the stored trajectory with
second-order finite differences and compares the two sides of an identity
sample by sample. Residuals therefore shrink as ``dt**2``; the default
tolerance is ``50 dt^2`` times the largest magnitude of the identity's left
side, never below ``1e-10`` so that sides vanishing identically are judged
against round-off only. Checks that differentiate an already differentiated series drop the
two outermost samples at each end, where a one-sided stencil feeds a
central one and the error is only first order.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property

import numpy as np

from .convex import Energy, QuadraticForm, SeparableConvexFunction
from .errors import DomainError, GridError, HypothesisError
from .finite_diff import d2dt2, ddt, fd_step
from .geometry import CubicComponents, alpha_connection, check_positive_definite

log = logging.getLogger(__name__)

THEOREM_IDS = (
    "dual_first_order",
    "thm_2_1",
    "thm_2_2",
    "prop_2_3",
    "prop_2_4",
    "prop_2_5",
    "j_function",
    "toda_dual",
    "tau",
    "lc_3_1",
    "lc_3_2",
)

NESTED_TRIM = 2


@dataclass(frozen=True)
class SeparableHamiltonian:
    """``H(q, p) = K(p) + U(q)``; ``U=None`` is the vanishing potential."""

    K: Energy
    U: Energy | None = None

    def __post_init__(self):
        if self.U is not None and self.U.n != self.K.n:
            raise ValueError(f"K has dimension {self.K.n} but U has {self.U.n}")
        if isinstance(self.K, QuadraticForm):
            check_positive_definite(self.K.M, "kinetic Hessian h_K")
        if isinstance(self.U, QuadraticForm):
            check_positive_definite(self.U.M, "potential Hessian h_U")

    @property
    def n(self) -> int:
        return self.K.n

    @cached_property
    def K_star(self) -> Energy:
        return self.K.conjugate()

    @cached_property
    def U_star(self) -> Energy:
        if self.U is None:
            raise HypothesisError("vanishing potential has no Legendre transform")
        return self.U.conjugate()

    def energy(self, q, p):
        e = self.K.value(p)
        return e if self.U is None else e + self.U.value(q)

    def force(self, q):
        q = np.asarray(q, dtype=float)
        if self.U is None:
            return np.zeros_like(q)
        return -self.U.grad(q)

    def velocity(self, p):
        return self.K.grad(p)

    def q_star(self, q):
        q = np.asarray(q, dtype=float)
        return np.zeros_like(q) if self.U is None else self.U.grad(q)

    def p_star(self, p):
        return self.K.grad(p)


@dataclass(frozen=True)
class Trajectory:
    """Samples ``q[k], p[k]`` at ``t0 + k dt`` for ``k = 0..steps``."""

    t0: float
    dt: float
    q: np.ndarray
    p: np.ndarray
    hamiltonian: SeparableHamiltonian | None = field(default=None, compare=False)

    @property
    def steps(self) -> int:
        return self.q.shape[0] - 1

    @property
    def n(self) -> int:
        return self.q.shape[1]

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.q.shape[0])

    def _h(self) -> SeparableHamiltonian:
        if self.hamiltonian is None:
            raise HypothesisError("trajectory has no Hamiltonian attached")
        return self.hamiltonian

    @cached_property
    def q_star(self) -> np.ndarray:
        return self._h().q_star(self.q)

    @cached_property
    def p_star(self) -> np.ndarray:
        return self._h().p_star(self.p)

    @cached_property
    def energy(self) -> np.ndarray:
        return self._h().energy(self.q, self.p)

    def state_at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Cubic Hermite interpolation using the Hamiltonian vector field as slopes."""
        h = self._h()
        s = (t - self.t0) / self.dt
        k = int(min(max(math.floor(s), 0), self.steps - 1))
        u = s - k
        h00, h10 = 2 * u**3 - 3 * u**2 + 1, u**3 - 2 * u**2 + u
        h01, h11 = -2 * u**3 + 3 * u**2, u**3 - u**2
        q0, q1, p0, p1 = self.q[k], self.q[k + 1], self.p[k], self.p[k + 1]
        q = h00 * q0 + h01 * q1 + self.dt * (h10 * h.velocity(p0) + h11 * h.velocity(p1))
        p = h00 * p0 + h01 * p1 + self.dt * (h10 * h.force(q0) + h11 * h.force(q1))
        return q, p


def integrate(h: SeparableHamiltonian, q0, p0, dt: float, steps: int, t0: float = 0.0) -> Trajectory:
    """Stormer-Verlet (kick-drift-kick). Negative ``dt`` integrates backwards."""
    if dt == 0 or not math.isfinite(dt):
        raise ValueError(f"dt must be finite and nonzero, got {dt}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    n = h.n
    q = np.empty((steps + 1, n))
    p = np.empty((steps + 1, n))
    q[0] = np.broadcast_to(np.asarray(q0, dtype=float), (n,))
    p[0] = np.broadcast_to(np.asarray(p0, dtype=float), (n,))
    _check_state(h, q[0], p[0], 0)
    f = h.force(q[0])
    half = 0.5 * dt
    for k in range(steps):
        p_half = p[k] + half * f
        if not h.K.contains(p_half):
            raise DomainError(f"step {k + 1}: momentum left the domain of K")
        q[k + 1] = q[k] + dt * h.velocity(p_half)
        _check_state(h, q[k + 1], p_half, k + 1)
        f = h.force(q[k + 1])
        p[k + 1] = p_half + half * f
    return Trajectory(t0, dt, q, p, h)


def _check_state(h, q, p, k):
    if h.U is not None and not h.U.contains(q):
        raise DomainError(f"step {k}: q={q.tolist()} left the strictly convex domain of U")
    if not h.K.contains(p):
        raise DomainError(f"step {k}: p={p.tolist()} left the strictly convex domain of K")


# ---------------------------------------------------------------------------
# reports


@dataclass
class VerificationReport:
    theorem_id: str
    max_residual: float
    mean_residual: float
    tolerance: float
    passed: bool
    notes: str = ""
    series: np.ndarray | None = field(default=None, repr=False)
    t: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("series")
        d.pop("t")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


ROUNDOFF_FLOOR = 1e-10


def default_tolerance(dt: float, lhs) -> float:
    """``50 dt^2 max|lhs|``, floored so identically vanishing sides still pass on round-off."""
    scale = float(np.max(np.abs(lhs))) if np.size(lhs) else 0.0
    return max(50.0 * dt**2 * scale, ROUNDOFF_FLOOR)


def make_report(theorem_id, residual, t, dt, lhs, tolerance=None, notes="", trim=0) -> VerificationReport:
    residual = np.asarray(residual, dtype=float)
    t = np.asarray(t, dtype=float)
    lhs = np.asarray(lhs, dtype=float)
    if trim:
        residual, t, lhs = residual[trim:-trim], t[trim:-trim], lhs[trim:-trim]
    if residual.ndim == 1:
        residual = residual[:, None]
    tol = default_tolerance(dt, lhs) if tolerance is None else float(tolerance)
    abs_res = np.abs(residual)
    mx = float(np.max(abs_res)) if abs_res.size else 0.0
    mean = float(np.mean(abs_res)) if abs_res.size else 0.0
    report = VerificationReport(theorem_id, mx, mean, tol, bool(mx <= tol), notes, residual, t)
    log.info("%s: max residual %.3e (tol %.3e) %s", theorem_id, mx, tol, "PASS" if report.passed else "FAIL")
    return report


def _require_quadratic_K(h: SeparableHamiltonian, what: str) -> QuadraticForm:
    if isinstance(h.K, QuadraticForm):
        return h.K
    if isinstance(h.K, SeparableConvexFunction) and h.K.is_quadratic:
        diag = h.K.hess_diag(np.zeros((1, h.n)))[0]
        return QuadraticForm(np.diag(diag), h.K.grad(np.zeros(h.n)))
    raise HypothesisError(f"{what} requires constant h_K (quadratic kinetic energy)")


def _require_U(h: SeparableHamiltonian, what: str):
    if h.U is None:
        raise HypothesisError(f"{what} requires a non-vanishing potential")
    return h.U


def _min_samples(traj: Trajectory, k: int):
    if traj.q.shape[0] < k:
        raise GridError(f"need at least {k} samples, trajectory has {traj.q.shape[0]}")


# ---------------------------------------------------------------------------
# identities


def verify_dual_first_order(traj: Trajectory, h: SeparableHamiltonian, tolerance=None) -> VerificationReport:
    """``d/dt dU*/dq* = p*`` and ``d/dt dK*/dp* = -q*``."""
    _min_samples(traj, 3)
    dt = traj.dt
    traj = Trajectory(traj.t0, dt, traj.q, traj.p, h)
    p_rec = h.K_star.grad(traj.p_star)
    k_lhs = ddt(p_rec, dt)
    k_res = k_lhs + traj.q_star
    notes = ""
    if h.U is None:
        notes = "U == 0: U*-branch skipped"
        residual, lhs = k_res, k_lhs
    else:
        u_lhs = ddt(h.U_star.grad(traj.q_star), dt)
        residual = np.concatenate([u_lhs - traj.p_star, k_res], axis=1)
        lhs = np.concatenate([u_lhs, k_lhs], axis=1)
    return make_report("dual_first_order", residual, traj.t, dt, lhs, tolerance, notes)


def toda_transform_g(traj: Trajectory, h: SeparableHamiltonian) -> np.ndarray:
    """``g_a(t) = dU*/dq*_a`` evaluated at ``q* = -dp/dt``."""
    U_star = h.U_star
    p_dot = ddt(traj.p, traj.dt)
    return U_star.grad(-p_dot)


def verify_thm_2_1(traj: Trajectory, h: SeparableHamiltonian, hK: QuadraticForm | np.ndarray | None = None, tolerance=None) -> VerificationReport:
    """``d/dt [dU*/dq*_a at q* = -p_dot] = h_K^{ab} p_b + h_K^{a(0)}``.

    ``h_K^{a(0)}`` is the linear coefficient of the quadratic kinetic energy.
    Passing a different ``hK`` than the system's own is how negative controls
    are run.
    """
    K = _require_quadratic_K(h, "generalized dual transform")
    _require_U(h, "generalized dual transform")
    _min_samples(traj, 2 * NESTED_TRIM + 3)
    if hK is None:
        hK = K
    elif not isinstance(hK, QuadraticForm):
        hK = QuadraticForm(np.asarray(hK, dtype=float), K.c)
    lhs = ddt(toda_transform_g(traj, h), traj.dt)
    rhs = traj.p @ hK.M.T + hK.c
    notes = f"fitted intercept {transform_intercept(traj, h, hK).tolist()} vs h_K^(0) {hK.c.tolist()}"
    return make_report("thm_2_1", lhs - rhs, traj.t, traj.dt, lhs, tolerance, notes, trim=NESTED_TRIM)


def transform_intercept(traj: Trajectory, h: SeparableHamiltonian, hK: QuadraticForm | None = None) -> np.ndarray:
    """Time mean of ``dg/dt - h_K p``: the empirical ``h_K^{a(0)}``."""
    hK = hK or _require_quadratic_K(h, "intercept fit")
    offset = ddt(toda_transform_g(traj, h), traj.dt) - traj.p @ hK.M.T
    return np.mean(offset[NESTED_TRIM:-NESTED_TRIM], axis=0)


def _dual_kinematics(traj: Trajectory, h: SeparableHamiltonian):
    qs = h.q_star(traj.q)
    return qs, ddt(qs, traj.dt), d2dt2(qs, traj.dt)


def hessian_form_terms(traj: Trajectory, h: SeparableHamiltonian, use_gamma0: bool = False):
    """Left side ``C q*' q*' + h_U q*''`` of the Hessian-geometric equation of motion."""
    qs, v, a = _dual_kinematics(traj, h)
    cubic = CubicComponents(h.U_star.third(qs), "dual")
    C = 2.0 * alpha_connection(cubic, 0.0).Gamma if use_gamma0 else cubic.C
    hU = h.U_star.hessian(qs)
    return np.einsum("kabc,kb,kc->ka", C, v, v) + np.einsum("kab,kb->ka", hU, a), qs


def verify_thm_2_2(traj: Trajectory, h: SeparableHamiltonian, hK=None, tolerance=None, use_gamma0: bool = False) -> VerificationReport:
    """``C^{abc} q*'_b q*'_c + h_U^{ab} q*''_b = -h_K^{ab} q*_b``."""
    K = _require_quadratic_K(h, "Hessian-form equations of motion")
    _require_U(h, "Hessian-form equations of motion")
    _min_samples(traj, 4)
    M = K.M if hK is None else np.asarray(getattr(hK, "M", hK), dtype=float)
    lhs, qs = hessian_form_terms(traj, h, use_gamma0)
    rhs = -qs @ M.T
    return make_report("thm_2_2", lhs - rhs, traj.t, traj.dt, lhs, tolerance, "Gamma(0) form" if use_gamma0 else "")


def alpha_form_residual(traj: Trajectory, h: SeparableHamiltonian, alpha: float, M: np.ndarray):
    """Residual of ``q*'' + h^U Gamma^(alpha) q*' q*' = -h^U h_K q*`` and its left side."""
    qs, v, a = _dual_kinematics(traj, h)
    gamma = 0.5 * (1.0 - alpha) * h.U_star.third(qs)
    hU_lower = h.U.hessian(traj.q)
    lhs = a + np.einsum("kij,kjbc,kb,kc->ki", hU_lower, gamma, v, v)
    rhs = -np.einsum("kij,jb,kb->ki", hU_lower, M, qs)
    return lhs - rhs, lhs


def verify_alpha_forms(traj: Trajectory, h: SeparableHamiltonian, hK=None, tolerance=None, theorem_id: str = "prop_2_3") -> VerificationReport:
    """Alpha = -1 form always; alpha = +1 form too when ``U`` is quadratic."""
    K = _require_quadratic_K(h, "alpha-connection forms")
    U = _require_U(h, "alpha-connection forms")
    _min_samples(traj, 4)
    M = K.M if hK is None else np.asarray(getattr(hK, "M", hK), dtype=float)
    res_m, lhs_m = alpha_form_residual(traj, h, -1.0, M)
    if U.is_quadratic:
        res_p, lhs_p = alpha_form_residual(traj, h, 1.0, M)
        residual = np.concatenate([res_m, res_p], axis=1)
        lhs = np.concatenate([lhs_m, lhs_p], axis=1)
        notes = "alpha=-1 and alpha=+1 forms checked (U quadratic)"
    else:
        if theorem_id == "prop_2_4":
            raise HypothesisError("the alpha=+1 form is only asserted for quadratic U")
        residual, lhs = res_m, lhs_m
        notes = "alpha=-1 form only; alpha=+1 not asserted (U non-quadratic)"
    return make_report(theorem_id, residual, traj.t, traj.dt, lhs, tolerance, notes)


def verify_vanishing_potential(traj: Trajectory, h: SeparableHamiltonian, tolerance: float | None = None) -> VerificationReport:
    """With ``U == 0``: ``p`` and ``p*`` constant, ``q(t) = p* t + q(0)``."""
    if h.U is not None:
        raise HypothesisError("vanishing-potential check requires U == 0")
    ps = h.p_star(traj.p)
    dp = np.abs(traj.p - traj.p[0])
    dps = np.abs(ps - ps[0])
    affine = traj.q[0] + np.outer(traj.t - traj.t0, ps[0])
    scale = max(1.0, float(np.max(np.abs(traj.q))))
    dq = np.abs(traj.q - affine) / scale
    residual = np.concatenate([dp, dps, dq], axis=1)
    tol = 1e-10 if tolerance is None else tolerance
    return make_report(
        "prop_2_5", residual, traj.t, traj.dt, residual, tol,
        f"max |dp|={dp.max():.3e}, max |dp*|={dps.max():.3e}, max rel q-affine dev={dq.max():.3e}",
    )


def j_function(h: SeparableHamiltonian, p_star, q_star):
    """``J(p*, -q*) = -(K*(p*) + U*(q*))``."""
    _require_U(h, "J function")
    return -(h.K_star.value(np.asarray(p_star, float)) + h.U_star.value(np.asarray(q_star, float)))


def j_gradient_fd(h: SeparableHamiltonian, p_star, q_star) -> tuple[np.ndarray, np.ndarray]:
    p_star = np.asarray(p_star, dtype=float)
    q_star = np.asarray(q_star, dtype=float)
    n = p_star.size
    gp, gq = np.empty(n), np.empty(n)
    for a in range(n):
        e = np.zeros(n)
        e[a] = float(fd_step(p_star[a]))
        gp[a] = (j_function(h, p_star + e, q_star) - j_function(h, p_star - e, q_star)) / (2 * e[a])
        e = np.zeros(n)
        e[a] = float(fd_step(q_star[a]))
        gq[a] = (j_function(h, p_star, q_star + e) - j_function(h, p_star, q_star - e)) / (2 * e[a])
    return gp, gq


def verify_j_function(traj: Trajectory, h: SeparableHamiltonian, samples: int = 50, tolerance: float | None = None) -> VerificationReport:
    """``dJ/dp* = -p`` and ``dJ/dq* = -q`` at sampled trajectory points."""
    _require_U(h, "J function")
    idx = np.unique(np.linspace(0, traj.steps, min(samples, traj.steps + 1)).astype(int))
    ps, qs = h.p_star(traj.p[idx]), h.q_star(traj.q[idx])
    res = []
    for k, i in enumerate(idx):
        gp, gq = j_gradient_fd(h, ps[k], qs[k])
        res.append(np.concatenate([gp + traj.p[i], gq + traj.q[i]]))
    res = np.array(res)
    tol = 1e-6 if tolerance is None else tolerance
    return make_report("j_function", res, traj.t[idx], traj.dt, res, tol, f"{idx.size} sample points")


# ---------------------------------------------------------------------------
# diagnostics


def energy_drift(traj: Trajectory) -> float:
    e = traj.energy
    return float(np.max(np.abs(e - e[0])))


def measure_period(t: np.ndarray, x: np.ndarray, level: float = 0.0) -> float:
    """Mean spacing of upward crossings of ``level`` (linear interpolation)."""
    y = np.asarray(x, dtype=float) - level
    k = np.nonzero((y[:-1] < 0) & (y[1:] >= 0))[0]
    if k.size < 2:
        raise GridError("fewer than two upward crossings; integrate longer")
    crossings = t[k] - y[k] * (t[k + 1] - t[k]) / (y[k + 1] - y[k])
    return float(np.mean(np.diff(crossings)))
