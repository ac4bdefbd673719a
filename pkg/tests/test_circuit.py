import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from htoda.circuit import (
    CircuitSpec,
    CircuitState,
    circuit_table,
    make_linear_circuit,
    make_log_capacitor_circuit,
    simulate_lc,
    verify_lc_thm_3_1,
    verify_lc_thm_3_2,
)
from htoda.convex import make_quadratic, make_toda_potential
from htoda.dynamics import energy_drift, measure_period
from htoda.errors import DomainError, HypothesisError, ParameterError
from htoda.finite_diff import ddt


@pytest.fixture(scope="module")
def log_circuit():
    return make_log_capacitor_circuit(1.0, 1.0, 1.0)


@pytest.fixture(scope="module")
def log_runs(log_circuit):
    return {dt: simulate_lc(log_circuit, 0.8, 0.0, dt, round(10.0 / dt)) for dt in (1e-3, 5e-4)}


@pytest.fixture(scope="module")
def linear_run():
    spec = make_linear_circuit(1.0, 1.0)
    return spec, simulate_lc(spec, 1.0, 0.0, 1e-3, 20000)


# -- constitutive relations ---------------------------------------------------------------


def test_capacitor_energy_zero_at_rest(log_circuit):
    assert log_circuit.EC_star.dual(0.0) == 0.0


def test_charge_at_e_minus_one(log_circuit):
    assert log_circuit.charge(math.e - 1) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("Q0,V0", [(1.0, 1.0), (2.0, 0.5), (0.3, 4.0)])
def test_small_signal_capacitance(Q0, V0):
    spec = make_log_capacitor_circuit(1.0, Q0, V0)
    assert spec.EC_star.primal.d2(0.0) == pytest.approx(Q0 / V0, rel=1e-15)
    h = 1e-6
    assert (spec.charge(h) - spec.charge(-h)) / (2 * h) == pytest.approx(Q0 / V0, rel=1e-8)


@pytest.mark.parametrize("Q0,V0", [(1.0, 1.0), (2.0, 0.5)])
def test_limits_at_origin_are_zero(Q0, V0):
    spec = make_log_capacitor_circuit(1.0, Q0, V0)
    assert spec.charge(0.0) == 0.0
    assert spec.voltage(0.0) == 0.0


@pytest.mark.parametrize("Q0,V0", [(1.0, 1.0), (2.0, 0.5), (0.3, 4.0)])
def test_hessian_closed_forms(Q0, V0):
    cap = make_log_capacitor_circuit(1.0, Q0, V0).EC_star.primal
    V = np.linspace(-0.9 * V0, 5 * V0, 200)
    assert np.max(np.abs(cap.d2(V) - Q0 / (V + V0))) <= 1e-10
    assert np.max(np.abs(cap.d3(V) + Q0 / (V + V0) ** 2)) <= 1e-10


def test_co_energy_closed_form():
    cap = make_log_capacitor_circuit(1.0, 2.0, 0.5).EC_star.primal
    V = np.array([-0.4, 0.0, 0.3, 2.0])
    r = 1 + V / 0.5
    assert np.allclose(cap(V), 2.0 * 0.5 * (r * np.log(r) - V / 0.5), rtol=1e-14, atol=1e-15)


def test_capacitor_domain(log_circuit):
    with pytest.raises(DomainError):
        log_circuit.charge(-1.0)
    with pytest.raises(DomainError):
        log_circuit.charge(-1.5)


@settings(max_examples=200)
@given(st.floats(-0.99, 20.0))
def test_constitutive_round_trip(V):
    spec = make_log_capacitor_circuit(1.5, 2.0, 0.7)
    V = V * 0.7
    assert spec.voltage(spec.charge(V)) == pytest.approx(V, abs=1e-9)


def test_taylor_quadratic_co_energy():
    Q0, V0 = 2.0, 0.5
    cap = make_log_capacitor_circuit(1.0, Q0, V0).EC_star.primal
    V = 0.1 * 2.0 ** -np.arange(6)
    err = cap(V) - 0.5 * (Q0 / V0) * V**2
    assert np.allclose(err[:-1] / err[1:], 8.0, rtol=0.05)


def test_circuit_state_derives_voltage_and_current(log_circuit):
    s = CircuitState(1.0, 0.5, log_circuit)
    assert s.V == pytest.approx(math.e - 1)
    assert s.I == pytest.approx(0.5)


def test_inductor_energy():
    spec = make_log_capacitor_circuit(2.0, 1.0, 1.0)
    assert spec.EL_star.dual(1.0) == pytest.approx(0.25)
    assert spec.EL_star.primal(1.0) == pytest.approx(1.0)
    assert spec.flux(3.0) == pytest.approx(6.0)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0)])
def test_log_circuit_parameter_errors(args):
    with pytest.raises(ParameterError):
        make_log_capacitor_circuit(*args)


def test_linear_circuit_parameter_errors():
    with pytest.raises(ParameterError):
        make_linear_circuit(1.0, 0.0)


# -- simulation -----------------------------------------------------------------------------


def test_linear_period(linear_run):
    _, traj = linear_run
    assert measure_period(traj.t, traj.q[:, 0]) == pytest.approx(2 * math.pi, abs=1e-4)


@pytest.mark.parametrize("L,C0", [(2.0, 0.5), (0.5, 3.0)])
def test_linear_period_scaling(L, C0):
    traj = simulate_lc(make_linear_circuit(L, C0), 1.0, 0.0, 1e-3, 30000)
    assert measure_period(traj.t, traj.q[:, 0]) == pytest.approx(2 * math.pi * math.sqrt(L * C0), abs=1e-4)


def test_log_small_signal_period(log_circuit):
    traj = simulate_lc(log_circuit, 1e-3, 0.0, 1e-3, 20000)
    expected = 2 * math.pi * math.sqrt(1.0 * 1.0 / 1.0)
    assert abs(measure_period(traj.t, traj.q[:, 0]) / expected - 1) < 0.01


def test_equilibrium_constant(log_circuit):
    traj = simulate_lc(log_circuit, 0.0, 0.0, 1e-3, 500)
    assert not np.any(traj.q) and not np.any(traj.p)


def test_equations_of_motion(log_runs, log_circuit):
    traj = log_runs[1e-3]
    Q, Phi = traj.q[:, 0], traj.p[:, 0]
    assert np.max(np.abs(ddt(Q, traj.dt) - log_circuit.current(Phi))[2:-2]) < 1e-5
    assert np.max(np.abs(ddt(Phi, traj.dt) + log_circuit.voltage(Q))[2:-2]) < 1e-5


def test_energy_conserved_second_order(log_runs):
    a, b = energy_drift(log_runs[1e-3]), energy_drift(log_runs[5e-4])
    assert a < 1e-5
    assert 3.5 <= a / b <= 4.5


def test_circuit_table(log_runs, log_circuit):
    traj = log_runs[1e-3]
    table = circuit_table(traj, log_circuit)
    assert table.shape == (traj.steps + 1, 6)
    assert np.allclose(table[:, 3], np.expm1(table[:, 1]))
    assert np.ptp(table[:, 5]) < 1e-5


# -- dual-transformed equations ----------------------------------------------------------


def test_thm_3_1_log_capacitor(log_runs, log_circuit):
    a, b = (verify_lc_thm_3_1(log_runs[dt], log_circuit) for dt in (1e-3, 5e-4))
    assert a.passed and a.max_residual <= 1e-4
    assert 3.5 <= a.max_residual / b.max_residual <= 4.5


def test_thm_3_1_left_side_is_log_of_flux_rate(log_runs, log_circuit):
    traj = log_runs[1e-3]
    Phi_dot = ddt(traj.p[:, 0], traj.dt)
    assert np.allclose(log_circuit.charge(-Phi_dot), np.log(1 - Phi_dot), rtol=0, atol=1e-14)


def test_thm_3_1_linear(linear_run):
    spec, traj = linear_run
    assert verify_lc_thm_3_1(traj, spec).max_residual <= 1e-5


def test_thm_3_1_requires_quadratic_inductor(log_circuit):
    spec = CircuitSpec(make_toda_potential(1, 1), log_circuit.EC_star)
    traj = simulate_lc(spec, 0.1, 0.1, 1e-2, 50)
    with pytest.raises(HypothesisError):
        verify_lc_thm_3_1(traj, spec)


def test_thm_3_2_log_capacitor(log_runs, log_circuit):
    a, b = (verify_lc_thm_3_2(log_runs[dt], log_circuit) for dt in (1e-3, 5e-4))
    assert a.passed and a.max_residual <= 1e-3
    assert 3.5 <= a.max_residual / b.max_residual <= 4.5


def test_thm_3_2_linear(linear_run):
    spec, traj = linear_run
    assert not np.any(spec.EC_star.primal.d3(np.linspace(-1, 1, 9)))
    assert verify_lc_thm_3_2(traj, spec).passed


def test_linear_circuit_is_quadratic_pair():
    spec = make_linear_circuit(2.0, 3.0)
    assert spec.EC_star.dual(1.5) == pytest.approx(1.5**2 / 6.0)
    assert spec.EL_star.dual(1.5) == pytest.approx(1.5**2 / 4.0)
    assert spec.EC_star.dual.is_quadratic and spec.EL_star.dual.is_quadratic


def test_make_quadratic_is_reused_for_inductor():
    assert make_linear_circuit(2.0, 1.0).EL_star.primal(1.0) == make_quadratic(2.0).primal(1.0)
