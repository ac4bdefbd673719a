import math

import numpy as np
import pytest

from htoda.convex import make_power_potential, make_quadratic, make_toda_potential, potential_from_spec
from htoda.dynamics import SeparableHamiltonian, integrate
from htoda.convex import QuadraticForm, separable
from htoda.lattice import LatticeSpec, build_lattice_hamiltonian

TODA_Q0 = (0.3, -0.2, 0.1)
TODA_P0 = (0.1, 0.0, -0.2)


def deformed(kappa):
    return potential_from_spec({"kind": "deformed", "params": {"kappa": kappa}})


def potential_catalog():
    """Every built-in family at the parameter values used throughout the suite."""
    cat = {f"toda(A={A},B={B})": make_toda_potential(A, B) for A in (0.5, 1.0, 2.0) for B in (0.5, 1.0, 2.0)}
    cat.update({f"power(beta={b})": make_power_potential(b) for b in (0.75, 1.0, 1.5, 3.0)})
    cat.update({f"deformed(kappa={k})": deformed(k) for k in (1.0, 2.0, 0.5)})
    cat["quadratic"] = make_quadratic(1.0)
    return cat


CATALOG = potential_catalog()


def primal_sample_box(pair):
    """A box inside the primal domain where every family is well conditioned."""
    if pair.kind == "deformed":
        return -1.0, 0.5
    return -1.5, 1.5


def sample_primal(pair, rng, size):
    lo, hi = primal_sample_box(pair)
    x = rng.uniform(lo, hi, size)
    if pair.primal.excluded:
        # keep both x and its dual image clear of the excluded origin
        x = np.where(np.abs(x) < 0.05, np.where(x < 0, -0.05, 0.05), x)
    return x


@pytest.fixture(scope="session")
def toda_spec():
    return LatticeSpec(3, 1.0, make_toda_potential(1.0, 1.0))


@pytest.fixture(scope="session")
def toda_runs(toda_spec):
    """Toda N=3 fixed-end trajectories at dt and dt/2 over the same 10 time units."""
    h = build_lattice_hamiltonian(toda_spec)
    return h, {dt: integrate(h, TODA_Q0, TODA_P0, dt, int(round(10.0 / dt))) for dt in (1e-3, 5e-4)}


@pytest.fixture(scope="session")
def harmonic():
    return SeparableHamiltonian(QuadraticForm(np.eye(1)), separable(make_quadratic(1.0), 1))


@pytest.fixture(scope="session")
def harmonic_period(harmonic):
    dt = 1e-3
    return integrate(harmonic, [1.0], [0.0], dt, math.ceil(2 * math.pi / dt))
