"""JSON scenario files: system description, initial state, grid and requested checks.

Example (Toda chain)::

    {
      "kind": "lattice",
      "system": {"N": 3, "m": 1, "boundary": "fixed",
                 "potential": {"kind": "toda", "params": {"A": 1, "B": 1}}},
      "initial": {"q": [0.3, -0.2, 0.1], "p": [0.1, 0.0, -0.2]},
      "dt": 0.001, "steps": 10000,
      "verifications": ["thm_2_1", "toda_dual"],
      "tolerances": {"toda_dual": 1e-3},
      "overrides": {"hK": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}
    }

``hamiltonian`` systems give ``K`` and ``U`` as energy specs: either a
quadratic form ``{"matrix": [[...]], "linear": [...]}`` or a scalar potential
``{"kind": ..., "params": {...}}`` applied to every coordinate. ``U`` may be
null for the vanishing potential. ``circuit`` systems are
``{"L", "Q0", "V0"}`` or ``{"quadratic": {"L", "C0"}}`` with initial
``{"Q", "Phi"}``. ``T`` may replace ``steps`` (``steps = ceil(T/dt)``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .circuit import CircuitSpec, make_linear_circuit, make_log_capacitor_circuit
from .convex import QuadraticForm, potential_from_spec, separable
from .dynamics import SeparableHamiltonian
from .errors import ParameterError
from .lattice import LatticeSpec, build_lattice_hamiltonian

KINDS = ("hamiltonian", "lattice", "circuit")

_GENERIC = ("dual_first_order", "thm_2_1", "thm_2_2", "prop_2_3", "prop_2_4", "prop_2_5", "j_function")
VALID_CHECKS = {
    "hamiltonian": _GENERIC,
    "lattice": _GENERIC + ("toda_dual", "tau"),
    "circuit": ("dual_first_order", "j_function", "lc_3_1", "lc_3_2"),
}


@dataclass(frozen=True)
class Scenario:
    kind: str
    system: Mapping[str, Any]
    q0: np.ndarray
    p0: np.ndarray
    dt: float
    steps: int
    verifications: tuple[str, ...] = ()
    tolerances: Mapping[str, float] = field(default_factory=dict)
    overrides: Mapping[str, Any] = field(default_factory=dict)
    outputs: Mapping[str, str] = field(default_factory=dict)
    name: str = "scenario"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.steps < 2:
            raise ParameterError(f"steps must be >= 2, got {self.steps}")
        bad = [v for v in self.verifications if v not in VALID_CHECKS[self.kind]]
        if bad:
            raise ParameterError(f"checks {bad} are not valid for kind {self.kind!r}; choose from {VALID_CHECKS[self.kind]}")
        unknown = set(self.tolerances) - set(self.verifications)
        if unknown:
            raise ParameterError(f"tolerances given for checks not requested: {sorted(unknown)}")

    @property
    def duration(self) -> float:
        return self.dt * self.steps

    def with_dt(self, dt: float) -> "Scenario":
        """Same duration on a different step."""
        if not (math.isfinite(dt) and dt > 0):
            raise ParameterError(f"dt override must be positive, got {dt}")
        return replace(self, dt=float(dt), steps=max(2, int(round(self.duration / dt))))

    def with_tolerance(self, tol: float) -> "Scenario":
        if not tol > 0:
            raise ParameterError(f"tolerance override must be positive, got {tol}")
        return replace(self, tolerances={v: float(tol) for v in self.verifications})

    # -- system construction -------------------------------------------------

    def circuit(self) -> CircuitSpec:
        if self.kind != "circuit":
            raise ParameterError("not a circuit scenario")
        return build_circuit(self.system)

    def lattice(self) -> LatticeSpec:
        if self.kind != "lattice":
            raise ParameterError("not a lattice scenario")
        return build_lattice_spec(self.system)

    def hamiltonian(self) -> SeparableHamiltonian:
        if self.kind == "circuit":
            return self.circuit().hamiltonian()
        if self.kind == "lattice":
            return build_lattice_hamiltonian(self.lattice())
        n = self.q0.size
        K = build_energy(self.system.get("K"), n, "K")
        U_spec = self.system.get("U")
        U = None if U_spec is None else build_energy(U_spec, n, "U")
        return SeparableHamiltonian(K, U)


def _require(mapping: Mapping, key: str, where: str):
    if not isinstance(mapping, Mapping) or key not in mapping:
        raise ParameterError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _number(x, what: str) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError):
        raise ParameterError(f"{what} must be a number, got {x!r}") from None
    if not math.isfinite(v):
        raise ParameterError(f"{what} must be finite, got {x!r}")
    return v


def _vector(x, what: str, n: int | None = None) -> np.ndarray:
    try:
        v = np.atleast_1d(np.asarray(x, dtype=float))
    except (TypeError, ValueError):
        raise ParameterError(f"{what} must be a list of numbers, got {x!r}") from None
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise ParameterError(f"{what} must be a flat list of finite numbers")
    if n is not None and v.size != n:
        raise ParameterError(f"{what} has length {v.size}, expected {n}")
    return v


def matrix_from(x, what: str, n: int | None = None) -> np.ndarray:
    try:
        M = np.asarray(x, dtype=float)
    except (TypeError, ValueError):
        raise ParameterError(f"{what} must be a square matrix of numbers") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1] or (n is not None and M.shape[0] != n):
        raise ParameterError(f"{what} must be {n or 'n'}x{n or 'n'}, got shape {M.shape}")
    return M


def build_energy(spec, n: int, what: str):
    if not isinstance(spec, Mapping):
        raise ParameterError(f"{what} must be an energy object, got {spec!r}")
    if "matrix" in spec:
        M = matrix_from(spec["matrix"], f"{what}.matrix", n)
        c = _vector(spec.get("linear", np.zeros(n)), f"{what}.linear", n)
        try:
            return QuadraticForm(M, c)
        except ValueError as exc:
            raise ParameterError(f"{what}: {exc}") from None
    return separable(potential_from_spec(spec), n)


def build_lattice_spec(system: Mapping) -> LatticeSpec:
    N = _require(system, "N", "lattice system")
    if not isinstance(N, int) or isinstance(N, bool):
        raise ParameterError(f"N must be an integer, got {N!r}")
    phi = potential_from_spec(_require(system, "potential", "lattice system"))
    return LatticeSpec(N, _number(system.get("m", 1.0), "m"), phi, str(system.get("boundary", "fixed")))


def build_circuit(system: Mapping) -> CircuitSpec:
    if not isinstance(system, Mapping):
        raise ParameterError("circuit system must be an object")
    if "quadratic" in system:
        lin = system["quadratic"]
        return make_linear_circuit(_number(_require(lin, "L", "quadratic"), "L"), _number(_require(lin, "C0", "quadratic"), "C0"))
    return make_log_capacitor_circuit(
        *(_number(_require(system, k, "circuit system"), k) for k in ("L", "Q0", "V0"))
    )


def scenario_from_dict(d: Mapping, name: str = "scenario") -> Scenario:
    if not isinstance(d, Mapping):
        raise ParameterError("scenario must be a JSON object")
    kind = _require(d, "kind", "scenario")
    system = _require(d, "system", "scenario")
    if not isinstance(system, Mapping):
        raise ParameterError(f"system must be an object, got {system!r}")
    dt = _number(_require(d, "dt", "scenario"), "dt")
    if "steps" in d:
        steps = d["steps"]
        if not isinstance(steps, int) or isinstance(steps, bool):
            raise ParameterError(f"steps must be an integer, got {steps!r}")
    elif "T" in d:
        if not dt > 0:
            raise ParameterError(f"dt must be positive, got {dt}")
        steps = int(math.ceil(_number(d["T"], "T") / dt))
    else:
        raise ParameterError("scenario: one of 'steps' or 'T' is required")

    initial = _require(d, "initial", "scenario")
    if kind == "circuit":
        q0 = _vector([_number(_require(initial, "Q", "initial"), "Q")], "initial.Q")
        p0 = _vector([_number(_require(initial, "Phi", "initial"), "Phi")], "initial.Phi")
    else:
        q0 = _vector(_require(initial, "q", "initial"), "initial.q")
        p0 = _vector(_require(initial, "p", "initial"), "initial.p", q0.size)
        if kind == "lattice" and isinstance(system, Mapping) and q0.size != system.get("N"):
            raise ParameterError(f"initial state has {q0.size} sites, system N={system.get('N')}")

    checks = d.get("verifications", [])
    if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
        raise ParameterError("verifications must be a list of check ids")
    tols = d.get("tolerances", {}) or {}
    if not isinstance(tols, Mapping):
        raise ParameterError("tolerances must be an object")
    overrides = d.get("overrides", {}) or {}
    if not isinstance(overrides, Mapping) or set(overrides) - {"hK"}:
        raise ParameterError("overrides may only contain 'hK'")
    if "hK" in overrides:
        overrides = {"hK": matrix_from(overrides["hK"], "overrides.hK", q0.size)}
    outputs = d.get("outputs", {}) or {}
    if not isinstance(outputs, Mapping):
        raise ParameterError("outputs must be an object")
    return Scenario(
        kind=kind,
        system=system,
        q0=q0,
        p0=p0,
        dt=dt,
        steps=steps,
        verifications=tuple(checks),
        tolerances={k: _number(v, f"tolerances.{k}") for k, v in tols.items()},
        overrides=overrides,
        outputs={k: str(v) for k, v in outputs.items()},
        name=str(d.get("name", name)),
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParameterError(f"cannot read scenario {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return scenario_from_dict(raw, path.stem)
