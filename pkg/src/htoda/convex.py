"""Strictly convex energies, Legendre conjugation and dual-coordinate maps.

Scalar functions carry their value and first three derivatives as
vectorised callables together with an open domain. Multivariate energies
come in two flavours used by the dynamics: separable sums of scalar
functions and quadratic forms.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError, MonotonicityError, ParameterError
from .quadrature import adaptive_simpson
from .roots import MARGIN, solve_increasing

ArrayFn = Callable[[np.ndarray], np.ndarray]


def _elementwise(scalar_fn):
    """Lift a float -> float function to accept scalars or arrays."""

    def wrapped(x):
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            return float(scalar_fn(float(arr)))
        return np.array([scalar_fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)

    return wrapped


@dataclass(frozen=True)
class ConvexScalarFunction:
    """A strictly convex C^3 function on the open interval ``(domain_lo, domain_hi)``.

    ``excluded`` lists interior points where the second derivative is zero or
    unbounded (the origin for power potentials other than the quadratic).
    """

    fn: ArrayFn
    dfn: ArrayFn
    d2fn: ArrayFn
    d3fn: ArrayFn
    domain_lo: float = -math.inf
    domain_hi: float = math.inf
    label: str = ""
    excluded: tuple[float, ...] = ()
    is_quadratic: bool = False

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ok = np.isfinite(x) & (x > self.domain_lo + MARGIN) & (x < self.domain_hi - MARGIN)
        for e in self.excluded:
            ok &= np.abs(x - e) > MARGIN
        return ok

    def check(self, x):
        x = np.asarray(x, dtype=float)
        ok = self.contains(x)
        if not np.all(ok):
            bad = x[~ok] if x.ndim else x
            raise DomainError(
                f"{self.label or 'function'}: argument {np.ravel(bad)[0]!r} outside "
                f"domain ({self.domain_lo}, {self.domain_hi})"
                + (f" excluding {list(self.excluded)}" if self.excluded else "")
            )
        return x

    def eval(self, x):
        return self.fn(self.check(x))

    def d1(self, x):
        return self.dfn(self.check(x))

    def d2(self, x):
        return self.d2fn(self.check(x))

    def d3(self, x):
        return self.d3fn(self.check(x))

    __call__ = eval

    def shifted(self, c: float) -> "ConvexScalarFunction":
        """``y -> f(y - c)``."""
        if c == 0:
            return self
        return ConvexScalarFunction(
            lambda y: self.fn(y - c),
            lambda y: self.dfn(y - c),
            lambda y: self.d2fn(y - c),
            lambda y: self.d3fn(y - c),
            self.domain_lo + c,
            self.domain_hi + c,
            f"{self.label}(.-{c})",
            tuple(e + c for e in self.excluded),
            self.is_quadratic,
        )

    def tilted(self, c: float) -> "ConvexScalarFunction":
        """``x -> f(x) + c x``."""
        if c == 0:
            return self
        return replace(
            self,
            fn=lambda x: self.fn(x) + c * x,
            dfn=lambda x: self.dfn(x) + c,
            label=f"{self.label}+{c}x",
        )

    @classmethod
    def from_callable(
        cls,
        fn: ArrayFn,
        d1: ArrayFn | None = None,
        d2: ArrayFn | None = None,
        d3: ArrayFn | None = None,
        domain: tuple[float, float] = (-math.inf, math.inf),
        label: str = "user",
    ) -> "ConvexScalarFunction":
        """Build from a value function, filling missing derivatives by central differences."""
        from .finite_diff import central_diff

        d1 = d1 or (lambda x: central_diff(fn, x))
        d2 = d2 or (lambda x: central_diff(d1, x))
        d3 = d3 or (lambda x: central_diff(d2, x))
        return cls(fn, d1, d2, d3, domain[0], domain[1], label)


@dataclass(frozen=True)
class ConjugatePair:
    primal: ConvexScalarFunction
    dual: ConvexScalarFunction
    mode: str = "analytic"
    kind: str = "user"
    params: Mapping[str, float] = field(default_factory=dict)

    def swapped(self) -> "ConjugatePair":
        return ConjugatePair(self.dual, self.primal, self.mode, self.kind + "*", self.params)


# ---------------------------------------------------------------------------
# numeric conjugation


def _edge_value(dfn, lo, hi, direction, seed):
    """Limit of ``dfn`` toward one end of the usable domain."""
    edge = hi if direction > 0 else lo
    if math.isfinite(edge):
        with np.errstate(all="ignore"):
            return float(dfn(edge - direction * 4 * MARGIN * max(1.0, abs(edge))))
    x, step, prev, repeats = seed, 1.0, None, 0
    for _ in range(1100):
        x += direction * step
        step *= 2.0
        if not math.isfinite(x):
            break
        with np.errstate(all="ignore"):
            v = float(dfn(x))
        if not math.isfinite(v):
            return math.copysign(math.inf, direction) if not math.isnan(v) else prev
        if prev is not None and v == prev:
            repeats += 1
            if repeats >= 3:
                return v
        else:
            repeats = 0
        prev = v
    return prev


def gradient_image(f: ConvexScalarFunction, seed: float = 0.0) -> tuple[float, float]:
    """Image of ``f.d1`` over the usable part of ``f``'s domain."""
    lo, hi = f.domain_lo, f.domain_hi
    if math.isfinite(lo) and math.isfinite(hi):
        seed = 0.5 * (lo + hi)
    elif math.isfinite(lo):
        seed = max(seed, lo + 1.0)
    elif math.isfinite(hi):
        seed = min(seed, hi - 1.0)
    return (_edge_value(f.dfn, lo, hi, -1.0, seed), _edge_value(f.dfn, lo, hi, 1.0, seed))


def conjugate_numeric(
    f: ConvexScalarFunction, seed: float = 0.0, cache_size: int = 65536
) -> ConvexScalarFunction:
    """Legendre transform ``g(y) = sup_x [x y - f(x)]`` by inverting ``f.d1``.

    The argmax ``x(y)`` is the root of ``f.d1(x) = y``; derivatives of ``g``
    follow from the inverse function theorem.
    """
    lo, hi = f.domain_lo, f.domain_hi

    @functools.lru_cache(maxsize=cache_size)
    def argmax(y: float) -> float:
        return solve_increasing(f.dfn, f.d2fn, y, lo, hi, seed=seed)

    def value(y):
        x = argmax(y)
        return x * y - float(f.fn(x))

    # inf/nan at excluded points, where f.d2 vanishes or blows up
    def d2(y):
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(1.0 / np.float64(f.d2fn(argmax(y))))

    def d3(y):
        x = argmax(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(-np.float64(f.d3fn(x)) / np.float64(f.d2fn(x)) ** 3)

    img_lo, img_hi = gradient_image(f, seed)
    with np.errstate(all="ignore"):
        excluded = tuple(float(f.dfn(e)) for e in f.excluded)
    return ConvexScalarFunction(
        _elementwise(value),
        _elementwise(argmax),
        _elementwise(d2),
        _elementwise(d3),
        img_lo,
        img_hi,
        f"{f.label}*",
        excluded,
        f.is_quadratic,
    )


def numeric_pair(f: ConvexScalarFunction, seed: float = 0.0) -> ConjugatePair:
    return ConjugatePair(f, conjugate_numeric(f, seed), mode="numeric", kind="numeric")


# ---------------------------------------------------------------------------
# built-in potentials


def make_quadratic(k: float = 1.0) -> ConjugatePair:
    """``k x^2 / 2`` and its conjugate ``y^2 / (2k)``."""
    if not k > 0:
        raise ParameterError(f"quadratic stiffness must be positive, got {k}")
    primal = ConvexScalarFunction(
        lambda x: 0.5 * k * np.square(x),
        lambda x: k * np.asarray(x, dtype=float),
        lambda x: np.full_like(np.asarray(x, dtype=float), k),
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        label=f"quad(k={k})",
        is_quadratic=True,
    )
    dual = ConvexScalarFunction(
        lambda y: 0.5 * np.square(y) / k,
        lambda y: np.asarray(y, dtype=float) / k,
        lambda y: np.full_like(np.asarray(y, dtype=float), 1.0 / k),
        lambda y: np.zeros_like(np.asarray(y, dtype=float)),
        label=f"quad(k={k})*",
        is_quadratic=True,
    )
    return ConjugatePair(primal, dual, kind="quadratic", params={"k": k})


def make_toda_potential(A: float, B: float) -> ConjugatePair:
    """Toda interaction ``(A/B) e^{-Bq} + A q`` and its conjugate on ``q* < A``."""
    if not (A > 0 and B > 0):
        raise ParameterError(f"Toda potential needs A > 0 and B > 0, got A={A}, B={B}")

    def e(q):
        return np.exp(-B * np.asarray(q, dtype=float))

    primal = ConvexScalarFunction(
        lambda q: A / B * e(q) + A * np.asarray(q, dtype=float),
        lambda q: A - A * e(q),
        lambda q: A * B * e(q),
        lambda q: -A * B * B * e(q),
        label=f"toda(A={A},B={B})",
    )

    def gap(y):
        return A - np.asarray(y, dtype=float)

    dual = ConvexScalarFunction(
        lambda y: gap(y) / B * (np.log(gap(y) / A) - 1.0),
        lambda y: -np.log(gap(y) / A) / B,
        lambda y: 1.0 / (B * gap(y)),
        lambda y: 1.0 / (B * gap(y) ** 2),
        domain_hi=A,
        label=f"toda(A={A},B={B})*",
    )
    return ConjugatePair(primal, dual, kind="toda", params={"A": A, "B": B})


def _power_function(b: float, label: str) -> ConvexScalarFunction:
    """``(x^2)^b / (2b)`` with sign-correct odd derivatives."""
    two_b = 2.0 * b

    def sq(x):
        return np.square(np.asarray(x, dtype=float))

    if b == 1.0:
        return ConvexScalarFunction(
            lambda x: 0.5 * sq(x),
            lambda x: np.asarray(x, dtype=float) * 1.0,
            lambda x: np.ones_like(np.asarray(x, dtype=float)),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            label=label,
            is_quadratic=True,
        )
    # infinite or zero at the excluded origin; root finders bisect past it
    def d2(x):
        with np.errstate(divide="ignore"):
            return (two_b - 1.0) * sq(x) ** (b - 1.0)

    def d3(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (two_b - 1.0) * (two_b - 2.0) * np.asarray(x, dtype=float) * sq(x) ** (b - 2.0)

    return ConvexScalarFunction(
        lambda x: sq(x) ** b / two_b,
        lambda x: np.sign(x) * np.abs(np.asarray(x, dtype=float)) ** (two_b - 1.0),
        d2,
        d3,
        label=label,
        excluded=(0.0,),
    )


def conjugate_exponent(beta: float) -> float:
    """``beta*`` with ``1/(2 beta) + 1/(2 beta*) = 1``."""
    if not 2.0 * beta > 1.0:
        raise ParameterError(f"power potential needs 2*beta > 1, got beta={beta}")
    return beta / (2.0 * beta - 1.0)


def make_power_potential(beta: float) -> ConjugatePair:
    beta_star = conjugate_exponent(beta)
    return ConjugatePair(
        _power_function(beta, f"power(beta={beta})"),
        _power_function(beta_star, f"power(beta={beta})*"),
        kind="power",
        params={"beta": beta, "beta_star": beta_star},
    )


# ---------------------------------------------------------------------------
# phi-deformed logarithm / exponential


@dataclass(frozen=True)
class DeformedLog:
    """``ln_phi(z) = int_1^z dz'/phi(z')`` and its inverse ``exp_phi``.

    Integrals are taken in ``s = ln z`` so the same tolerance works across
    the whole working range ``zeta_range``.
    """

    phi: Callable[[float], float]
    dphi: Callable[[float], float]
    tol: float = 1e-10
    zeta_range: tuple[float, float] = (1e-8, 1e8)

    def ln(self, z: float) -> float:
        return adaptive_simpson(lambda s: math.exp(s) / self.phi(math.exp(s)), 0.0, math.log(z), self.tol)

    def moment(self, z: float) -> float:
        """``int_1^z z'/phi(z') dz'``."""
        return adaptive_simpson(lambda s: math.exp(2 * s) / self.phi(math.exp(s)), 0.0, math.log(z), self.tol)

    def exp(self, q: float) -> float:
        s_lo, s_hi = (math.log(z) for z in self.zeta_range)
        s = solve_increasing(
            lambda s: self.ln(math.exp(s)),
            lambda s: math.exp(s) / self.phi(math.exp(s)),
            q,
            s_lo,
            s_hi,
            seed=0.0,
        )
        return math.exp(s)


def _check_phi(phi, zeta_range, n=257):
    grid = np.geomspace(zeta_range[0], zeta_range[1], n)
    vals = np.array([phi(float(z)) for z in grid])
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise MonotonicityError("phi must be positive on the sample grid")
    if np.any(np.diff(vals) <= 0):
        k = int(np.argmax(np.diff(vals) <= 0))
        raise MonotonicityError(f"phi is not increasing near zeta={grid[k]:.6g}")


def make_phi_deformed(
    phi: Callable[[float], float],
    quadrature_tol: float = 1e-10,
    dphi: Callable[[float], float] | None = None,
    zeta_range: tuple[float, float] = (1e-8, 1e8),
) -> ConjugatePair:
    """Interaction potential ``int_0^q exp_phi`` and its conjugate ``int_1^{q*} ln_phi``.

    The primal value uses ``phi_phi(q) = int_1^{exp_phi(q)} z/phi(z) dz`` and the
    dual ``y ln_phi(y) - int_1^y z/phi(z) dz``, both integration-by-parts forms of
    the defining integrals that need a single quadrature each.
    """
    _check_phi(phi, zeta_range)
    if dphi is None:

        def dphi(z):
            h = max(1e-6, 1e-6 * abs(z))
            return (phi(z + h) - phi(z - h)) / (2 * h)

    lg = DeformedLog(phi, dphi, quadrature_tol, zeta_range)
    exp_c = functools.lru_cache(maxsize=65536)(lg.exp)
    ln_c = functools.lru_cache(maxsize=65536)(lg.ln)
    q_lo, q_hi = lg.ln(zeta_range[0]), lg.ln(zeta_range[1])

    def primal_value(q):
        return lg.moment(exp_c(q))

    def primal_d3(q):
        z = exp_c(q)
        return phi(z) * dphi(z)

    primal = ConvexScalarFunction(
        _elementwise(primal_value),
        _elementwise(exp_c),
        _elementwise(lambda q: phi(exp_c(q))),
        _elementwise(primal_d3),
        q_lo,
        q_hi,
        "deformed",
    )
    dual = ConvexScalarFunction(
        _elementwise(lambda y: y * ln_c(y) - lg.moment(y)),
        _elementwise(ln_c),
        _elementwise(lambda y: 1.0 / phi(y)),
        _elementwise(lambda y: -dphi(y) / phi(y) ** 2),
        zeta_range[0],
        zeta_range[1],
        "deformed*",
    )
    return ConjugatePair(primal, dual, kind="deformed", params={"tol": quadrature_tol})


# ---------------------------------------------------------------------------
# dual coordinates and divergence


def dual_coordinate(f: ConvexScalarFunction, x):
    """``x* = f'(x)``."""
    return f.d1(x)


def bregman_divergence(pair: ConjugatePair, x, x_prime):
    """Canonical divergence ``f(x) + f*(f'(x')) - x f'(x')``."""
    y_prime = pair.primal.d1(x_prime)
    return pair.primal.eval(x) + pair.dual.eval(y_prime) - np.asarray(x, dtype=float) * y_prime


# ---------------------------------------------------------------------------
# multivariate energies


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (n,):
        raise ValueError(f"expected trailing dimension {n}, got shape {x.shape}")
    return x


def _embed_diag(d, order):
    """Place ``(..., n)`` values on the total diagonal of an ``order``-tensor."""
    n = d.shape[-1]
    out = np.zeros(d.shape[:-1] + (n,) * order)
    idx = np.arange(n)
    out[(Ellipsis,) + (idx,) * order] = d
    return out


@dataclass(frozen=True)
class SeparableConvexFunction:
    """``F(x) = sum_a parts[a](x_a) + linear_offset . x``."""

    parts: tuple[ConvexScalarFunction, ...]
    linear_offset: np.ndarray | None = None
    dual_parts: tuple[ConvexScalarFunction, ...] | None = None
    label: str = "separable"

    @classmethod
    def from_pair(cls, pair: ConjugatePair, n: int, label: str | None = None):
        return cls((pair.primal,) * n, None, (pair.dual,) * n, label or pair.primal.label)

    @property
    def n(self) -> int:
        return len(self.parts)

    @property
    def is_quadratic(self) -> bool:
        return all(p.is_quadratic for p in self.parts)

    @property
    def offset(self) -> np.ndarray:
        return np.zeros(self.n) if self.linear_offset is None else np.asarray(self.linear_offset, float)

    def contains(self, x) -> bool:
        x = _as_points(x, self.n)
        return bool(all(np.all(p.contains(x[..., a])) for a, p in enumerate(self.parts)))

    def _cols(self, attr, x):
        x = _as_points(x, self.n)
        return np.stack([getattr(p, attr)(x[..., a]) for a, p in enumerate(self.parts)], axis=-1)

    def value(self, x):
        x = _as_points(x, self.n)
        return self._cols("eval", x).sum(axis=-1) + x @ self.offset

    def grad(self, x):
        return self._cols("d1", x) + self.offset

    def hess_diag(self, x):
        return self._cols("d2", x)

    def hessian(self, x):
        return _embed_diag(self.hess_diag(x), 2)

    def third_diag(self, x):
        return self._cols("d3", x)

    def third(self, x):
        return _embed_diag(self.third_diag(x), 3)

    def conjugate(self) -> "SeparableConvexFunction":
        duals = self.dual_parts or tuple(conjugate_numeric(p) for p in self.parts)
        c = self.offset
        return SeparableConvexFunction(
            tuple(d.shifted(c[a]) for a, d in enumerate(duals)),
            None,
            tuple(p.tilted(c[a]) for a, p in enumerate(self.parts)),
            self.label + "*",
        )


@dataclass(frozen=True)
class QuadraticForm:
    """``F(x) = x.M.x / 2 + c.x + k0``."""

    M: np.ndarray
    c: np.ndarray | None = None
    k0: float = 0.0
    label: str = "quadratic"

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        if M.shape[0] != M.shape[1]:
            raise ParameterError(f"quadratic form matrix must be square, got {M.shape}")
        if not np.allclose(M, M.T, rtol=0, atol=1e-12):
            raise ParameterError("quadratic form matrix must be symmetric to 1e-12")
        object.__setattr__(self, "M", M)
        c = np.zeros(M.shape[0]) if self.c is None else np.asarray(self.c, dtype=float)
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    is_quadratic = True

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.M)

    def contains(self, x) -> bool:
        return bool(np.all(np.isfinite(_as_points(x, self.n))))

    def value(self, x):
        x = _as_points(x, self.n)
        return 0.5 * np.einsum("...a,ab,...b->...", x, self.M, x) + x @ self.c + self.k0

    def grad(self, x):
        return _as_points(x, self.n) @ self.M + self.c

    def hess_diag(self, x):
        x = _as_points(x, self.n)
        return np.broadcast_to(np.diag(self.M), x.shape).copy()

    def hessian(self, x):
        x = _as_points(x, self.n)
        return np.broadcast_to(self.M, x.shape[:-1] + self.M.shape).copy()

    def third(self, x):
        x = _as_points(x, self.n)
        return np.zeros(x.shape[:-1] + (self.n,) * 3)

    def conjugate(self) -> "QuadraticForm":
        Minv = np.linalg.inv(self.M)
        Minv = 0.5 * (Minv + Minv.T)
        return QuadraticForm(Minv, -Minv @ self.c, 0.5 * self.c @ Minv @ self.c - self.k0, self.label + "*")


def separable(pair: ConjugatePair, n: int) -> SeparableConvexFunction:
    return SeparableConvexFunction.from_pair(pair, n)


Energy = SeparableConvexFunction | QuadraticForm


def as_energy(f, n: int | None = None) -> Energy:
    """Promote a scalar function or pair to a one-dimensional separable energy."""
    if isinstance(f, (SeparableConvexFunction, QuadraticForm)):
        return f
    if isinstance(f, ConjugatePair):
        return SeparableConvexFunction.from_pair(f, n or 1)
    if isinstance(f, ConvexScalarFunction):
        return SeparableConvexFunction((f,) * (n or 1))
    raise TypeError(f"cannot interpret {type(f).__name__} as an energy")


def potential_from_spec(spec: Mapping) -> ConjugatePair:
    """Build a scalar pair from ``{"kind": ..., "params": {...}}``.

    Deformed potentials take ``phi(z) = z**kappa`` (``kappa > 0``).
    """
    if not isinstance(spec, Mapping):
        raise ParameterError(f"potential must be an object like {{'kind': ..., 'params': ...}}, got {spec!r}")
    kind = spec.get("kind")
    params = spec.get("params") or {}
    if not isinstance(params, Mapping):
        raise ParameterError(f"potential params must be an object, got {params!r}")
    try:
        if kind == "toda":
            return make_toda_potential(float(params.get("A", 1.0)), float(params.get("B", 1.0)))
        if kind == "power":
            return make_power_potential(float(params["beta"]))
        if kind == "quadratic":
            return make_quadratic(float(params.get("k", 1.0)))
        if kind == "deformed":
            kappa = float(params.get("kappa", 1.0))
            if not kappa > 0:
                raise ParameterError(f"deformed potential needs kappa > 0, got {kappa}")
            pair = make_phi_deformed(
                lambda z: z**kappa,
                float(params.get("tol", 1e-10)),
                dphi=lambda z: kappa * z ** (kappa - 1.0),
            )
            return replace(pair, params={"kappa": kappa, **pair.params})
    except KeyError as exc:
        raise ParameterError(f"potential '{kind}' missing parameter {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"potential '{kind}' has a non-numeric parameter ({exc})") from None
    raise ParameterError(f"unknown potential kind {kind!r}")
