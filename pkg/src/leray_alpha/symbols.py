"""Dissipation symbols -|xi|^gamma / g(|xi|) and the registry of g families.

Registered families carry a sympy expression for g, so every derivative
g^(k) and every radial derivative needed by the kernel-boundedness check is
evaluated in closed form.  Symbols built from an arbitrary callable fall back
to 8th-order central differences with relative step h = r * 1e-3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp

_r = sp.Symbol("r", positive=True)
_s = sp.Symbol("s", positive=True)

# Below this radius log(2 + r^2) < 1; log_half is clamped to 1 there.
LOG_HALF_KNEE = math.sqrt(math.e - 2.0)

FAMILIES = ("constant_one", "log_half", "power", "mikhlin_custom")

SAMPLE_GRID = np.concatenate([[0.0], np.logspace(-3, 6, 2001)])


class RegistrationError(ValueError):
    pass


def _family_expr(g_id: str, params: dict) -> sp.Expr:
    if g_id == "constant_one":
        return sp.Integer(1)
    if g_id == "log_half":
        return sp.Piecewise((sp.Integer(1), _r < LOG_HALF_KNEE), (sp.sqrt(sp.log(2 + _r**2)), True))
    if g_id == "power":
        eps = params.get("eps")
        if eps is None:
            raise RegistrationError("power family needs parameter 'eps'")
        return sp.Piecewise((sp.Integer(1), _r < 1), (_r ** sp.Float(eps), True))
    if g_id == "mikhlin_custom":
        coeffs = params.get("coeffs")
        if not coeffs:
            raise RegistrationError("mikhlin_custom needs a non-empty 'coeffs' table")
        w = _r**2 / (1 + _r**2)
        return 1 + sum(sp.Float(c) * w ** (i + 1) for i, c in enumerate(coeffs))
    raise RegistrationError(f"unknown g family {g_id!r}; registered: {', '.join(FAMILIES)}")


def _breakpoints(g_id: str) -> tuple[float, ...]:
    return {"log_half": (LOG_HALF_KNEE,), "power": (1.0,)}.get(g_id, ())


def _lambdify(expr: sp.Expr, args) -> Callable:
    fn = sp.lambdify(args, expr, modules="numpy", cse=True)

    def wrapped(*vals):
        with np.errstate(all="ignore"):
            out = fn(*vals)
        return np.asarray(out, dtype=float) + np.zeros(np.broadcast(*vals).shape)

    return wrapped


def fd_weights(order: int, accuracy: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Central finite-difference offsets and weights for d^order/dx^order."""
    half = (order + 1) // 2 - 1 + accuracy // 2
    offsets = np.arange(-half, half + 1, dtype=float)
    vander = np.vander(offsets, increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[order] = math.factorial(order)
    return offsets, np.linalg.solve(vander, rhs)


def central_derivative(fn: Callable, r, order: int, rel_step: float = 1e-3) -> np.ndarray:
    """8th-order central difference of ``fn`` at r with step h = r * rel_step."""
    r = np.asarray(r, dtype=float)
    if order == 0:
        return np.asarray(fn(r), dtype=float)
    h = np.maximum(r, 1e-12) * rel_step
    offsets, weights = fd_weights(order)
    total = np.zeros_like(r)
    for o, w in zip(offsets, weights):
        total = total + w * np.asarray(fn(r + o * h), dtype=float)
    return total / h**order


@dataclass(frozen=True, eq=False)
class SymbolSpec:
    """A dissipation symbol -|xi|^gamma / g(|xi|).

    Use :func:`registered_g` or :meth:`from_callable` rather than the
    constructor.  ``params`` echoes the family parameters.
    """

    gamma: float
    g_id: str
    params: dict = field(default_factory=dict)
    _expr: sp.Expr | None = None
    _fn: Callable | None = None

    @classmethod
    def from_callable(cls, gamma: float, fn: Callable, name: str = "callable") -> SymbolSpec:
        """Wrap a user g; derivatives come from finite differences."""
        spec = cls(float(gamma), name, {}, None, fn)
        _validate(spec)
        return spec

    @property
    def closed_form(self) -> bool:
        return self._expr is not None

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return _breakpoints(self.g_id)

    @property
    def key(self) -> tuple:
        return (self.g_id, tuple(sorted((k, _freeze(v)) for k, v in self.params.items())))

    def with_gamma(self, gamma: float) -> SymbolSpec:
        return SymbolSpec(float(gamma), self.g_id, dict(self.params), self._expr, self._fn)

    def g(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self._expr is not None:
            return _g_derivative_fn(self.key, 0)(r)
        return np.asarray(self._fn(r), dtype=float) + np.zeros_like(r)

    def g_derivative(self, r, k: int) -> np.ndarray:
        """k-th derivative of g, closed form when available."""
        r = np.asarray(r, dtype=float)
        if self._expr is not None:
            return _g_derivative_fn(self.key, k)(r)
        return central_derivative(self.g, r, k)

    def symbol(self, absxi) -> np.ndarray:
        """-|xi|^gamma / g(|xi|), with the value 0 at xi = 0 for gamma > 0."""
        absxi = np.asarray(absxi, dtype=float)
        with np.errstate(divide="ignore"):
            out = -np.power(absxi, self.gamma) / self.g(absxi)
        return np.where(absxi == 0, 0.0, out)

    def semigroup_symbol(self, absxi, t: float) -> np.ndarray:
        return np.exp(t * self.symbol(absxi))

    def describe(self) -> str:
        ps = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"gamma={self.gamma:g}, g={self.g_id}" + (f"({ps})" if ps else "")

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "g": {"id": self.g_id, "params": dict(self.params)}}


def _freeze(v):
    return tuple(v) if isinstance(v, (list, tuple)) else v


@lru_cache(maxsize=None)
def _family_expr_cached(key) -> sp.Expr:
    g_id, items = key
    return _family_expr(g_id, {k: list(v) if isinstance(v, tuple) else v for k, v in items})


@lru_cache(maxsize=None)
def _g_derivative_fn(key, k: int) -> Callable:
    expr = _family_expr_cached(key)
    return _lambdify(sp.diff(expr, _r, k) if k else expr, (_r,))


@lru_cache(maxsize=None)
def kernel_integrand_fn(key, gamma: float, n: int) -> Callable:
    """Closed form of d^{n+1}/dr^{n+1} [ r^{n-1} exp(-r^gamma / g(r s)) ] as f(r, s)."""
    g_expr = _family_expr_cached(key).subs(_r, _r * _s)
    F = _r ** (n - 1) * sp.exp(-(_r ** sp.Float(gamma)) / g_expr)
    return _lambdify(sp.diff(F, _r, n + 1), (_r, _s))


def registered_g(g_id: str, params: dict | None = None, gamma: float = 2.0) -> SymbolSpec:
    """Build a SymbolSpec from a registered g family.

    Families: ``constant_one``; ``log_half`` (log^{1/2}(2 + r^2), clamped to
    1 below r = sqrt(e - 2)); ``power`` with ``eps`` (max(1, r^eps), a
    deliberate non-Mikhlin counterexample); ``mikhlin_custom`` with
    ``coeffs`` (1 + sum_i c_i (r^2/(1+r^2))^i).
    """
    params = dict(params or {})
    expr = _family_expr_cached((g_id, tuple(sorted((k, _freeze(v)) for k, v in params.items()))))
    spec = SymbolSpec(float(gamma), g_id, params, expr, None)
    _validate(spec)
    return spec


def _validate(spec: SymbolSpec):
    vals = spec.g(SAMPLE_GRID)
    if not np.all(np.isfinite(vals)):
        raise RegistrationError(f"{spec.g_id}: g is not finite on the sample grid")
    if vals.min() < 1 - 1e-12:
        i = int(np.argmin(vals))
        raise RegistrationError(f"{spec.g_id}: g({SAMPLE_GRID[i]:.3g}) = {vals[i]:.6g} < 1")
    if np.any(np.diff(vals) < -1e-12 * np.abs(vals[1:])):
        raise RegistrationError(f"{spec.g_id}: g is not nondecreasing on the sample grid")


def symbol_from_dict(d: dict) -> SymbolSpec:
    """Inverse of SymbolSpec.to_dict."""
    g = d.get("g", {"id": "constant_one"})
    return registered_g(g["id"], g.get("params", {}), gamma=d["gamma"])
