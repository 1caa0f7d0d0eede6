"""Fourier multipliers and the Leray-alpha bilinear term built from them.

Every operator acts mode by mode in closed form on the coefficients; the
only physical-space work is the dealiased product inside
:func:`tensor_product`.
"""

from __future__ import annotations

import numpy as np

from .fields import (
    GridMismatchError,
    SpectralTensorField,
    SpectralVectorField,
    _check_same_grid,
    from_physical,
    to_physical,
)
from .grid import TorusGrid
from .symbols import SymbolSpec

W_VARIANTS = ("helmholtz", "plus_sign")


class SingularSymbolError(ValueError):
    pass


def symbol_values(grid: TorusGrid, s: SymbolSpec) -> np.ndarray:
    """-|xi|^gamma/g(|xi|) on the grid; the zero mode gets 0 when gamma > 0.

    For gamma == 0 the zero mode gets the finite value -1/g(0); for gamma < 0
    it is NaN (the symbol is singular there).
    """
    vals = s.symbol(grid.kmag)
    zero = (0,) * grid.n
    if s.gamma == 0:
        vals[zero] = -1.0 / float(s.g(0.0))
    elif s.gamma < 0:
        vals[zero] = np.nan
    return vals


def apply_multiplier(f: SpectralVectorField, s: SymbolSpec) -> SpectralVectorField:
    """Multiply every mode by -|xi|^gamma / g(|xi|)."""
    zero = (slice(None),) + (0,) * f.grid.n
    if s.gamma <= 0 and np.any(f.coeffs[zero] != 0):
        raise SingularSymbolError(
            f"symbol with gamma={s.gamma} is singular at xi=0 and the field has a nonzero mean"
        )
    m = s.symbol(f.grid.kmag)
    return f.replace(f.coeffs * m)


def semigroup_apply(f: SpectralVectorField, t: float, s: SymbolSpec, nu: float = 1.0) -> SpectralVectorField:
    """exp(t nu L) f, i.e. multiplication by exp(-t nu |xi|^gamma / g(|xi|))."""
    if t < 0:
        raise ValueError(f"semigroup time must be >= 0, got {t}")
    if t == 0:
        return f
    return f.replace(f.coeffs * np.exp(t * nu * s.symbol(f.grid.kmag)))


def helmholtz_symbol(grid: TorusGrid, alpha: float, s2: SymbolSpec) -> np.ndarray:
    """Symbol of (1 - alpha^2 L2): 1 + alpha^2 |xi|^gamma2 / g2(|xi|)."""
    if alpha == 0:
        return np.ones(grid.shape)
    if s2.gamma < 0:
        raise SingularSymbolError("regularisation exponent gamma2 must be >= 0")
    return 1.0 - alpha**2 * symbol_values(grid, s2)


def helmholtz_forward(f: SpectralVectorField, alpha: float, s2: SymbolSpec) -> SpectralVectorField:
    return f.replace(f.coeffs * helmholtz_symbol(f.grid, alpha, s2))


def helmholtz_inverse(f: SpectralVectorField, alpha: float, s2: SymbolSpec) -> SpectralVectorField:
    """(1 - alpha^2 L2)^{-1} f; the identity for alpha = 0."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if alpha == 0:
        return f
    return f.replace(f.coeffs / helmholtz_symbol(f.grid, alpha, s2))


def leray_project(f: SpectralVectorField) -> SpectralVectorField:
    """Hodge projection u_hat -> u_hat - k (k.u_hat)/|k|^2; zero mode untouched."""
    return f.replace(project_coeffs(f.coeffs, f.grid), div_free=True)


def project_coeffs(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    k = grid.k
    k2 = grid.k2.copy()
    k2[(0,) * grid.n] = 1.0
    kdotu = np.sum(k * coeffs, axis=0)
    return coeffs - k * (kdotu / k2)


def dealias(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return coeffs * grid.dealias_mask


def dealiased_product(a: np.ndarray, b: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """2/3-rule product of two scalar coefficient arrays.

    Both factors are truncated to the dealiasing band, multiplied in physical
    space and the result truncated again, so the retained modes equal the
    exact convolution of the truncated factors.
    """
    pa = to_physical(dealias(a, grid), grid)
    pb = to_physical(dealias(b, grid), grid)
    return dealias(from_physical(pa * pb, grid), grid)


def tensor_product(u: SpectralVectorField, v: SpectralVectorField, dealiased: bool = True) -> SpectralTensorField:
    """u (x) v with entry (i, j) the product of u_i and v_j."""
    _check_same_grid(u.grid, v.grid)
    grid = u.grid
    mask = grid.dealias_mask if dealiased else 1.0
    pu = to_physical(u.coeffs * mask, grid)
    pv = to_physical(v.coeffs * mask, grid)
    prod = pu[:, None] * pv[None, :]
    return SpectralTensorField(grid, from_physical(prod, grid) * mask)


def divergence(T: SpectralTensorField) -> SpectralVectorField:
    """Row divergence: out_i = d_j T_ji, so div(u (x) v) = (u.grad) v for div u = 0.

    Odd derivatives drop the Nyquist component so real fields stay real.
    """
    kd = T.grid.kderiv
    out = 1j * np.einsum("j...,ji...->i...", kd, T.coeffs)
    return SpectralVectorField(T.grid, out)


def nonlinear_W(
    u: SpectralVectorField,
    v: SpectralVectorField,
    alpha: float,
    s2: SymbolSpec,
    variant: str = "helmholtz",
) -> SpectralVectorField:
    """P (1 - alpha^2 L2)^{-1} div(u (x) A v).

    ``variant="helmholtz"`` uses A = 1 - alpha^2 L2 (positive definite);
    ``"plus_sign"`` uses A = 1 + alpha^2 L2.
    """
    if variant == "helmholtz":
        av = helmholtz_forward(v, alpha, s2)
    elif variant == "plus_sign":
        av = v if alpha == 0 else v.replace(v.coeffs * (1.0 + alpha**2 * symbol_values(v.grid, s2)))
    else:
        raise ValueError(f"unknown W variant {variant!r}; expected one of {W_VARIANTS}")
    d = divergence(tensor_product(u, av))
    return leray_project(helmholtz_inverse(d, alpha, s2))


__all__ = [
    "GridMismatchError",
    "SingularSymbolError",
    "apply_multiplier",
    "dealias",
    "dealiased_product",
    "divergence",
    "helmholtz_forward",
    "helmholtz_inverse",
    "leray_project",
    "nonlinear_W",
    "semigroup_apply",
    "symbol_values",
    "tensor_product",
]
