"""Spectral vector and tensor fields on a torus grid.

Coefficients are normalised so that ``u(x) = sum_k u_hat(k) exp(i k.x)``,
i.e. ``u_hat = fftn(u) / N**n``.  Vector fields store an array of shape
``(n, N, ..., N)``; tensor fields ``(n, n, N, ..., N)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import TorusGrid


def _axes(grid: TorusGrid) -> tuple[int, ...]:
    return tuple(range(-grid.n, 0))


def to_physical(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Real physical-space values of a coefficient array (any leading axes)."""
    vals = np.fft.ifftn(coeffs, axes=_axes(grid)) * grid.N**grid.n
    return vals.real


def to_physical_complex(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return np.fft.ifftn(coeffs, axes=_axes(grid)) * grid.N**grid.n


def from_physical(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return np.fft.fftn(values, axes=_axes(grid)) / grid.N**grid.n


def reflect(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Array whose entry at k is the input's entry at -k."""
    ax = _axes(grid)
    return np.roll(np.flip(coeffs, axis=ax), 1, axis=ax)


def hermitian_residual(coeffs: np.ndarray, grid: TorusGrid) -> float:
    """max |c(-k) - conj(c(k))|, zero for real-valued fields."""
    return float(np.max(np.abs(reflect(coeffs, grid) - np.conj(coeffs)), initial=0.0))


def symmetrize(coeffs: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Project onto Hermitian-symmetric coefficients (real physical field)."""
    return 0.5 * (coeffs + np.conj(reflect(coeffs, grid)))


def lp_norm(values: np.ndarray, grid: TorusGrid, p: float) -> float:
    """Discrete L^p norm of physical values.

    Scalar arrays have shape ``grid.shape``; anything with extra leading axes
    is treated as a vector field and its pointwise Euclidean magnitude is used.
    The integral is a Riemann sum with cell volume weights, ``p = inf`` is the
    grid maximum.
    """
    if values.ndim > grid.n:
        mag = np.sqrt(np.sum(np.abs(values) ** 2, axis=tuple(range(values.ndim - grid.n))))
    else:
        mag = np.abs(values)
    if np.isinf(p):
        return float(mag.max())
    if p == 2:
        return float(np.sqrt(np.sum(mag**2) * grid.cell_volume))
    return float((np.sum(mag**p) * grid.cell_volume) ** (1.0 / p))


def l2_norm_coeffs(coeffs: np.ndarray, grid: TorusGrid) -> float:
    """L^2 norm through Parseval: ||u||^2 = L^n sum |u_hat|^2."""
    return float(np.sqrt(grid.volume * np.sum(np.abs(coeffs) ** 2)))


def sobolev_norm(coeffs: np.ndarray, grid: TorusGrid, s: float, p: float = 2) -> float:
    """Bessel-potential norm ||(1 - Laplacian)^{s/2} f||_{L^p}."""
    weighted = coeffs * (1.0 + grid.k2) ** (s / 2)
    if p == 2:
        return l2_norm_coeffs(weighted, grid)
    return lp_norm(to_physical(weighted, grid), grid, p)


def random_coeffs(
    grid: TorusGrid,
    sigma: float,
    rng: np.random.Generator,
    components: int | None = None,
    kcut: int | None = None,
) -> np.ndarray:
    """Random Hermitian coefficients with amplitudes (1 + |k|)^-sigma.

    Modes are drawn on the box |k_i| <= kcut (default: the 2/3 dealiasing
    band) in a fixed order, so the same seed and kcut give the same function
    on every grid large enough to hold it.  Phases are uniform.
    """
    if kcut is None:
        kcut = (grid.N - 1) // 3
    if not 0 <= kcut < grid.N // 2:
        raise ValueError(f"kcut={kcut} must lie in [0, N/2)")
    lead = () if components is None else (components,)
    side = 2 * kcut + 1
    box = rng.standard_normal(lead + (side,) * grid.n) + 1j * rng.standard_normal(lead + (side,) * grid.n)
    ks = np.arange(-kcut, kcut + 1)
    kk = np.array(np.meshgrid(*([ks] * grid.n), indexing="ij"))
    kabs = np.sqrt(np.sum((kk * grid.scale) ** 2, axis=0))
    box = box * (1.0 + kabs) ** (-sigma)
    out = np.zeros(lead + grid.shape, dtype=complex)
    idx = np.ix_(*([ks % grid.N] * grid.n))
    out[(Ellipsis,) + idx] = box
    return symmetrize(out, grid)


@dataclass(frozen=True, eq=False)
class SpectralVectorField:
    """Vector field stored as Fourier coefficients, shape (n, N, ..., N)."""

    grid: TorusGrid
    coeffs: np.ndarray
    div_free: bool = False

    def __post_init__(self):
        expected = (self.grid.n,) + self.grid.shape
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != {expected}")
        arr = np.array(self.coeffs, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zeros(cls, grid: TorusGrid) -> SpectralVectorField:
        return cls(grid, np.zeros((grid.n,) + grid.shape, dtype=complex), div_free=True)

    @classmethod
    def from_physical(cls, grid: TorusGrid, values: np.ndarray, div_free: bool = False) -> SpectralVectorField:
        return cls(grid, from_physical(np.asarray(values, dtype=float), grid), div_free)

    def physical(self) -> np.ndarray:
        return to_physical(self.coeffs, self.grid)

    def replace(self, coeffs: np.ndarray, div_free: bool | None = None) -> SpectralVectorField:
        return SpectralVectorField(self.grid, coeffs, self.div_free if div_free is None else div_free)

    def l2_norm(self) -> float:
        return l2_norm_coeffs(self.coeffs, self.grid)

    def divergence_residual(self) -> float:
        """max_k |k . u_hat(k)| relative to the coefficient 2-norm."""
        scale = np.sqrt(np.sum(np.abs(self.coeffs) ** 2))
        if scale == 0:
            return 0.0
        kdotu = np.sum(self.grid.k * self.coeffs, axis=0)
        return float(np.max(np.abs(kdotu)) / scale)

    def hermitian_residual(self) -> float:
        return hermitian_residual(self.coeffs, self.grid)

    def zero_mode(self) -> np.ndarray:
        return self.coeffs[(slice(None),) + (0,) * self.grid.n].copy()

    def __add__(self, other: SpectralVectorField) -> SpectralVectorField:
        _check_same_grid(self.grid, other.grid)
        return SpectralVectorField(self.grid, self.coeffs + other.coeffs, self.div_free and other.div_free)

    def __sub__(self, other: SpectralVectorField) -> SpectralVectorField:
        _check_same_grid(self.grid, other.grid)
        return SpectralVectorField(self.grid, self.coeffs - other.coeffs, self.div_free and other.div_free)

    def __mul__(self, c: float) -> SpectralVectorField:
        return SpectralVectorField(self.grid, self.coeffs * c, self.div_free)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralTensorField:
    """Rank-2 tensor field, coefficient shape (n, n, N, ..., N)."""

    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        expected = (self.grid.n, self.grid.n) + self.grid.shape
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != {expected}")
        arr = np.array(self.coeffs, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def physical(self) -> np.ndarray:
        return to_physical(self.coeffs, self.grid)

    def hermitian_residual(self) -> float:
        return hermitian_residual(self.coeffs, self.grid)


class GridMismatchError(ValueError):
    pass


def _check_same_grid(a: TorusGrid, b: TorusGrid):
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")
