"""Divergence-free initial data."""

from __future__ import annotations

import numpy as np

from ..fields import SpectralVectorField, random_coeffs
from ..grid import TorusGrid
from ..spectral import leray_project
from ..symbols import SymbolSpec

KINDS = ("taylor_green_2d", "random_divfree", "single_mode", "zero")


def taylor_green(grid: TorusGrid, amplitude: float = 1.0) -> SpectralVectorField:
    """A (sin x cos y, -cos x sin y) in units where the box is [0, 2pi)^2."""
    if grid.n != 2:
        raise ValueError("taylor_green_2d needs n = 2")
    x, y = grid.x
    kx, ky = grid.scale * x, grid.scale * y
    u = amplitude * np.stack([np.sin(kx) * np.cos(ky), -np.cos(kx) * np.sin(ky)])
    return SpectralVectorField.from_physical(grid, u, div_free=True)


def taylor_green_exact(grid: TorusGrid, t: float, nu: float, s1: SymbolSpec, amplitude: float = 1.0):
    """Exact solution: the nonlinearity is a gradient, so only the linear decay acts."""
    decay = float(np.exp(t * nu * s1.symbol(np.sqrt(2.0) * grid.scale)))
    return taylor_green(grid, amplitude * decay)


def single_mode(grid: TorusGrid, k, amplitude) -> SpectralVectorField:
    """Leray projection of amplitude * cos(k.x)."""
    amp = np.asarray(amplitude, dtype=float)
    if amp.shape != (grid.n,):
        raise ValueError(f"amplitude must have {grid.n} components")
    c = np.zeros((grid.n,) + grid.shape, complex)
    idx, nidx = grid.mode_index(k), grid.mode_index([-v for v in k])
    c[(slice(None),) + idx] += amp / 2
    c[(slice(None),) + nidx] += amp / 2
    return leray_project(SpectralVectorField(grid, c))


def random_divfree(grid: TorusGrid, sigma: float, amplitude: float, seed: int, kcut: int | None = None):
    """Random solenoidal field, spectrum (1+|k|)^-sigma, mean zero, L^2 norm = amplitude."""
    rng = np.random.default_rng(seed)
    c = random_coeffs(grid, sigma, rng, components=grid.n, kcut=kcut)
    c[(slice(None),) + (0,) * grid.n] = 0
    u = leray_project(SpectralVectorField(grid, c))
    norm = u.l2_norm()
    return u * (amplitude / norm) if norm > 0 else u


def make_initial_data(kind: str, grid: TorusGrid, params: dict | None = None, seed: int = 0) -> SpectralVectorField:
    """Initial field of the given kind; reproducible from ``seed``.

    Args:
        kind: one of ``taylor_green_2d``, ``random_divfree``, ``single_mode``, ``zero``.
        params: ``amplitude`` (scalar, or a vector for ``single_mode``),
            ``sigma`` and ``kcut`` for random data, ``k`` for a single mode.
    """
    params = dict(params or {})
    if kind == "taylor_green_2d":
        return taylor_green(grid, float(params.get("amplitude", 1.0)))
    if kind == "random_divfree":
        return random_divfree(
            grid, float(params.get("sigma", 2.0)), float(params.get("amplitude", 1.0)), seed, params.get("kcut")
        )
    if kind == "single_mode":
        k = params.get("k", [1] + [0] * (grid.n - 1))
        amp = params.get("amplitude", [0, 1] + [0] * (grid.n - 2))
        return single_mode(grid, k, amp)
    if kind == "zero":
        return SpectralVectorField.zeros(grid)
    raise ValueError(f"unknown initial data kind {kind!r}; expected one of {KINDS}")
