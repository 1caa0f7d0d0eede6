"""Periodic torus grids and their wavevector tables."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on the torus [0, L)^n with N points per axis.

    Coefficients live in numpy FFT index order along every axis, so the
    integer wavenumbers per axis are ``0, 1, ..., N/2-1, -N/2, ..., -1``.
    Physical wavevectors are the integer ones scaled by ``2*pi/L``.
    """

    n: int
    N: int
    L: float = 2 * np.pi

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"dimension n must be 2 or 3, got {self.n}")
        if self.N < 8 or self.N % 2:
            raise ValueError(f"N must be even and >= 8, got {self.N}")
        if self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"period L must be positive, got {self.L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def scale(self) -> float:
        return 2 * np.pi / self.L

    @property
    def cell_volume(self) -> float:
        return (self.L / self.N) ** self.n

    @property
    def volume(self) -> float:
        return self.L**self.n

    @cached_property
    def kint(self) -> np.ndarray:
        """Integer wavevectors, shape (n, N, ..., N)."""
        k1 = np.fft.fftfreq(self.N, 1.0 / self.N).astype(np.int64)
        return np.array(np.meshgrid(*([k1] * self.n), indexing="ij"))

    @cached_property
    def k(self) -> np.ndarray:
        """Physical wavevectors, shape (n, N, ..., N)."""
        return self.kint * self.scale

    @cached_property
    def kmag(self) -> np.ndarray:
        """Euclidean norm of the physical wavevector; zero only at the zero mode."""
        return np.sqrt(np.sum(self.k**2, axis=0))

    @cached_property
    def k2(self) -> np.ndarray:
        return np.sum(self.k**2, axis=0)

    @cached_property
    def nyquist(self) -> np.ndarray:
        """True on modes with some component at -N/2."""
        return np.any(self.kint == -self.N // 2, axis=0)

    @cached_property
    def kderiv(self) -> np.ndarray:
        """Wavevectors used for odd derivatives: Nyquist components set to zero."""
        kd = self.k.copy()
        kd[self.kint == -self.N // 2] = 0.0
        return kd

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keep modes with |k_i| < N/3 on every axis."""
        return np.all(3 * np.abs(self.kint) < self.N, axis=0)

    @cached_property
    def x(self) -> np.ndarray:
        """Physical coordinates, shape (n, N, ..., N)."""
        x1 = np.arange(self.N) * (self.L / self.N)
        return np.array(np.meshgrid(*([x1] * self.n), indexing="ij"))

    @property
    def kmax_radius(self) -> float:
        """Largest |xi| present on the grid (the corner mode)."""
        return float(np.sqrt(self.n) * (self.N // 2) * self.scale)

    def mode_index(self, kvec) -> tuple[int, ...]:
        """Array index of the integer wavevector ``kvec``."""
        kvec = tuple(int(c) for c in kvec)
        if len(kvec) != self.n:
            raise ValueError(f"wavevector {kvec} does not match dimension {self.n}")
        if any(not -self.N // 2 <= c < self.N // 2 for c in kvec):
            raise ValueError(f"wavevector {kvec} outside [-N/2, N/2)")
        return tuple(c % self.N for c in kvec)

    def describe(self) -> str:
        return f"periodic torus [0,{self.L:.6g})^{self.n}, N={self.N}"
