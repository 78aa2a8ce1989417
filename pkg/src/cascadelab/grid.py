"""Fourier lattice geometry for a periodic box.

All spectral objects in cascadelab live on a ``WavenumberGrid``: the mode
lattice k in Z^d for a [0, L]^d box sampled at N collocation points per axis,
with integer mode components in [-N/2, N/2) (numpy FFT layout). Physical
wavenumbers are kappa0 * |k| with kappa0 = 2*pi/L and |k| the Euclidean norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["WavenumberGrid", "make_grid"]


@dataclass(frozen=True)
class WavenumberGrid:
    """Mode lattice for a [0, L]^d periodic box with N points per axis.

    Parameters
    ----------
    L : float
        Box side length.
    N : int
        Collocation points per axis. Must be even so the lattice is the
        standard FFT layout; modes live in [-N/2, N/2) per component.
    d : int
        Spatial dimension, 2 or 3.

    Attributes
    ----------
    kappa0 : float
        Fundamental wavenumber 2*pi/L; the lowest active wavenumber.
    dealias_cutoff : int
        Largest retained |k| under the two-thirds rule, floor(N/3).
        Retained modes satisfy |k| <= dealias_cutoff (circular mask: shells
        are annuli in |k|, not cubes).
    k_sq : ndarray of int64, shape (N,)*d
        |k|^2 per lattice point.
    kappa : ndarray of float64, shape (N,)*d
        kappa0 * |k| per lattice point.
    dealias_mask : ndarray of bool, shape (N,)*d
        True where |k| <= dealias_cutoff.
    shell_index : ndarray of int64, shape (N,)*d
        floor(|k|): index of the unit-width annulus [m, m+1) holding each
        mode. Used for integer-ladder shell reductions.
    """

    L: float
    N: int
    d: int
    kappa0: float = field(init=False, repr=False)
    dealias_cutoff: int = field(init=False, repr=False)
    k_axes: tuple = field(init=False, repr=False, compare=False)
    k_sq: np.ndarray = field(init=False, repr=False, compare=False)
    kappa: np.ndarray = field(init=False, repr=False, compare=False)
    dealias_mask: np.ndarray = field(init=False, repr=False, compare=False)
    shell_index: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.L <= 0:
            raise ValueError(f"box length must be positive, got L={self.L}")
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got d={self.d}")
        if self.N < 6 or self.N % 2 != 0:
            raise ValueError(f"N must be even and >= 6, got N={self.N}")

        object.__setattr__(self, "kappa0", 2.0 * np.pi / self.L)
        object.__setattr__(self, "dealias_cutoff", self.N // 3)

        # Integer mode numbers in FFT order per axis, broadcastable to (N,)*d.
        axis = np.fft.fftfreq(self.N, d=1.0 / self.N).astype(np.int64)
        k_axes = []
        for i in range(self.d):
            shape = [1] * self.d
            shape[i] = self.N
            k_axes.append(axis.reshape(shape))
        k_sq = sum(a.astype(np.int64) ** 2 for a in k_axes)
        k_abs = np.sqrt(k_sq.astype(np.float64))
        kappa = self.kappa0 * k_abs
        dealias_mask = k_sq <= self.dealias_cutoff**2
        shell_index = np.floor(k_abs).astype(np.int64)

        for name, arr in (
            ("k_sq", k_sq),
            ("kappa", kappa),
            ("dealias_mask", dealias_mask),
            ("shell_index", shell_index),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for a in k_axes:
            a.setflags(write=False)
        object.__setattr__(self, "k_axes", tuple(k_axes))

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    @property
    def n_shells(self) -> int:
        """Number of unit-width annuli [m, m+1) that can hold retained modes."""
        return self.dealias_cutoff + 1

    @property
    def kappa_max(self) -> float:
        """Largest retained physical wavenumber, kappa0 * dealias_cutoff."""
        return self.kappa0 * self.dealias_cutoff

    def ladder(self) -> np.ndarray:
        """Integer wavenumber ladder kappa0 * m, m = 1 .. dealias_cutoff."""
        return self.kappa0 * np.arange(1, self.dealias_cutoff + 1, dtype=np.float64)


def make_grid(L: float, N: int, d: int = 2) -> WavenumberGrid:
    """Construct a validated wavenumber grid.

    Parameters
    ----------
    L : float
        Box side length (> 0).
    N : int
        Points per axis (even, >= 6).
    d : int
        Spatial dimension, 2 (default) or 3.
    """
    return WavenumberGrid(L=float(L), N=int(N), d=int(d))
