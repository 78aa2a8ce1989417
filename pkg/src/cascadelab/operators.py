"""Core spectral operations: inner products, projection, filtering,
dyadic spectra, and the dealiased pseudo-spectral advection product.

Norm conventions (Parseval): |f|^2 = L^d * sum_k |f_hat_k|^2, and the
Laplacian-weighted family |A^{p/2} f|^2 = L^d * sum_k (kappa0^2 |k|^2)^p
|f_hat_k|^2, so p=1 gives the gradient norm and p=2 the Laplacian norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .fields import (
    SpectralScalarField,
    SpectralVelocityField,
    scalar_field,
    to_physical,
    velocity_from_vorticity,
)
from .grid import WavenumberGrid

__all__ = [
    "inner",
    "inverse_kappa_sq",
    "parseval_energy",
    "collocation_energy",
    "leray_project",
    "max_divergence",
    "shell_filter",
    "split_at",
    "SpectrumTable",
    "unit_shell_spectrum",
    "dyadic_spectrum",
    "bilinear_advection",
    "advect_spectrum",
    "gradient_physical",
]


def _coeff_stack(field) -> np.ndarray:
    """Coefficients as a (ncomp,) + grid.shape stack."""
    if isinstance(field, SpectralScalarField):
        return field.coeffs[np.newaxis]
    return field.component_coeffs()


@lru_cache(maxsize=16)
def inverse_kappa_sq(grid: WavenumberGrid) -> np.ndarray:
    """1 / (kappa0^2 |k|^2) with the k = 0 entry zeroed (mean-free fields)."""
    k_sq = grid.k_sq.astype(np.float64)
    k_sq[tuple([0] * grid.d)] = 1.0
    inv = 1.0 / (grid.kappa0**2 * k_sq)
    inv[tuple([0] * grid.d)] = 0.0
    inv.setflags(write=False)
    return inv


def inner(f, g, laplacian_power: int = 0) -> float:
    """L^2 pairing (f, g) = integral of f*g over the box, computed
    spectrally, optionally weighted by (kappa0^2 |k|^2)^p (p = laplacian
    power applied symmetrically, e.g. p=1 gives (grad f, grad g))."""
    if f.grid is not g.grid and f.grid != g.grid:
        raise ValueError("fields live on different grids")
    fs, gs = _coeff_stack(f), _coeff_stack(g)
    if fs.shape != gs.shape:
        raise ValueError("scalar/velocity mismatch in inner product")
    acc = np.zeros(f.grid.shape, dtype=np.float64)
    for a, b in zip(fs, gs):
        acc += a.real * b.real + a.imag * b.imag
    if laplacian_power:
        acc *= (f.grid.kappa**2) ** laplacian_power
    return float(f.grid.L**f.grid.d * np.sum(acc))


def parseval_energy(field) -> float:
    """|f|^2 = L^d * sum_k |f_hat_k|^2 (components summed for velocity)."""
    return inner(field, field, 0)


def collocation_energy(field) -> float:
    """|f|^2 by collocation quadrature, sum_j |f(x_j)|^2 * (L/N)^d.

    Independent route used to pin the Parseval normalization; agrees with
    parseval_energy to roundoff for dealiased fields.
    """
    grid = field.grid
    phys = to_physical(field)
    if isinstance(field, SpectralScalarField):
        phys = phys[np.newaxis]
    cell = (grid.L / grid.N) ** grid.d
    return float(np.sum(phys * phys) * cell)


def leray_project(grid: WavenumberGrid, components: np.ndarray) -> SpectralVelocityField:
    """Project raw vector coefficients onto divergence-free fields:
    u_hat = v_hat - k (k . v_hat) / |k|^2 per mode. Idempotent."""
    comps = np.asarray(components, dtype=np.complex128)
    if comps.shape != (grid.d,) + grid.shape:
        raise ValueError(
            f"component shape {comps.shape} != {(grid.d,) + grid.shape}"
        )
    kdotv = np.zeros(grid.shape, dtype=np.complex128)
    for i in range(grid.d):
        kdotv += grid.k_axes[i] * comps[i]
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(grid.k_sq > 0, kdotv / np.where(grid.k_sq > 0, grid.k_sq, 1), 0.0)
    projected = np.empty_like(comps)
    for i in range(grid.d):
        projected[i] = comps[i] - grid.k_axes[i] * factor
    if grid.d == 2:
        kx, ky = grid.k_axes
        omega = 1j * grid.kappa0 * (kx * projected[1] - ky * projected[0])
        return velocity_from_vorticity(grid, omega)
    from .fields import _prepare_coeffs

    clean = np.stack([_prepare_coeffs(grid, projected[i]) for i in range(3)])
    clean.setflags(write=False)
    return SpectralVelocityField(grid=grid, components=clean)


def max_divergence(v: SpectralVelocityField) -> float:
    """Max per-mode |k . u_hat| over the lattice (0 for solenoidal fields)."""
    comps = v.component_coeffs()
    div = np.zeros(v.grid.shape, dtype=np.complex128)
    for i in range(v.grid.d):
        div += v.grid.k_axes[i] * comps[i]
    return float(np.max(np.abs(div)))


def _shell_mask(grid: WavenumberGrid, kappa_lo: float, kappa_hi: float) -> np.ndarray:
    return (grid.kappa >= kappa_lo) & (grid.kappa < kappa_hi)


def shell_filter(field, kappa_lo: float, kappa_hi: float):
    """Retain exactly the modes with kappa_lo <= kappa0*|k| < kappa_hi.

    The comparison is evaluated identically on both sides of any split
    point, so shell_filter(f, a, m) and shell_filter(f, m, b) partition
    shell_filter(f, a, b) exactly, coefficient by coefficient.
    """
    grid = field.grid
    mask = _shell_mask(grid, kappa_lo, kappa_hi)
    if isinstance(field, SpectralScalarField):
        return SpectralScalarField(grid=grid, coeffs=_masked(field.coeffs, mask))
    if grid.d == 2:
        return SpectralVelocityField(grid=grid, vorticity=_masked(field.vorticity, mask))
    comps = np.stack([_masked(field.components[i], mask) for i in range(3)])
    comps.setflags(write=False)
    return SpectralVelocityField(grid=grid, components=comps)


def _masked(coeffs: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.where(mask, coeffs, 0.0 + 0.0j)
    out.setflags(write=False)
    return out


def split_at(field, kappa: float):
    """(low, high) pair: modes below kappa and modes at/above kappa.
    low + high reassembles the field exactly."""
    return (
        shell_filter(field, 0.0, kappa),
        shell_filter(field, kappa, math.inf),
    )


@dataclass(frozen=True)
class SpectrumTable:
    """Binned spectrum: values[j] = sum of |f_hat_k|^2 over modes with
    kappa_lo[j] <= kappa0*|k| < kappa_hi[j] (components summed), which is
    1/L^d times the Parseval contribution of the bin.

    binning is "dyadic" (edges kappa0 * 2^j, anchored at kappa0) or "unit"
    (integer ladder, width kappa0). top_partial marks a final dyadic bin
    that the grid cutoff truncates.
    """

    kappa_lo: np.ndarray
    kappa_hi: np.ndarray
    values: np.ndarray
    binning: str
    top_partial: bool = False

    def __post_init__(self) -> None:
        lo = np.asarray(self.kappa_lo, dtype=np.float64)
        hi = np.asarray(self.kappa_hi, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if not (lo.shape == hi.shape == vals.shape) or lo.ndim != 1:
            raise ValueError("table columns must be 1-D and equally sized")
        if np.any(hi <= lo):
            raise ValueError("bins must have kappa_hi > kappa_lo")
        for arr, name in ((lo, "kappa_lo"), (hi, "kappa_hi"), (vals, "values")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_bins(self) -> int:
        return int(self.values.size)

    def total(self) -> float:
        return float(np.sum(self.values))


def unit_shell_spectrum(field, laplacian_power: int = 0) -> np.ndarray:
    """Per-unit-annulus sums: out[m] = sum over m <= |k| < m+1 of
    (kappa0^2|k|^2)^p * |f_hat_k|^2, components summed. Length n_shells."""
    grid = field.grid
    weights = np.zeros(grid.shape, dtype=np.float64)
    for c in _coeff_stack(field):
        weights += c.real**2 + c.imag**2
    if laplacian_power:
        weights *= (grid.kappa**2) ** laplacian_power
    return kernels.shell_sums(weights, grid.shell_index, grid.n_shells)


def dyadic_bin_count(cutoff: int) -> int:
    return int(math.floor(math.log2(cutoff))) + 1 if cutoff >= 1 else 0


def dyadic_from_unit_shells(grid: WavenumberGrid, shells: np.ndarray) -> SpectrumTable:
    """Aggregate unit annuli into dyadic bins [kappa0*2^j, kappa0*2^{j+1})."""
    cutoff = grid.dealias_cutoff
    n_bins = dyadic_bin_count(cutoff)
    lo = np.array([grid.kappa0 * 2.0**j for j in range(n_bins)])
    hi = np.array([grid.kappa0 * 2.0 ** (j + 1) for j in range(n_bins)])
    values = np.zeros(n_bins, dtype=np.float64)
    for j in range(n_bins):
        m0 = 2**j
        m1 = min(2 ** (j + 1) - 1, cutoff)
        values[j] = float(np.sum(shells[m0 : m1 + 1]))
    top_partial = 2**n_bins - 1 > cutoff
    return SpectrumTable(
        kappa_lo=lo, kappa_hi=hi, values=values, binning="dyadic", top_partial=top_partial
    )


def dyadic_spectrum(field) -> SpectrumTable:
    """Dyadic-binned spectrum of a field. Bin j holds the modes with
    kappa0*2^j <= kappa0*|k| < kappa0*2^{j+1}; bins sum to the Parseval
    total divided by L^d."""
    return dyadic_from_unit_shells(field.grid, unit_shell_spectrum(field))


def gradient_physical(grid: WavenumberGrid, coeffs: np.ndarray) -> np.ndarray:
    """Collocation samples of grad(s) from scalar coefficients: (d,)+shape."""
    scale = float(grid.N) ** grid.d
    out = np.empty((grid.d,) + grid.shape, dtype=np.float64)
    for i in range(grid.d):
        out[i] = np.fft.ifftn(1j * grid.kappa0 * grid.k_axes[i] * coeffs).real * scale
    return out


def advect_spectrum(
    grid: WavenumberGrid, u_phys: np.ndarray, s_coeffs: np.ndarray
) -> np.ndarray:
    """Dealiased spectral coefficients of u . grad(s) given collocation
    velocity samples. The zero mode is forced to zero (it vanishes
    analytically for divergence-free u; roundoff may leave dust)."""
    grads = gradient_physical(grid, s_coeffs)
    if grid.d == 2:
        w = kernels.advect_scalar_2d(u_phys[0], u_phys[1], grads[0], grads[1])
    else:
        w = kernels.advect_scalar_3d(
            u_phys[0], u_phys[1], u_phys[2], grads[0], grads[1], grads[2]
        )
    w_hat = np.fft.fftn(w) / float(grid.N) ** grid.d
    w_hat[~grid.dealias_mask] = 0.0
    w_hat[(0,) * grid.d] = 0.0
    return w_hat


def bilinear_advection(u: SpectralVelocityField, s):
    """Dealiased pseudo-spectral advection.

    Scalar s: returns u . grad(s) as a scalar field. Vector s: returns the
    Leray projection of (u . grad) s, i.e. the Navier-Stokes bilinear term
    B(u, s). Both satisfy the skew-symmetry (u.grad s, s) = 0 and
    (B(u, v), v) = 0 to roundoff for dealiased inputs.
    """
    grid = u.grid
    if grid != s.grid:
        raise ValueError("fields live on different grids")
    u_phys = to_physical(u)
    if isinstance(s, SpectralScalarField):
        return scalar_field(grid, advect_spectrum(grid, u_phys, s.coeffs))
    s_comps = s.component_coeffs()
    raw = np.stack(
        [advect_spectrum(grid, u_phys, s_comps[i]) for i in range(grid.d)]
    )
    return leray_project(grid, raw)
