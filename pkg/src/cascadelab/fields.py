"""Spectral field containers and constructors.

Conventions
-----------
Coefficients follow f(x) = sum_k f_hat[k] * exp(i*kappa0*k.x), so physical
samples on the collocation lattice are ifftn(coeffs) * N^d and coefficients
are fftn(values) / N^d. Real fields keep Hermitian symmetry
f_hat[-k] == conj(f_hat[k]); the mean mode k=0 is identically zero; modes
beyond the dealias cutoff are identically zero.

Fields are immutable once constructed: coefficient arrays are marked
read-only and every operation returns a new field.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import WavenumberGrid

__all__ = [
    "SpectralScalarField",
    "SpectralVelocityField",
    "scalar_field",
    "velocity_from_vorticity",
    "velocity_from_components",
    "to_physical",
    "coeffs_from_physical",
    "hermitian_reflect",
    "hermitian_error",
    "band_mask",
    "random_band_coeffs",
    "random_scalar_field",
    "random_velocity_field",
    "validate_field",
]


def _all_axes(d: int) -> tuple:
    return tuple(range(d))


def hermitian_reflect(coeffs: np.ndarray) -> np.ndarray:
    """Return conj(f_hat[-k]) arranged on the same FFT lattice."""
    axes = _all_axes(coeffs.ndim)
    return np.conj(np.roll(np.flip(coeffs, axis=axes), 1, axis=axes))


def hermitian_error(coeffs: np.ndarray) -> float:
    """Max absolute deviation from Hermitian symmetry."""
    return float(np.max(np.abs(coeffs - hermitian_reflect(coeffs))))


def _prepare_coeffs(grid: WavenumberGrid, coeffs: np.ndarray) -> np.ndarray:
    c = np.array(coeffs, dtype=np.complex128, copy=True)
    if c.shape != grid.shape:
        raise ValueError(f"coefficient shape {c.shape} != grid shape {grid.shape}")
    c[~grid.dealias_mask] = 0.0
    c[(0,) * grid.d] = 0.0
    c.setflags(write=False)
    return c


@dataclass(frozen=True)
class SpectralScalarField:
    """Scalar field stored as dealiased spectral coefficients."""

    grid: WavenumberGrid
    coeffs: np.ndarray

    @property
    def d(self) -> int:
        return self.grid.d


@dataclass(frozen=True)
class SpectralVelocityField:
    """Divergence-free velocity field.

    Canonical storage is dimension-dependent: in 2-D the scalar vorticity
    spectrum (velocity reconstructed as u_hat = i*kperp*omega_hat/(|k|^2*kappa0)
    with kperp = (k_y, -k_x), which makes incompressibility exact by
    construction); in 3-D the component spectra, shape (3,) + grid.shape.
    """

    grid: WavenumberGrid
    vorticity: np.ndarray | None = None
    components: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.grid.d == 2:
            if self.vorticity is None or self.components is not None:
                raise ValueError("2-D velocity stores vorticity only")
        else:
            if self.components is None or self.vorticity is not None:
                raise ValueError("3-D velocity stores components only")

    @property
    def d(self) -> int:
        return self.grid.d

    def component_coeffs(self) -> np.ndarray:
        """Velocity component spectra, shape (d,) + grid.shape."""
        if self.grid.d == 3:
            return self.components
        fx, fy = _velocity_factors(self.grid)
        out = np.empty((2,) + self.grid.shape, dtype=np.complex128)
        np.multiply(fx, self.vorticity, out=out[0])
        np.multiply(fy, self.vorticity, out=out[1])
        return out


@lru_cache(maxsize=16)
def _velocity_factors(grid: WavenumberGrid) -> tuple:
    """Per-mode factors mapping omega_hat -> (ux_hat, uy_hat) in 2-D."""
    kx, ky = (a.astype(np.float64) for a in grid.k_axes)
    inv = np.zeros(grid.shape, dtype=np.float64)
    nz = grid.k_sq > 0
    inv[nz] = 1.0 / (grid.kappa0 * grid.k_sq[nz])
    fx = 1j * ky * inv
    fy = -1j * kx * inv
    fx.setflags(write=False)
    fy.setflags(write=False)
    return fx, fy


def scalar_field(grid: WavenumberGrid, coeffs: np.ndarray) -> SpectralScalarField:
    """Wrap raw coefficients as a scalar field, enforcing zero mean and
    dealias support. Hermitian symmetry is the caller's responsibility
    (checked by validate_field)."""
    return SpectralScalarField(grid=grid, coeffs=_prepare_coeffs(grid, coeffs))


def velocity_from_vorticity(
    grid: WavenumberGrid, omega_coeffs: np.ndarray
) -> SpectralVelocityField:
    """2-D velocity from its scalar vorticity spectrum."""
    if grid.d != 2:
        raise ValueError("vorticity storage is 2-D only")
    return SpectralVelocityField(grid=grid, vorticity=_prepare_coeffs(grid, omega_coeffs))


def velocity_from_components(
    grid: WavenumberGrid, comps: np.ndarray, div_tol: float = 1e-10
) -> SpectralVelocityField:
    """Velocity from component spectra.

    The input must already be divergence-free (relative tolerance div_tol);
    non-solenoidal inputs must go through leray_project instead, otherwise
    the 2-D vorticity storage would silently discard the gradient part.
    """
    comps = np.asarray(comps, dtype=np.complex128)
    if comps.shape != (grid.d,) + grid.shape:
        raise ValueError(
            f"component shape {comps.shape} != {(grid.d,) + grid.shape}"
        )
    div = np.zeros(grid.shape, dtype=np.complex128)
    for i in range(grid.d):
        div += grid.k_axes[i] * comps[i]
    scale = float(np.max(np.abs(comps)))
    if scale > 0 and float(np.max(np.abs(div))) > div_tol * scale * grid.N:
        raise ValueError(
            "components are not divergence-free; use leray_project first"
        )
    if grid.d == 3:
        clean = np.stack([_prepare_coeffs(grid, comps[i]) for i in range(3)])
        clean.setflags(write=False)
        return SpectralVelocityField(grid=grid, components=clean)
    kx, ky = grid.k_axes
    omega = 1j * grid.kappa0 * (kx * comps[1] - ky * comps[0])
    return velocity_from_vorticity(grid, omega)


def to_physical(field) -> np.ndarray:
    """Collocation samples. Scalar -> (N,)*d real array; velocity -> (d,)+shape."""
    grid = field.grid
    scale = float(grid.N) ** grid.d
    if isinstance(field, SpectralScalarField):
        return np.fft.ifftn(field.coeffs).real * scale
    comps = field.component_coeffs()
    out = np.empty((grid.d,) + grid.shape, dtype=np.float64)
    for i in range(grid.d):
        out[i] = np.fft.ifftn(comps[i]).real * scale
    return out


def coeffs_from_physical(grid: WavenumberGrid, values: np.ndarray) -> np.ndarray:
    """Spectral coefficients of real collocation samples (not dealiased)."""
    if values.shape != grid.shape:
        raise ValueError(f"value shape {values.shape} != grid shape {grid.shape}")
    return np.fft.fftn(values) / float(grid.N) ** grid.d


def band_mask(
    grid: WavenumberGrid, kappa_lo: float, kappa_hi: float, closed_hi: bool = True
) -> np.ndarray:
    """Modes with kappa_lo <= kappa0*|k| <= kappa_hi (or < for half-open)."""
    if closed_hi:
        return (grid.kappa >= kappa_lo) & (grid.kappa <= kappa_hi) & grid.dealias_mask
    return (grid.kappa >= kappa_lo) & (grid.kappa < kappa_hi) & grid.dealias_mask


def _half_lattice(grid: WavenumberGrid) -> np.ndarray:
    """Lexicographically positive half of the lattice (one mode per +-k pair)."""
    axes = [np.broadcast_to(a, grid.shape) for a in grid.k_axes]
    half = axes[0] > 0
    tie = axes[0] == 0
    for a in axes[1:]:
        half = half | (tie & (a > 0))
        tie = tie & (a == 0)
    return half


def random_band_coeffs(
    grid: WavenumberGrid,
    kappa_lo: float,
    kappa_hi: float,
    norm: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Hermitian coefficients supported on a band: equal magnitude per mode,
    i.i.d. uniform random phases, Parseval norm scaled to ``norm``.

    Different seeds change phases only, never the magnitude spectrum. Returns
    the zero array when the band holds no modes and norm is 0; raises when
    the band holds no modes but a nonzero norm was requested.
    """
    mask = band_mask(grid, kappa_lo, kappa_hi) & _half_lattice(grid)
    n_half = int(np.count_nonzero(mask))
    if n_half == 0:
        if norm == 0.0:
            return np.zeros(grid.shape, dtype=np.complex128)
        raise ValueError(
            f"band [{kappa_lo}, {kappa_hi}] holds no dealiased modes on this grid"
        )
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_half)
    coeffs[mask] = np.exp(1j * phases)
    coeffs = coeffs + hermitian_reflect(coeffs)
    if norm > 0.0:
        current = np.sqrt(grid.L**grid.d * np.sum(np.abs(coeffs) ** 2))
        coeffs *= norm / current
    else:
        coeffs[:] = 0.0
    return coeffs


def random_scalar_field(
    grid: WavenumberGrid, seed: int, spectrum_slope: float = 2.0
) -> SpectralScalarField:
    """Random smooth test field: all dealiased modes populated with random
    phases and (1+|k|)^-slope magnitudes."""
    rng = np.random.default_rng(seed)
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    half = _half_lattice(grid) & grid.dealias_mask
    n = int(np.count_nonzero(half))
    mags = (1.0 + np.sqrt(grid.k_sq[half].astype(np.float64))) ** (-spectrum_slope)
    coeffs[half] = mags * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n))
    coeffs = coeffs + hermitian_reflect(coeffs)
    return scalar_field(grid, coeffs)


def random_velocity_field(
    grid: WavenumberGrid, seed: int, spectrum_slope: float = 2.0
) -> SpectralVelocityField:
    """Random divergence-free test velocity."""
    if grid.d == 2:
        omega = random_scalar_field(grid, seed, spectrum_slope)
        return SpectralVelocityField(grid=grid, vorticity=omega.coeffs)
    from .operators import leray_project

    comps = np.stack(
        [random_scalar_field(grid, seed + i, spectrum_slope).coeffs for i in range(3)]
    )
    return leray_project(grid, comps)


def validate_field(field, tol: float = 1e-12) -> None:
    """Assert the structural invariants: zero mean, dealias support,
    Hermitian symmetry (all within tol relative to the max coefficient)."""
    grid = field.grid
    if isinstance(field, SpectralScalarField):
        stack = field.coeffs[np.newaxis]
    else:
        stack = field.component_coeffs()
    scale = max(float(np.max(np.abs(stack))), 1e-300)
    for c in stack:
        if abs(c[(0,) * grid.d]) > tol * scale:
            raise AssertionError("mean mode is not zero")
        beyond = np.abs(c[~grid.dealias_mask])
        if beyond.size and float(np.max(beyond)) != 0.0:
            raise AssertionError("coefficients beyond the dealias cutoff")
        if hermitian_error(c) > tol * scale:
            raise AssertionError("Hermitian symmetry violated")
