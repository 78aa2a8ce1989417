"""Cascade diagnostics: time averaging, dissipation rates, indicator and
dissipation wavenumbers, spectral fluxes, and balance checkers.

All averaged quantities are box-mean densities: the accumulated spectral
sums equal the corresponding norm squared divided by L^d (e.g. the
"enstrophy" accumulator is ||u||^2 / L^d = sum_k kappa^2 |u_hat|^2; in 2-D
that is the mean-square vorticity). Rates follow:

    eps = nu * <||u||^2> / L^d      (energy dissipation)
    eta = nu * <|Au|^2>  / L^d      (enstrophy dissipation, 2-D)
    chi = mu * <|grad theta|^2> / L^d   (tracer dissipation)

Flux sign convention: positive = down-scale (toward larger kappa); each net
flux equals its forward part minus its backward part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .fields import SpectralScalarField, SpectralVelocityField, _velocity_factors
from .grid import WavenumberGrid
from .operators import (
    SpectrumTable,
    advect_spectrum,
    bilinear_advection,
    dyadic_from_unit_shells,
    inner,
    inverse_kappa_sq,
    split_at,
)

__all__ = [
    "TimeAverager",
    "DiagnosticsRecord",
    "tracer_flux",
    "FluxParts",
    "enstrophy_energy_flux",
    "FluxProfile",
    "flux_profile",
    "FluxBoundRow",
    "flux_bound_check",
    "steady_balance_residual",
]

_IDENTITY_RTOL = 1e-10


def _transfer_shells(grid: WavenumberGrid, adv_hat: np.ndarray, field_hat: np.ndarray) -> np.ndarray:
    """Per-unit-shell sums of Re(adv_hat * conj(field_hat))."""
    w = adv_hat.real * field_hat.real + adv_hat.imag * field_hat.imag
    return kernels.shell_sums(w, grid.shell_index, grid.n_shells)


def _tail_from_shells(shells: np.ndarray) -> np.ndarray:
    """tail[m] = sum over m' >= m of shells[m'], for m = 1 .. cutoff."""
    rev = np.cumsum(shells[::-1])[::-1]
    return rev[1:].copy()


def tracer_flux(u: SpectralVelocityField, theta: SpectralScalarField, kappa: float) -> float:
    """Tracer-variance flux through kappa (positive = down-scale):

        Theta_kappa = (1/L^d) [ -(u^<.grad theta^<, theta^>) + (u^>.grad theta^>, theta^<) ]

    with ^< the modes below kappa in each field. Asserts the algebraic
    identity Theta_kappa = -(1/L^d)(u.grad theta^<, theta) (full velocity,
    collapsed by skew-symmetry) to 1e-10 relative.
    """
    grid = u.grid
    boxvol = grid.L**grid.d
    low, high = split_at(theta, kappa)
    u_low, u_high = split_at(u, kappa)
    w_ll = bilinear_advection(u_low, low)
    w_hh = bilinear_advection(u_high, high)
    flux = (-inner(w_ll, high) + inner(w_hh, low)) / boxvol
    w_full = bilinear_advection(u, low)
    collapsed = -inner(w_full, theta) / boxvol
    floor = 1e-15 * math.sqrt(
        max(inner(w_full, w_full), 0.0) * max(inner(theta, theta), 0.0)
    ) / boxvol
    if abs(flux - collapsed) > _IDENTITY_RTOL * max(abs(flux), abs(collapsed)) + floor:
        raise AssertionError(
            f"tracer flux identity violated at kappa={kappa}: "
            f"split={flux!r} collapsed={collapsed!r}"
        )
    return flux


@dataclass(frozen=True)
class FluxParts:
    """Split enstrophy/energy fluxes through one wavenumber (2-D)."""

    kappa: float
    enstrophy_fwd: float
    enstrophy_bwd: float
    energy_fwd: float
    energy_bwd: float

    @property
    def enstrophy_net(self) -> float:
        return self.enstrophy_fwd - self.enstrophy_bwd

    @property
    def energy_net(self) -> float:
        return self.energy_fwd - self.energy_bwd


def enstrophy_energy_flux(u: SpectralVelocityField, kappa: float) -> FluxParts:
    """Enstrophy and energy fluxes through kappa via the bilinear term:

        enstrophy_fwd = -(1/L^2)(B(u^<, u^<), A u^>)
        enstrophy_bwd = -(1/L^2)(B(u^>, u^>), A u^<)
        energy_fwd    = -(1/L^2)(B(u^<, u^<), u^>)
        energy_bwd    = -(1/L^2)(B(u^>, u^>), u^<)
    """
    grid = u.grid
    if grid.d != 2:
        raise ValueError("enstrophy flux is a 2-D diagnostic")
    boxvol = grid.L**2
    low, high = split_at(u, kappa)
    b_low = bilinear_advection(low, low)
    b_high = bilinear_advection(high, high)
    return FluxParts(
        kappa=kappa,
        enstrophy_fwd=-inner(b_low, high, laplacian_power=1) / boxvol,
        enstrophy_bwd=-inner(b_high, low, laplacian_power=1) / boxvol,
        energy_fwd=-inner(b_low, high) / boxvol,
        energy_bwd=-inner(b_high, low) / boxvol,
    )


@dataclass(frozen=True)
class FluxProfile:
    """Fluxes across the integer ladder kappa = m*kappa0, m = 1..cutoff.
    Parts are None unless requested. net = fwd - bwd."""

    kappas: np.ndarray
    theta: np.ndarray
    enstrophy: np.ndarray
    energy: np.ndarray
    theta_fwd: np.ndarray | None = None
    theta_bwd: np.ndarray | None = None
    enstrophy_fwd: np.ndarray | None = None
    enstrophy_bwd: np.ndarray | None = None
    energy_fwd: np.ndarray | None = None
    energy_bwd: np.ndarray | None = None


def _instant_ladders(
    grid: WavenumberGrid,
    omega_hat: np.ndarray,
    theta_hat: np.ndarray,
    adv_omega_hat: np.ndarray,
    adv_theta_hat: np.ndarray,
) -> tuple:
    """Net flux ladders from one snapshot via shell transfer tails.

    Uses Theta_kappa = -(1/L^d)(u.grad theta, theta^>) (exact by
    skew-symmetry) and its enstrophy/energy analogues; the energy transfer
    reuses the vorticity advection spectrum through the solenoidal pairing
    Re[(u.grad u)_k . conj(u_k)] = Re[(u.grad omega)_k conj(omega_k)] / kappa^2.
    """
    s_theta = _transfer_shells(grid, adv_theta_hat, theta_hat)
    s_ens = _transfer_shells(grid, adv_omega_hat, omega_hat)
    w_en = (
        adv_omega_hat.real * omega_hat.real + adv_omega_hat.imag * omega_hat.imag
    ) * inverse_kappa_sq(grid)
    s_en = kernels.shell_sums(w_en, grid.shell_index, grid.n_shells)
    return (
        -_tail_from_shells(s_theta),
        -_tail_from_shells(s_ens),
        -_tail_from_shells(s_en),
    )


def flux_profile(
    u: SpectralVelocityField, theta: SpectralScalarField, with_parts: bool = False
) -> FluxProfile:
    """Instantaneous flux profile over the integer ladder.

    The net columns come from one advection product per field (shell
    transfer tails); with_parts additionally computes the split fluxes by
    explicit low/high products at every ladder point (quadratic cost).
    """
    grid = u.grid
    fx, fy = _velocity_factors(grid)
    ux_hat, uy_hat = kernels.vorticity_to_velocity(u.vorticity, fx, fy)
    scale = float(grid.N) ** 2
    u_phys = np.empty((2,) + grid.shape, dtype=np.float64)
    u_phys[0] = np.fft.ifftn(ux_hat).real * scale
    u_phys[1] = np.fft.ifftn(uy_hat).real * scale
    adv_w = advect_spectrum(grid, u_phys, u.vorticity)
    adv_t = advect_spectrum(grid, u_phys, theta.coeffs)
    th, ens, en = _instant_ladders(grid, u.vorticity, theta.coeffs, adv_w, adv_t)
    kappas = grid.ladder()
    parts: dict = {}
    if with_parts:
        n = kappas.size
        cols = {
            "theta_fwd": np.empty(n),
            "theta_bwd": np.empty(n),
            "enstrophy_fwd": np.empty(n),
            "enstrophy_bwd": np.empty(n),
            "energy_fwd": np.empty(n),
            "energy_bwd": np.empty(n),
        }
        boxvol = grid.L**2
        for i, kap in enumerate(kappas):
            fp = enstrophy_energy_flux(u, kap)
            cols["enstrophy_fwd"][i] = fp.enstrophy_fwd
            cols["enstrophy_bwd"][i] = fp.enstrophy_bwd
            cols["energy_fwd"][i] = fp.energy_fwd
            cols["energy_bwd"][i] = fp.energy_bwd
            t_low, t_high = split_at(theta, kap)
            u_low, u_high = split_at(u, kap)
            w_ll = bilinear_advection(u_low, t_low)
            cols["theta_fwd"][i] = -inner(w_ll, t_high) / boxvol
            w_hh = bilinear_advection(u_high, t_high)
            cols["theta_bwd"][i] = -inner(w_hh, t_low) / boxvol
        parts = cols
    return FluxProfile(kappas=kappas, theta=th, enstrophy=ens, energy=en, **parts)


class TimeAverager:
    """Arithmetic-mean accumulator for the tracked densities, spectra, and
    net flux ladders. Samples carry equal weight; the average of a constant
    sequence is that constant."""

    def __init__(self, grid: WavenumberGrid):
        self.grid = grid
        self.n_samples = 0
        self.t_first: float | None = None
        self.t_last: float | None = None
        self._scalars = np.zeros(7, dtype=np.float64)
        ns = grid.n_shells
        self._energy_sh = np.zeros(ns)
        self._tracer_sh = np.zeros(ns)
        self._tracer_h1_sh = np.zeros(ns)
        nl = grid.dealias_cutoff
        self._theta_flux = np.zeros(nl)
        self._ens_flux = np.zeros(nl)
        self._en_flux = np.zeros(nl)
        self._forcing_samples = 0
        self.first_velocity_l2: float | None = None
        self.last_velocity_l2: float | None = None

    def add(
        self,
        omega_hat: np.ndarray,
        theta_hat: np.ndarray,
        t: float | None = None,
        adv_omega_hat: np.ndarray | None = None,
        adv_theta_hat: np.ndarray | None = None,
        f_omega_hat: np.ndarray | None = None,
        g_hat: np.ndarray | None = None,
    ) -> None:
        """Accumulate one snapshot. The advection spectra are recomputed
        when not supplied (solver steps pass their own byproducts)."""
        grid = self.grid
        if adv_omega_hat is None or adv_theta_hat is None:
            fx, fy = _velocity_factors(grid)
            ux_hat, uy_hat = kernels.vorticity_to_velocity(omega_hat, fx, fy)
            scale = float(grid.N) ** 2
            u_phys = np.empty((2,) + grid.shape, dtype=np.float64)
            u_phys[0] = np.fft.ifftn(ux_hat).real * scale
            u_phys[1] = np.fft.ifftn(uy_hat).real * scale
            adv_omega_hat = advect_spectrum(grid, u_phys, omega_hat)
            adv_theta_hat = advect_spectrum(grid, u_phys, theta_hat)

        inv = inverse_kappa_sq(grid)
        kappa_sq = grid.kappa**2
        w2 = omega_hat.real**2 + omega_hat.imag**2
        th2 = theta_hat.real**2 + theta_hat.imag**2
        u2 = w2 * inv

        velocity_l2 = float(np.sum(u2))
        enstrophy = float(np.sum(w2))
        palinstrophy = float(np.sum(w2 * kappa_sq))
        tracer_var = float(np.sum(th2))
        tracer_grad = float(np.sum(th2 * kappa_sq))
        f_dot_u = g_dot_th = 0.0
        if f_omega_hat is not None and g_hat is not None:
            f_dot_u = float(
                np.sum((f_omega_hat.real * omega_hat.real + f_omega_hat.imag * omega_hat.imag) * inv)
            )
            g_dot_th = float(
                np.sum(g_hat.real * theta_hat.real + g_hat.imag * theta_hat.imag)
            )
            self._forcing_samples += 1
        self._scalars += (
            velocity_l2,
            enstrophy,
            palinstrophy,
            tracer_var,
            tracer_grad,
            f_dot_u,
            g_dot_th,
        )

        self._energy_sh += kernels.shell_sums(u2, grid.shell_index, grid.n_shells)
        self._tracer_sh += kernels.shell_sums(th2, grid.shell_index, grid.n_shells)
        self._tracer_h1_sh += kernels.shell_sums(th2 * kappa_sq, grid.shell_index, grid.n_shells)
        th, ens, en = _instant_ladders(grid, omega_hat, theta_hat, adv_omega_hat, adv_theta_hat)
        self._theta_flux += th
        self._ens_flux += ens
        self._en_flux += en

        self.n_samples += 1
        if t is not None:
            if self.t_first is None:
                self.t_first = t
            self.t_last = t
        if self.first_velocity_l2 is None:
            self.first_velocity_l2 = velocity_l2
        self.last_velocity_l2 = velocity_l2

    def merge(self, other: "TimeAverager") -> None:
        """Fold another accumulator into this one. Results depend only on
        the merge order (callers combine in a fixed sorted order), making
        parallel accumulation deterministic."""
        if other.grid != self.grid:
            raise ValueError("accumulators live on different grids")
        if other.n_samples == 0:
            return
        self._scalars += other._scalars
        self._energy_sh += other._energy_sh
        self._tracer_sh += other._tracer_sh
        self._tracer_h1_sh += other._tracer_h1_sh
        self._theta_flux += other._theta_flux
        self._ens_flux += other._ens_flux
        self._en_flux += other._en_flux
        self.n_samples += other.n_samples
        self._forcing_samples += other._forcing_samples
        if other.t_first is not None:
            self.t_first = other.t_first if self.t_first is None else min(self.t_first, other.t_first)
            self.t_last = other.t_last if self.t_last is None else max(self.t_last, other.t_last)
        if self.first_velocity_l2 is None:
            self.first_velocity_l2 = other.first_velocity_l2
        if other.last_velocity_l2 is not None:
            self.last_velocity_l2 = other.last_velocity_l2

    def finalize(self, nu: float, mu: float) -> "DiagnosticsRecord":
        if self.n_samples == 0:
            raise ValueError("no samples accumulated")
        n = self.n_samples
        grid = self.grid
        (
            velocity_l2,
            enstrophy,
            palinstrophy,
            tracer_var,
            tracer_grad,
            f_dot_u,
            g_dot_th,
        ) = (self._scalars / n).tolist()
        have_forcing = self._forcing_samples == n

        def ratio_sqrt(num: float, den: float) -> float | None:
            if den <= 0.0:
                return None
            return math.sqrt(num / den)

        eps = nu * enstrophy
        eta = nu * palinstrophy
        chi = mu * tracer_grad
        turnover = 1.0 / math.sqrt(enstrophy) if enstrophy > 0 else None
        window = (
            self.t_last - self.t_first
            if self.t_first is not None and self.t_last is not None
            else None
        )
        return DiagnosticsRecord(
            L=grid.L,
            N=grid.N,
            d=grid.d,
            kappa0=grid.kappa0,
            nu=nu,
            mu=mu,
            schmidt=nu / mu,
            n_samples=n,
            t_start=self.t_first,
            t_end=self.t_last,
            velocity_l2=velocity_l2,
            enstrophy=enstrophy,
            palinstrophy=palinstrophy,
            tracer_variance=tracer_var,
            tracer_gradient=tracer_grad,
            forcing_power=f_dot_u if have_forcing else None,
            tracer_injection=g_dot_th if have_forcing else None,
            eps=eps,
            eta=eta,
            chi=chi,
            kappa_tau=ratio_sqrt(enstrophy, velocity_l2),
            kappa_sigma=ratio_sqrt(palinstrophy, enstrophy),
            kappa_theta=ratio_sqrt(tracer_grad, tracer_var),
            kappa_eps=(eps / nu**3) ** 0.25,
            kappa_eta=(eta / nu**3) ** (1.0 / 6.0),
            kappa_beta=(eta / mu**3) ** (1.0 / 6.0),
            kappa_beta_prime=(eps / (nu * mu**2)) ** 0.25,
            eddy_turnover_time=turnover,
            window_turnovers=(window / turnover if window is not None and turnover else None),
            first_velocity_l2=self.first_velocity_l2,
            last_velocity_l2=self.last_velocity_l2,
            energy_spectrum=dyadic_from_unit_shells(grid, self._energy_sh / n),
            tracer_spectrum=dyadic_from_unit_shells(grid, self._tracer_sh / n),
            ladder=grid.ladder(),
            theta_flux=self._theta_flux / n,
            enstrophy_flux=self._ens_flux / n,
            energy_flux=self._en_flux / n,
            tracer_grad_tail=_tail_from_shells(self._tracer_h1_sh / n),
        )


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Averaged diagnostics over one run or snapshot ensemble.

    Densities are per unit box volume (norm squared / L^d); flux arrays sit
    on the integer ladder kappa0 * (1..cutoff); tracer_grad_tail[m-1] is
    <|grad theta^>|^2>/L^d for the high-pass at kappa0*m.
    """

    L: float
    N: int
    d: int
    kappa0: float
    nu: float
    mu: float
    schmidt: float
    n_samples: int
    t_start: float | None
    t_end: float | None
    velocity_l2: float
    enstrophy: float
    palinstrophy: float
    tracer_variance: float
    tracer_gradient: float
    forcing_power: float | None
    tracer_injection: float | None
    eps: float
    eta: float
    chi: float
    kappa_tau: float | None
    kappa_sigma: float | None
    kappa_theta: float | None
    kappa_eps: float
    kappa_eta: float
    kappa_beta: float
    kappa_beta_prime: float
    eddy_turnover_time: float | None
    window_turnovers: float | None
    first_velocity_l2: float | None
    last_velocity_l2: float | None
    energy_spectrum: SpectrumTable
    tracer_spectrum: SpectrumTable
    ladder: np.ndarray
    theta_flux: np.ndarray
    enstrophy_flux: np.ndarray
    energy_flux: np.ndarray
    tracer_grad_tail: np.ndarray

    def _ladder_index(self, kappa: float) -> int:
        m = int(round(kappa / self.kappa0))
        if not (1 <= m <= self.ladder.size) or abs(m * self.kappa0 - kappa) > 1e-9 * self.kappa0:
            raise ValueError(f"kappa={kappa} is not on the integer ladder")
        return m - 1

    def theta_flux_at(self, kappa: float) -> float:
        return float(self.theta_flux[self._ladder_index(kappa)])

    def tracer_grad_tail_at(self, kappa: float) -> float:
        return float(self.tracer_grad_tail[self._ladder_index(kappa)])


def steady_balance_residual(record: DiagnosticsRecord, kappa: float) -> float:
    """Relative residual of the averaged high-pass tracer balance
    mu <|grad theta^>|^2>/L^d = <Theta_kappa>, normalized by chi.
    Small residuals require kappa above the tracer injection band and a
    converged averaging window."""
    if record.chi <= 0:
        raise ValueError("chi is zero; no tracer statistics")
    lhs = record.mu * record.tracer_grad_tail_at(kappa)
    rhs = record.theta_flux_at(kappa)
    return abs(lhs - rhs) / record.chi


@dataclass(frozen=True)
class FluxBoundRow:
    kappa: float
    ratio: float
    lower: float
    upper: float
    ok: bool


def flux_bound_check(
    record: DiagnosticsRecord,
    kappa_above: float,
    tol: float = 0.05,
) -> list:
    """Check 1 - (kappa/kappa_theta)^2 - tol <= <Theta_kappa>/chi <= 1 + tol
    for ladder points with kappa_above < kappa <= kappa_theta."""
    if record.kappa_theta is None or record.chi <= 0:
        return []
    rows = []
    for i, kap in enumerate(record.ladder):
        if kap <= kappa_above or kap > record.kappa_theta:
            continue
        ratio = float(record.theta_flux[i]) / record.chi
        lower = 1.0 - (kap / record.kappa_theta) ** 2
        ok = (lower - tol) <= ratio <= (1.0 + tol)
        rows.append(FluxBoundRow(kappa=float(kap), ratio=ratio, lower=lower, upper=1.0, ok=ok))
    return rows
