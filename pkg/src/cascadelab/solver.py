"""2-D vorticity-form solver with a passive tracer.

Equations (spectral, per mode k, kappa^2 = kappa0^2 |k|^2):

    d omega_hat / dt = -(u.grad omega)_hat - nu  * kappa^2 * omega_hat + fw_hat
    d theta_hat / dt = -(u.grad theta)_hat - mu * kappa^2 * theta_hat + g_hat

u is reconstructed from omega on demand, the tracer is passive (theta never
feeds back on omega), and time stepping is an integrating-factor Heun
scheme: diffusion is integrated exactly by exp(-nu*kappa^2*dt) factors,
advection and the steady forcing by an explicit second-order predictor
corrector. Forcing is deterministic: band-limited, equal magnitude per
mode, phases drawn from the config seed.
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
    _velocity_factors,
    random_band_coeffs,
)
from .grid import WavenumberGrid, make_grid
from .operators import advect_spectrum, inverse_kappa_sq

__all__ = [
    "ForcingSpec",
    "SimulationConfig",
    "SimState",
    "SimulationError",
    "CflError",
    "NonFiniteStateError",
    "build_context",
    "init_state",
    "step",
    "grashof",
    "instant_budget",
    "BudgetResiduals",
    "run_simulation",
    "SimulationResult",
]

# Salt values separating the deterministic random streams drawn from one
# config seed.
_SALT_VELOCITY = 0
_SALT_TRACER = 1
_SALT_INIT = 2

# Initial condition: band noise whose induced velocity L2 norm is this
# fraction of the velocity forcing amplitude.
NOISE_VELOCITY_FRACTION = 1e-3

CFL_LIMIT = 0.5


class SimulationError(RuntimeError):
    """Base class for numerical aborts (CLI exit code 3)."""


class CflError(SimulationError):
    """Advective CFL violation: max|u| * dt * N / L exceeded the limit."""

    def __init__(self, max_speed: float, dt: float, grid: WavenumberGrid, t: float, step_index: int):
        self.max_speed = max_speed
        self.dt = dt
        self.t = t
        self.step_index = step_index
        self.cfl = max_speed * dt * grid.N / grid.L
        super().__init__(
            f"CFL violation at t={t:.6g} (step {step_index}): "
            f"max speed {max_speed:.6g}, cfl number {self.cfl:.4g} > {CFL_LIMIT}"
        )


class NonFiniteStateError(SimulationError):
    """NaN/Inf appeared in the state."""

    def __init__(self, which: str, t: float, step_index: int):
        self.which = which
        self.t = t
        self.step_index = step_index
        super().__init__(f"non-finite {which} coefficients at t={t:.6g} (step {step_index})")


@dataclass(frozen=True)
class ForcingSpec:
    """Steady band-limited forcing.

    band_lo/band_hi are physical wavenumbers (closed interval); amplitude
    is the exact L2 norm of the constructed forcing field; seed fixes the
    phase table (magnitudes are seed-independent).
    """

    band_lo: float
    band_hi: float
    amplitude: float
    seed: int
    time_dependence: str = "steady"

    def __post_init__(self) -> None:
        if self.band_lo <= 0 or self.band_hi < self.band_lo:
            raise ValueError(
                f"need 0 < band_lo <= band_hi, got [{self.band_lo}, {self.band_hi}]"
            )
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.time_dependence != "steady":
            raise ValueError(
                f"only steady forcing is implemented, got {self.time_dependence!r}"
            )


@dataclass(frozen=True)
class SimulationConfig:
    L: float
    N: int
    nu: float
    mu: float
    dt: float
    t_end: float
    burn_in: float
    seed: int
    velocity_forcing: ForcingSpec
    tracer_forcing: ForcingSpec

    def __post_init__(self) -> None:
        if self.nu <= 0 or self.mu <= 0:
            raise ValueError("nu and mu must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0 or self.burn_in < 0:
            raise ValueError("t_end and burn_in must be >= 0")

    @property
    def schmidt(self) -> float:
        return self.nu / self.mu

    def grid(self) -> WavenumberGrid:
        return make_grid(self.L, self.N, d=2)


@dataclass(frozen=True)
class SimState:
    """Solver state: vorticity and tracer spectra at time t."""

    omega_hat: np.ndarray
    theta_hat: np.ndarray
    t: float
    step_index: int

    def velocity(self, grid: WavenumberGrid) -> SpectralVelocityField:
        return SpectralVelocityField(grid=grid, vorticity=self.omega_hat)

    def tracer(self, grid: WavenumberGrid) -> SpectralScalarField:
        return SpectralScalarField(grid=grid, coeffs=self.theta_hat)


@dataclass(frozen=True)
class StepContext:
    """Precomputed per-config arrays reused every step."""

    grid: WavenumberGrid
    decay_nu: np.ndarray
    decay_mu: np.ndarray
    f_omega_hat: np.ndarray
    g_hat: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    inv_kappa_sq: np.ndarray
    f_l2: float
    g_l2: float


def _rng(seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((int(seed), salt)))


def _induced_velocity_l2(grid: WavenumberGrid, omega_like: np.ndarray, inv_kappa_sq: np.ndarray) -> float:
    """L2 norm of the velocity field whose vorticity spectrum is omega_like."""
    return float(
        np.sqrt(grid.L**2 * np.sum((omega_like.real**2 + omega_like.imag**2) * inv_kappa_sq))
    )


def build_velocity_forcing(grid: WavenumberGrid, spec: ForcingSpec) -> np.ndarray:
    """Curl of the velocity forcing (the vorticity-equation source),
    normalized so the induced velocity-equation force f has |f| == amplitude."""
    if spec.amplitude == 0.0:
        return np.zeros(grid.shape, dtype=np.complex128)
    raw = random_band_coeffs(grid, spec.band_lo, spec.band_hi, 1.0, _rng(spec.seed, _SALT_VELOCITY))
    norm = _induced_velocity_l2(grid, raw, inverse_kappa_sq(grid))
    return raw * (spec.amplitude / norm)


def build_tracer_forcing(grid: WavenumberGrid, spec: ForcingSpec) -> np.ndarray:
    """Tracer source coefficients with |g| == amplitude."""
    return random_band_coeffs(
        grid, spec.band_lo, spec.band_hi, spec.amplitude, _rng(spec.seed, _SALT_TRACER)
    )


@lru_cache(maxsize=4)
def build_context(config: SimulationConfig) -> StepContext:
    grid = config.grid()
    kappa_sq = grid.kappa**2
    decay_nu = np.exp(-config.nu * kappa_sq * config.dt)
    decay_mu = np.exp(-config.mu * kappa_sq * config.dt)
    f_omega = build_velocity_forcing(grid, config.velocity_forcing)
    g_hat = build_tracer_forcing(grid, config.tracer_forcing)
    fx, fy = _velocity_factors(grid)
    inv = inverse_kappa_sq(grid)
    for arr in (decay_nu, decay_mu, f_omega, g_hat):
        arr.setflags(write=False)
    return StepContext(
        grid=grid,
        decay_nu=decay_nu,
        decay_mu=decay_mu,
        f_omega_hat=f_omega,
        g_hat=g_hat,
        fx=fx,
        fy=fy,
        inv_kappa_sq=inv,
        f_l2=_induced_velocity_l2(grid, f_omega, inv),
        g_l2=float(np.sqrt(grid.L**2 * np.sum(np.abs(g_hat) ** 2))),
    )


def velocity_collocation(ctx: StepContext, omega_hat: np.ndarray) -> np.ndarray:
    """Collocation velocity samples (2,) + grid.shape from vorticity."""
    ux_hat, uy_hat = kernels.vorticity_to_velocity(omega_hat, ctx.fx, ctx.fy)
    scale = float(ctx.grid.N) ** 2
    out = np.empty((2,) + ctx.grid.shape, dtype=np.float64)
    out[0] = np.fft.ifftn(ux_hat).real * scale
    out[1] = np.fft.ifftn(uy_hat).real * scale
    return out


def init_state(config: SimulationConfig) -> SimState:
    """theta = 0; omega = small band-limited noise (seeded, deterministic)
    whose induced velocity norm is NOISE_VELOCITY_FRACTION * amplitude."""
    grid = config.grid()
    spec = config.velocity_forcing
    if spec.amplitude == 0.0:
        omega = np.zeros(grid.shape, dtype=np.complex128)
    else:
        raw = random_band_coeffs(grid, spec.band_lo, spec.band_hi, 1.0, _rng(config.seed, _SALT_INIT))
        norm = _induced_velocity_l2(grid, raw, inverse_kappa_sq(grid))
        omega = raw * (NOISE_VELOCITY_FRACTION * spec.amplitude / norm)
    theta = np.zeros(grid.shape, dtype=np.complex128)
    omega.setflags(write=False)
    theta.setflags(write=False)
    return SimState(omega_hat=omega, theta_hat=theta, t=0.0, step_index=0)


@dataclass(frozen=True)
class StepSample:
    """Byproducts of one step handed to diagnostics accumulation: the
    advection spectra at the step's starting state."""

    adv_omega_hat: np.ndarray
    adv_theta_hat: np.ndarray
    max_speed: float


def advance(state: SimState, ctx: StepContext, dt: float) -> tuple:
    """One integrating-factor Heun step. Returns (new_state, StepSample)."""
    grid = ctx.grid
    u_phys = velocity_collocation(ctx, state.omega_hat)
    speed = kernels.max_speed_2d(u_phys[0], u_phys[1])
    if speed * dt * grid.N / grid.L > CFL_LIMIT:
        raise CflError(speed, dt, grid, state.t, state.step_index)

    adv_w = advect_spectrum(grid, u_phys, state.omega_hat)
    adv_t = advect_spectrum(grid, u_phys, state.theta_hat)
    r_w0 = ctx.f_omega_hat - adv_w
    r_t0 = ctx.g_hat - adv_t

    omega_p = kernels.heun_predict(state.omega_hat, ctx.decay_nu, r_w0, dt)
    theta_p = kernels.heun_predict(state.theta_hat, ctx.decay_mu, r_t0, dt)
    u_p = velocity_collocation(ctx, omega_p)
    r_w1 = ctx.f_omega_hat - advect_spectrum(grid, u_p, omega_p)
    r_t1 = ctx.g_hat - advect_spectrum(grid, u_p, theta_p)

    omega_new = kernels.heun_correct(state.omega_hat, ctx.decay_nu, r_w0, r_w1, dt)
    theta_new = kernels.heun_correct(state.theta_hat, ctx.decay_mu, r_t0, r_t1, dt)

    t_new = state.t + dt
    idx = state.step_index + 1
    if not np.all(np.isfinite(omega_new.view(np.float64))):
        raise NonFiniteStateError("vorticity", t_new, idx)
    if not np.all(np.isfinite(theta_new.view(np.float64))):
        raise NonFiniteStateError("tracer", t_new, idx)
    omega_new.setflags(write=False)
    theta_new.setflags(write=False)
    new_state = SimState(omega_hat=omega_new, theta_hat=theta_new, t=t_new, step_index=idx)
    return new_state, StepSample(adv_omega_hat=adv_w, adv_theta_hat=adv_t, max_speed=speed)


def step(state: SimState, config: SimulationConfig) -> SimState:
    """Advance one dt. Raises CflError / NonFiniteStateError on aborts."""
    new_state, _ = advance(state, build_context(config), config.dt)
    return new_state


def grashof(config: SimulationConfig) -> float:
    """G = |f| / (nu^2 kappa0^{3 - d/2}) computed from the forcing actually
    in use (d = 2 here, so the exponent is 2)."""
    ctx = build_context(config)
    kappa0 = ctx.grid.kappa0
    return ctx.f_l2 / (config.nu**2 * kappa0**2)


@dataclass(frozen=True)
class BudgetResiduals:
    """Discrete balance residuals across one step (midpoint rule):
    r = d|.|^2/(2 dt) + diffusion - injection, O(dt^2) per unit time for
    smooth trajectories."""

    tracer: float
    energy: float
    tracer_scale: float
    energy_scale: float


def _budget_terms(ctx: StepContext, state: SimState) -> tuple:
    grid = ctx.grid
    boxvol = grid.L**2
    w2 = state.omega_hat.real**2 + state.omega_hat.imag**2
    th2 = state.theta_hat.real**2 + state.theta_hat.imag**2
    kappa_sq = grid.kappa**2
    u_l2 = boxvol * float(np.sum(w2 * ctx.inv_kappa_sq))
    u_h1 = boxvol * float(np.sum(w2))
    th_l2 = boxvol * float(np.sum(th2))
    th_h1 = boxvol * float(np.sum(th2 * kappa_sq))
    f_dot_u = boxvol * float(
        np.sum(
            (ctx.f_omega_hat.real * state.omega_hat.real + ctx.f_omega_hat.imag * state.omega_hat.imag)
            * ctx.inv_kappa_sq
        )
    )
    g_dot_th = boxvol * float(
        np.sum(ctx.g_hat.real * state.theta_hat.real + ctx.g_hat.imag * state.theta_hat.imag)
    )
    return u_l2, u_h1, th_l2, th_h1, f_dot_u, g_dot_th


def instant_budget(before: SimState, after: SimState, config: SimulationConfig) -> BudgetResiduals:
    """Residuals of the discrete energy and tracer-variance budgets over
    the step from ``before`` to ``after``."""
    ctx = build_context(config)
    dt = after.t - before.t
    if dt <= 0:
        raise ValueError("states are not consecutive")
    b = _budget_terms(ctx, before)
    a = _budget_terms(ctx, after)
    tracer = (a[2] - b[2]) / (2 * dt) + config.mu * 0.5 * (a[3] + b[3]) - 0.5 * (a[5] + b[5])
    energy = (a[0] - b[0]) / (2 * dt) + config.nu * 0.5 * (a[1] + b[1]) - 0.5 * (a[4] + b[4])
    tracer_scale = max(abs(config.mu * 0.5 * (a[3] + b[3])), abs(0.5 * (a[5] + b[5])), 1e-300)
    energy_scale = max(abs(config.nu * 0.5 * (a[1] + b[1])), abs(0.5 * (a[4] + b[4])), 1e-300)
    return BudgetResiduals(
        tracer=tracer, energy=energy, tracer_scale=tracer_scale, energy_scale=energy_scale
    )


@dataclass(frozen=True)
class SimulationResult:
    config: SimulationConfig
    final_state: SimState
    record: "object"
    n_steps: int
    kernel_backend: str


def run_simulation(
    config: SimulationConfig,
    sample_every: int = 1,
    on_checkpoint=None,
    checkpoint_every: int = 0,
    progress=None,
) -> SimulationResult:
    """Run [0, t_end], accumulating diagnostics after burn_in.

    on_checkpoint(state) is called every checkpoint_every steps (and at the
    final step) when checkpoint_every > 0. progress(state) is called every
    1000 steps if given.
    """
    from .diagnostics import TimeAverager

    ctx = build_context(config)
    state = init_state(config)
    n_steps = int(round(config.t_end / config.dt))
    averager = TimeAverager(ctx.grid)
    # Samples are the pre-step states, whose advection spectra the step
    # computes anyway; the half-dt slack keeps the burn-in boundary robust
    # to accumulated float error in t.
    sample_from = config.burn_in - 0.5 * config.dt
    for _ in range(n_steps):
        new_state, sample = advance(state, ctx, config.dt)
        if state.t >= sample_from and state.step_index % sample_every == 0:
            averager.add(
                state.omega_hat,
                state.theta_hat,
                t=state.t,
                adv_omega_hat=sample.adv_omega_hat,
                adv_theta_hat=sample.adv_theta_hat,
                f_omega_hat=ctx.f_omega_hat,
                g_hat=ctx.g_hat,
            )
        state = new_state
        if checkpoint_every > 0 and on_checkpoint is not None:
            if state.step_index % checkpoint_every == 0 or state.step_index == n_steps:
                on_checkpoint(state)
        if progress is not None and state.step_index % 1000 == 0:
            progress(state)
    record = averager.finalize(nu=config.nu, mu=config.mu)
    return SimulationResult(
        config=config,
        final_state=state,
        record=record,
        n_steps=n_steps,
        kernel_backend=kernels.BACKEND,
    )
