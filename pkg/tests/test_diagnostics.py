"""Diagnostics: flux identities against the convolution oracle, split and
net fluxes, time averaging, merge, and the balance checkers."""

import numpy as np
import pytest

import oracles
from cascadelab.fields import (
    SpectralScalarField,
    SpectralVelocityField,
    random_scalar_field,
    random_velocity_field,
    scalar_field,
)
from cascadelab.grid import make_grid
from cascadelab.operators import inverse_kappa_sq, parseval_energy
from cascadelab.diagnostics import (
    TimeAverager,
    enstrophy_energy_flux,
    flux_bound_check,
    flux_profile,
    steady_balance_residual,
    tracer_flux,
)
from cascadelab.solver import ForcingSpec, SimulationConfig, advance, build_context, init_state

GRID = make_grid(L=2 * np.pi, N=32, d=2)
GRID16 = make_grid(L=2 * np.pi, N=16, d=2)


def turbulent_state(n_steps=120, seed=3):
    config = SimulationConfig(
        L=2 * np.pi, N=32, nu=0.02, mu=0.01, dt=2e-3, t_end=1.0, burn_in=0.0, seed=seed,
        velocity_forcing=ForcingSpec(band_lo=2.0, band_hi=4.0, amplitude=1.0, seed=5),
        tracer_forcing=ForcingSpec(band_lo=2.0, band_hi=4.0, amplitude=1.0, seed=6),
    )
    ctx = build_context(config)
    state = init_state(config)
    for _ in range(n_steps):
        state, _ = advance(state, ctx, config.dt)
    return config, ctx, state


class TestFluxLadders:
    def test_net_ladders_match_convolution_oracle(self):
        u = random_velocity_field(GRID16, seed=24, spectrum_slope=1.5)
        th = random_scalar_field(GRID16, seed=25, spectrum_slope=1.5)
        prof = flux_profile(u, th)
        adv_w = oracles.advection_hat_2d(GRID16, u.vorticity, u.vorticity)
        adv_t = oracles.advection_hat_2d(GRID16, u.vorticity, th.coeffs)
        want_theta = oracles.tail_ladder(GRID16, adv_t, th.coeffs)
        want_ens = oracles.tail_ladder(GRID16, adv_w, u.vorticity)
        want_en = oracles.tail_ladder(GRID16, adv_w, u.vorticity, weight=inverse_kappa_sq(GRID16))
        for got, want in ((prof.theta, want_theta), (prof.enstrophy, want_ens), (prof.energy, want_en)):
            scale = max(float(np.max(np.abs(want))), 1e-300)
            np.testing.assert_allclose(got, want, atol=1e-12 * scale)

    def test_ladder_matches_split_form_pointwise(self):
        u = random_velocity_field(GRID, seed=26, spectrum_slope=1.5)
        th = random_scalar_field(GRID, seed=27, spectrum_slope=1.5)
        prof = flux_profile(u, th)
        scale = max(float(np.max(np.abs(prof.theta))), 1e-300)
        for i, kap in enumerate(prof.kappas):
            split = tracer_flux(u, th, float(kap))
            assert abs(prof.theta[i] - split) <= 1e-9 * scale

    def test_parts_recombine_to_net(self):
        u = random_velocity_field(GRID, seed=28, spectrum_slope=1.5)
        th = random_scalar_field(GRID, seed=29, spectrum_slope=1.5)
        prof = flux_profile(u, th, with_parts=True)
        for fwd, bwd, net in (
            (prof.theta_fwd, prof.theta_bwd, prof.theta),
            (prof.enstrophy_fwd, prof.enstrophy_bwd, prof.enstrophy),
            (prof.energy_fwd, prof.energy_bwd, prof.energy),
        ):
            scale = max(float(np.max(np.abs(net))), 1e-300)
            np.testing.assert_allclose(fwd - bwd, net, atol=1e-10 * scale)

    def test_parts_match_single_point_splitter(self):
        u = random_velocity_field(GRID, seed=30, spectrum_slope=1.5)
        th = random_scalar_field(GRID, seed=31, spectrum_slope=1.5)
        prof = flux_profile(u, th, with_parts=True)
        i = 3
        fp = enstrophy_energy_flux(u, float(prof.kappas[i]))
        assert prof.enstrophy_fwd[i] == pytest.approx(fp.enstrophy_fwd, rel=1e-12, abs=1e-300)
        assert prof.energy_bwd[i] == pytest.approx(fp.energy_bwd, rel=1e-12, abs=1e-300)
        assert fp.enstrophy_net == fp.enstrophy_fwd - fp.enstrophy_bwd

    def test_enstrophy_flux_requires_2d(self):
        u3 = random_velocity_field(make_grid(2 * np.pi, 12, 3), seed=32)
        with pytest.raises(ValueError):
            enstrophy_energy_flux(u3, 2.0)

    def test_zero_velocity_means_zero_flux(self):
        omega = np.zeros(GRID.shape, dtype=np.complex128)
        u = SpectralVelocityField(grid=GRID, vorticity=omega)
        th = random_scalar_field(GRID, seed=33)
        prof = flux_profile(u, th)
        assert np.all(prof.theta == 0) and np.all(prof.energy == 0)


class TestTimeAverager:
    def test_single_add_equals_instantaneous_densities(self):
        config, ctx, state = turbulent_state()
        av = TimeAverager(ctx.grid)
        av.add(state.omega_hat, state.theta_hat, t=state.t)
        rec = av.finalize(nu=config.nu, mu=config.mu)
        w2 = float(np.sum(np.abs(state.omega_hat) ** 2))
        th2 = float(np.sum(np.abs(state.theta_hat) ** 2))
        assert rec.enstrophy == pytest.approx(w2, rel=1e-12)
        assert rec.tracer_variance == pytest.approx(th2, rel=1e-12)
        u_density = parseval_energy(state.velocity(ctx.grid)) / ctx.grid.L**2
        assert rec.velocity_l2 == pytest.approx(u_density, rel=1e-12)
        assert rec.eps == pytest.approx(config.nu * rec.enstrophy, rel=1e-15)
        assert rec.kappa_tau == pytest.approx(np.sqrt(rec.enstrophy / rec.velocity_l2), rel=1e-13)
        assert rec.kappa_theta == pytest.approx(
            np.sqrt(rec.tracer_gradient / rec.tracer_variance), rel=1e-13
        )
        assert rec.energy_spectrum.total() == pytest.approx(rec.velocity_l2, rel=1e-12)
        assert rec.tracer_spectrum.total() == pytest.approx(rec.tracer_variance, rel=1e-12)

    def test_average_of_constant_sequence_is_that_constant(self):
        config, ctx, state = turbulent_state()
        one = TimeAverager(ctx.grid)
        one.add(state.omega_hat, state.theta_hat)
        many = TimeAverager(ctx.grid)
        for _ in range(4):
            many.add(state.omega_hat, state.theta_hat)
        a = one.finalize(nu=config.nu, mu=config.mu)
        b = many.finalize(nu=config.nu, mu=config.mu)
        assert a.enstrophy == b.enstrophy
        assert a.kappa_theta == b.kappa_theta
        np.testing.assert_array_equal(a.theta_flux, b.theta_flux)

    def test_merge_matches_sequential_accumulation(self):
        config, ctx, state = turbulent_state()
        states = [state]
        for _ in range(2):
            state, _ = advance(state, ctx, config.dt)
            states.append(state)
        seq = TimeAverager(ctx.grid)
        for s in states:
            seq.add(s.omega_hat, s.theta_hat, t=s.t)
        left = TimeAverager(ctx.grid)
        left.add(states[0].omega_hat, states[0].theta_hat, t=states[0].t)
        right = TimeAverager(ctx.grid)
        for s in states[1:]:
            right.add(s.omega_hat, s.theta_hat, t=s.t)
        left.merge(right)
        a = seq.finalize(nu=config.nu, mu=config.mu)
        b = left.finalize(nu=config.nu, mu=config.mu)
        assert b.n_samples == 3
        assert b.enstrophy == pytest.approx(a.enstrophy, rel=1e-12)
        assert b.t_start == a.t_start and b.t_end == a.t_end
        np.testing.assert_allclose(b.theta_flux, a.theta_flux, rtol=1e-12)

    def test_merge_rejects_grid_mismatch(self):
        with pytest.raises(ValueError):
            TimeAverager(GRID).merge(TimeAverager(GRID16))

    def test_merge_of_empty_accumulator_is_noop(self):
        config, ctx, state = turbulent_state()
        av = TimeAverager(ctx.grid)
        av.add(state.omega_hat, state.theta_hat)
        before = av.finalize(nu=config.nu, mu=config.mu)
        av.merge(TimeAverager(ctx.grid))
        after = av.finalize(nu=config.nu, mu=config.mu)
        assert after.n_samples == 1
        assert after.enstrophy == before.enstrophy

    def test_finalize_requires_samples(self):
        with pytest.raises(ValueError):
            TimeAverager(GRID).finalize(nu=1.0, mu=1.0)

    def test_forcing_power_requires_forcing_on_every_add(self):
        config, ctx, state = turbulent_state()
        av = TimeAverager(ctx.grid)
        av.add(
            state.omega_hat, state.theta_hat,
            f_omega_hat=ctx.f_omega_hat, g_hat=ctx.g_hat,
        )
        rec = av.finalize(nu=config.nu, mu=config.mu)
        assert rec.forcing_power is not None and rec.tracer_injection is not None
        av.add(state.omega_hat, state.theta_hat)
        rec = av.finalize(nu=config.nu, mu=config.mu)
        assert rec.forcing_power is None and rec.tracer_injection is None

    def test_zero_tracer_yields_undefined_kappa_theta(self):
        config, ctx, _ = turbulent_state()
        av = TimeAverager(ctx.grid)
        omega = np.zeros(ctx.grid.shape, dtype=np.complex128)
        av.add(omega, omega.copy())
        rec = av.finalize(nu=config.nu, mu=config.mu)
        assert rec.kappa_theta is None and rec.kappa_tau is None
        assert rec.eddy_turnover_time is None


class TestBalanceCheckers:
    def single_pair_record(self, mu=0.01):
        # Zero velocity, tracer on |k| = 5 exactly: kappa_theta = 5, all
        # fluxes vanish, chi = mu * 50 * |coeff|^2.
        theta = np.zeros(GRID.shape, dtype=np.complex128)
        theta[3, 4] = theta[-3 % 32, -4 % 32] = 1.0
        av = TimeAverager(GRID)
        av.add(np.zeros_like(theta), theta)
        return av.finalize(nu=0.02, mu=mu)

    def test_ladder_lookup_validates_kappa(self):
        rec = self.single_pair_record()
        assert rec.theta_flux_at(2.0) == 0.0
        for bad in (0.5, 11.0, 2.5):
            with pytest.raises(ValueError):
                rec.theta_flux_at(bad)

    def test_steady_balance_residual_definition(self):
        rec = self.single_pair_record()
        # mu * tail(4) = mu * 50, Theta_4 = 0, chi = mu * 50: residual 1.
        assert steady_balance_residual(rec, 4.0) == pytest.approx(1.0, rel=1e-12)
        # Above the pair the tail is empty: residual 0.
        assert steady_balance_residual(rec, 6.0) == 0.0

    def test_steady_balance_requires_tracer(self):
        config, ctx, _ = turbulent_state()
        av = TimeAverager(ctx.grid)
        zero = np.zeros(ctx.grid.shape, dtype=np.complex128)
        av.add(zero, zero.copy())
        rec = av.finalize(nu=config.nu, mu=config.mu)
        with pytest.raises(ValueError):
            steady_balance_residual(rec, 4.0)

    def test_flux_bound_rows_and_window(self):
        rec = self.single_pair_record()
        rows = flux_bound_check(rec, kappa_above=2.0, tol=0.05)
        assert [r.kappa for r in rows] == [3.0, 4.0, 5.0]
        # Zero flux fails the lower bound until kappa reaches kappa_theta.
        assert [r.ok for r in rows] == [False, False, True]
        for r in rows:
            assert r.ratio == 0.0
            assert r.lower == pytest.approx(1.0 - (r.kappa / 5.0) ** 2)
            assert r.upper == 1.0

    def test_flux_bound_empty_without_tracer(self):
        config, ctx, _ = turbulent_state()
        av = TimeAverager(ctx.grid)
        zero = np.zeros(ctx.grid.shape, dtype=np.complex128)
        av.add(zero, zero.copy())
        rec = av.finalize(nu=config.nu, mu=config.mu)
        assert flux_bound_check(rec, kappa_above=2.0) == []

    def test_flux_bound_respects_kappa_above(self):
        rec = self.single_pair_record()
        rows = flux_bound_check(rec, kappa_above=4.0)
        assert [r.kappa for r in rows] == [5.0]
