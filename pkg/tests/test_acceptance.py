"""Acceptance suite: one criterion per test, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
complete. The turbulence desk run (criterion 4) takes a few minutes; all
other criteria finish in seconds.
"""

import json
import math

import numpy as np
import pytest

import oracles
from cascadelab.cli import main as cli_main
from cascadelab.diagnostics import (
    enstrophy_energy_flux,
    flux_bound_check,
    steady_balance_residual,
    tracer_flux,
)
from cascadelab.fields import random_scalar_field, random_velocity_field
from cascadelab.grid import make_grid
from cascadelab.operators import (
    SpectrumTable,
    bilinear_advection,
    collocation_energy,
    dyadic_bin_count,
    inner,
    inverse_kappa_sq,
    leray_project,
    max_divergence,
    parseval_energy,
    shell_filter,
    split_at,
    unit_shell_spectrum,
)
from cascadelab.solver import ForcingSpec, SimulationConfig, grashof, run_simulation
from cascadelab.theory import (
    TheoryInputs,
    dyadic_sum,
    generalized_3d,
    ktheta_2d_large_sc,
    ktheta_2d_moderate,
    ktheta_3d,
    log_corrected_sum,
    phi,
    phi_tilde,
    synthetic_field_from_spectrum,
)


def report(number: int, name: str, ok: bool, detail: str) -> None:
    line = f"[criterion {number}] {'PASS' if ok else 'FAIL'} {name}: {detail}"
    print(line)
    assert ok, line


# Shared runs ---------------------------------------------------------------

# Desk run for criteria 4 and 5. The velocity is forced at [8, 16] so a
# short enstrophy range fits below the dealias cutoff; Sc = 1 and the
# tracer band [2, 4] are fixed by the criterion. The window [15, 45]
# sits in the quasi-stationary regime: tracer statistics equilibrate on
# the fast turnover time 1/sqrt(Z) ~ 0.34 while the large-scale energy
# drifts slowly, well before any CFL breach.
DESK = SimulationConfig(
    L=2 * np.pi,
    N=128,
    nu=0.003,
    mu=0.003,
    dt=0.004,
    t_end=45.0,
    burn_in=15.0,
    seed=7,
    velocity_forcing=ForcingSpec(band_lo=8.0, band_hi=16.0, amplitude=1.5, seed=7),
    tracer_forcing=ForcingSpec(band_lo=2.0, band_hi=4.0, amplitude=1.0, seed=7),
)

SMALL = SimulationConfig(
    L=2 * np.pi,
    N=32,
    nu=0.02,
    mu=0.02,
    dt=0.002,
    t_end=2.0,
    burn_in=1.0,
    seed=11,
    velocity_forcing=ForcingSpec(band_lo=2.0, band_hi=4.0, amplitude=1.0, seed=5),
    tracer_forcing=ForcingSpec(band_lo=2.0, band_hi=4.0, amplitude=1.0, seed=6),
)


@pytest.fixture(scope="module")
def desk_record():
    return run_simulation(DESK, sample_every=20).record


@pytest.fixture(scope="module")
def small_record():
    return run_simulation(SMALL, sample_every=5).record


class TestCriterion1:
    def test_spectral_exactness(self):
        grid = make_grid(L=2 * np.pi, N=64, d=2)
        worst_parseval = 0.0
        for seed in range(5):
            s = random_scalar_field(grid, seed=seed)
            u = random_velocity_field(grid, seed=seed + 100)
            for f in (s, u):
                spectral = parseval_energy(f)
                colloc = collocation_energy(f)
                worst_parseval = max(worst_parseval, abs(spectral - colloc) / colloc)
        parseval_ok = worst_parseval <= 1e-10

        worst_div = 0.0
        worst_idem = 0.0
        for dims, seed in ((2, 0), (2, 1), (3, 2), (3, 3)):
            g = grid if dims == 2 else make_grid(L=2 * np.pi, N=16, d=3)
            rng = np.random.default_rng(seed)
            raw = rng.standard_normal((dims,) + g.shape) + 1j * rng.standard_normal(
                (dims,) + g.shape
            )
            u = leray_project(g, raw)
            comps = u.component_coeffs()
            scale = max(float(np.max(np.abs(comps))), 1e-30)
            worst_div = max(worst_div, max_divergence(u) / scale)
            again = leray_project(g, comps).component_coeffs()
            worst_idem = max(worst_idem, float(np.max(np.abs(again - comps))) / scale)
        leray_ok = worst_div <= 1e-12 and worst_idem <= 1e-12

        s = random_scalar_field(grid, seed=3)
        low, high = split_at(s, 7.0)
        partition_ok = np.array_equal(low.coeffs + high.coeffs, s.coeffs)
        mid = shell_filter(s, 4.0, 9.0)
        rest = shell_filter(s, 0.0, 4.0).coeffs + shell_filter(s, 9.0, np.inf).coeffs
        partition_ok = partition_ok and np.array_equal(mid.coeffs + rest, s.coeffs)

        report(
            1,
            "spectral exactness",
            parseval_ok and leray_ok and partition_ok,
            f"parseval rel {worst_parseval:.2e} <= 1e-10, "
            f"leray div {worst_div:.2e} / idem {worst_idem:.2e} <= 1e-12, "
            f"shell partition exact: {partition_ok}",
        )


class TestCriterion2:
    def test_skew_symmetry(self):
        grid = make_grid(L=2 * np.pi, N=32, d=2)
        worst_scalar = 0.0
        worst_vector = 0.0
        for seed in range(100):
            u = random_velocity_field(grid, seed=seed, spectrum_slope=1.5)
            s = random_scalar_field(grid, seed=seed + 1000, spectrum_slope=1.5)
            v = random_velocity_field(grid, seed=seed + 2000, spectrum_slope=1.5)
            adv = bilinear_advection(u, s)
            rel = abs(inner(adv, s)) / max(
                math.sqrt(parseval_energy(adv) * parseval_energy(s)), 1e-30
            )
            worst_scalar = max(worst_scalar, rel)
            buv = bilinear_advection(u, v)
            rel = abs(inner(buv, v)) / max(
                math.sqrt(parseval_energy(buv) * parseval_energy(v)), 1e-30
            )
            worst_vector = max(worst_vector, rel)
        ok = worst_scalar <= 1e-10 and worst_vector <= 1e-10
        report(
            2,
            "advection skew-symmetry",
            ok,
            f"100 random fields: max |(u.grad s, s)| rel {worst_scalar:.2e}, "
            f"max |(B(u,v), v)| rel {worst_vector:.2e}, tolerance 1e-10",
        )


class TestCriterion3:
    def test_flux_identity(self):
        grid = make_grid(L=2 * np.pi, N=32, d=2)
        boxvol = grid.L**grid.d
        worst = 0.0
        for seed in range(5):
            u = random_velocity_field(grid, seed=seed, spectrum_slope=1.5)
            theta = random_scalar_field(grid, seed=seed + 50, spectrum_slope=1.5)
            scale = max(
                math.sqrt(parseval_energy(u) * parseval_energy(theta)), 1e-30
            )
            for kappa in grid.ladder():
                split_form = tracer_flux(u, theta, kappa)
                low, _ = split_at(theta, kappa)
                collapsed = -inner(bilinear_advection(u, low), theta) / boxvol
                worst = max(worst, abs(split_form - collapsed) / scale)
        identity_ok = worst <= 1e-10

        small = make_grid(L=2 * np.pi, N=16, d=2)
        u = random_velocity_field(small, seed=2, spectrum_slope=1.5)
        theta = random_scalar_field(small, seed=3, spectrum_slope=1.5)
        adv_omega = oracles.advection_hat_2d(small, u.vorticity, u.vorticity)
        adv_theta = oracles.advection_hat_2d(small, u.vorticity, theta.coeffs)
        want_theta = oracles.tail_ladder(small, adv_theta, theta.coeffs)
        want_enstrophy = oracles.tail_ladder(small, adv_omega, u.vorticity)
        want_energy = oracles.tail_ladder(
            small, adv_omega, u.vorticity, weight=inverse_kappa_sq(small)
        )
        worst_conv = 0.0
        tscale = max(np.max(np.abs(want_theta)), 1e-30)
        escale = max(np.max(np.abs(want_enstrophy)), 1e-30)
        uscale = max(np.max(np.abs(want_energy)), 1e-30)
        for i, kappa in enumerate(small.ladder()):
            parts = enstrophy_energy_flux(u, float(kappa))
            worst_conv = max(
                worst_conv,
                abs(tracer_flux(u, theta, float(kappa)) - want_theta[i]) / tscale,
                abs(parts.enstrophy_net - want_enstrophy[i]) / escale,
                abs(parts.energy_net - want_energy[i]) / uscale,
            )
        convolution_ok = worst_conv <= 1e-10

        report(
            3,
            "triad flux identity",
            identity_ok and convolution_ok,
            f"split vs collapsed at N=32 max rel {worst:.2e}; "
            f"ladder vs full-lattice convolution at N=16 max rel {worst_conv:.2e}; "
            f"tolerance 1e-10",
        )


class TestCriterion4:
    def test_rigorous_inequality_suite(self, desk_record):
        r = desk_record
        kappa_above = DESK.tracer_forcing.band_hi
        turnovers_ok = r.window_turnovers is not None and r.window_turnovers >= 50.0
        rows = flux_bound_check(r, kappa_above, tol=0.05)
        band_ok = len(rows) >= 1
        flux_ok = band_ok and all(row.ok for row in rows)
        residuals = [steady_balance_residual(r, row.kappa) for row in rows]
        balance_ok = band_ok and max(residuals) <= 0.05
        detail = (
            f"N={DESK.N} Sc=1 window {r.window_turnovers:.0f} turnovers (>=50), "
            f"kappa_theta={r.kappa_theta:.2f}, checked kappa in (4, kappa_theta]: "
            f"{[int(row.kappa) for row in rows]}, "
            f"flux ratios {[round(float(row.ratio), 3) for row in rows]} vs lower bounds "
            f"{[round(float(row.lower), 3) for row in rows]} (tol 0.05), "
            f"max balance residual {max(residuals) if residuals else float('nan'):.4f} <= 0.05"
        )
        report(4, "rigorous inequality desk run", turnovers_ok and flux_ok and balance_ok, detail)


class TestCriterion5:
    def test_wavenumber_order(self, desk_record, small_record):
        entries = [("desk", desk_record, DESK), ("small", small_record, SMALL)]
        order_ok = all(
            rec.kappa_tau <= rec.kappa_sigma for _, rec, _ in entries
        )
        eta_ok = all(
            rec.kappa_eta / rec.kappa0 <= grashof(cfg) ** (1.0 / 3.0)
            for _, rec, cfg in entries
        )
        detail = "; ".join(
            f"{name}: kappa_tau={rec.kappa_tau:.3f} <= kappa_sigma={rec.kappa_sigma:.3f}, "
            f"kappa_eta/kappa0={rec.kappa_eta / rec.kappa0:.2f} <= G^(1/3)={grashof(cfg) ** (1.0 / 3.0):.2f}"
            for name, rec, cfg in entries
        )
        report(5, "wavenumber ordering", order_ok and eta_ok, detail)


class TestCriterion6:
    def test_octave_sum_lemma(self):
        geo_ok = True
        for ratio in (0.5, 2.0 ** (-2.0 / 3.0), 0.875):
            for n in (4, 16, 40):
                explicit = oracles.explicit_geometric_sum(ratio, n)
                closed = oracles.geometric_closed_form(ratio, n)
                geo_ok = geo_ok and abs(explicit - closed) <= 1e-12 * abs(closed)
        tele_explicit = oracles.explicit_telescoping_sum(8.0, 4.0, 20)
        tele_closed = math.log(2.0**20 * 2.0) ** (2.0 / 3.0) - math.log(2.0) ** (2.0 / 3.0)
        tele_ok = abs(tele_explicit - tele_closed) <= 1e-12 * abs(tele_closed)

        worst_lo, worst_hi = math.inf, 0.0
        for p in (0.0, 2.0 / 3.0, 2.0):
            span = 4.0
            while span <= 2.0**20:
                kappa1, kappa2 = 1.0, span
                ratio = oracles.explicit_octave_sum(1.0, p, kappa1, kappa2) / dyadic_sum(
                    1.0, p, kappa1, kappa2
                )
                worst_lo = min(worst_lo, ratio)
                worst_hi = max(worst_hi, ratio)
                span *= 4.0
        bracket_ok = worst_lo >= 1.0 / 3.0 and worst_hi <= 3.0

        report(
            6,
            "octave-sum lemma oracle",
            geo_ok and tele_ok and bracket_ok,
            f"geometric/telescoping identities exact to 1e-12: {geo_ok and tele_ok}; "
            f"explicit/closed ratio in [{worst_lo:.3f}, {worst_hi:.3f}] within [1/3, 3] "
            f"for p in {{0, 2/3, 2}} up to span 2^20",
        )


def brute_ktheta_sq(field) -> float:
    grad = float(unit_shell_spectrum(field, laplacian_power=1).sum())
    var = float(unit_shell_spectrum(field).sum())
    return grad / var


def dyadic_table(grid, values):
    n = dyadic_bin_count(grid.dealias_cutoff)
    assert len(values) == n
    lo = grid.kappa0 * 2.0 ** np.arange(n)
    return SpectrumTable(
        kappa_lo=lo,
        kappa_hi=2.0 * lo,
        values=np.asarray(values, dtype=float),
        binning="dyadic",
        top_partial=True,
    )


class TestCriterion7:
    def test_synthetic_spectra_match_estimates(self):
        ratios = {}

        # 2-D, Sc = 100: tracer injected below the velocity band, upscale
        # kappa^(-2/3) octaves on [2, 16), flat Batchelor octaves on
        # [32, 512). The effective upscale energy rate carries the
        # log-corrected factor eta kappa_eta^-2 ln(kappa_eta/kappa_f_max),
        # and the octave values are the telescoped increments of the
        # power law so the range sums match the closed forms.
        grid2 = make_grid(L=2 * np.pi, N=1536, d=2)
        inputs2 = TheoryInputs(
            nu=3.814697265625e-4,
            mu=3.814697265625e-6,
            kappa_g_max=2.0,
            kappa_f_min=16.0,
            kappa_f_max=32.0,
            eta=1.0,
            eps=1.0,
            chi=1.0,
        )
        eps_eff = inputs2.kappa_eta**-2.0 * math.log(inputs2.kappa_eta / 32.0)
        values = np.zeros(dyadic_bin_count(grid2.dealias_cutoff))
        for j in range(values.size):
            kap = 2.0**j
            if 2.0 <= kap < 16.0:
                values[j] = eps_eff ** (-1.0 / 3.0) * (
                    kap ** (-2.0 / 3.0) - (2.0 * kap) ** (-2.0 / 3.0)
                )
            elif 32.0 <= kap < 512.0:
                values[j] = 1.0
        field = synthetic_field_from_spectrum(grid2, dyadic_table(grid2, values), seed=5)
        ratios["2d-large-sc"] = brute_ktheta_sq(field) / ktheta_2d_large_sc(
            inputs2
        ).ktheta_sq_estimate

        # 3-D, Sc = 100: kappa^(-2/3) octaves to kappa_eps = 4, then flat
        # viscous-convective octaves of chi (nu/eps)^(1/2) out to
        # kappa_beta_prime = 40.
        grid3 = make_grid(L=2 * np.pi, N=128, d=3)
        nu3 = 2.0 ** (-8.0 / 3.0)
        inputs3 = TheoryInputs(
            nu=nu3, mu=nu3 / 100.0, kappa0=1.0, kappa_g_max=1.0, eps=1.0, chi=1.0
        )
        values = np.zeros(dyadic_bin_count(grid3.dealias_cutoff))
        for j in range(values.size):
            kap = 2.0**j
            values[j] = kap ** (-2.0 / 3.0) if kap < 4.0 else math.sqrt(nu3)
        field = synthetic_field_from_spectrum(grid3, dyadic_table(grid3, values), seed=6)
        ratios["3d-large-sc"] = brute_ktheta_sq(field) / ktheta_3d(
            inputs3
        ).ktheta_sq_estimate

        # 3-D moderate Sc: the inertial-convective range alone.
        inputs3m = TheoryInputs(
            schmidt=1.0, kappa_beta_prime=16.0, kappa_eps=16.0, kappa_g_max=1.0
        )
        grid3m = make_grid(L=2 * np.pi, N=64, d=3)
        values = np.zeros(dyadic_bin_count(grid3m.dealias_cutoff))
        for j in range(values.size):
            kap = 2.0**j
            if kap < 16.0:
                values[j] = kap ** (-2.0 / 3.0)
        field = synthetic_field_from_spectrum(grid3m, dyadic_table(grid3m, values), seed=7)
        ratios["3d-moderate"] = brute_ktheta_sq(field) / ktheta_3d(
            inputs3m
        ).ktheta_sq_estimate

        # 2-D moderate Sc: flat enstrophy-range octaves on [4, 32) only.
        gridm = make_grid(L=2 * np.pi, N=128, d=2)
        values = np.zeros(dyadic_bin_count(gridm.dealias_cutoff))
        for j in range(values.size):
            kap = 2.0**j
            if 4.0 <= kap < 32.0:
                values[j] = 1.0
        field = synthetic_field_from_spectrum(gridm, dyadic_table(gridm, values), seed=8)
        moderate = ktheta_2d_moderate(
            TheoryInputs(kappa_eta=32.0, kappa_f_max=4.0)
        ).ktheta_sq_estimate
        ratios["2d-moderate"] = brute_ktheta_sq(field) / moderate

        # 2-D log-corrected variant at Sc = 1, composed with an upscale
        # range: telescoped kappa^(-2/3) octaves on [2, 16), forcing gap
        # [16, 32), one log-corrected enstrophy octave [32, 64).
        gridl = make_grid(L=2 * np.pi, N=256, d=2)
        kappa_eta = 64.0
        mu_l = kappa_eta**-2.0
        eps_l = math.log(2.0) / kappa_eta**2.0
        a_l = mu_l * eps_l ** (-1.0 / 3.0) * (
            2.0 ** (-2.0 / 3.0) - 16.0 ** (-2.0 / 3.0)
        )
        log_est = log_corrected_sum(
            chi=1.0, mu=mu_l, eta=1.0, kappa_f_max=32.0, kappa_eta=kappa_eta, a=a_l
        ).ktheta_sq_estimate
        values = np.zeros(dyadic_bin_count(gridl.dealias_cutoff))
        for j in range(values.size):
            kap = 2.0**j
            if 2.0 <= kap < 16.0:
                values[j] = eps_l ** (-1.0 / 3.0) * (
                    kap ** (-2.0 / 3.0) - (2.0 * kap) ** (-2.0 / 3.0)
                )
            elif kap == 32.0:
                values[j] = math.log(2.0) ** (2.0 / 3.0)
        field = synthetic_field_from_spectrum(gridl, dyadic_table(gridl, values), seed=9)
        ratios["2d-log-corrected"] = brute_ktheta_sq(field) / log_est

        window_ok = all(0.5 <= v <= 2.0 for v in ratios.values())

        reference = ktheta_3d(inputs3).ktheta_sq_estimate
        estimates = [
            generalized_3d(p, inputs3).estimate.ktheta_sq_estimate
            for p in (1.2, 5.0 / 3.0, 2.5)
        ]
        sweep_ok = all(e == reference for e in estimates)

        detail = (
            "brute/estimate ratios "
            + ", ".join(f"{k}={v:.3f}" for k, v in ratios.items())
            + " all within [0.5, 2]"
            + f"; generalized-3d sweep p in {{1.2, 5/3, 2.5}} identical: {sweep_ok}"
        )
        report(7, "synthetic-spectrum factor-2 checks", window_ok and sweep_ok, detail)


class TestCriterion8:
    def test_feasibility_figure_orderings(self):
        zetas = np.arange(17.5, 30.0 + 1e-9, 0.5)
        phi_ok = True
        tilde_ok = True
        for z in zetas:
            a, b, c = phi(1.0 / 6.0, z), phi(1.0 / 9.0, z), phi(1.0 / 12.0, z)
            phi_ok = phi_ok and a is not None and a < b < c
            at, bt, ct = (
                phi_tilde(1.0 / 9.0, z),
                phi_tilde(1.0 / 12.0, z),
                phi_tilde(1.0 / 24.0, z),
            )
            tilde_ok = tilde_ok and at is not None and at < bt < ct
        pin = phi(1.0 / 6.0, 20.0)
        pin_rel = abs(pin - oracles.PHI_ONE_SIXTH_AT_20) / oracles.PHI_ONE_SIXTH_AT_20
        pin_ok = pin_rel <= 1e-10
        report(
            8,
            "feasibility-curve figure orderings",
            phi_ok and tilde_ok and pin_ok,
            f"phi curves ordered p=1/6 < 1/9 < 1/12 and phi_tilde p=1/9 < 1/12 < 1/24 "
            f"at all {zetas.size} sampled zeta; phi_1/6(20) rel err {pin_rel:.2e} <= 1e-10",
        )


class TestCriterion9:
    def test_deterministic_rerun(self, tmp_path):
        config_text = (
            "L = 6.283185307179586\nN = 32\nnu = 0.02\nmu = 0.01\ndt = 0.002\n"
            "t_end = 0.04\nburn_in = 0.01\nseed = 11\n"
            "vel_band_lo = 2.0\nvel_band_hi = 4.0\nvel_amp = 1.0\n"
            "trc_band_lo = 2.0\ntrc_band_hi = 4.0\ntrc_amp = 0.5\n"
        )
        cfg = tmp_path / "run.cfg"
        cfg.write_text(config_text)
        first = tmp_path / "first"
        second = tmp_path / "second"
        code1 = cli_main(
            ["simulate", "--config", str(cfg), "--out", str(first), "--deterministic"]
        )
        code2 = cli_main(
            [
                "simulate",
                "--config",
                str(first / "manifest.json"),
                "--out",
                str(second),
                "--deterministic",
            ]
        )
        runs_ok = code1 == 0 and code2 == 0
        identical = runs_ok and all(
            (first / name).read_bytes() == (second / name).read_bytes()
            for name in ("spectrum.csv", "flux.csv")
        )
        manifest = json.loads((first / "manifest.json").read_text()) if runs_ok else {}
        report(
            9,
            "deterministic manifest rerun",
            runs_ok and identical,
            f"manifest rerun of seed {manifest.get('seed')} reproduced spectrum.csv "
            f"and flux.csv byte-for-byte: {identical}",
        )
