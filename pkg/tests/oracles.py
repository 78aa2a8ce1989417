"""Independent reference implementations used to freeze expected values.

Nothing here imports the package's operator internals: velocity recovery,
advection, and octave sums are recomputed from their definitions (brute
cyclic convolution, explicit summation, mpmath quadrature-grade scalars)
so that agreement is evidence, not tautology.
"""

from __future__ import annotations

import math

import numpy as np

# phi_{1/6}(20) via mpmath at 60 digits; regenerate with
# high_precision_phi(1/6, 20, 4/3) below.
PHI_ONE_SIXTH_AT_20 = 0.05002421431537615


def high_precision_phi(p, zeta, log_power):
    """(zeta - 6 ln zeta)^{log_power} / [zeta^{3p/2} e^{p zeta}
    (1 - zeta^{-2/3})] computed with mpmath."""
    import mpmath as mp

    mp.mp.dps = 60
    zeta = mp.mpf(zeta)
    p = mp.mpf(p)
    core = zeta - 6 * mp.log(zeta)
    denom = zeta ** (3 * p / 2) * mp.exp(p * zeta) * (1 - zeta ** (mp.mpf(-2) / 3))
    return float(core ** mp.mpf(log_power) / denom)


def velocity_hats_from_vorticity(grid, omega_hat: np.ndarray) -> tuple:
    """(ux_hat, uy_hat) solving curl u = omega, div u = 0, mean zero:
    u_hat = i (ky, -kx) omega_hat / (kappa0 |k|^2). Check: curl gives
    i kappa0 (kx uy - ky ux) = (kx^2 + ky^2)/|k|^2 omega = omega."""
    kx, ky = np.asarray(grid.k_axes[0], float), np.asarray(grid.k_axes[1], float)
    k_sq = kx * kx + ky * ky + np.zeros(grid.shape)
    k_sq[k_sq == 0] = 1.0
    ux = 1j * ky * omega_hat / (grid.kappa0 * k_sq)
    uy = -1j * kx * omega_hat / (grid.kappa0 * k_sq)
    zero = (0,) * grid.d
    ux[zero] = 0.0
    uy[zero] = 0.0
    return ux, uy


def cyclic_convolution(a_hat: np.ndarray, b_hat: np.ndarray) -> np.ndarray:
    """Brute-force cyclic convolution c[k] = sum_q a[k-q mod N] b[q].

    This is exactly what multiplying collocation samples computes, so it
    reproduces the pseudo-spectral product including any aliasing; inputs
    supported on the dealias mask make the masked output alias-free.
    """
    out = np.zeros_like(a_hat)
    it = np.ndindex(*b_hat.shape)
    axes = tuple(range(a_hat.ndim))
    for q in it:
        bq = b_hat[q]
        if bq == 0:
            continue
        out += np.roll(a_hat, shift=q, axis=axes) * bq
    return out


def advection_hat_2d(grid, omega_hat: np.ndarray, s_hat: np.ndarray) -> np.ndarray:
    """Spectral coefficients of u . grad(s) by brute cyclic convolution,
    masked like the package's dealiased product (zero mode cleared)."""
    ux, uy = velocity_hats_from_vorticity(grid, omega_hat)
    gx = 1j * grid.kappa0 * grid.k_axes[0] * s_hat
    gy = 1j * grid.kappa0 * grid.k_axes[1] * s_hat
    w = cyclic_convolution(ux, gx) + cyclic_convolution(uy, gy)
    w[~grid.dealias_mask] = 0.0
    w[(0,) * grid.d] = 0.0
    return w


def tail_ladder(grid, adv_hat: np.ndarray, field_hat: np.ndarray, weight=None) -> np.ndarray:
    """Flux ladder from first principles: shell sums of Re(w_hat *
    conj(field_hat)) (optionally weighted per mode), then minus the tail
    sum over shells m' >= m for m = 1 .. cutoff."""
    prod = (adv_hat * np.conj(field_hat)).real
    if weight is not None:
        prod = prod * weight
    shells = np.zeros(grid.n_shells)
    flat_idx = grid.shell_index.ravel()
    flat_val = prod.ravel()
    for idx, val in zip(flat_idx, flat_val):
        if idx < grid.n_shells:
            shells[idx] += val
    tails = np.cumsum(shells[::-1])[::-1]
    return -tails[1:]


def explicit_octave_sum(alpha: float, p: float, kappa1: float, kappa2: float) -> float:
    """Direct summation of alpha * kappa^-p over the dyadic ladder
    kappa1, 2 kappa1, ... below kappa2 (half-open, matching the octave
    partition [kappa, 2 kappa) used throughout)."""
    total = 0.0
    j = 0
    while kappa1 * 2.0**j < kappa2 * (1.0 - 1e-12):
        total += alpha * (kappa1 * 2.0**j) ** -p
        j += 1
    return total


def explicit_geometric_sum(ratio: float, n_terms: int) -> float:
    return sum(ratio**j for j in range(n_terms))


def geometric_closed_form(ratio: float, n_terms: int) -> float:
    return (1.0 - ratio**n_terms) / (1.0 - ratio)


def explicit_telescoping_sum(kappa: float, kappa_f_max: float, n_octaves: int) -> float:
    """sum_j [(ln 2^{j+1} kappa/kf)^{2/3} - (ln 2^j kappa/kf)^{2/3}]; the
    closed form is the endpoint difference."""
    total = 0.0
    for j in range(n_octaves):
        hi = math.log(2.0 ** (j + 1) * kappa / kappa_f_max) ** (2.0 / 3.0)
        lo = math.log(2.0**j * kappa / kappa_f_max) ** (2.0 / 3.0)
        total += hi - lo
    return total


def collocation_inner(grid, f_values: np.ndarray, g_values: np.ndarray) -> float:
    """Quadrature inner product sum f g (L/N)^d over collocation points."""
    return float(np.sum(f_values * g_values) * (grid.L / grid.N) ** grid.d)
