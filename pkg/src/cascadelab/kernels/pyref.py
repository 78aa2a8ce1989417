"""Pure-numpy reference implementation of the hot per-step kernels.

The compiled backend (cascadelab.kernels._cy) implements the same
signatures; cascadelab.kernels selects one at import time. Either backend
must produce results matching the other to 1e-12 relative.
"""

from __future__ import annotations

import numpy as np

BACKEND = "py"


def vorticity_to_velocity(omega_hat, fx, fy):
    """(ux_hat, uy_hat) = (fx * omega_hat, fy * omega_hat)."""
    return fx * omega_hat, fy * omega_hat


def advect_scalar_2d(ux, uy, sx, sy):
    """Collocation advection product w = ux*sx + uy*sy (real arrays)."""
    return ux * sx + uy * sy


def advect_scalar_3d(ux, uy, uz, sx, sy, sz):
    return ux * sx + uy * sy + uz * sz


def max_speed_2d(ux, uy) -> float:
    """Max Euclidean speed over collocation points."""
    return float(np.sqrt(np.max(ux * ux + uy * uy)))


def max_speed_3d(ux, uy, uz) -> float:
    return float(np.sqrt(np.max(ux * ux + uy * uy + uz * uz)))


def heun_predict(base, decay, rhs, dt: float):
    """Integrating-factor predictor: decay * (base + dt * rhs)."""
    return decay * (base + dt * rhs)


def heun_correct(base, decay, rhs0, rhs1, dt: float):
    """Integrating-factor corrector: decay*base + dt/2*(decay*rhs0 + rhs1)."""
    return decay * base + (0.5 * dt) * (decay * rhs0 + rhs1)


def shell_sums(weights, shell_index, n_shells: int):
    """Sum float64 weights into integer shells: out[m] = sum over
    shell_index == m. shell_index entries >= n_shells are dropped."""
    w = np.asarray(weights, dtype=np.float64).ravel()
    idx = np.asarray(shell_index, dtype=np.int64).ravel()
    keep = idx < n_shells
    return np.bincount(idx[keep], weights=w[keep], minlength=n_shells)
