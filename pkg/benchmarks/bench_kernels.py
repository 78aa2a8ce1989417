"""Timing comparison of the hot-kernel backends.

Per-kernel timings run both backends in one process via get_backend; the
full-step timing spawns one subprocess per backend because the solver
binds a backend at import time (CASCADE_KERNELS decides which).

Usage: python benchmarks/bench_kernels.py [--n 256] [--repeat 5] [--steps 20]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from cascadelab.grid import make_grid
from cascadelab.kernels import available_backends, get_backend

_STEP_SNIPPET = """
import time
from cascadelab.solver import ForcingSpec, SimulationConfig, advance, build_context, init_state
from cascadelab import kernels

n = {n}
steps = {steps}
config = SimulationConfig(
    L=6.283185307179586, N=n, nu=1e-3, mu=1e-3, dt=1e-4, t_end=1.0, burn_in=0.0,
    seed=7,
    velocity_forcing=ForcingSpec(band_lo=2.0, band_hi=4.0, amplitude=1.0, seed=7),
    tracer_forcing=ForcingSpec(band_lo=2.0, band_hi=4.0, amplitude=1.0, seed=7),
)
ctx = build_context(config)
state = init_state(config)
state, _ = advance(state, ctx, config.dt)
t0 = time.perf_counter()
for _ in range(steps):
    state, _ = advance(state, ctx, config.dt)
print(kernels.BACKEND, (time.perf_counter() - t0) / steps)
"""


def _best_of(repeat: int, fn) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n: int, repeat: int) -> list:
    grid = make_grid(L=2 * np.pi, N=n, d=2)
    rng = np.random.default_rng(0)
    omega_hat = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    fx = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    fy = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    ux, uy, sx, sy = (rng.standard_normal(grid.shape) for _ in range(4))
    decay = np.exp(-rng.random(grid.shape))
    rhs0 = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    rhs1 = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    weights = rng.random(grid.shape)
    shells = grid.shell_index
    cases = [
        ("vorticity_to_velocity", lambda k: k.vorticity_to_velocity(omega_hat, fx, fy)),
        ("advect_scalar_2d", lambda k: k.advect_scalar_2d(ux, uy, sx, sy)),
        ("max_speed_2d", lambda k: k.max_speed_2d(ux, uy)),
        ("heun_predict", lambda k: k.heun_predict(omega_hat, decay, rhs0, 1e-3)),
        ("heun_correct", lambda k: k.heun_correct(omega_hat, decay, rhs0, rhs1, 1e-3)),
        ("shell_sums", lambda k: k.shell_sums(weights, shells, grid.n_shells)),
    ]
    backends = {name: get_backend(name) for name in available_backends()}
    rows = []
    for label, call in cases:
        row = {"kernel": label}
        for name, mod in backends.items():
            row[name] = _best_of(repeat, lambda: call(mod))
        rows.append(row)
    return rows


def bench_step(n: int, steps: int) -> list:
    rows = []
    for name in available_backends():
        env = dict(os.environ, CASCADE_KERNELS=name)
        out = subprocess.run(
            [sys.executable, "-c", _STEP_SNIPPET.format(n=n, steps=steps)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        backend, seconds = out.stdout.split()
        rows.append({"backend": backend, "seconds_per_step": float(seconds)})
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=256)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--steps", type=int, default=20)
    args = parser.parse_args(argv)

    names = available_backends()
    print(f"backends available: {', '.join(names)} (N = {args.n})")
    rows = bench_kernels(args.n, args.repeat)
    width = max(len(r["kernel"]) for r in rows)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{name:>10}" for name in names)
    if len(names) > 1:
        header += f"  {'speedup':>8}"
    print(header)
    for r in rows:
        line = f"{r['kernel']:<{width}}  " + "  ".join(f"{r[name]:10.6f}" for name in names)
        if len(names) > 1:
            line += f"  {r[names[1]] / r[names[0]]:8.2f}x"
        print(line)

    print(f"\nfull advance() step at N = {args.n} ({args.steps} steps):")
    for row in bench_step(args.n, args.steps):
        print(f"  {row['backend']:>3}: {row['seconds_per_step'] * 1e3:9.3f} ms/step")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
