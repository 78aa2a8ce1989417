"""Command-line driver: run simulations, average snapshot ensembles, and
sweep the closed-form estimates into plot-ready CSV/JSON.

Exit codes: 0 success, 2 usage/config errors, 3 numerical aborts, 4 I/O
failures. CASCADE_THREADS caps the analyze worker pool; outputs are
deterministic for a fixed config and seed regardless of worker count
(partial sums are merged in sorted path order).
"""

from __future__ import annotations

import argparse
import glob as globmod
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__, io
from .diagnostics import DiagnosticsRecord, TimeAverager, flux_bound_check, steady_balance_residual
from .io import ConfigError, SnapshotFormatError
from .solver import SimulationError, build_context, grashof, run_simulation
from .theory import (
    DEFAULT_CONSTANTS,
    HypothesisError,
    TheoryInputs,
    bigPr_condition_2d,
    bigPr_condition_3d,
    keps_bounds,
    keta_bounds,
    ktheta_2d_large_sc,
    ktheta_2d_moderate,
    ktheta_3d,
    log_corrected_sum,
    phi,
    phi_tilde,
)

TOOL_NAME = "cascadelab"


class UsageError(ValueError):
    """Bad command usage outside argparse's reach (exit code 2)."""


def _worker_cap() -> int:
    raw = os.environ.get("CASCADE_THREADS")
    if raw is None:
        return max(1, os.cpu_count() or 1)
    try:
        cap = int(raw)
    except ValueError:
        raise UsageError(f"CASCADE_THREADS must be an integer, got {raw!r}") from None
    if cap < 1:
        raise UsageError(f"CASCADE_THREADS must be >= 1, got {cap}")
    return cap


def _num(token: str) -> float:
    """Numeric parameter: plain float or a fraction like 5/3."""
    token = token.strip()
    try:
        if "/" in token:
            return float(Fraction(token))
        return float(token)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {token!r}") from None


def _num_list(token: str) -> list:
    return [_num(part) for part in token.split(",") if part.strip()]


def _parse_params(pairs: list) -> dict:
    params: dict = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--param expects key=value, got {pair!r}")
        key = key.strip()
        if key in params:
            raise UsageError(f"duplicate --param {key!r}")
        params[key] = value.strip()
    return params


def _cell(x) -> str:
    if x is None:
        return "undefined"
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(float(x))


def _emit(out: str, text: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _run_checks(record: DiagnosticsRecord, grashof_value: float | None, kappa_above: float, tol: float) -> dict:
    order = None
    if record.kappa_tau is not None and record.kappa_sigma is not None:
        order = record.kappa_tau <= record.kappa_sigma
    eta_bound = None
    if grashof_value is not None and grashof_value > 0:
        eta_bound = record.kappa_eta / record.kappa0 <= grashof_value ** (1.0 / 3.0)
    rows = flux_bound_check(record, kappa_above, tol=tol)
    flux_report = None
    balance = None
    if record.chi > 0 and record.kappa_theta is not None:
        margins = [min(r.ratio - (r.lower - tol), (1.0 + tol) - r.ratio) for r in rows]
        flux_report = {
            "kappa_above": kappa_above,
            "tol": tol,
            "rows_checked": len(rows),
            "all_pass": all(r.ok for r in rows),
            "worst_margin": min(margins) if margins else None,
        }
        residuals = [steady_balance_residual(record, r.kappa) for r in rows]
        balance = max(residuals) if residuals else None
    drift = None
    if (
        record.window_turnovers
        and record.first_velocity_l2
        and record.last_velocity_l2 is not None
    ):
        drift = (record.last_velocity_l2 / record.first_velocity_l2 - 1.0) / record.window_turnovers
    return {
        "kappa_tau_le_kappa_sigma": order,
        "kappa_eta_le_grashof_third": eta_bound,
        "flux_bound": flux_report,
        "steady_balance_max_residual": balance,
        "energy_drift_per_turnover": drift,
    }


# simulate ------------------------------------------------------------------


def cmd_simulate(args) -> int:
    config, text = io.load_config(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = build_context(config)
    outputs: list = []

    def on_checkpoint(state) -> None:
        paths = io.write_state_pair(
            out_dir, f"step_{state.step_index:08d}", ctx.grid, state.omega_hat, state.theta_hat
        )
        outputs.extend(paths)

    started = time.perf_counter()
    result = run_simulation(
        config,
        on_checkpoint=on_checkpoint if args.checkpoint_every > 0 else None,
        checkpoint_every=args.checkpoint_every,
    )
    wall = time.perf_counter() - started

    final = result.final_state
    outputs.extend(io.write_state_pair(out_dir, "final", ctx.grid, final.omega_hat, final.theta_hat))
    record = result.record
    g_value = grashof(config)
    kappa_above = config.tracer_forcing.band_hi
    checks = _run_checks(record, g_value, kappa_above, tol=0.05)

    spectrum_path = out_dir / "spectrum.csv"
    flux_path = out_dir / "flux.csv"
    summary_path = out_dir / "summary.json"
    io.write_spectrum_csv(spectrum_path, record)
    io.write_flux_csv(flux_path, record, kappa_above=kappa_above, tol=0.05)
    io.write_json(
        summary_path,
        io.summary_dict(
            record,
            grashof=g_value,
            kernel_backend=result.kernel_backend,
            deterministic=bool(args.deterministic),
            checks=checks,
        ),
    )
    outputs.extend([spectrum_path, flux_path, summary_path])

    manifest = {
        "format": "cascadelab-manifest",
        "version": 1,
        "tool": {"name": TOOL_NAME, "version": __version__},
        "seed": config.seed,
        "deterministic": bool(args.deterministic),
        "config": {
            "path": str(args.config),
            "sha256": hashlib.sha256(text.encode()).hexdigest(),
            "text": text,
        },
        "steps": {
            "n_steps": result.n_steps,
            "dt": config.dt,
            "t_end": config.t_end,
            "burn_in": config.burn_in,
        },
        "kernel_backend": result.kernel_backend,
        "wall_clock_seconds": wall,
        "outputs": [
            {
                "path": str(p.relative_to(out_dir)),
                "sha256": io.sha256_file(p),
                "bytes": p.stat().st_size,
            }
            for p in sorted(outputs)
        ],
    }
    io.write_json(out_dir / "manifest.json", manifest)
    print(f"{TOOL_NAME}: wrote {len(outputs) + 1} files to {out_dir}")
    return 0


# analyze -------------------------------------------------------------------


def _accumulate_snapshot(path: str) -> TimeAverager:
    u, theta = io.read_state_pair(path)
    avg = TimeAverager(u.grid)
    avg.add(u.vorticity, theta.coeffs)
    return avg


def cmd_analyze(args) -> int:
    matches = sorted(set(globmod.glob(args.glob)))
    stems = []
    seen = set()
    for m in matches:
        stem = m.replace(".theta.", ".omega.")
        if ".omega." not in stem:
            raise UsageError(f"not a state-pair snapshot (expected *.omega.cslb or *.theta.cslb): {m}")
        if stem not in seen:
            seen.add(stem)
            stems.append(stem)
    if not stems:
        raise UsageError(f"no snapshots match {args.glob!r}")

    workers = 1 if args.deterministic else min(_worker_cap(), len(stems))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_accumulate_snapshot, stems))
    else:
        partials = [_accumulate_snapshot(stem) for stem in stems]
    total = partials[0]
    for part in partials[1:]:
        if part.grid != total.grid:
            raise UsageError("snapshots do not share a grid")
        total.merge(part)

    record = total.finalize(nu=args.nu, mu=args.mu)
    checks = _run_checks(record, None, args.kappa_above, tol=args.tol)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    io.write_spectrum_csv(out_dir / "spectrum.csv", record)
    io.write_flux_csv(
        out_dir / "flux.csv",
        record,
        kappa_above=args.kappa_above,
        tol=args.tol,
        kappa_max=args.kappa_max,
    )
    io.write_json(
        out_dir / "summary.json",
        io.summary_dict(record, deterministic=bool(args.deterministic), checks=checks),
    )
    print(f"{TOOL_NAME}: averaged {record.n_samples} snapshots into {out_dir}")
    return 0


# theory --------------------------------------------------------------------


def _theory_phi(params: dict, out: str) -> int:
    family = params.pop("family", "phi")
    if family not in ("phi", "phi_tilde"):
        raise UsageError(f"family must be phi or phi_tilde, got {family!r}")
    fn = phi if family == "phi" else phi_tilde
    default_ps = "1/6,1/9,1/12" if family == "phi" else "1/9,1/12,1/24"
    p_tokens = [tok.strip() for tok in params.pop("p", default_ps).split(",") if tok.strip()]
    ps = [_num(tok) for tok in p_tokens]
    zeta_min = _num(params.pop("zeta_min", "17.5"))
    zeta_max = _num(params.pop("zeta_max", "30"))
    zeta_step = _num(params.pop("zeta_step", "0.5"))
    if params:
        raise UsageError(f"unknown parameters: {', '.join(sorted(params))}")
    if zeta_step <= 0:
        raise UsageError("zeta_step must be positive")
    cols = [f"{family}_p_{tok.replace('/', '_')}" for tok in p_tokens]
    lines = ["zeta," + ",".join(cols)]
    n_rows = int(math.floor((zeta_max - zeta_min) / zeta_step + 1e-9)) + 1
    for i in range(max(n_rows, 0)):
        z = zeta_min + i * zeta_step
        lines.append(",".join([_cell(z)] + [_cell(fn(p, z)) for p in ps]))
    _emit(out, "\n".join(lines) + "\n")
    return 0


def _theory_threshold(params: dict, out: str) -> int:
    d = int(_num(params.pop("d", "2")))
    rs = _num_list(params.pop("r", "4/3,3/2,5/3"))
    if "G" not in params:
        raise UsageError("threshold requires --param G=<value>")
    gs = _num_list(params.pop("G"))
    zetas = _num_list(params.pop("zeta", "1")) if d == 2 else [None]
    if params:
        raise UsageError(f"unknown parameters: {', '.join(sorted(params))}")
    lines = ["r,G,zeta,threshold,condition_met"]
    for r in rs:
        for g in gs:
            for z in zetas:
                if d == 2:
                    res = bigPr_condition_2d(r, g, z, DEFAULT_CONSTANTS)
                    side = _cell(res.condition_met)
                    zcell = _cell(z)
                else:
                    res = bigPr_condition_3d(r, g)
                    side, zcell = "na", "na"
                lines.append(f"{_cell(r)},{_cell(g)},{zcell},{_cell(res.threshold)},{side}")
    _emit(out, "\n".join(lines) + "\n")
    return 0


def _theory_bounds(params: dict, out: str) -> int:
    d = int(_num(params.pop("d", "2")))
    if "G" not in params:
        raise UsageError("bounds requires --param G=<value>")
    gs = _num_list(params.pop("G"))
    zetas = _num_list(params.pop("zeta", "1"))
    if params:
        raise UsageError(f"unknown parameters: {', '.join(sorted(params))}")
    fn = keta_bounds if d == 2 else keps_bounds
    lines = ["G,zeta,plain_lo,plain_hi,sharp_lo,sharp_hi,valid"]
    for g in gs:
        for z in zetas:
            w = fn(g, z).bounds
            valid = "na" if w.valid is None else _cell(w.valid)
            plain_hi = "na" if w.plain_hi is None else _cell(w.plain_hi)
            lines.append(
                f"{_cell(g)},{_cell(z)},{_cell(w.plain_lo)},{plain_hi},"
                f"{_cell(w.sharp_lo)},{_cell(w.sharp_hi)},{valid}"
            )
    _emit(out, "\n".join(lines) + "\n")
    return 0


_ESTIMATORS = {
    "2d-large-sc": ktheta_2d_large_sc,
    "2d-moderate": ktheta_2d_moderate,
    "3d": ktheta_3d,
}

_INPUT_KEYS = (
    "nu mu schmidt grashof kappa0 kappa_g kappa_g_max kappa_f_min kappa_f_max "
    "kappa_bar eps eta chi r p zeta kappa_eta kappa_beta kappa_eps kappa_beta_prime"
).split()


def _theory_estimate(params: dict, out: str) -> int:
    case = params.pop("case", None)
    if case is None:
        cases = "|".join(sorted(set(_ESTIMATORS) | {"2d-log-corrected"}))
        raise UsageError(f"estimate requires --param case=<{cases}>")
    if case == "2d-log-corrected":
        needed = {k: params.pop(k, None) for k in ("chi", "mu", "eta", "kappa_f_max", "kappa_eta")}
        a = params.pop("a", None)
        if params:
            raise UsageError(f"unknown parameters: {', '.join(sorted(params))}")
        missing = [k for k, v in needed.items() if v is None]
        if missing:
            raise UsageError(f"missing parameters: {', '.join(missing)}")
        result = log_corrected_sum(
            chi=_num(needed["chi"]),
            mu=_num(needed["mu"]),
            eta=_num(needed["eta"]),
            kappa_f_max=_num(needed["kappa_f_max"]),
            kappa_eta=_num(needed["kappa_eta"]),
            a=None if a is None else _num(a),
        )
    elif case in _ESTIMATORS:
        unknown = [k for k in params if k not in _INPUT_KEYS]
        if unknown:
            raise UsageError(f"unknown parameters: {', '.join(sorted(unknown))}")
        inputs = TheoryInputs(**{k: _num(v) for k, v in params.items()})
        result = _ESTIMATORS[case](inputs)
    else:
        raise UsageError(f"unknown case {case!r}")
    payload = {
        "branch": result.branch,
        "a": result.a,
        "b": result.b,
        "ktheta_sq_estimate": result.ktheta_sq_estimate,
        "ktheta_estimate": (
            math.sqrt(result.ktheta_sq_estimate) if result.ktheta_sq_estimate else None
        ),
        "notes": list(result.notes),
    }
    _emit(out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_theory(args) -> int:
    params = _parse_params(args.param)
    handlers = {
        "phi": _theory_phi,
        "threshold": _theory_threshold,
        "bounds": _theory_bounds,
        "estimate": _theory_estimate,
    }
    return handlers[args.subcommand](params, args.out)


# entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="pseudo-spectral flow/tracer simulations, cascade diagnostics, and spectral-estimate sweeps",
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a configured simulation")
    sim.add_argument("--config", required=True, help="config file (or a previous run's manifest.json)")
    sim.add_argument("--out", default=".", help="output directory (default: current directory)")
    sim.add_argument(
        "--deterministic",
        action="store_true",
        help="record deterministic mode (reruns of one config+seed are byte-identical)",
    )
    sim.add_argument(
        "--checkpoint-every",
        type=int,
        default=0,
        metavar="STEPS",
        help="also write state snapshots every STEPS steps",
    )
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="average diagnostics over snapshot files")
    ana.add_argument("--glob", required=True, help="glob matching *.omega.cslb/*.theta.cslb pairs")
    ana.add_argument("--out", default=".", help="output directory")
    ana.add_argument("--kappa-max", type=float, default=None, help="truncate the flux ladder at this kappa")
    ana.add_argument(
        "--kappa-above",
        type=float,
        default=0.0,
        help="lower edge (exclusive) of the flux-bound check band, e.g. the tracer band top",
    )
    ana.add_argument("--tol", type=float, default=0.05, help="flux-bound tolerance")
    ana.add_argument("--nu", type=float, default=1.0, help="viscosity used for rates (default 1.0)")
    ana.add_argument("--mu", type=float, default=1.0, help="diffusivity used for rates (default 1.0)")
    ana.add_argument("--deterministic", action="store_true", help="single worker, fixed order")
    ana.set_defaults(func=cmd_analyze)

    theo = sub.add_parser("theory", help="closed-form estimate sweeps")
    theo.add_argument(
        "subcommand", choices=["phi", "threshold", "bounds", "estimate"], help="sweep family"
    )
    theo.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="sweep parameter (repeatable); fractions like 5/3 and lists like r=4/3,5/3 are accepted",
    )
    theo.add_argument("--out", default="-", help="output file (default: stdout)")
    theo.set_defaults(func=cmd_theory)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"{TOOL_NAME}: config error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, HypothesisError, ValueError) as exc:
        print(f"{TOOL_NAME}: error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"{TOOL_NAME}: numerical abort: {exc}", file=sys.stderr)
        return 3
    except (SnapshotFormatError, OSError) as exc:
        print(f"{TOOL_NAME}: i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
