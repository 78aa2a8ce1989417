"""Artifact I/O: binary spectral snapshots, the run configuration grammar,
and the CSV/JSON writers.

Snapshot format ("CSLB1"): a little-endian header packed as '<5sBIdB'
(magic, dimension, N, L, field-kind tag) followed by the row-major
coefficient array as little-endian complex128 ('<c16'). Kinds: 0 = scalar,
1 = 2-D vorticity, 2 = 3-D velocity components (three stacked blocks).
Coefficients outside the dealiased support are discarded on read; the
constructors re-impose the zero-mean convention.

Config grammar: flat ``key = value`` lines, ``#`` comments, blank lines
ignored. Exactly the fourteen documented keys, each once. Floats are
written with repr so that parse(format(config)) round-trips bit-for-bit.

CSV columns are fixed:
    spectrum.csv  kappa_lo,kappa_hi,energy,tracer
    flux.csv      kappa,theta_flux,enstrophy_flux,energy_flux,lower_bound,ratio,pass
Float cells use repr (shortest round-trip), so identical records produce
byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsRecord, flux_bound_check
from .fields import (
    SpectralScalarField,
    SpectralVelocityField,
    band_mask,
    scalar_field,
    velocity_from_components,
    velocity_from_vorticity,
)
from .grid import WavenumberGrid, make_grid
from .operators import SpectrumTable
from .solver import ForcingSpec, SimulationConfig

__all__ = [
    "SnapshotFormatError",
    "ConfigError",
    "write_snapshot",
    "read_snapshot",
    "write_state_pair",
    "read_state_pair",
    "parse_config",
    "load_config",
    "format_config",
    "write_table_csv",
    "write_spectrum_csv",
    "write_flux_csv",
    "summary_dict",
    "write_json",
    "sha256_file",
]

SNAPSHOT_MAGIC = b"CSLB1"
_HEADER = struct.Struct("<5sBIdB")
KIND_SCALAR = 0
KIND_VORTICITY = 1
KIND_COMPONENTS = 2


class SnapshotFormatError(RuntimeError):
    """Unreadable or corrupt snapshot file (CLI exit code 4)."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"{path}: {reason}")


class ConfigError(ValueError):
    """Bad run configuration (CLI exit code 2). line is 1-based or None."""

    def __init__(self, source: str, line: int | None, reason: str):
        self.source = str(source)
        self.line = line
        where = f"{source}:{line}" if line is not None else str(source)
        super().__init__(f"{where}: {reason}")


def _field_kind(field) -> int:
    if isinstance(field, SpectralScalarField):
        return KIND_SCALAR
    if isinstance(field, SpectralVelocityField):
        return KIND_VORTICITY if field.grid.d == 2 else KIND_COMPONENTS
    raise TypeError(f"not a spectral field: {type(field).__name__}")


def write_snapshot(path, field) -> None:
    """Write one field. The kind tag is chosen from the field type."""
    kind = _field_kind(field)
    grid = field.grid
    if kind == KIND_SCALAR:
        payload = field.coeffs
    elif kind == KIND_VORTICITY:
        payload = field.vorticity
    else:
        payload = field.components
    header = _HEADER.pack(SNAPSHOT_MAGIC, grid.d, grid.N, grid.L, kind)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(payload).astype("<c16").tobytes())


def read_snapshot(path):
    """Read one field; raises SnapshotFormatError on any malformation."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise SnapshotFormatError(path, f"cannot read: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise SnapshotFormatError(path, "truncated header")
    magic, d, n, length, kind = _HEADER.unpack_from(blob)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(path, f"bad magic {magic!r}")
    if kind not in (KIND_SCALAR, KIND_VORTICITY, KIND_COMPONENTS):
        raise SnapshotFormatError(path, f"unknown field kind {kind}")
    if (kind == KIND_VORTICITY and d != 2) or (kind == KIND_COMPONENTS and d != 3):
        raise SnapshotFormatError(path, f"field kind {kind} invalid for d={d}")
    if not (length > 0 and np.isfinite(length)):
        raise SnapshotFormatError(path, f"bad box size L={length}")
    try:
        grid = make_grid(length, n, d=d)
    except ValueError as exc:
        raise SnapshotFormatError(path, str(exc)) from exc
    ncomp = 3 if kind == KIND_COMPONENTS else 1
    count = ncomp * n**d
    expected = _HEADER.size + 16 * count
    if len(blob) != expected:
        raise SnapshotFormatError(path, f"payload is {len(blob) - _HEADER.size} bytes, expected {16 * count}")
    coeffs = np.frombuffer(blob, dtype="<c16", count=count, offset=_HEADER.size).astype(np.complex128)
    if not np.all(np.isfinite(coeffs.view(np.float64))):
        raise SnapshotFormatError(path, "non-finite coefficients")
    try:
        if kind == KIND_SCALAR:
            return scalar_field(grid, coeffs.reshape(grid.shape))
        if kind == KIND_VORTICITY:
            return velocity_from_vorticity(grid, coeffs.reshape(grid.shape))
        return velocity_from_components(grid, coeffs.reshape((3,) + grid.shape))
    except ValueError as exc:
        raise SnapshotFormatError(path, str(exc)) from exc


def write_state_pair(directory, tag: str, grid: WavenumberGrid, omega_hat, theta_hat) -> list:
    """Write <tag>.omega.cslb and <tag>.theta.cslb; returns the two paths."""
    directory = Path(directory)
    paths = [directory / f"{tag}.omega.cslb", directory / f"{tag}.theta.cslb"]
    write_snapshot(paths[0], velocity_from_vorticity(grid, omega_hat))
    write_snapshot(paths[1], scalar_field(grid, theta_hat))
    return paths


def read_state_pair(omega_path):
    """Read a snapshot pair given the .omega.cslb path (or its .theta
    sibling); returns (velocity, tracer)."""
    name = str(omega_path)
    if ".theta." in name:
        name = name.replace(".theta.", ".omega.")
    theta_name = name.replace(".omega.", ".theta.")
    if theta_name == name:
        raise SnapshotFormatError(omega_path, "not a state pair (expected *.omega.cslb)")
    u = read_snapshot(name)
    theta = read_snapshot(theta_name)
    if not isinstance(u, SpectralVelocityField) or not isinstance(theta, SpectralScalarField):
        raise SnapshotFormatError(omega_path, "pair kinds do not match their names")
    if u.grid != theta.grid:
        raise SnapshotFormatError(omega_path, "pair grids differ")
    return u, theta


# Configuration -----------------------------------------------------------

_CONFIG_KEYS = (
    ("L", float),
    ("N", int),
    ("nu", float),
    ("mu", float),
    ("dt", float),
    ("t_end", float),
    ("burn_in", float),
    ("seed", int),
    ("vel_band_lo", float),
    ("vel_band_hi", float),
    ("vel_amp", float),
    ("trc_band_lo", float),
    ("trc_band_hi", float),
    ("trc_amp", float),
)
_CONFIG_TYPES = dict(_CONFIG_KEYS)


def parse_config(text: str, source: str = "<config>") -> SimulationConfig:
    """Parse the key-value grammar; every error carries source:line."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(source, lineno, f"expected 'key = value', got {raw.strip()!r}")
        key, _, val = (part.strip() for part in line.partition("="))
        if key not in _CONFIG_TYPES:
            raise ConfigError(source, lineno, f"unknown key {key!r}")
        if key in values:
            raise ConfigError(source, lineno, f"duplicate key {key!r}")
        conv = _CONFIG_TYPES[key]
        try:
            values[key] = conv(val)
        except ValueError:
            raise ConfigError(
                source, lineno, f"bad {conv.__name__} for {key!r}: {val!r}"
            ) from None
    missing = [k for k, _ in _CONFIG_KEYS if k not in values]
    if missing:
        raise ConfigError(source, None, f"missing keys: {', '.join(missing)}")
    try:
        config = SimulationConfig(
            L=values["L"],
            N=values["N"],
            nu=values["nu"],
            mu=values["mu"],
            dt=values["dt"],
            t_end=values["t_end"],
            burn_in=values["burn_in"],
            seed=values["seed"],
            velocity_forcing=ForcingSpec(
                band_lo=values["vel_band_lo"],
                band_hi=values["vel_band_hi"],
                amplitude=values["vel_amp"],
                seed=values["seed"],
            ),
            tracer_forcing=ForcingSpec(
                band_lo=values["trc_band_lo"],
                band_hi=values["trc_band_hi"],
                amplitude=values["trc_amp"],
                seed=values["seed"],
            ),
        )
        grid = config.grid()
    except ValueError as exc:
        raise ConfigError(source, None, str(exc)) from None
    for label, spec in (("velocity", config.velocity_forcing), ("tracer", config.tracer_forcing)):
        if spec.amplitude > 0 and not band_mask(grid, spec.band_lo, spec.band_hi).any():
            raise ConfigError(
                source,
                None,
                f"{label} forcing band [{spec.band_lo}, {spec.band_hi}] contains no lattice modes",
            )
    return config


def load_config(path) -> tuple:
    """Returns (config, raw_text). Manifest JSON files (from an earlier run)
    are accepted; their embedded config text is re-parsed."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(path, None, f"cannot read: {exc}") from exc
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            manifest = json.loads(text)
            text = manifest["config"]["text"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(path, None, f"not a run manifest: {exc}") from None
        return parse_config(text, source=f"{path} (embedded config)"), text
    return parse_config(text, source=str(path)), text


def format_config(config: SimulationConfig) -> str:
    """Canonical text form; parse_config(format_config(c)) == c."""

    def fmt(v) -> str:
        return repr(float(v)) if isinstance(v, float) else str(int(v))

    pairs = (
        ("L", config.L),
        ("N", config.N),
        ("nu", config.nu),
        ("mu", config.mu),
        ("dt", config.dt),
        ("t_end", config.t_end),
        ("burn_in", config.burn_in),
        ("seed", config.seed),
        ("vel_band_lo", config.velocity_forcing.band_lo),
        ("vel_band_hi", config.velocity_forcing.band_hi),
        ("vel_amp", config.velocity_forcing.amplitude),
        ("trc_band_lo", config.tracer_forcing.band_lo),
        ("trc_band_hi", config.tracer_forcing.band_hi),
        ("trc_amp", config.tracer_forcing.amplitude),
    )
    return "".join(f"{k} = {fmt(v)}\n" for k, v in pairs)


# CSV / JSON artifacts ----------------------------------------------------


def _cell(x) -> str:
    return repr(float(x))


def _open_csv(path):
    return open(path, "w", newline="")


def write_table_csv(path, table: SpectrumTable) -> None:
    """Generic single-table export: kappa_lo,kappa_hi,value."""
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kappa_lo", "kappa_hi", "value"])
        for lo, hi, v in zip(table.kappa_lo, table.kappa_hi, table.values):
            w.writerow([_cell(lo), _cell(hi), _cell(v)])


def write_spectrum_csv(path, record: DiagnosticsRecord) -> None:
    """Averaged dyadic spectra: kappa_lo,kappa_hi,energy,tracer."""
    e, t = record.energy_spectrum, record.tracer_spectrum
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kappa_lo", "kappa_hi", "energy", "tracer"])
        for lo, hi, ev, tv in zip(e.kappa_lo, e.kappa_hi, e.values, t.values):
            w.writerow([_cell(lo), _cell(hi), _cell(ev), _cell(tv)])


def write_flux_csv(
    path,
    record: DiagnosticsRecord,
    kappa_above: float = 0.0,
    tol: float = 0.05,
    kappa_max: float | None = None,
) -> None:
    """Net flux ladder with the inertial-range lower-bound check.

    ratio = theta_flux/chi and lower_bound = 1 - (kappa/kappa_theta)^2; the
    pass column is true/false on the checked band (kappa_above, kappa_theta]
    and na elsewhere (or when chi = 0). kappa_max truncates the ladder; the
    surviving rows are unchanged (each is a pointwise tail sum)."""
    checked = {
        row.kappa: row for row in flux_bound_check(record, kappa_above, tol=tol)
    }
    with _open_csv(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kappa", "theta_flux", "enstrophy_flux", "energy_flux", "lower_bound", "ratio", "pass"])
        for i, kap in enumerate(record.ladder):
            kap = float(kap)
            if kappa_max is not None and kap > kappa_max:
                break
            if record.chi > 0 and record.kappa_theta is not None:
                lower = 1.0 - (kap / record.kappa_theta) ** 2
                ratio_s = _cell(float(record.theta_flux[i]) / record.chi)
                lower_s = _cell(lower)
            else:
                ratio_s = lower_s = "na"
            row = checked.get(kap)
            w.writerow(
                [
                    _cell(kap),
                    _cell(record.theta_flux[i]),
                    _cell(record.enstrophy_flux[i]),
                    _cell(record.energy_flux[i]),
                    lower_s,
                    ratio_s,
                    "na" if row is None else ("true" if row.ok else "false"),
                ]
            )


_UNITS = {
    "densities": "field norm squared per unit box volume, |.|^2 / L^d",
    "velocity_l2": "velocity^2 (L^2 density)",
    "enstrophy": "1/time^2 (gradient-norm density of u)",
    "palinstrophy": "1/(length^2 time^2) (Laplacian-norm density of u)",
    "tracer_variance": "tracer^2 (L^2 density)",
    "tracer_gradient": "tracer^2/length^2 (gradient-norm density)",
    "forcing_power": "velocity^2/time (mean (f, u)/L^d)",
    "tracer_injection": "tracer^2/time (mean (g, theta)/L^d)",
    "eps": "velocity^2/time (energy dissipation rate nu<||u||^2>/L^d)",
    "eta": "1/time^3 (enstrophy dissipation rate nu<|Au|^2>/L^d)",
    "chi": "tracer^2/time (tracer dissipation rate mu<|grad theta|^2>/L^d)",
    "wavenumbers": "1/length (kappa_* families)",
    "times": "time (t_start, t_end, eddy_turnover_time)",
}


def summary_dict(
    record: DiagnosticsRecord,
    grashof: float | None = None,
    kernel_backend: str | None = None,
    deterministic: bool | None = None,
    checks: dict | None = None,
) -> dict:
    """JSON-ready summary: every DiagnosticsRecord scalar, units annotated.
    Validates against schema/summary.schema.json (shipped)."""
    drift = None
    if (
        record.first_velocity_l2 is not None
        and record.last_velocity_l2 is not None
        and record.first_velocity_l2 > 0
    ):
        drift = record.last_velocity_l2 / record.first_velocity_l2 - 1.0
    return {
        "format": "cascadelab-summary",
        "version": 1,
        "grid": {"L": record.L, "N": record.N, "d": record.d, "kappa0": record.kappa0},
        "window": {
            "t_start": record.t_start,
            "t_end": record.t_end,
            "n_samples": record.n_samples,
            "eddy_turnover_time": record.eddy_turnover_time,
            "window_turnovers": record.window_turnovers,
        },
        "parameters": {
            "nu": record.nu,
            "mu": record.mu,
            "schmidt": record.schmidt,
            "grashof": grashof,
            "kernel_backend": kernel_backend,
            "deterministic": deterministic,
        },
        "mean_densities": {
            "velocity_l2": record.velocity_l2,
            "enstrophy": record.enstrophy,
            "palinstrophy": record.palinstrophy,
            "tracer_variance": record.tracer_variance,
            "tracer_gradient": record.tracer_gradient,
            "forcing_power": record.forcing_power,
            "tracer_injection": record.tracer_injection,
        },
        "rates": {"eps": record.eps, "eta": record.eta, "chi": record.chi},
        "wavenumbers": {
            "kappa_tau": record.kappa_tau,
            "kappa_sigma": record.kappa_sigma,
            "kappa_theta": record.kappa_theta,
            "kappa_eps": record.kappa_eps,
            "kappa_eta": record.kappa_eta,
            "kappa_beta": record.kappa_beta,
            "kappa_beta_prime": record.kappa_beta_prime,
        },
        "trend": {
            "first_velocity_l2": record.first_velocity_l2,
            "last_velocity_l2": record.last_velocity_l2,
            "relative_drift": drift,
        },
        "checks": checks if checks is not None else {},
        "units": dict(_UNITS),
    }


def write_json(path, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
