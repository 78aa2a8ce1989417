"""Hot-kernel backend selection.

Two interchangeable implementations of the per-step kernels exist: a
compiled Cython module (``_cy``) and a pure-numpy reference (``pyref``).
One is chosen at import time; the environment variable CASCADE_KERNELS
overrides the choice:

* ``auto`` (default): compiled backend when importable, else numpy,
* ``py``: force the numpy reference,
* ``cy``: require the compiled backend (ImportError if unavailable).

Both backends are deterministic run-to-run; results agree to 1e-12
relative (summation order may differ in the last bits).
"""

from __future__ import annotations

import os

from . import pyref

_choice = os.environ.get("CASCADE_KERNELS", "auto").strip().lower()
if _choice not in ("auto", "py", "cy"):
    raise RuntimeError(
        f"CASCADE_KERNELS must be auto, py, or cy; got {_choice!r}"
    )

if _choice == "py":
    _impl = pyref
else:
    try:
        from . import _cy as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "cy":
            raise
        _impl = pyref

BACKEND: str = _impl.BACKEND

vorticity_to_velocity = _impl.vorticity_to_velocity
advect_scalar_2d = _impl.advect_scalar_2d
advect_scalar_3d = _impl.advect_scalar_3d
max_speed_2d = _impl.max_speed_2d
max_speed_3d = _impl.max_speed_3d
heun_predict = _impl.heun_predict
heun_correct = _impl.heun_correct
shell_sums = _impl.shell_sums

__all__ = [
    "BACKEND",
    "pyref",
    "vorticity_to_velocity",
    "advect_scalar_2d",
    "advect_scalar_3d",
    "max_speed_2d",
    "max_speed_3d",
    "heun_predict",
    "heun_correct",
    "shell_sums",
]


def available_backends() -> tuple:
    """Names of the importable backends, compiled one first."""
    names = []
    try:
        from . import _cy  # noqa: F401

        names.append("cy")
    except ImportError:
        pass
    names.append("py")
    return tuple(names)


def get_backend(name: str):
    """Fetch a backend module by name ('py' or 'cy') for benchmarks/tests."""
    if name == "py":
        return pyref
    if name == "cy":
        from . import _cy

        return _cy
    raise ValueError(f"unknown backend {name!r}")
