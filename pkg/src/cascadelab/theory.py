"""Closed-form cascade estimates: octave sums, classical spectra tables,
tracer-cutoff estimates in 2-D and 3-D, dissipation-wavenumber bound
windows, feasibility curves, and a synthetic-spectrum field builder for
brute-force verification.

Scaling statements are implemented as exact formulas with tunable O(1)
prefactors (TheoryConstants, all defaulting to 1): c0 multiplies a-type
range sums, c1 b-type log sums, c2 single-range/log-corrected sums, c3 is
the feasibility threshold constant, c4 marks bound-window slack. Estimate
composition is exact: the returned cutoff estimate is 1/(a+b) (or 1/a,
1/(a+b')) of the returned parts.

Wavenumber-band notation: *_min/_max are the lowest/highest forced
wavenumbers of a band (velocity band f, tracer band g); zeta is the
velocity band top over kappa0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .fields import SpectralScalarField, _half_lattice, hermitian_reflect, scalar_field
from .grid import WavenumberGrid
from .operators import SpectrumTable, dyadic_bin_count

__all__ = [
    "HypothesisError",
    "TheoryConstants",
    "TheoryInputs",
    "TheoryResult",
    "BoundsWindow",
    "PowerLaw",
    "SpectraRow",
    "Generalized3d",
    "dyadic_sum",
    "classical_spectra",
    "ktheta_2d_large_sc",
    "ktheta_2d_moderate",
    "tracer_octave_bound",
    "bigPr_condition_2d",
    "bigPr_condition_3d",
    "phi",
    "phi_tilde",
    "keta_bounds",
    "keps_bounds",
    "ktheta_3d",
    "generalized_3d",
    "log_corrected_sum",
    "synthetic_field_from_spectrum",
]


class HypothesisError(ValueError):
    """A closed-form estimate was invoked outside its hypotheses."""


@dataclass(frozen=True)
class TheoryConstants:
    """Tunable O(1) prefactors for the scaling formulas (defaults 1)."""

    c0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0


DEFAULT_CONSTANTS = TheoryConstants()


def _require(named: dict) -> None:
    missing = [k for k, v in named.items() if v is None]
    if missing:
        raise ValueError(f"missing inputs: {', '.join(missing)}")


@dataclass(frozen=True)
class TheoryInputs:
    """Physical inputs for the estimate calculators. Any field may be left
    None when an operation does not need it; derived quantities (schmidt,
    zeta, the dissipation wavenumbers) are filled in from the others when
    possible. kappa_bar (start of the inertial range) defaults to
    kappa_f_max."""

    nu: float | None = None
    mu: float | None = None
    schmidt: float | None = None
    grashof: float | None = None
    kappa0: float | None = None
    kappa_g: float | None = None
    kappa_g_max: float | None = None
    kappa_f_min: float | None = None
    kappa_f_max: float | None = None
    kappa_bar: float | None = None
    eps: float | None = None
    eta: float | None = None
    chi: float | None = None
    r: float | None = None
    p: float | None = None
    zeta: float | None = None
    kappa_eta: float | None = None
    kappa_beta: float | None = None
    kappa_eps: float | None = None
    kappa_beta_prime: float | None = None
    constants: TheoryConstants = field(default=DEFAULT_CONSTANTS)

    def _set(self, name: str, value) -> None:
        object.__setattr__(self, name, value)

    def __post_init__(self) -> None:
        for name in ("nu", "mu", "schmidt", "grashof", "eps", "eta", "chi"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
        if self.nu is not None and self.mu is not None:
            sc = self.nu / self.mu
            if self.schmidt is None:
                self._set("schmidt", sc)
            elif abs(self.schmidt - sc) > 1e-9 * sc:
                raise ValueError(f"schmidt={self.schmidt} inconsistent with nu/mu={sc}")
        if self.kappa_f_max is not None and self.kappa0 is not None:
            z = self.kappa_f_max / self.kappa0
            if self.zeta is None:
                self._set("zeta", z)
            elif abs(self.zeta - z) > 1e-9 * z:
                raise ValueError(f"zeta={self.zeta} inconsistent with kappa_f_max/kappa0={z}")
        if self.zeta is not None and self.zeta < 1:
            raise ValueError(f"zeta must be >= 1, got {self.zeta}")
        if self.r is not None and not (4.0 / 3.0 <= self.r < 2.0):
            raise ValueError(f"r must lie in [4/3, 2), got {self.r}")
        if self.kappa_bar is None and self.kappa_f_max is not None:
            self._set("kappa_bar", self.kappa_f_max)
        if self.kappa_g is None and self.kappa_g_max is not None:
            self._set("kappa_g", self.kappa_g_max)
        if self.kappa_eta is None and self.eta is not None and self.nu is not None:
            self._set("kappa_eta", (self.eta / self.nu**3) ** (1.0 / 6.0))
        if self.kappa_beta is None and self.eta is not None and self.mu is not None:
            self._set("kappa_beta", (self.eta / self.mu**3) ** (1.0 / 6.0))
        if self.kappa_eps is None and self.eps is not None and self.nu is not None:
            self._set("kappa_eps", (self.eps / self.nu**3) ** 0.25)
        if self.kappa_beta_prime is None and self.eps is not None and self.nu is not None and self.mu is not None:
            self._set("kappa_beta_prime", (self.eps / (self.nu * self.mu**2)) ** 0.25)


@dataclass(frozen=True)
class BoundsWindow:
    """Scaling window for a dissipation wavenumber over kappa0. Values are
    the pure scaling expressions; sides listed in slack_sides carry an
    unknown multiplicative O(1) constant, the others are plain
    inequalities. valid is the stated window validity (None = always/not
    stated)."""

    quantity: str
    plain_lo: float | None
    plain_hi: float | None
    sharp_lo: float | None
    sharp_hi: float | None
    slack_sides: tuple
    valid: bool | None = None


@dataclass(frozen=True)
class TheoryResult:
    """One estimate: a and b are 1/length^2 contributions (b holds b' for
    the log-corrected variant) and ktheta_sq_estimate composes them
    exactly; threshold/condition_met report feasibility conditions;
    bounds/phi_value serve the window and feasibility operations."""

    branch: str
    a: float | None = None
    b: float | None = None
    ktheta_sq_estimate: float | None = None
    threshold: float | None = None
    condition_met: bool | None = None
    phi_value: float | None = None
    bounds: BoundsWindow | None = None
    notes: tuple = ()


def dyadic_sum(alpha: float, p: float, kappa1: float, kappa2: float) -> float:
    """Closed form of the octave-sum ladder alpha * kappa^-p summed over
    dyadic kappa in [kappa1, kappa2]:

        p > 0:  alpha * (kappa1^-p - kappa2^-p)
        p = 0:  alpha * ln(kappa2/kappa1)

    Requires 4*kappa1 <= kappa2 (at least two octaves) and p >= 0;
    kappa2 = inf is allowed for p > 0 (vanishing tail)."""
    if p < 0:
        raise HypothesisError(f"exponent p must be >= 0, got {p}")
    if kappa1 <= 0:
        raise HypothesisError(f"kappa1 must be positive, got {kappa1}")
    if not 4 * kappa1 <= kappa2:
        raise HypothesisError(f"need 4*kappa1 <= kappa2, got kappa1={kappa1}, kappa2={kappa2}")
    if p == 0:
        if math.isinf(kappa2):
            raise HypothesisError("p = 0 requires finite kappa2")
        return alpha * math.log(kappa2 / kappa1)
    return alpha * (kappa1**-p - (0.0 if math.isinf(kappa2) else kappa2**-p))


class PowerLaw(NamedTuple):
    """prefactor * kappa**exponent."""

    prefactor: float
    exponent: float

    def __call__(self, kappa: float) -> float:
        return self.prefactor * kappa**self.exponent


@dataclass(frozen=True)
class SpectraRow:
    """One classical-theory row: continuous spectra E, T and their octave
    partial sums e, t, each as a power law in kappa."""

    direction: str
    d: int
    energy_spectrum: PowerLaw
    energy_octave: PowerLaw
    tracer_spectrum: PowerLaw
    tracer_octave: PowerLaw


def classical_spectra(
    direction: str,
    d: int,
    eps: float | None = None,
    eta: float | None = None,
    chi: float | None = None,
    slope: float | None = None,
    amplitude: float | None = None,
) -> SpectraRow:
    """Classical cascade spectra rows:

        fwd/3:  E = eps^{2/3} k^{-5/3},  T = chi eps^{-1/3} k^{-5/3}
        fwd/2:  E = eta^{2/3} k^{-3},    T = chi eta^{-1/3} k^{-1}
        bkwd/2: E = eps^{2/3} k^{-5/3},  T = chi eps^{-1/3} k^{-5/3}

    Octave sums drop one power of kappa's decay ... the fwd/2 tracer octave
    is flat (k^0). With slope/amplitude given (fwd/3 only), the general
    form E = K k^{-n} yields T = chi K^{-1/2} k^{(n-5)/2}."""
    if direction not in ("fwd", "bkwd"):
        raise ValueError(f"direction must be fwd or bkwd, got {direction!r}")
    if (direction, d) == ("bkwd", 3) or d not in (2, 3):
        raise ValueError(f"no classical row for direction={direction!r}, d={d}")
    _require({"chi": chi})
    if slope is not None or amplitude is not None:
        if (direction, d) != ("fwd", 3):
            raise ValueError("general-slope spectra are a fwd/3 form")
        _require({"slope": slope, "amplitude": amplitude})
        if slope <= 1:
            raise ValueError(f"slope must exceed 1, got {slope}")
        return SpectraRow(
            direction=direction,
            d=d,
            energy_spectrum=PowerLaw(amplitude, -slope),
            energy_octave=PowerLaw(amplitude, -(slope - 1.0)),
            tracer_spectrum=PowerLaw(chi * amplitude**-0.5, (slope - 5.0) / 2.0),
            tracer_octave=PowerLaw(chi * amplitude**-0.5, (slope - 3.0) / 2.0),
        )
    if (direction, d) == ("fwd", 2):
        _require({"eta": eta})
        return SpectraRow(
            direction=direction,
            d=d,
            energy_spectrum=PowerLaw(eta ** (2.0 / 3.0), -3.0),
            energy_octave=PowerLaw(eta ** (2.0 / 3.0), -2.0),
            tracer_spectrum=PowerLaw(chi * eta ** (-1.0 / 3.0), -1.0),
            tracer_octave=PowerLaw(chi * eta ** (-1.0 / 3.0), 0.0),
        )
    _require({"eps": eps})
    return SpectraRow(
        direction=direction,
        d=d,
        energy_spectrum=PowerLaw(eps ** (2.0 / 3.0), -5.0 / 3.0),
        energy_octave=PowerLaw(eps ** (2.0 / 3.0), -2.0 / 3.0),
        tracer_spectrum=PowerLaw(chi * eps ** (-1.0 / 3.0), -5.0 / 3.0),
        tracer_octave=PowerLaw(chi * eps ** (-1.0 / 3.0), -2.0 / 3.0),
    )


def _large_sc_2d_core(
    kappa_beta: float,
    schmidt: float,
    kappa_g_max: float,
    kappa_f_min: float,
    kappa_f_max: float,
    kappa_eta: float,
    constants: TheoryConstants,
    branch: str,
    notes: tuple,
) -> TheoryResult:
    if not kappa_g_max < kappa_f_min:
        raise HypothesisError(
            f"need tracer band below velocity band (kappa_g_max={kappa_g_max} "
            f"< kappa_f_min={kappa_f_min})"
        )
    if not kappa_eta > kappa_f_max:
        raise HypothesisError(f"need kappa_eta > kappa_f_max, got {kappa_eta} <= {kappa_f_max}")
    if not kappa_beta > kappa_f_max:
        raise HypothesisError(f"need kappa_beta > kappa_f_max, got {kappa_beta} <= {kappa_f_max}")
    a = (
        constants.c0
        * kappa_beta ** (-4.0 / 3.0)
        * schmidt ** (-1.0 / 3.0)
        * (kappa_g_max ** (-2.0 / 3.0) - kappa_f_min ** (-2.0 / 3.0))
        * math.log(kappa_eta / kappa_f_max) ** (-1.0 / 3.0)
    )
    b = constants.c1 * kappa_beta**-2.0 * math.log(kappa_beta / kappa_f_max)
    return TheoryResult(
        branch=branch,
        a=a,
        b=b,
        ktheta_sq_estimate=1.0 / (a + b),
        notes=notes + (f"c0={constants.c0}", f"c1={constants.c1}"),
    )


def ktheta_2d_large_sc(inputs: TheoryInputs) -> TheoryResult:
    """Tracer cutoff for 2-D flow at large Schmidt number, two tracer
    ranges (injection below the velocity band):

        a = kappa_beta^{-4/3} Sc^{-1/3} (kappa_g_max^{-2/3} - kappa_f_min^{-2/3})
              * ln(kappa_eta/kappa_f_max)^{-1/3}
        b = kappa_beta^{-2} ln(kappa_beta/kappa_f_max)
        ktheta^2 = 1/(a+b)

    Reversed injection (velocity band below the tracer band) drops a and
    returns 1/b: the cutoff reaches kappa_beta up to the log."""
    _require(
        {
            "schmidt": inputs.schmidt,
            "kappa_beta": inputs.kappa_beta,
            "kappa_eta": inputs.kappa_eta,
            "kappa_g_max": inputs.kappa_g_max,
            "kappa_f_max": inputs.kappa_f_max,
        }
    )
    c = inputs.constants
    if inputs.kappa_f_max < inputs.kappa_g_max:
        if not inputs.kappa_beta > inputs.kappa_f_max:
            raise HypothesisError(
                f"need kappa_beta > kappa_f_max, got {inputs.kappa_beta} <= {inputs.kappa_f_max}"
            )
        b = c.c1 * inputs.kappa_beta**-2.0 * math.log(inputs.kappa_beta / inputs.kappa_f_max)
        return TheoryResult(
            branch="2d-large-sc-reversed",
            b=b,
            ktheta_sq_estimate=1.0 / b,
            notes=("injection scales reversed: a dropped", f"c1={c.c1}"),
        )
    _require({"kappa_f_min": inputs.kappa_f_min})
    return _large_sc_2d_core(
        inputs.kappa_beta,
        inputs.schmidt,
        inputs.kappa_g_max,
        inputs.kappa_f_min,
        inputs.kappa_f_max,
        inputs.kappa_eta,
        c,
        "2d-large-sc",
        (),
    )


def ktheta_2d_moderate(inputs: TheoryInputs) -> TheoryResult:
    """Tracer cutoff for 2-D flow at Schmidt number near 1.

    Single range (tracer and velocity forced together): the cascade lives
    in the enstrophy range and ktheta^2 = kappa_eta^2 / ln(kappa_eta/
    kappa_f_max). With a two-range configuration (tracer band below the
    velocity band) the large-Sc composition applies with kappa_beta taken
    as kappa_eta."""
    _require({"kappa_eta": inputs.kappa_eta, "kappa_f_max": inputs.kappa_f_max})
    if not inputs.kappa_eta > inputs.kappa_f_max:
        raise HypothesisError(
            f"ln argument <= 1: kappa_eta={inputs.kappa_eta} <= kappa_f_max={inputs.kappa_f_max}"
        )
    if (
        inputs.kappa_g_max is not None
        and inputs.kappa_f_min is not None
        and inputs.kappa_g_max < inputs.kappa_f_min
    ):
        schmidt = inputs.schmidt if inputs.schmidt is not None else 1.0
        notes = () if inputs.schmidt is not None else ("schmidt taken as 1",)
        return _large_sc_2d_core(
            inputs.kappa_eta,
            schmidt,
            inputs.kappa_g_max,
            inputs.kappa_f_min,
            inputs.kappa_f_max,
            inputs.kappa_eta,
            inputs.constants,
            "2d-moderate-two-range",
            notes + ("kappa_beta taken as kappa_eta",),
        )
    c2 = inputs.constants.c2
    b = c2 * math.log(inputs.kappa_eta / inputs.kappa_f_max) / inputs.kappa_eta**2
    return TheoryResult(
        branch="2d-moderate",
        b=b,
        ktheta_sq_estimate=1.0 / b,
        notes=(f"c2={c2}",),
    )


def tracer_octave_bound(chi: float, eta: float) -> float:
    """Uniform bound on every tracer octave sum under the premise that the
    tracer cutoff reaches kappa_beta: t_{kappa,2kappa} <= O(1) * chi *
    eta^{-1/3}. (The source display shows eta^{+1/3}; its own derivation
    gives eta^{-1/3}, which is also the dimensionally consistent form, so
    the display is treated as a typo.)"""
    if chi <= 0 or eta <= 0:
        raise ValueError("chi and eta must be positive")
    return chi * eta ** (-1.0 / 3.0)


def bigPr_condition_2d(
    r: float, grashof: float, zeta: float, constants: TheoryConstants = DEFAULT_CONSTANTS
) -> TheoryResult:
    """Schmidt threshold making the 2-D large-Sc cutoff reach
    kappa_beta^r kappa0^{2-r} (up to the log):

        threshold = (zeta * G)^{(3r-4)/(12-6r)}

    condition_met reports the side condition gamma * zeta^-5 >= e with
    gamma = G sqrt(ln G); the asymptote ktheta^2 ~ kappa_beta^r
    kappa0^{2-r} / ln(kappa_beta/kappa_f_max) applies when Sc exceeds the
    threshold and the side condition holds."""
    if not (4.0 / 3.0 <= r < 2.0):
        raise HypothesisError(f"r must lie in [4/3, 2), got {r}")
    if grashof <= 1:
        raise HypothesisError(f"grashof must exceed 1, got {grashof}")
    if zeta < 1:
        raise HypothesisError(f"zeta must be >= 1, got {zeta}")
    exponent = (3.0 * r - 4.0) / (12.0 - 6.0 * r)
    gamma = grashof * math.sqrt(math.log(grashof))
    return TheoryResult(
        branch="2d-bigpr-threshold",
        threshold=(zeta * grashof) ** exponent,
        condition_met=gamma * zeta**-5.0 >= math.e,
        notes=(
            f"exponent=(3r-4)/(12-6r)={exponent}",
            "asymptote: ktheta^2 ~ kappa_beta^r kappa0^(2-r) / ln(kappa_beta/kappa_f_max)",
            f"c3={constants.c3}",
        ),
    )


def bigPr_condition_3d(r: float, grashof: float) -> TheoryResult:
    """3-D analogue of the Schmidt threshold: G^{(3r-4)/(8-4r)}; above it
    ktheta^2 ~ kappa_beta_prime^r kappa0^{2-r} / ln(kappa_beta_prime/
    kappa_eps)."""
    if not (4.0 / 3.0 <= r < 2.0):
        raise HypothesisError(f"r must lie in [4/3, 2), got {r}")
    if grashof <= 1:
        raise HypothesisError(f"grashof must exceed 1, got {grashof}")
    exponent = (3.0 * r - 4.0) / (8.0 - 4.0 * r)
    return TheoryResult(
        branch="3d-bigpr-threshold",
        threshold=grashof**exponent,
        notes=(
            f"exponent=(3r-4)/(8-4r)={exponent}",
            "asymptote: ktheta^2 ~ kappa_beta_prime^r kappa0^(2-r) / ln(kappa_beta_prime/kappa_eps)",
        ),
    )


def _phi_family(p: float, zeta: float, log_power: float) -> float | None:
    if not 0.0 <= p <= 1.0 / 6.0:
        raise ValueError(f"p must lie in [0, 1/6], got {p}")
    if zeta <= 1.0:
        return None
    core = zeta - 6.0 * math.log(zeta)
    if core <= 0.0:
        return None
    return core**log_power / (zeta ** (1.5 * p) * math.exp(p * zeta) * (1.0 - zeta ** (-2.0 / 3.0)))


def phi(p: float, zeta: float) -> float | None:
    """Feasibility curve phi_p(zeta) = (zeta - 6 ln zeta)^{4/3} /
    [zeta^{3p/2} e^{p zeta} (1 - zeta^{-2/3})]; the threshold condition is
    1/c3 <= phi_p(zeta) with G = e^zeta. Returns None outside the domain
    zeta > 1, zeta - 6 ln zeta > 0 (the base would go negative)."""
    return _phi_family(p, zeta, 4.0 / 3.0)


def phi_tilde(p: float, zeta: float) -> float | None:
    """Log-corrected variant of phi: same expression with the numerator
    power 4/3 replaced by 1."""
    return _phi_family(p, zeta, 1.0)


def keta_bounds(
    grashof: float, zeta: float, constants: TheoryConstants = DEFAULT_CONSTANTS
) -> TheoryResult:
    """2-D window for kappa_eta/kappa0.

    Plain: G^{1/6} <~ kappa_eta/kappa0 <= G^{1/3} (the upper bound is a
    plain inequality with no hidden constant). Sharpened:
    zeta^{-1/4} G^{1/4} (ln G)^{-1/4} <~ . <~ zeta^{1/4} G^{1/4} (ln G)^{1/8}."""
    if grashof <= math.e:
        raise HypothesisError(f"grashof must exceed e, got {grashof}")
    if zeta < 1:
        raise HypothesisError(f"zeta must be >= 1, got {zeta}")
    lng = math.log(grashof)
    window = BoundsWindow(
        quantity="kappa_eta/kappa0",
        plain_lo=grashof ** (1.0 / 6.0),
        plain_hi=grashof ** (1.0 / 3.0),
        sharp_lo=zeta**-0.25 * grashof**0.25 * lng**-0.25,
        sharp_hi=zeta**0.25 * grashof**0.25 * lng**0.125,
        slack_sides=("plain_lo", "sharp_lo", "sharp_hi"),
        valid=None,
    )
    return TheoryResult(branch="2d-keta-bounds", bounds=window, notes=(f"c4={constants.c4}",))


def keps_bounds(
    grashof: float, zeta: float, constants: TheoryConstants = DEFAULT_CONSTANTS
) -> TheoryResult:
    """3-D window for kappa_eps/kappa0.

    Plain: zeta^{-5/8} G^{1/4} <~ kappa_eps/kappa0 (no upper counterpart).
    Sharpened: zeta^{-11/16} G^{3/8} <~ . <~ zeta^{-1/8} G^{3/8}, stated
    for G >~ zeta^{3/2} (reported in valid)."""
    if grashof <= math.e:
        raise HypothesisError(f"grashof must exceed e, got {grashof}")
    if zeta < 1:
        raise HypothesisError(f"zeta must be >= 1, got {zeta}")
    window = BoundsWindow(
        quantity="kappa_eps/kappa0",
        plain_lo=zeta ** (-5.0 / 8.0) * grashof**0.25,
        plain_hi=None,
        sharp_lo=zeta ** (-11.0 / 16.0) * grashof**0.375,
        sharp_hi=zeta**-0.125 * grashof**0.375,
        slack_sides=("plain_lo", "sharp_lo", "sharp_hi"),
        valid=grashof >= zeta**1.5,
    )
    return TheoryResult(branch="3d-keps-bounds", bounds=window, notes=(f"c4={constants.c4}",))


def ktheta_3d(inputs: TheoryInputs) -> TheoryResult:
    """Tracer cutoff for 3-D flow.

    Large Schmidt (Sc > 2, two tracer ranges):

        a = kappa_beta_prime^{-4/3} Sc^{-1/3} (kappa_g_max^{-2/3} - kappa_eps^{-2/3})
        b = kappa_beta_prime^{-2} ln(Sc)
        ktheta^2 = 1/(a+b)

    requiring 4*kappa_g <= kappa_eps. Moderate Schmidt (single, steeper
    tracer range) keeps only a, so ktheta^2 = 1/a, i.e.
    ktheta ~ kappa_beta_prime^{2/3} kappa0^{1/3} when the tracer is
    injected near kappa0."""
    _require(
        {
            "schmidt": inputs.schmidt,
            "kappa_beta_prime": inputs.kappa_beta_prime,
            "kappa_eps": inputs.kappa_eps,
            "kappa_g_max": inputs.kappa_g_max,
        }
    )
    c = inputs.constants
    if not inputs.kappa_g_max < inputs.kappa_eps:
        raise HypothesisError(
            f"need kappa_g_max < kappa_eps, got {inputs.kappa_g_max} >= {inputs.kappa_eps}"
        )
    a = (
        c.c0
        * inputs.kappa_beta_prime ** (-4.0 / 3.0)
        * inputs.schmidt ** (-1.0 / 3.0)
        * (inputs.kappa_g_max ** (-2.0 / 3.0) - inputs.kappa_eps ** (-2.0 / 3.0))
    )
    if inputs.schmidt > 2.0:
        kappa_g = inputs.kappa_g if inputs.kappa_g is not None else inputs.kappa_g_max
        if not 4.0 * kappa_g <= inputs.kappa_eps:
            raise HypothesisError(
                f"need 4*kappa_g <= kappa_eps, got kappa_g={kappa_g}, kappa_eps={inputs.kappa_eps}"
            )
        b = c.c1 * inputs.kappa_beta_prime**-2.0 * math.log(inputs.schmidt)
        return TheoryResult(
            branch="3d-large-sc",
            a=a,
            b=b,
            ktheta_sq_estimate=1.0 / (a + b),
            notes=(f"c0={c.c0}", f"c1={c.c1}"),
        )
    return TheoryResult(
        branch="3d-moderate",
        a=a,
        ktheta_sq_estimate=1.0 / a,
        notes=(
            "single tracer range: ktheta ~ kappa_beta_prime^(2/3) kappa0^(1/3)",
            f"c0={c.c0}",
        ),
    )


@dataclass(frozen=True)
class Generalized3d:
    """Generalized 3-D energy-slope descriptor: E ~ eps^{2/3} kappa0^{p-5/3}
    kappa^{-p} gives tracer exponents q = (p-3)/2 (octave decay) and
    q' = (5-3p)/6 (kappa0 prefactor power); q + q' = -2/3 for every p, so
    the range total and the final cutoff estimate are p-independent."""

    p: float
    q: float
    q_prime: float
    exponent_sum: float
    octave_alpha: float | None
    range_total: float | None
    simplified_total: float | None
    estimate: TheoryResult | None


def generalized_3d(p_slope: float, inputs: TheoryInputs | None = None) -> Generalized3d:
    """Evaluate the generalized-slope descriptor; with inputs rich enough,
    also the octave prefactor alpha = chi eps^{-1/3} kappa0^{q'}, the range
    total alpha (kappa_g^q - kappa_eps^q), its simplified p-free form
    (chi/mu) kappa_beta_prime^{-4/3} Sc^{-1/3} kappa0^{-2/3}, and the full
    cutoff estimate (which never depends on p)."""
    if not 1.0 < p_slope < 3.0:
        raise HypothesisError(f"slope p must lie in (1, 3), got {p_slope}")
    q = (p_slope - 3.0) / 2.0
    q_prime = (5.0 - 3.0 * p_slope) / 6.0
    total = q + q_prime
    if abs(total + 2.0 / 3.0) > 1e-12:
        raise AssertionError(f"q + q' = {total} is not -2/3")
    alpha = range_total = simplified = estimate = None
    if inputs is not None:
        if inputs.chi is not None and inputs.eps is not None and inputs.kappa0 is not None:
            alpha = inputs.chi * inputs.eps ** (-1.0 / 3.0) * inputs.kappa0**q_prime
            if inputs.kappa_g is not None and inputs.kappa_eps is not None:
                range_total = dyadic_sum(alpha, -q, inputs.kappa_g, inputs.kappa_eps)
        if (
            inputs.chi is not None
            and inputs.mu is not None
            and inputs.schmidt is not None
            and inputs.kappa_beta_prime is not None
            and inputs.kappa0 is not None
        ):
            simplified = (
                (inputs.chi / inputs.mu)
                * inputs.kappa_beta_prime ** (-4.0 / 3.0)
                * inputs.schmidt ** (-1.0 / 3.0)
                * inputs.kappa0 ** (-2.0 / 3.0)
            )
        try:
            estimate = ktheta_3d(inputs)
        except (ValueError, HypothesisError):
            estimate = None
    return Generalized3d(
        p=p_slope,
        q=q,
        q_prime=q_prime,
        exponent_sum=total,
        octave_alpha=alpha,
        range_total=range_total,
        simplified_total=simplified,
        estimate=estimate,
    )


def log_corrected_sum(
    chi: float,
    mu: float,
    eta: float,
    kappa_f_max: float,
    kappa_eta: float,
    a: float | None = None,
    constants: TheoryConstants = DEFAULT_CONSTANTS,
) -> TheoryResult:
    """Log-corrected enstrophy-range tracer sum. The octave terms
    telescope, leaving the endpoint difference:

        t_total = (chi/mu) (mu^3/eta)^{1/3} (ln kappa_eta/kappa_f_max)^{2/3}
        b' = kappa_eta^{-2} (ln kappa_eta/kappa_f_max)^{2/3}

    Returns 1/(a+b') when composed with a large-Sc a, else 1/b'."""
    if chi <= 0 or mu <= 0 or eta <= 0:
        raise ValueError("chi, mu, eta must be positive")
    if not kappa_eta > kappa_f_max:
        raise HypothesisError(
            f"ln argument <= 1: kappa_eta={kappa_eta} <= kappa_f_max={kappa_f_max}"
        )
    log23 = math.log(kappa_eta / kappa_f_max) ** (2.0 / 3.0)
    total = (chi / mu) * (mu**3 / eta) ** (1.0 / 3.0) * log23
    bprime = constants.c2 * log23 / kappa_eta**2
    estimate = 1.0 / (a + bprime) if a is not None else 1.0 / bprime
    return TheoryResult(
        branch="2d-log-corrected",
        a=a,
        b=bprime,
        ktheta_sq_estimate=estimate,
        notes=(f"octave range total t={total}", f"c2={constants.c2}"),
    )


def synthetic_field_from_spectrum(
    grid: WavenumberGrid, table: SpectrumTable, seed: int
) -> SpectralScalarField:
    """Build a scalar field whose dyadic spectrum reproduces the table
    exactly: each bin's value is split evenly over that bin's lattice
    modes, with phases drawn deterministically from the seed. Bin edges
    must match the grid's dyadic binning; a nonzero value on a bin with no
    lattice modes is an error."""
    n_bins = dyadic_bin_count(grid.dealias_cutoff)
    if table.n_bins != n_bins:
        raise ValueError(f"table has {table.n_bins} bins, grid produces {n_bins}")
    for j in range(n_bins):
        lo = grid.kappa0 * 2**j
        hi = grid.kappa0 * 2 ** (j + 1)
        if abs(table.kappa_lo[j] - lo) > 1e-12 * lo or abs(table.kappa_hi[j] - hi) > 1e-12 * hi:
            raise ValueError(f"bin {j} edges do not match the grid's dyadic ladder")
    if np.any(np.asarray(table.values) < 0):
        raise ValueError("bin values must be nonnegative")

    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 4)))
    half = _half_lattice(grid) & grid.dealias_mask
    shell = grid.shell_index
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(n_bins):
        value = float(table.values[j])
        reps = half & (shell >= 2**j) & (shell < 2 ** (j + 1))
        n_modes = 2 * int(np.count_nonzero(reps))
        if n_modes == 0:
            if value != 0.0:
                raise ValueError(f"bin {j} has no lattice modes but value {value}")
            continue
        if value == 0.0:
            continue
        amp = math.sqrt(value / n_modes)
        phases = rng.uniform(0.0, 2.0 * math.pi, n_modes // 2)
        coeffs[reps] = amp * np.exp(1j * phases)
    return scalar_field(grid, coeffs + hermitian_reflect(coeffs))
