"""Physical and scaled parameter sets for the two-mode self-trapping model.

Scaled units: position kx, time At, detunings and rates in units of the
coupling A, drive through eps2 = hbar k^2 E1^2 / (m A^3).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR

from .errors import InvalidParameterError

DEFAULT_PHASE = math.pi / 4
SILICA_DENSITY = 2200.0  # kg/m^3


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory parameters. Frequencies in s^-1, lengths in m, power in W.

    ``kappa`` is the full cavity damping; the halving that enters the scaled
    damping is done in :func:`scale_physical`.
    """

    kappa: float = 6e5
    A: float = 3e5
    wavelength: float = 1064e-9
    power: float = 8e-3
    drive_ratio: float = 0.5
    sphere_radius: float = 100e-9
    sphere_density: float = SILICA_DENSITY
    phase: float = DEFAULT_PHASE
    # accepted for bookkeeping only, never enter a formula
    waist: float | None = None
    cavity_length: float | None = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be positive, got {self.kappa}")
        if not self.A > 0:
            raise InvalidParameterError(f"A must be positive, got {self.A}")
        if not self.wavelength > 0:
            raise InvalidParameterError(f"wavelength must be positive, got {self.wavelength}")
        if not self.power >= 0:
            raise InvalidParameterError(f"power must be non-negative, got {self.power}")
        if not 0 <= self.drive_ratio <= 1:
            raise InvalidParameterError(f"drive_ratio must lie in [0, 1], got {self.drive_ratio}")
        if not self.sphere_radius > 0:
            raise InvalidParameterError("sphere_radius must be positive")
        if not self.sphere_density > 0:
            raise InvalidParameterError("sphere_density must be positive")

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def mass(self) -> float:
        return self.sphere_density * (4.0 / 3.0) * math.pi * self.sphere_radius**3

    @property
    def drive_amplitude_sq(self) -> float:
        """E1^2 from P = 2 k c E1^2 hbar / kappa."""
        return self.power * self.kappa / (2 * self.wavenumber * SPEED_OF_LIGHT * HBAR)

    @property
    def zeta(self) -> float:
        return HBAR * self.wavenumber**2 / (self.mass * self.A**3)


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless control parameters, all in units of A."""

    eps2: float
    delta1: float
    delta2: float
    kappaA: float = 1.0
    drive_ratio: float = 0.5
    phase: float = DEFAULT_PHASE

    def __post_init__(self):
        if not self.eps2 >= 0:
            raise InvalidParameterError(f"eps2 must be non-negative, got {self.eps2}")
        if not self.kappaA > 0:
            raise InvalidParameterError(f"kappaA must be positive, got {self.kappaA}")
        if not 0 <= self.drive_ratio <= 1:
            raise InvalidParameterError(f"drive_ratio must lie in [0, 1], got {self.drive_ratio}")
        for name in ("delta1", "delta2", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")

    @property
    def eps(self) -> float:
        return math.sqrt(self.eps2)

    @property
    def R(self) -> float:
        return self.drive_ratio

    def with_(self, **changes) -> "ScaledParams":
        return replace(self, **changes)


def scale_physical(phys: PhysicalParams, delta1: float, delta2: float) -> ScaledParams:
    """Map laboratory parameters and detunings (s^-1) onto scaled ones."""
    if not (phys.A > 0 and phys.kappa > 0):
        raise InvalidParameterError("A and kappa must be positive")
    return ScaledParams(
        eps2=phys.zeta * phys.drive_amplitude_sq,
        delta1=delta1 / phys.A,
        delta2=delta2 / phys.A,
        kappaA=(phys.kappa / 2) / phys.A,
        drive_ratio=phys.drive_ratio,
        phase=phys.phase,
    )


def unscale_rate(gamma_scaled: float, phys: PhysicalParams) -> float:
    return gamma_scaled * phys.A


def scale_rate(gamma_hz: float, phys: PhysicalParams) -> float:
    return gamma_hz / phys.A


def eps2_from_power(power: float, phys: PhysicalParams | None = None) -> float:
    """Scaled drive for a given power with all other lab parameters held fixed."""
    phys = phys or PhysicalParams()
    return scale_physical(replace(phys, power=power), 0.0, 0.0).eps2


# -- config files ----------------------------------------------------------

_PHYSICAL_KEYS = {
    "kappa", "A", "wavelength", "power", "drive_ratio", "sphere_radius",
    "sphere_density", "phase", "waist", "cavity_length",
}
_SCALED_KEYS = {"eps2", "delta1", "delta2", "kappaA", "drive_ratio", "phase"}


@dataclass
class RunConfig:
    """Parsed config: the scaled parameters plus the physical block, if any."""

    scaled: ScaledParams
    physical: PhysicalParams | None = None
    extra: dict = field(default_factory=dict)
    source: str = "scaled"  # section the scaled parameters came from


def _as_float(section, key):
    raw = section[key].strip()
    try:
        return float(raw)
    except ValueError:
        raise InvalidParameterError(f"[{section.name}] {key} = {raw!r} is not a number") from None


def parse_config(text: str) -> RunConfig:
    """Parse an INI-style key/value config.

    Either a ``[scaled]`` section (eps2, delta1, delta2, kappaA, drive_ratio,
    phase) or a ``[physical]`` section (PhysicalParams fields plus delta1,
    delta2 in s^-1) must be present. ``[scaled]`` wins if both are given.
    Any other section is returned verbatim in ``extra``.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep "A" and "kappaA" case
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidParameterError(f"malformed config: {exc}") from None

    physical = None
    if cp.has_section("physical"):
        sec = cp["physical"]
        unknown = set(sec) - _PHYSICAL_KEYS - {"delta1", "delta2"}
        if unknown:
            raise InvalidParameterError(f"unknown [physical] keys: {sorted(unknown)}")
        kwargs = {k: _as_float(sec, k) for k in sec if k in _PHYSICAL_KEYS}
        physical = PhysicalParams(**kwargs)
        d1 = _as_float(sec, "delta1") if "delta1" in sec else 0.0
        d2 = _as_float(sec, "delta2") if "delta2" in sec else 0.0
        scaled = scale_physical(physical, d1, d2)

    if cp.has_section("scaled"):
        sec = cp["scaled"]
        unknown = set(sec) - _SCALED_KEYS
        if unknown:
            raise InvalidParameterError(f"unknown [scaled] keys: {sorted(unknown)}")
        missing = {"eps2", "delta1", "delta2"} - set(sec)
        if missing:
            raise InvalidParameterError(f"[scaled] is missing {sorted(missing)}")
        scaled = ScaledParams(**{k: _as_float(sec, k) for k in sec})
    elif physical is None:
        raise InvalidParameterError("config needs a [scaled] or [physical] section")

    extra = {
        name: dict(cp[name]) for name in cp.sections() if name not in ("scaled", "physical")
    }
    source = "scaled" if cp.has_section("scaled") else "physical"
    return RunConfig(scaled=scaled, physical=physical, extra=extra, source=source)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidParameterError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
