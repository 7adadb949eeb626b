"""Device configuration: flat ``key = value unit`` documents and their validation.

See docs/config.md for the schema. Every dimensional value must carry a unit;
linear-frequency units (Hz ... THz) are converted to rad/s by 2*pi unless the
section declares ``frequency_convention = angular``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from scipy import constants

from . import units
from .design import DEFAULT_BETA
from .errors import ConfigError, InvariantError, UnitError
from .geometry import (
    Cylinder,
    GaussianBeam,
    GeometrySpec,
    UniformCylinder,
    mode_volume,
    read_field_grid,
)
from .model import BroadeningSpec, CavityPair, DriveSpec, MaterialSpec

# key -> (kind, required)
SCHEMA: dict[str, tuple[str, bool]] = {
    "material.d31": ("electric_dipole", True),
    "material.mu21": ("magnetic_dipole", True),
    "material.rho": ("density", True),
    "broadening.frequency_convention": ("text", False),
    "broadening.sigma_mu": ("frequency", True),
    "broadening.sigma_o": ("frequency", True),
    "broadening.mean_mu": ("frequency", True),
    "broadening.mean_o": ("frequency", True),
    "broadening.eps_mu": ("frequency", True),
    "broadening.eps_o": ("frequency", True),
    "cavities.omega_a": ("frequency", True),
    "cavities.omega_b": ("frequency", True),
    "cavities.Q_a": ("dimensionless", False),
    "cavities.Q_b": ("dimensionless", False),
    "cavities.kappa_a": ("frequency", False),
    "cavities.kappa_b": ("frequency", False),
    "drive.frequency_convention": ("text", False),
    "drive.omega_Omega": ("frequency", False),
    "drive.Omega_peak": ("frequency", True),
    "drive.Omega_phase": ("angle", False),
    "geometry.crystal_radius": ("length", True),
    "geometry.crystal_length": ("length", True),
    "geometry.waist_diameter": ("length", True),
    "geometry.refractive_index": ("dimensionless", False),
    "geometry.phase_mismatch": ("wavenumber", False),
    "geometry.optical_cavity_length": ("length", False),
    "geometry.standing_wave": ("bool", False),
    "geometry.V_mu": ("volume", False),
    "geometry.V_o": ("volume", False),
    "geometry.chi_grid": ("text", False),
    "design.alpha": ("time", False),
    "design.F": ("dimensionless", False),
    "design.beta": ("dimensionless", False),
    "design.linewidth": ("text", False),
    "ensemble.n_atoms": ("int", False),
    "ensemble.seed": ("int", False),
}

DEFAULT_N_ATOMS = 100_000
DEFAULT_SEED = 0

REFERENCE_DEVICE_TEXT = """\
# Er:YSO converter design point (loop-gap resonator + Fabry-Perot cavity)
material.d31 = 2.13e-32 C*m
material.mu21 = 7.5 mu_B
# 0.001 % of the 1.87e28 m^-3 yttrium sites
material.rho = 1.87e23 m^-3

# linewidths quoted in MHz are read as 1e6 rad/s, the same reading as the
# drive; linear (x 2 pi) gives an alpha 20x smaller than the quoted value
broadening.frequency_convention = angular
broadening.sigma_mu = 1 MHz
broadening.mean_mu = 3 MHz
broadening.eps_mu = 0.5 MHz
broadening.sigma_o = 500 MHz
broadening.mean_o = 1500 MHz
broadening.eps_o = 250 MHz

cavities.omega_a = 190 THz
cavities.omega_b = 5 GHz
cavities.Q_a = 1e7
cavities.Q_b = 2000

# the quoted "10 MHz" Rabi frequency is 1e7 rad/s: only that reading gives R = 1.7
drive.frequency_convention = angular
drive.Omega_peak = 10 MHz

geometry.crystal_radius = 2.5 mm
geometry.crystal_length = 10 mm
geometry.waist_diameter = 1 mm
geometry.refractive_index = 1.8

# quoted design values: F comes from an FDTD field map (not modelled here)
design.alpha = 1.43e-10 s
design.F = 0.0084

ensemble.n_atoms = 1000000
ensemble.seed = 1
"""

# values quoted for the design point; used by the CLI and the acceptance suite
DESIGN_POINT = {"Omega": 1e7, "alpha": 1.43e-10, "F": 0.0084, "Q_a": 1e7, "Q_b": 2000.0, "R": 1.7}


@dataclass(frozen=True)
class GeometryParams:
    """Scalar description of the crystal and beams; ``spec()`` builds the modes."""

    crystal_radius: float
    crystal_length: float
    waist_diameter: float
    wavelength: float  # vacuum wavelength of the optical mode
    refractive_index: float
    phase_mismatch: float  # rad/m, axial phase of the drive relative to the optical mode
    optical_cavity_length: float
    standing_wave: bool
    V_mu: float
    V_o: float
    chi_grid: str | None = None

    def crystal(self) -> Cylinder:
        return Cylinder(self.crystal_radius, self.crystal_length)

    def modes(self):
        crystal = self.crystal()
        chi = read_field_grid(self.chi_grid) if self.chi_grid else UniformCylinder(crystal)
        psi = GaussianBeam(self.waist_diameter, self.wavelength, refractive_index=self.refractive_index)
        phi = GaussianBeam(self.waist_diameter, self.wavelength, refractive_index=self.refractive_index,
                           axial_wavenumber=self.phase_mismatch, standing_wave=self.standing_wave)
        return chi, psi, phi

    def spec(self) -> GeometrySpec:
        chi, psi, phi = self.modes()
        return GeometrySpec(self.crystal(), chi, psi, phi, self.V_mu, self.V_o)


@dataclass(frozen=True)
class DeviceConfig:
    material: MaterialSpec
    broadening: BroadeningSpec
    cavities: CavityPair
    drive: DriveSpec
    geometry: GeometryParams
    n_atoms: int = DEFAULT_N_ATOMS
    seed: int = DEFAULT_SEED
    broadening_convention: str = "linear"
    drive_convention: str = "linear"
    # quoted values that replace the computed alpha / F in design calculations
    alpha_override: float | None = None
    F_override: float | None = None
    beta: float = DEFAULT_BETA
    linewidth: str = "fwhm"
    source_digest: str = field(default="", compare=False)

    @cached_property
    def _geometry_spec(self) -> GeometrySpec:
        return self.geometry.spec()

    def geometry_spec(self) -> GeometrySpec:
        return self._geometry_spec

    @property
    def digest(self) -> str:
        return self.source_digest or digest_text(dump_config(self))


def digest_text(text: str | bytes) -> str:
    data = text.encode() if isinstance(text, str) else text
    return hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------------------
# parsing

def parse_config(text: str) -> dict[str, str]:
    """Split a document into {key: raw value string}. Comments start with '#'."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value [unit]'")
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _split(raw_value: str, key: str) -> tuple[float, str | None]:
    number, _, unit = raw_value.partition(" ")
    try:
        value = float(number)
    except ValueError:
        raise ConfigError(f"{key}: cannot read a number from {raw_value!r}") from None
    unit = unit.strip() or None
    return value, unit


class _Reader:
    def __init__(self, raw: dict[str, str]):
        self.raw = raw

    def has(self, key: str) -> bool:
        return key in self.raw

    def text(self, key: str, default: str | None = None) -> str | None:
        return self.raw.get(key, default)

    def quantity(self, key: str, convention: str = "linear", default: float | None = None) -> float:
        kind, required = SCHEMA[key]
        if key not in self.raw:
            if required or default is None:
                raise ConfigError(f"{key}: required value missing")
            return default
        value, unit = _split(self.raw[key], key)
        return units.normalize(value, unit, kind, convention=convention, key=key)

    def integer(self, key: str, default: int) -> int:
        if key not in self.raw:
            return default
        try:
            return int(self.raw[key])
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {self.raw[key]!r}") from None

    def boolean(self, key: str, default: bool) -> bool:
        v = self.raw.get(key)
        if v is None:
            return default
        if v.lower() in ("true", "yes", "1"):
            return True
        if v.lower() in ("false", "no", "0"):
            return False
        raise ConfigError(f"{key}: expected true/false, got {v!r}")


def _convention(r: _Reader, section: str) -> str:
    conv = r.text(f"{section}.frequency_convention", "linear")
    if conv not in units.FREQUENCY_CONVENTIONS:
        raise UnitError(f"{section}.frequency_convention: expected 'linear' or 'angular', got {conv!r}")
    return conv


def _cavities(r: _Reader) -> CavityPair:
    omega_a = r.quantity("cavities.omega_a")
    omega_b = r.quantity("cavities.omega_b")
    Qs = []
    for side, omega in (("a", omega_a), ("b", omega_b)):
        qkey, kkey = f"cavities.Q_{side}", f"cavities.kappa_{side}"
        if r.has(qkey):
            Q = r.quantity(qkey)
            if r.has(kkey):
                kappa = r.quantity(kkey)
                if not math.isclose(kappa, omega / Q, rel_tol=1e-12):
                    raise InvariantError("kappa = omega/Q", kkey, f"{kappa!r} vs {omega / Q!r}")
        elif r.has(kkey):
            Q = omega / r.quantity(kkey)
        else:
            raise ConfigError(f"{qkey}: give a quality factor or {kkey}")
        Qs.append(Q)
    return CavityPair(omega_a, omega_b, Qs[0], Qs[1])


def _geometry(r: _Reader, cavities: CavityPair) -> GeometryParams:
    radius = r.quantity("geometry.crystal_radius")
    length = r.quantity("geometry.crystal_length")
    waist = r.quantity("geometry.waist_diameter")
    n = r.quantity("geometry.refractive_index", default=1.0)
    for key, v in (("crystal_radius", radius), ("crystal_length", length), ("waist_diameter", waist),
                   ("refractive_index", n)):
        if not (math.isfinite(v) and v > 0):
            raise InvariantError("strictly positive and finite", f"geometry.{key}", repr(v))
    wavelength = 2.0 * math.pi * constants.c / cavities.omega_a
    # drive and optical modes differ in frequency by omega_b
    dk = r.quantity("geometry.phase_mismatch", default=n * cavities.omega_b / constants.c)
    cav_len = r.quantity("geometry.optical_cavity_length", default=length)
    standing = r.boolean("geometry.standing_wave", False)
    chi_grid = r.text("geometry.chi_grid")
    partial = GeometryParams(radius, length, waist, wavelength, n, dk, cav_len, standing, 1.0, 1.0, chi_grid)
    chi, psi, _ = partial.modes()
    if r.has("geometry.V_mu"):
        V_mu = r.quantity("geometry.V_mu")
    else:
        V_mu = mode_volume(chi, partial.crystal())
    if r.has("geometry.V_o"):
        V_o = r.quantity("geometry.V_o")
    else:
        # wide enough that the Gaussian tail outside is below double precision
        V_o = mode_volume(psi, Cylinder(max(radius, 4.0 * waist), cav_len))
    return GeometryParams(radius, length, waist, wavelength, n, dk, cav_len, standing, V_mu, V_o, chi_grid)


def validate_config(raw: dict[str, str], source_digest: str = "") -> DeviceConfig:
    """Build a DeviceConfig from a parsed document, enforcing every invariant."""
    for key in raw:
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
    r = _Reader(raw)
    material = MaterialSpec(r.quantity("material.d31"), r.quantity("material.mu21"), r.quantity("material.rho"))
    bconv = _convention(r, "broadening")
    broadening = BroadeningSpec(**{
        f: r.quantity(f"broadening.{f}", bconv)
        for f in ("sigma_mu", "sigma_o", "mean_mu", "mean_o", "eps_mu", "eps_o")
    })
    cavities = _cavities(r)
    dconv = _convention(r, "drive")
    omega_Omega = r.quantity("drive.omega_Omega", dconv, default=cavities.omega_a - cavities.omega_b)
    drive = DriveSpec(omega_Omega, r.quantity("drive.Omega_peak", dconv),
                      r.quantity("drive.Omega_phase", default=0.0))
    drive.check_resonance(cavities)
    geometry = _geometry(r, cavities)
    n_atoms = r.integer("ensemble.n_atoms", DEFAULT_N_ATOMS)
    if n_atoms < 1:
        raise InvariantError("n_atoms >= 1", "ensemble.n_atoms")
    seed = r.integer("ensemble.seed", DEFAULT_SEED)
    if seed < 0:
        raise InvariantError("seed >= 0", "ensemble.seed")
    alpha_q = r.quantity("design.alpha") if r.has("design.alpha") else None
    F_q = r.quantity("design.F") if r.has("design.F") else None
    for key, v in (("design.alpha", alpha_q), ("design.F", F_q)):
        if v is not None and not (math.isfinite(v) and v >= 0):
            raise InvariantError("nonnegative and finite", key, repr(v))
    beta = r.quantity("design.beta", default=DEFAULT_BETA)
    if not beta > 0:
        raise InvariantError("beta > 0", "design.beta", repr(beta))
    linewidth = r.text("design.linewidth", "fwhm")
    if linewidth not in ("fwhm", "sigma"):
        raise ConfigError(f"design.linewidth: expected 'fwhm' or 'sigma', got {linewidth!r}")
    return DeviceConfig(material, broadening, cavities, drive, geometry, n_atoms, seed, bconv, dconv,
                        alpha_q, F_q, beta, linewidth, source_digest)


def loads_config(text: str) -> DeviceConfig:
    return validate_config(parse_config(text), digest_text(text))


def load_config(path) -> DeviceConfig:
    data = Path(path).read_bytes()
    return validate_config(parse_config(data.decode("utf-8")), digest_text(data))


def reference_device() -> DeviceConfig:
    return loads_config(REFERENCE_DEVICE_TEXT)


# ---------------------------------------------------------------------------
# serialization (canonical SI units, repr floats: re-validation is bit-identical)

def dump_config(cfg: DeviceConfig) -> str:
    def q(v: float, unit: str) -> str:
        return f"{v!r} {unit}".rstrip()

    m, b, c, d, g = cfg.material, cfg.broadening, cfg.cavities, cfg.drive, cfg.geometry
    lines = [
        f"material.d31 = {q(m.d31, 'C*m')}",
        f"material.mu21 = {q(m.mu21, 'J/T')}",
        f"material.rho = {q(m.rho, 'm^-3')}",
        f"broadening.frequency_convention = {cfg.broadening_convention}",
    ]
    lines += [f"broadening.{f} = {q(getattr(b, f), 'rad/s')}"
              for f in ("sigma_mu", "sigma_o", "mean_mu", "mean_o", "eps_mu", "eps_o")]
    lines += [
        f"cavities.omega_a = {q(c.omega_a, 'rad/s')}",
        f"cavities.omega_b = {q(c.omega_b, 'rad/s')}",
        f"cavities.Q_a = {c.Q_a!r}",
        f"cavities.Q_b = {c.Q_b!r}",
        f"drive.frequency_convention = {cfg.drive_convention}",
        f"drive.omega_Omega = {q(d.omega_Omega, 'rad/s')}",
        f"drive.Omega_peak = {q(d.Omega_mag, 'rad/s')}",
        f"drive.Omega_phase = {q(d.Omega_phase, 'rad')}",
        f"geometry.crystal_radius = {q(g.crystal_radius, 'm')}",
        f"geometry.crystal_length = {q(g.crystal_length, 'm')}",
        f"geometry.waist_diameter = {q(g.waist_diameter, 'm')}",
        f"geometry.refractive_index = {g.refractive_index!r}",
        f"geometry.phase_mismatch = {q(g.phase_mismatch, 'rad/m')}",
        f"geometry.optical_cavity_length = {q(g.optical_cavity_length, 'm')}",
        f"geometry.standing_wave = {'true' if g.standing_wave else 'false'}",
        f"geometry.V_mu = {q(g.V_mu, 'm^3')}",
        f"geometry.V_o = {q(g.V_o, 'm^3')}",
    ]
    if g.chi_grid:
        lines.append(f"geometry.chi_grid = {g.chi_grid}")
    if cfg.alpha_override is not None:
        lines.append(f"design.alpha = {q(cfg.alpha_override, 's')}")
    if cfg.F_override is not None:
        lines.append(f"design.F = {cfg.F_override!r}")
    lines += [f"design.beta = {cfg.beta!r}", f"design.linewidth = {cfg.linewidth}"]
    lines += [f"ensemble.n_atoms = {cfg.n_atoms}", f"ensemble.seed = {cfg.seed}"]
    return "\n".join(lines) + "\n"
