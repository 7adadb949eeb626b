"""Unit annotations accepted in config documents.

Everything is normalized to SI, with angular frequencies in rad/s. Only the
handful of quantity kinds the device model needs are supported.
"""

from __future__ import annotations

import math

from scipy import constants

from .errors import UnitError

TWO_PI = 2.0 * math.pi
BOHR_MAGNETON = constants.physical_constants["Bohr magneton"][0]

# linear-frequency units; converted to rad/s by 2*pi unless the caller
# declares the angular convention
_LINEAR_FREQ = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12}

_SCALES = {
    "frequency": {"rad/s": 1.0},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9},
    "volume": {"m^3": 1.0, "cm^3": 1e-6, "mm^3": 1e-9},
    "electric_dipole": {"C*m": 1.0},
    "magnetic_dipole": {"J/T": 1.0, "mu_B": BOHR_MAGNETON},
    "density": {"m^-3": 1.0, "cm^-3": 1e6},
    "time": {"s": 1.0},
    "wavenumber": {"rad/m": 1.0},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
}

CANONICAL = {
    "frequency": "rad/s",
    "length": "m",
    "volume": "m^3",
    "electric_dipole": "C*m",
    "magnetic_dipole": "J/T",
    "density": "m^-3",
    "time": "s",
    "wavenumber": "rad/m",
    "angle": "rad",
    "dimensionless": "",
}

FREQUENCY_CONVENTIONS = ("linear", "angular")


def normalize(value: float, unit: str | None, kind: str, *, convention: str = "linear", key: str = "?") -> float:
    """Convert ``value`` given in ``unit`` to the canonical SI unit of ``kind``.

    ``convention`` only matters for Hz-family units: ``"linear"`` multiplies
    by 2*pi, ``"angular"`` reads e.g. "10 MHz" as 1e7 rad/s.
    """
    if kind == "dimensionless":
        if unit not in (None, "", "1"):
            raise UnitError(f"{key}: dimensionless quantity given unit {unit!r}")
        return float(value)
    if not unit:
        raise UnitError(f"{key}: missing unit annotation (expected a {kind} unit, e.g. {CANONICAL[kind]!r})")
    if kind == "frequency" and unit in _LINEAR_FREQ:
        if convention not in FREQUENCY_CONVENTIONS:
            raise UnitError(f"{key}: unknown frequency convention {convention!r}")
        scale = _LINEAR_FREQ[unit]
        return float(value) * scale * (TWO_PI if convention == "linear" else 1.0)
    try:
        scale = _SCALES[kind][unit]
    except KeyError:
        allowed = sorted(_SCALES[kind]) + (sorted(_LINEAR_FREQ) if kind == "frequency" else [])
        raise UnitError(f"{key}: unit {unit!r} not accepted for {kind}; use one of {allowed}") from None
    return float(value) * scale
