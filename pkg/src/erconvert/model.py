"""Shared domain types for the converter model.

All angular frequencies are rad/s, lengths metres, dipoles SI. Instances are
frozen after construction and validate their own invariants.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .errors import InvariantError

# three-photon resonance tolerance, relative to omega_a
RESONANCE_RTOL = 1e-12


def _positive_finite(obj, *names: str) -> None:
    for name in names:
        v = getattr(obj, name)
        if not (math.isfinite(v) and v > 0):
            raise InvariantError("strictly positive and finite", f"{type(obj).__name__}.{name}", repr(v))


@dataclass(frozen=True)
class MaterialSpec:
    d31: float  # C*m
    mu21: float  # J/T
    rho: float  # m^-3

    def __post_init__(self):
        _positive_finite(self, "d31", "mu21", "rho")


@dataclass(frozen=True)
class Gaussian:
    """A Gaussian detuning distribution with a lower integration cutoff."""

    mean: float
    sigma: float
    eps: float


@dataclass(frozen=True)
class BroadeningSpec:
    sigma_mu: float
    sigma_o: float
    mean_mu: float
    mean_o: float
    eps_mu: float
    eps_o: float

    def __post_init__(self):
        _positive_finite(self, "sigma_mu", "sigma_o", "mean_mu", "mean_o", "eps_mu", "eps_o")
        for tr in ("mu", "o"):
            if not getattr(self, f"eps_{tr}") < getattr(self, f"mean_{tr}"):
                raise InvariantError("0 < eps < mean", f"BroadeningSpec.eps_{tr}")

    @property
    def microwave(self) -> Gaussian:
        return Gaussian(self.mean_mu, self.sigma_mu, self.eps_mu)

    @property
    def optical(self) -> Gaussian:
        return Gaussian(self.mean_o, self.sigma_o, self.eps_o)


@dataclass(frozen=True)
class CavityPair:
    """Optical (a) and microwave (b) resonators. kappa is the energy decay rate."""

    omega_a: float
    omega_b: float
    Q_a: float
    Q_b: float
    kappa_a: float = field(init=False)
    kappa_b: float = field(init=False)

    def __post_init__(self):
        _positive_finite(self, "omega_a", "omega_b", "Q_a", "Q_b")
        if not self.omega_a > self.omega_b:
            raise InvariantError("omega_a > omega_b", "CavityPair.omega_a")
        object.__setattr__(self, "kappa_a", self.omega_a / self.Q_a)
        object.__setattr__(self, "kappa_b", self.omega_b / self.Q_b)

    @classmethod
    def from_kappas(cls, kappa_a: float, kappa_b: float, omega_a: float = 1.0, omega_b: float = 0.5) -> "CavityPair":
        """Build a pair with prescribed linewidths; only kappa matters to the scattering code."""
        return cls(omega_a, omega_b, omega_a / kappa_a, omega_b / kappa_b)


@dataclass(frozen=True)
class DriveSpec:
    omega_Omega: float
    Omega_mag: float
    Omega_phase: float = 0.0

    def __post_init__(self):
        _positive_finite(self, "omega_Omega")
        if not (math.isfinite(self.Omega_mag) and self.Omega_mag >= 0):
            raise InvariantError("nonnegative and finite", "DriveSpec.Omega_mag")
        if not math.isfinite(self.Omega_phase):
            raise InvariantError("finite", "DriveSpec.Omega_phase")

    @property
    def Omega_peak(self) -> complex:
        return cmath.rect(self.Omega_mag, self.Omega_phase)

    def check_resonance(self, cavities: CavityPair) -> None:
        gap = cavities.omega_b + self.omega_Omega - cavities.omega_a
        if abs(gap) > RESONANCE_RTOL * cavities.omega_a:
            raise InvariantError("three-photon resonance", "DriveSpec.omega_Omega",
                                 f"omega_b + omega_Omega - omega_a = {gap:.6g} rad/s")


@dataclass(frozen=True)
class AtomSite:
    """One dopant: position, couplings (complex, rad/s) and detunings (rad/s)."""

    position: tuple[float, float, float]
    g_o: complex
    g_mu: complex
    Omega: complex
    delta_o: float
    delta_mu: float

    def __post_init__(self):
        for name in ("g_o", "g_mu", "Omega"):
            if not cmath.isfinite(getattr(self, name)):
                raise InvariantError("finite", f"AtomSite.{name}")
        for name in ("delta_o", "delta_mu"):
            v = getattr(self, name)
            if not math.isfinite(v) or v == 0.0:
                raise InvariantError("nonzero finite detuning", f"AtomSite.{name}", repr(v))

    @property
    def ratio_o(self) -> float:
        return abs(self.g_o / self.delta_o)

    @property
    def ratio_mu(self) -> float:
        return abs(self.g_mu / self.delta_mu)

    @property
    def ratio_drive(self) -> float:
        return abs(self.Omega) ** 2 / abs(self.delta_o * self.delta_mu)
