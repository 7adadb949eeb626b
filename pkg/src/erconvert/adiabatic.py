"""Effective photon-photon coupling after eliminating the atomic excited states.

Per atom k the eliminated Hamiltonian contributes (den_k = d_o d_mu - |Omega|^2)

    -d_mu |g_o|^2 / den_k  a^dag a  -  d_o |g_mu|^2 / den_k  b^dag b
    + Omega g_mu conj(g_o) / den_k  a^dag b  + h.c.

``pull_a``/``pull_b`` are the sums multiplying -a^dag a and -b^dag b, i.e. the
cavity frequency shifts are -pull_a and -pull_b.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import constants
from scipy.stats import norm

from .errors import InvariantError, SingularAtom
from .model import AtomSite

if TYPE_CHECKING:
    from .config import DeviceConfig

DEFAULT_THRESHOLD = 0.1


@dataclass(frozen=True, eq=False)
class Ensemble(Sequence):
    """Column storage for many atoms; indexes and iterates as AtomSite."""

    positions: np.ndarray
    g_o: np.ndarray
    g_mu: np.ndarray
    Omega: np.ndarray
    delta_o: np.ndarray
    delta_mu: np.ndarray

    def __post_init__(self):
        n = len(self.delta_o)
        for name in ("g_o", "g_mu", "Omega"):
            arr = np.asarray(getattr(self, name), dtype=complex).reshape(n)
            object.__setattr__(self, name, arr)
        for name in ("delta_o", "delta_mu"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(n)
            if np.any(arr == 0.0) or not np.all(np.isfinite(arr)):
                raise InvariantError("nonzero finite detuning", f"AtomSite.{name}",
                                     f"atom {int(np.flatnonzero((arr == 0) | ~np.isfinite(arr))[0])}")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float).reshape(n, 3))

    def __len__(self) -> int:
        return len(self.delta_o)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Ensemble(self.positions[i], self.g_o[i], self.g_mu[i], self.Omega[i],
                            self.delta_o[i], self.delta_mu[i])
        return AtomSite(tuple(float(x) for x in self.positions[i]), complex(self.g_o[i]),
                        complex(self.g_mu[i]), complex(self.Omega[i]),
                        float(self.delta_o[i]), float(self.delta_mu[i]))

    @classmethod
    def from_sites(cls, atoms) -> "Ensemble":
        atoms = list(atoms)
        if not atoms:
            return cls(np.zeros((0, 3)), [], [], [], [], [])
        return cls(
            np.array([a.position for a in atoms], dtype=float),
            [a.g_o for a in atoms], [a.g_mu for a in atoms], [a.Omega for a in atoms],
            [a.delta_o for a in atoms], [a.delta_mu for a in atoms],
        )

    def concat(self, other: "Ensemble") -> "Ensemble":
        return Ensemble(*(np.concatenate([getattr(self, f), getattr(other, f)])
                          for f in ("positions", "g_o", "g_mu", "Omega", "delta_o", "delta_mu")))


def as_ensemble(atoms) -> Ensemble:
    return atoms if isinstance(atoms, Ensemble) else Ensemble.from_sites(atoms)


def _csum(values: np.ndarray) -> complex:
    # math.fsum is exactly rounded, hence independent of summation order
    return complex(math.fsum(values.real), math.fsum(values.imag))


@dataclass(frozen=True)
class EffectiveCoupling:
    S_full: complex
    S_approx: complex
    pull_a: float
    pull_b: float

    def to_dict(self) -> dict:
        return {
            "S_full": [self.S_full.real, self.S_full.imag],
            "S_approx": [self.S_approx.real, self.S_approx.imag],
            "abs_S_full": abs(self.S_full),
            "abs_S_approx": abs(self.S_approx),
            "pull_a": self.pull_a,
            "pull_b": self.pull_b,
        }


def effective_coupling(atoms) -> EffectiveCoupling:
    """Collective coupling S (full and large-detuning forms) and both cavity pulls."""
    ens = as_ensemble(atoms)
    if len(ens) == 0:
        return EffectiveCoupling(0j, 0j, 0.0, 0.0)
    dd = ens.delta_o * ens.delta_mu
    om2 = np.abs(ens.Omega) ** 2
    den = dd - om2
    singular = np.abs(den) <= 4.0 * np.finfo(float).eps * np.maximum(np.abs(dd), om2)
    if np.any(singular):
        raise SingularAtom(int(np.flatnonzero(singular)[0]))
    numer = ens.Omega * ens.g_mu * np.conj(ens.g_o)
    return EffectiveCoupling(
        S_full=_csum(numer / den),
        S_approx=_csum(numer / dd),
        pull_a=math.fsum(ens.delta_mu * np.abs(ens.g_o) ** 2 / den),
        pull_b=math.fsum(ens.delta_o * np.abs(ens.g_mu) ** 2 / den),
    )


@dataclass(frozen=True)
class AdiabaticityReport:
    max_ratio_o: float
    max_ratio_mu: float
    max_ratio_drive: float
    # ratio name -> (atom index, value) of the worst atom
    worst: dict = field(default_factory=dict)
    flagged: tuple = ()
    threshold: float = DEFAULT_THRESHOLD
    # sqrt(sum_k |g/delta|^2): photon admixture of the dressed cavity modes
    collective_o: float = 0.0
    collective_mu: float = 0.0

    @property
    def max_ratio(self) -> float:
        return max(self.max_ratio_o, self.max_ratio_mu, math.sqrt(self.max_ratio_drive))

    @property
    def ok(self) -> bool:
        return not self.flagged

    def to_dict(self) -> dict:
        return {
            "max_ratio_o": self.max_ratio_o,
            "max_ratio_mu": self.max_ratio_mu,
            "max_ratio_drive": self.max_ratio_drive,
            "worst": {k: {"index": i, "value": v} for k, (i, v) in self.worst.items()},
            "flagged": list(self.flagged),
            "threshold": self.threshold,
            "collective_o": self.collective_o,
            "collective_mu": self.collective_mu,
        }


def adiabaticity_report(atoms, threshold: float = DEFAULT_THRESHOLD) -> AdiabaticityReport:
    """Per-atom ratios |g_o/d_o|, |g_mu/d_mu|, |Omega|^2/|d_o d_mu| against ``threshold``."""
    ens = as_ensemble(atoms)
    if len(ens) == 0:
        return AdiabaticityReport(0.0, 0.0, 0.0, {}, (), threshold)
    ratios = {
        "o": np.abs(ens.g_o / ens.delta_o),
        "mu": np.abs(ens.g_mu / ens.delta_mu),
        "drive": np.abs(ens.Omega) ** 2 / np.abs(ens.delta_o * ens.delta_mu),
    }
    worst = {k: (int(np.argmax(v)), float(np.max(v))) for k, v in ratios.items()}
    bad = (ratios["o"] > threshold) | (ratios["mu"] > threshold) | (ratios["drive"] > threshold)
    return AdiabaticityReport(
        worst["o"][1], worst["mu"][1], worst["drive"][1], worst,
        tuple(int(i) for i in np.flatnonzero(bad)), threshold,
        float(np.sqrt(np.sum(ratios["o"] ** 2))), float(np.sqrt(np.sum(ratios["mu"] ** 2))),
    )


def vacuum_couplings(config: "DeviceConfig") -> tuple[float, float]:
    """Single-atom peak couplings (g_o, g_mu) in rad/s for the configured mode volumes."""
    geom = config.geometry_spec()
    hbar = constants.hbar
    g_o = config.material.d31 * math.sqrt(config.cavities.omega_a / (2 * hbar * constants.epsilon_0 * geom.V_o))
    g_mu = config.material.mu21 * math.sqrt(constants.mu_0 * config.cavities.omega_b / (2 * hbar * geom.V_mu))
    return g_o, g_mu


def _truncated_normal(rng: np.random.Generator, n: int, mean: float, sigma: float, eps: float) -> np.ndarray:
    """Gaussian draws redrawn until every value lies above ``eps``."""
    out = rng.normal(mean, sigma, n)
    bad = out < eps
    while np.any(bad):
        out[bad] = rng.normal(mean, sigma, int(bad.sum()))
        bad = out < eps
    return out


def sample_ensemble(config: "DeviceConfig", n: int | None = None, seed: int | None = None,
                    fix_detunings: bool = False) -> Ensemble:
    """Draw ``n`` atoms uniformly over the crystal with independent Gaussian detunings.

    Each drawn atom stands for rho*V_c*P_mu*P_o/n physical ions (P = fraction
    of a line above its cutoff); both couplings carry the square root of that
    weight so S and the pulls have the physical magnitude. g_o uses the
    conjugate optical mode function, making S proportional to the overlap
    integral of chi*psi*phi.
    """
    n = config.n_atoms if n is None else n
    seed = config.seed if seed is None else seed
    if n < 1:
        raise ValueError("need at least one atom")
    geom = config.geometry_spec()
    crystal = geom.crystal
    rng = np.random.Generator(np.random.Philox(seed))

    r = crystal.radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    z = crystal.length * (rng.random(n) - 0.5)
    pos = crystal.from_local(r, theta, z)

    br = config.broadening
    if fix_detunings:
        d_mu = np.full(n, br.mean_mu)
        d_o = np.full(n, br.mean_o)
        frac = 1.0
    else:
        d_mu = _truncated_normal(rng, n, br.mean_mu, br.sigma_mu, br.eps_mu)
        d_o = _truncated_normal(rng, n, br.mean_o, br.sigma_o, br.eps_o)
        frac = norm.sf(br.eps_mu, br.mean_mu, br.sigma_mu) * norm.sf(br.eps_o, br.mean_o, br.sigma_o)

    weight = config.material.rho * crystal.volume * frac / n
    g_o0, g_mu0 = vacuum_couplings(config)
    scale = math.sqrt(weight)
    return Ensemble(
        positions=pos,
        g_o=scale * g_o0 * np.conj(geom.psi.evaluate(pos)),
        g_mu=scale * g_mu0 * geom.chi.evaluate(pos),
        Omega=config.drive.Omega_peak * geom.phi.evaluate(pos),
        delta_o=d_o,
        delta_mu=d_mu,
    )
