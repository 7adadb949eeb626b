"""Brute-force check of the effective model in the single-excitation sector.

Basis order: [a photon, b photon, atom k in |2> (k = 0..N-1), atom k in |3>].
Matrix elements follow the full Hamiltonian term by term:

    <2_k|H|b> = g_mu_k,   <3_k|H|a> = g_o_k,   <3_k|H|2_k> = Omega_k,
    diagonal: cavity detunings, delta_mu_k, delta_o_k.

Every term moves one excitation between a photon and an atom (or between
atomic levels), so this block is closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adiabatic import Ensemble, adiabaticity_report, as_ensemble, effective_coupling
from .errors import IdentificationError, SingularBlock, SizeError

MAX_ATOMS = 2000
HERMITIAN_TOL = 1e-14
PHOTON_WEIGHT_MIN = 0.9


@dataclass(frozen=True, eq=False)
class SingleExcitationModel:
    H: np.ndarray
    n_atoms: int
    delta_a: float
    delta_b: float

    @property
    def dim(self) -> int:
        return self.H.shape[0]


def coupling_mask(n: int) -> np.ndarray:
    """Positions the Hamiltonian may populate; everything else must stay zero."""
    m = np.eye(2 + 2 * n, dtype=bool)
    k = np.arange(n)
    two, three = 2 + k, 2 + n + k
    m[two, 1] = m[1, two] = True
    m[three, 0] = m[0, three] = True
    m[three, two] = m[two, three] = True
    return m


def build_single_excitation(atoms, delta_a: float = 0.0, delta_b: float = 0.0) -> SingleExcitationModel:
    ens = as_ensemble(atoms)
    n = len(ens)
    if n > MAX_ATOMS:
        raise SizeError(f"{n} atoms exceeds the dense-diagonalization budget of {MAX_ATOMS}")
    dim = 2 + 2 * n
    H = np.zeros((dim, dim), dtype=complex)
    H[0, 0] = delta_a
    H[1, 1] = delta_b
    k = np.arange(n)
    two, three = 2 + k, 2 + n + k
    H[two, two] = ens.delta_mu
    H[three, three] = ens.delta_o
    H[two, 1] = ens.g_mu
    H[1, two] = np.conj(ens.g_mu)
    H[three, 0] = ens.g_o
    H[0, three] = np.conj(ens.g_o)
    H[three, two] = ens.Omega
    H[two, three] = np.conj(ens.Omega)

    assert not np.any(H[~coupling_mask(n)]), "element outside the single-excitation couplings"
    scale = max(float(np.max(np.abs(H))), 1e-300)
    assert np.max(np.abs(H - H.conj().T)) <= HERMITIAN_TOL * scale
    return SingleExcitationModel(H, n, float(delta_a), float(delta_b))


def effective_photon_block(model: SingleExcitationModel, energy: float = 0.0) -> np.ndarray:
    """Schur complement H_pp - H_pa (H_aa - E)^-1 H_ap on the two photon states."""
    H = model.H
    Hpp = H[:2, :2]
    if model.n_atoms == 0:
        return Hpp.copy()
    Haa = H[2:, 2:] - energy * np.eye(model.dim - 2)
    Hap = H[2:, :2]
    lam, V = np.linalg.eigh(Haa)
    amax = float(np.max(np.abs(lam)))
    if float(np.min(np.abs(lam))) <= 1e-13 * amax:
        raise SingularBlock(f"atomic block is singular at E={energy}: an atom is resonant")
    X = V.conj().T @ Hap
    return Hpp - X.conj().T @ (X / lam[:, None])


def oracle_effective_coupling(model: SingleExcitationModel) -> complex:
    """Coefficient of a^dag b after exact elimination of the atoms at E = 0."""
    return complex(effective_photon_block(model)[0, 1])


def oracle_pulls(model: SingleExcitationModel) -> tuple[float, float]:
    """(pull_a, pull_b): how far the E = 0 elimination lowers each cavity frequency."""
    blk = effective_photon_block(model)
    return float(model.delta_a - blk[0, 0].real), float(model.delta_b - blk[1, 1].real)


def compensated_model(atoms) -> SingleExcitationModel:
    """Single-excitation model with both cavities retuned onto their pulled resonances."""
    ens = as_ensemble(atoms)
    pa, pb = oracle_pulls(build_single_excitation(ens))
    return build_single_excitation(ens, pa, pb)


@dataclass(frozen=True)
class Splitting:
    splitting: float
    energies: tuple[float, float]
    photon_weights: tuple[float, float]


def photon_doublet(model: SingleExcitationModel) -> Splitting:
    evals, evecs = np.linalg.eigh(model.H)
    weight = np.abs(evecs[0, :]) ** 2 + np.abs(evecs[1, :]) ** 2
    idx = np.argsort(weight)[-2:]
    w = weight[idx]
    if np.any(w < PHOTON_WEIGHT_MIN):
        raise IdentificationError(f"photon-dominated states not identifiable (photon weights {w.tolist()})")
    e = np.sort(evals[idx])
    return Splitting(float(e[1] - e[0]), (float(e[0]), float(e[1])), (float(w[0]), float(w[1])))


def avoided_crossing_splitting(model: SingleExcitationModel) -> float:
    """Gap between the two photon-dominated eigenvalues (about 2|S| when compensated)."""
    return photon_doublet(model).splitting


def random_adiabatic_ensemble(n: int, rng: np.random.Generator, max_ratio: float = 0.05,
                              delta_scale: tuple[float, float] = (100.0, 50.0)) -> Ensemble:
    """Random complex ensemble deep in the adiabatic regime.

    Per-atom |g/delta| is drawn below max_ratio/sqrt(n), which keeps the
    collective ratio sqrt(sum |g/delta|^2) below max_ratio; the drive ratio
    |Omega|/sqrt(|d_o d_mu|) is drawn below max_ratio.
    """
    d_o = delta_scale[0] * rng.uniform(0.5, 1.5, n)
    d_mu = delta_scale[1] * rng.uniform(0.5, 1.5, n)
    per_atom = max_ratio / math.sqrt(max(n, 1))

    def phase(spread):
        return np.exp(1j * rng.uniform(-spread, spread, n))

    g_o = per_atom * rng.uniform(0.2, 1.0, n) * d_o * phase(0.5)
    g_mu = per_atom * rng.uniform(0.2, 1.0, n) * d_mu * phase(0.5)
    Omega = max_ratio * rng.uniform(0.2, 1.0, n) * np.sqrt(d_o * d_mu) * phase(0.5)
    pos = np.zeros((n, 3))
    return Ensemble(pos, g_o, g_mu, Omega, d_o, d_mu)


@dataclass(frozen=True)
class OracleComparison:
    n_atoms: int
    S_full: complex
    S_oracle: complex
    rel_error_S: float
    max_ratio: float
    bound_S: float
    splitting: float
    rel_error_splitting: float

    @property
    def passed(self) -> bool:
        return self.rel_error_S <= self.bound_S and self.rel_error_splitting <= 0.01

    def to_dict(self) -> dict:
        return {
            "n_atoms": self.n_atoms,
            "S_full": [self.S_full.real, self.S_full.imag],
            "S_oracle": [self.S_oracle.real, self.S_oracle.imag],
            "rel_error_S": self.rel_error_S,
            "max_ratio": self.max_ratio,
            "bound_S": self.bound_S,
            "splitting": self.splitting,
            "rel_error_splitting": self.rel_error_splitting,
            "passed": self.passed,
        }


def compare(atoms, C: float = 10.0) -> OracleComparison:
    """Run both oracle comparators against the analytic effective model."""
    ens = as_ensemble(atoms)
    eff = effective_coupling(ens)
    model = build_single_excitation(ens)
    s_or = oracle_effective_coupling(model)
    rep = adiabaticity_report(ens)
    ratio = rep.max_ratio
    rel = abs(s_or - eff.S_full) / abs(eff.S_full)
    split = avoided_crossing_splitting(compensated_model(ens))
    rel_split = abs(split - 2 * abs(eff.S_full)) / (2 * abs(eff.S_full))
    return OracleComparison(len(ens), eff.S_full, s_or, rel, ratio, C * ratio**2, split, rel_split)
