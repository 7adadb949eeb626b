"""Impedance-matching ratio R = Omega * alpha * F * sqrt(Q_a Q_b) and what depends on it."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import RangeError
from .model import CavityPair

DEFAULT_BETA = 0.1
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class DesignPoint:
    Omega: float
    alpha: float
    F: float
    Q_a: float
    Q_b: float
    R: float

    def to_dict(self) -> dict:
        return asdict(self)

    def coupling(self, cavities: CavityPair) -> float:
        """|S| implied by R for the given cavities (R = 2|S|/sqrt(ka kb))."""
        return 0.5 * self.R * math.sqrt(cavities.kappa_a * cavities.kappa_b)


def impedance_ratio(Omega: float, alpha: float, F: float, Q_a: float, Q_b: float) -> DesignPoint:
    for name, v in (("Omega", Omega), ("alpha", alpha), ("F", F), ("Q_a", Q_a), ("Q_b", Q_b)):
        if not (math.isfinite(v) and v >= 0):
            raise RangeError(f"{name} must be nonnegative and finite, got {v!r}")
    return DesignPoint(Omega, alpha, F, Q_a, Q_b, Omega * alpha * F * math.sqrt(Q_a * Q_b))


@dataclass(frozen=True)
class MatchingFactors:
    microwave: float  # sqrt(N g_mu^2 / (kappa_b delta_mu))
    optical: float  # sqrt(N g_o^2 / (kappa_a delta_o))
    drive: float  # 2 Omega / sqrt(delta_mu delta_o)

    @property
    def product(self) -> float:
        return self.microwave * self.optical * self.drive


def matching_factors(N: float, g_mu: float, g_o: float, Omega: float, delta_mu: float, delta_o: float,
                     cavities: CavityPair) -> MatchingFactors:
    """Three-factor form of the matching condition for a uniform ensemble."""
    g_mu, g_o, Omega = abs(g_mu), abs(g_o), abs(Omega)
    d_mu, d_o = abs(delta_mu), abs(delta_o)
    return MatchingFactors(
        math.sqrt(N * g_mu**2 / (cavities.kappa_b * d_mu)),
        math.sqrt(N * g_o**2 / (cavities.kappa_a * d_o)),
        2.0 * Omega / math.sqrt(d_mu * d_o),
    )


def matching_condition(cavities: CavityPair, *, S: complex | None = None, atoms=None) -> float:
    """Left-hand side of the matching condition; 1 means impedance matched.

    With ``S`` this is 2|S|/sqrt(ka kb). With a uniform ensemble ``atoms``
    (every atom sharing the same couplings and detunings) it is the product
    of the microwave, optical and drive factors.
    """
    if (S is None) == (atoms is None):
        raise TypeError("pass exactly one of S or atoms")
    if S is not None:
        return 2.0 * abs(S) / math.sqrt(cavities.kappa_a * cavities.kappa_b)
    from .adiabatic import as_ensemble

    ens = as_ensemble(atoms)
    if len(ens) == 0:
        return 0.0
    cols = (ens.g_mu, ens.g_o, ens.Omega, ens.delta_mu, ens.delta_o)
    if any(np.any(c != c[0]) for c in cols):
        raise ValueError("three-factor matching condition needs a uniform ensemble; pass S instead")
    return matching_factors(len(ens), ens.g_mu[0], ens.g_o[0], ens.Omega[0],
                            ens.delta_mu[0], ens.delta_o[0], cavities).product


@dataclass(frozen=True)
class CooperativityBounds:
    C_mu: float
    C_o: float
    factors: MatchingFactors
    # upper bounds on the first two factors when delta >= gamma, and 1 on the drive factor
    bound_mu: float
    bound_o: float
    bound_drive: float = 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["factors"]["product"] = self.factors.product
        return d


def cooperativity_bounds(N: float, g_mu: float, g_o: float, Omega: float, delta_mu: float, delta_o: float,
                         sigma_mu: float, sigma_o: float, cavities: CavityPair,
                         linewidth: str = "fwhm") -> CooperativityBounds:
    """Cooperativities C = N g^2 / (kappa gamma) with gamma the inhomogeneous linewidth.

    ``linewidth`` selects gamma = FWHM (2 sqrt(2 ln 2) sigma) or gamma = sigma.
    """
    if linewidth == "fwhm":
        gam_mu, gam_o = FWHM_PER_SIGMA * sigma_mu, FWHM_PER_SIGMA * sigma_o
    elif linewidth == "sigma":
        gam_mu, gam_o = sigma_mu, sigma_o
    else:
        raise ValueError(f"unknown linewidth convention {linewidth!r}")
    C_mu = N * abs(g_mu) ** 2 / (cavities.kappa_b * gam_mu)
    C_o = N * abs(g_o) ** 2 / (cavities.kappa_a * gam_o)
    f = matching_factors(N, g_mu, g_o, Omega, delta_mu, delta_o, cavities)
    return CooperativityBounds(C_mu, C_o, f, math.sqrt(C_mu), math.sqrt(C_o))


@dataclass(frozen=True, eq=False)
class Sweep:
    F: np.ndarray  # (nF,)
    QQ: np.ndarray  # (nQ,)
    R: np.ndarray  # (nF, nQ)
    Omega: float
    alpha: float

    def points(self):
        for i, f in enumerate(self.F):
            for j, q in enumerate(self.QQ):
                yield float(f), float(q), float(self.R[i, j])

    def write_csv(self, path_or_file) -> None:
        """One row per grid cell, F as the outer loop."""
        rows = [["F", "QaQb_product", "R"]]
        rows += [[repr(f), repr(q), repr(r)] for f, q, r in self.points()]
        if hasattr(path_or_file, "write"):
            csv.writer(path_or_file, lineterminator="\n").writerows(rows)
        else:
            with open(path_or_file, "w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)

    def contour(self, level: float = 1.0) -> list[tuple[float, float]]:
        """Trace R = level across the grid.

        log R is affine in (log F, log QQ), so interpolating in log space
        between the two grid cells that bracket the level is exact up to
        rounding. Returns (F, QQ) pairs, one per QQ column crossing.
        """
        out = []
        target = math.log(level)
        logF = np.log(self.F)
        with np.errstate(divide="ignore"):
            logR = np.log(self.R)
        for j, q in enumerate(self.QQ):
            col = logR[:, j]
            for i in range(len(col) - 1):
                lo, hi = col[i], col[i + 1]
                if np.isfinite(lo) and np.isfinite(hi) and (lo - target) * (hi - target) <= 0 and hi != lo:
                    t = (target - lo) / (hi - lo)
                    out.append((float(math.exp(logF[i] + t * (logF[i + 1] - logF[i]))), float(q)))
                    break
        return out

    def to_dict(self, anchor: DesignPoint | None = None) -> dict:
        d = {
            "Omega": self.Omega,
            "alpha": self.alpha,
            "F": self.F.tolist(),
            "QaQb_product": self.QQ.tolist(),
            "R": self.R.tolist(),
            "contour_R1": [list(p) for p in self.contour(1.0)],
        }
        if anchor is not None:
            d["anchor"] = anchor.to_dict()
        return d


def _log_axis(lo: float, hi: float, n: int) -> np.ndarray:
    if lo == hi:
        return np.full(n, float(lo))
    # geomspace can wobble by an ulp on very narrow spans
    return np.maximum.accumulate(np.geomspace(lo, hi, n))


def sweep_R(F_range: tuple[float, float], QQ_range: tuple[float, float], Omega: float, alpha: float,
            n_F: int = 100, n_QQ: int = 100) -> Sweep:
    """R over a log-spaced (F, Q_a Q_b) grid."""
    for name, (lo, hi) in (("F", F_range), ("QaQb", QQ_range)):
        if not (lo > 0 and hi > 0 and math.isfinite(lo) and math.isfinite(hi)):
            raise RangeError(f"{name} range must be positive and finite, got {(lo, hi)}")
        if hi < lo:
            raise RangeError(f"{name} range is reversed: {(lo, hi)}")
    if n_F < 1 or n_QQ < 1:
        raise RangeError("grid sizes must be >= 1")
    if not (Omega >= 0 and alpha >= 0):
        raise RangeError("Omega and alpha must be nonnegative")
    F = _log_axis(*F_range, n_F)
    QQ = _log_axis(*QQ_range, n_QQ)
    R = Omega * alpha * F[:, None] * np.sqrt(QQ)[None, :]
    return Sweep(F, QQ, R, Omega, alpha)


@dataclass(frozen=True)
class DriveOptimum:
    Omega: float
    R: float
    feasible: bool
    Omega_limit: float  # sqrt(beta * mean_mu * mean_o)
    target_R: float

    def to_dict(self) -> dict:
        return asdict(self)


def optimize_drive(alpha: float, F: float, Q_a: float, Q_b: float, mean_mu: float, mean_o: float,
                   target_R: float = 1.0, beta: float = DEFAULT_BETA) -> DriveOptimum:
    """Drive strength reaching ``target_R`` subject to Omega^2 <= beta * mean_mu * mean_o.

    If the target needs more drive than the adiabatic margin allows, the
    boundary value is returned with the R it achieves and ``feasible=False``.
    """
    limit = math.sqrt(beta * abs(mean_mu * mean_o))
    gain = alpha * F * math.sqrt(Q_a * Q_b)  # R per unit Omega
    if gain > 0:
        omega_star = target_R / gain
        if omega_star <= limit:
            return DriveOptimum(omega_star, omega_star * gain, True, limit, target_R)
    return DriveOptimum(limit, limit * gain, False, limit, target_R)


@dataclass(frozen=True)
class ResolvedDesign:
    """Design point for a config plus where alpha and F came from."""

    point: DesignPoint
    alpha_source: str  # "computed" or "quoted"
    F_source: str
    alpha_computed: float
    F_computed: float


def design_from_config(cfg, Omega: float | None = None) -> ResolvedDesign:
    """alpha and F from the model, replaced by the config's quoted values when present."""
    from .broadening import alpha as compute_alpha
    from .geometry import filling_factor

    a_calc = compute_alpha(cfg.material, cfg.broadening).alpha
    F_calc = filling_factor(cfg.geometry_spec())
    a = cfg.alpha_override if cfg.alpha_override is not None else a_calc
    F = cfg.F_override if cfg.F_override is not None else F_calc
    Om = cfg.drive.Omega_mag if Omega is None else Omega
    point = impedance_ratio(Om, a, F, cfg.cavities.Q_a, cfg.cavities.Q_b)
    return ResolvedDesign(
        point,
        "quoted" if cfg.alpha_override is not None else "computed",
        "quoted" if cfg.F_override is not None else "computed",
        a_calc, F_calc,
    )
