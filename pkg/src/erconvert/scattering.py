"""Two-port input-output solution for the coupled optical/microwave cavities.

Offsets ``omega`` are measured from (pull-compensated) cavity resonance. The
matrix is ordered [a_out, b_out] x [a_in, b_in]:

    D   = 4|S|^2 + (ka - 2iw)(kb - 2iw)
    M00 = (4|S|^2 - (ka + 2iw)(kb - 2iw)) / D      M01 = 4iS sqrt(ka kb) / D
    M10 = 4i conj(S) sqrt(ka kb) / D               M11 = (4|S|^2 - (ka - 2iw)(kb + 2iw)) / D
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NoHalfPoint
from .model import CavityPair

UNITARITY_TOL = 1e-10
BANDWIDTH_RTOL = 1e-9
_MAX_DOUBLINGS = 200


def _kappas(cavities: CavityPair) -> tuple[float, float]:
    ka, kb = cavities.kappa_a, cavities.kappa_b
    if not (ka > 0 and kb > 0):
        raise ValueError("cavity decay rates must be positive")
    return ka, kb


def _smatrix(S: complex, ka: float, kb: float, omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    s2 = 4.0 * abs(S) ** 2
    den = s2 + (ka - 2j * w) * (kb - 2j * w)
    # Re(den) can vanish but Im(den) = -2w(ka+kb) is then nonzero unless w = 0,
    # where den = 4|S|^2 + ka kb > 0
    assert np.all(den != 0), "scattering denominator vanished"
    root = math.sqrt(ka * kb)
    m = np.empty(w.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = (s2 - (ka + 2j * w) * (kb - 2j * w)) / den
    m[..., 0, 1] = 4j * S * root / den
    m[..., 1, 0] = 4j * np.conj(S) * root / den
    m[..., 1, 1] = (s2 - (ka - 2j * w) * (kb + 2j * w)) / den
    return m


def scattering_matrix(S: complex, cavities: CavityPair, omega: float) -> np.ndarray:
    ka, kb = _kappas(cavities)
    return _smatrix(complex(S), ka, kb, float(omega))


def efficiency(S: complex, cavities: CavityPair, omega) -> float | np.ndarray:
    """Number conversion efficiency |M01|^2; accepts scalar or array ``omega``."""
    ka, kb = _kappas(cavities)
    w = np.asarray(omega, dtype=float)
    den = 4.0 * abs(S) ** 2 + (ka - 2j * w) * (kb - 2j * w)
    # same expression as M01 in _smatrix, so spectra and point values agree bitwise
    eta = np.abs(4j * complex(S) * math.sqrt(ka * kb) / den) ** 2
    return float(eta) if eta.ndim == 0 else eta


def matched_coupling(cavities: CavityPair) -> float:
    """|S| giving impedance matching, 4|S|^2 = ka kb."""
    return 0.5 * math.sqrt(cavities.kappa_a * cavities.kappa_b)


def matched_half_width(kappa_a: float, kappa_b: float) -> float:
    """Positive root of 4w^4 + w^2 (ka-kb)^2 - ka^2 kb^2 = 0 (half of the matched FWHM)."""
    d2 = (kappa_a - kappa_b) ** 2
    p = kappa_a * kappa_b
    # w^2 = (sqrt(d2^2 + 16 p^2) - d2) / 8, rewritten to avoid cancellation
    w2 = 2.0 * p * p / (math.sqrt(d2 * d2 + 16.0 * p * p) + d2)
    return math.sqrt(w2)


def bandwidth_fwhm(S: complex, cavities: CavityPair, rtol: float = BANDWIDTH_RTOL) -> float:
    """Full width at half of the omega = 0 efficiency.

    Brackets outward from omega = 0 by doubling, then refines the root of
    eta(w) - eta(0)/2 to ``rtol``. eta is even in omega, so FWHM = 2 w_half.
    """
    ka, kb = _kappas(cavities)
    eta0 = efficiency(S, cavities, 0.0)
    if not eta0 > 0:
        raise NoHalfPoint("efficiency is zero at omega = 0; no half-maximum exists")
    half = 0.5 * eta0

    def f(w):
        return efficiency(S, cavities, w) - half

    lo = 0.0
    hi = 1e-3 * min(ka, kb, 2.0 * abs(S))
    for _ in range(_MAX_DOUBLINGS):
        if f(hi) < 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NoHalfPoint("efficiency never fell to half maximum inside the search window")
    w_half = brentq(f, lo, hi, xtol=1e-300, rtol=max(rtol * 1e-3, 4 * np.finfo(float).eps), maxiter=500)
    return 2.0 * w_half


@dataclass(frozen=True, eq=False)
class TransferSpectrum:
    omegas: np.ndarray
    Smat: np.ndarray  # (n, 2, 2)
    eta: np.ndarray
    unitarity_error: float

    @property
    def unitary(self) -> bool:
        return self.unitarity_error <= UNITARITY_TOL

    def write_csv(self, path_or_file) -> None:
        rows = [["omega_rad_s", "eta",
                 "re_aa", "im_aa", "re_ab", "im_ab", "re_ba", "im_ba", "re_bb", "im_bb"]]
        for w, e, m in zip(self.omegas, self.eta, self.Smat):
            row = [repr(float(w)), repr(float(e))]
            for z in (m[0, 0], m[0, 1], m[1, 0], m[1, 1]):
                row += [repr(float(z.real)), repr(float(z.imag))]
            rows.append(row)
        if hasattr(path_or_file, "write"):
            csv.writer(path_or_file, lineterminator="\n").writerows(rows)
        else:
            with open(path_or_file, "w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)


def unitarity_error(m: np.ndarray) -> np.ndarray:
    """max |M^dag M - I| per matrix."""
    prod = np.conj(np.swapaxes(m, -1, -2)) @ m
    return np.max(np.abs(prod - np.eye(2)), axis=(-2, -1))


def spectrum(S: complex, cavities: CavityPair, omegas) -> TransferSpectrum:
    ka, kb = _kappas(cavities)
    w = np.asarray(omegas, dtype=float).ravel()
    m = _smatrix(complex(S), ka, kb, w)
    eta = np.abs(m[:, 0, 1]) ** 2
    err = float(np.max(unitarity_error(m))) if len(w) else 0.0
    return TransferSpectrum(w, m, eta, err)
