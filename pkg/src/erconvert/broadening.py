"""Spectroscopic prefactor alpha from the two inhomogeneous lines.

alpha = sqrt(mu0 / (hbar^2 eps0)) * d31 * mu21 * rho * I_mu * I_o,  where each
I = integral_eps^inf D(delta)/delta d(delta) over a normalized Gaussian D.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import constants, integrate

from .errors import ConvergenceError
from .model import BroadeningSpec, Gaussian, MaterialSpec

RTOL = 1e-9
# Gaussian mass beyond mean + 10 sigma is ~7.6e-24
TAIL_SIGMAS = 10.0
_SUBDIVISIONS = 200


def material_prefactor(material: MaterialSpec) -> float:
    return math.sqrt(constants.mu_0 / (constants.hbar**2 * constants.epsilon_0)) * material.d31 * material.mu21 * material.rho


def _gauss_pdf(x, mean, sigma):
    return np.exp(-0.5 * ((x - mean) / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))


def inverse_moment(dist: Gaussian, eps: float | None = None, rtol: float = RTOL) -> tuple[float, float]:
    """Return (integral, error estimate) of D(delta)/delta from ``eps`` upward."""
    eps = dist.eps if eps is None else eps
    if dist.sigma == 0.0:
        # delta-function line
        return (1.0 / dist.mean if dist.mean > eps else 0.0), 0.0
    upper = dist.mean + TAIL_SIGMAS * dist.sigma
    if eps >= upper:
        return 0.0, 0.0
    if eps <= 0.0:
        raise ValueError("lower cutoff must be positive")
    # both tails beyond 10 sigma are dropped, so narrow lines are not lost in a wide interval
    lower = max(eps, dist.mean - TAIL_SIGMAS * dist.sigma)
    marks = dist.mean + dist.sigma * np.array([-3.0, -1.0, 0.0, 1.0, 3.0])
    points = [float(x) for x in marks if lower < x < upper] or None
    value, err, info = integrate.quad(
        lambda d: _gauss_pdf(d, dist.mean, dist.sigma) / d,
        lower, upper, points=points, epsabs=0.0, epsrel=rtol, limit=_SUBDIVISIONS, full_output=True,
    )[:3]
    if err > rtol * abs(value) and err > 1e-300:
        raise ConvergenceError(f"inverse-detuning integral missed rtol={rtol} after {info['last']} subintervals",
                               err / abs(value) if value else err)
    return value, err


def mean_inverse_detuning(dist: Gaussian, eps: float | None = None, rtol: float = RTOL) -> float:
    return inverse_moment(dist, eps, rtol)[0]


@dataclass(frozen=True)
class AlphaResult:
    alpha: float  # s
    I_mu: float  # s/rad
    I_o: float
    err_mu: float
    err_o: float
    prefactor: float

    @property
    def relative_error(self) -> float:
        return self.err_mu / self.I_mu + self.err_o / self.I_o

    def to_dict(self) -> dict:
        d = asdict(self)
        d["relative_error"] = self.relative_error
        return d


def alpha(material: MaterialSpec, broadening: BroadeningSpec, rtol: float = RTOL) -> AlphaResult:
    I_mu, e_mu = inverse_moment(broadening.microwave, rtol=rtol)
    I_o, e_o = inverse_moment(broadening.optical, rtol=rtol)
    pre = material_prefactor(material)
    return AlphaResult(pre * I_mu * I_o, I_mu, I_o, e_mu, e_o, pre)
