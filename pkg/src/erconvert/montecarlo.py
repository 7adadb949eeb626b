"""Plain Monte-Carlo estimators used as independent checks of the quadratures.

Each returns (estimate, standard error). Sampling is chunked so 1e7 draws
stay within modest memory; results are deterministic for a given seed.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import Cylinder, GeometrySpec
from .model import Gaussian

CHUNK = 1_000_000


def _chunks(n: int):
    while n > 0:
        k = min(n, CHUNK)
        yield k
        n -= k


def inverse_detuning_mc(dist: Gaussian, n: int, seed: int = 0, eps: float | None = None) -> tuple[float, float]:
    """Estimate E[1{delta > eps} / delta] for delta ~ N(mean, sigma)."""
    eps = dist.eps if eps is None else eps
    rng = np.random.default_rng(seed)
    s = s2 = 0.0
    for k in _chunks(n):
        d = rng.normal(dist.mean, dist.sigma, k)
        v = np.where(d > eps, 1.0 / np.where(d > eps, d, 1.0), 0.0)
        s += float(v.sum())
        s2 += float((v * v).sum())
    mean = s / n
    var = max(s2 / n - mean * mean, 0.0)
    return mean, math.sqrt(var / (n - 1))


def uniform_in_cylinder(region: Cylinder, rng: np.random.Generator, n: int) -> np.ndarray:
    r = region.radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    z = region.length * (rng.random(n) - 0.5)
    return region.from_local(r, theta, z)


def integral_mc(integrand, region: Cylinder, n: int, seed: int = 0) -> tuple[complex, float]:
    """Volume integral of a complex integrand; the error is the modulus standard error."""
    rng = np.random.default_rng(seed)
    s = 0j
    s2 = 0.0
    for k in _chunks(n):
        v = np.asarray(integrand(uniform_in_cylinder(region, rng, k)), dtype=complex)
        s += complex(v.sum())
        s2 += float((np.abs(v) ** 2).sum())
    mean = s / n
    var = max(s2 / n - abs(mean) ** 2, 0.0)
    V = region.volume
    return V * mean, V * math.sqrt(var / (n - 1))


def filling_factor_mc(geom: GeometrySpec, n: int, seed: int = 0) -> tuple[float, float]:
    val, err = integral_mc(
        lambda p: geom.chi.evaluate(p) * geom.psi.evaluate(p) * geom.phi.evaluate(p),
        geom.crystal, n, seed,
    )
    norm = math.sqrt(geom.V_mu * geom.V_o)
    return abs(val) / norm, err / norm
