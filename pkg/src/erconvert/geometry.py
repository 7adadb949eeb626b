"""Mode functions, mode volumes and the three-mode filling factor.

Modes are anything with ``evaluate(points) -> complex array`` (points shaped
``(..., 3)``) and a ``peak`` attribute giving max |u| over the mode's domain.
Analytic modes are peak-normalized to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import RegularGridInterpolator

from .errors import ConvergenceError, CoverageError, GeometryError, InvariantError

DEFAULT_ORDERS = (8, 16, 32, 64, 128, 256)
# points evaluated per batch in the tensor-product rule
_BATCH = 1 << 20


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not n > 0:
        raise GeometryError("axis vector must be nonzero")
    return v / n


def _frame(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors completing ``axis`` to a right-handed orthonormal frame."""
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(axis, e1)


@dataclass(frozen=True)
class Cylinder:
    radius: float
    length: float
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not (self.radius > 0 and self.length > 0):
            raise GeometryError(f"empty cylinder (radius={self.radius}, length={self.length})")
        object.__setattr__(self, "axis", tuple(_unit(self.axis)))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def volume(self) -> float:
        return math.pi * self.radius**2 * self.length

    def to_local(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Return (rho, z) of ``points`` relative to the axis through the center."""
        d = np.asarray(points, dtype=float) - np.asarray(self.center)
        z = d @ np.asarray(self.axis)
        perp = d - z[..., None] * np.asarray(self.axis)
        return np.linalg.norm(perp, axis=-1), z

    def contains(self, points) -> np.ndarray:
        rho, z = self.to_local(points)
        return (rho <= self.radius) & (np.abs(z) <= 0.5 * self.length)

    def from_local(self, r, theta, z) -> np.ndarray:
        a = np.asarray(self.axis)
        e1, e2 = _frame(a)
        r, theta, z = np.broadcast_arrays(r, theta, z)
        pts = (np.asarray(self.center)
               + (r * np.cos(theta))[..., None] * e1
               + (r * np.sin(theta))[..., None] * e2
               + z[..., None] * a)
        return pts

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.asarray(self.axis)
        c = np.asarray(self.center)
        half = 0.5 * self.length * np.abs(a) + self.radius * np.sqrt(np.clip(1.0 - a**2, 0.0, None))
        return c - half, c + half

    def translated(self, shift) -> "Cylinder":
        return Cylinder(self.radius, self.length, tuple(np.asarray(self.center) + shift), self.axis)


@dataclass(frozen=True)
class UniformCylinder:
    """Constant amplitude inside a cylinder, zero outside (loop-gap bore model)."""

    region: Cylinder
    amplitude: complex = 1.0

    @property
    def peak(self) -> float:
        return abs(self.amplitude)

    def evaluate(self, points) -> np.ndarray:
        inside = self.region.contains(points)
        return np.where(inside, complex(self.amplitude), 0.0 + 0.0j)

    def translated(self, shift) -> "UniformCylinder":
        return UniformCylinder(self.region.translated(shift), self.amplitude)


@dataclass(frozen=True)
class GaussianBeam:
    """TEM00 amplitude profile, peak 1 at the waist center.

    ``axial_wavenumber`` multiplies the envelope by exp(i k z) (or cos(k z)
    with ``standing_wave``); it carries the relative axial phase between two
    cavity modes without resolving the optical carrier. ``paraxial_phase``
    adds the wavefront-curvature and Gouy phases.
    """

    waist_diameter: float
    wavelength: float
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    refractive_index: float = 1.0
    axial_wavenumber: float = 0.0
    paraxial_phase: bool = False
    standing_wave: bool = False

    def __post_init__(self):
        if not self.waist_diameter > 0:
            raise InvariantError("waist > 0", "GaussianBeam.waist_diameter")
        if not (self.wavelength > 0 and self.refractive_index > 0):
            raise InvariantError("strictly positive", "GaussianBeam.wavelength")
        object.__setattr__(self, "axis", tuple(_unit(self.axis)))
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))

    peak = 1.0

    @property
    def waist(self) -> float:
        return 0.5 * self.waist_diameter

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist**2 * self.refractive_index / self.wavelength

    def evaluate(self, points) -> np.ndarray:
        d = np.asarray(points, dtype=float) - np.asarray(self.origin)
        a = np.asarray(self.axis)
        z = d @ a
        rho2 = np.sum(d * d, axis=-1) - z * z
        zr = self.rayleigh_range
        w = self.waist * np.sqrt(1.0 + (z / zr) ** 2)
        u = (self.waist / w) * np.exp(-rho2 / w**2) + 0j
        if self.paraxial_phase:
            k = 2.0 * math.pi * self.refractive_index / self.wavelength
            inv_curv = z / (z**2 + zr**2)
            u = u * np.exp(-1j * (0.5 * k * rho2 * inv_curv - np.arctan(z / zr)))
        if self.axial_wavenumber:
            if self.standing_wave:
                u = u * np.cos(self.axial_wavenumber * z)
            else:
                u = u * np.exp(1j * self.axial_wavenumber * z)
        return u

    def translated(self, shift) -> "GaussianBeam":
        return replace(self, origin=tuple(np.asarray(self.origin) + shift))


@dataclass(frozen=True)
class FunctionMode:
    """Wrap an arbitrary vectorized callable as a mode."""

    func: Callable[[np.ndarray], np.ndarray]
    peak: float = 1.0

    def evaluate(self, points) -> np.ndarray:
        return np.asarray(self.func(np.asarray(points, dtype=float)), dtype=complex)


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Complex samples on a regular 3D grid, trilinearly interpolated.

    ``samples`` has shape (nx, ny, nz); node (i, j, k) sits at
    ``origin + (i, j, k) * spacing``.
    """

    origin: tuple[float, float, float]
    spacing: tuple[float, float, float]
    samples: np.ndarray
    _interp: RegularGridInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 3 or min(s.shape) < 2:
            raise GeometryError(f"field grid needs shape (nx, ny, nz) with every n >= 2, got {s.shape}")
        if not all(h > 0 for h in self.spacing):
            raise GeometryError("field grid spacing must be positive")
        object.__setattr__(self, "samples", s)
        axes = [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, s.shape)]
        object.__setattr__(self, "_interp", RegularGridInterpolator(axes, s, method="linear"))

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.samples)))

    @property
    def extent(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.asarray(self.origin, dtype=float)
        return lo, lo + np.asarray(self.spacing) * (np.asarray(self.samples.shape) - 1)

    def covers(self, region: Cylinder) -> bool:
        lo, hi = self.extent
        blo, bhi = region.bounding_box()
        slack = 1e-12 * max(np.max(np.abs(hi)), np.max(np.abs(lo)), 1e-30)
        return bool(np.all(blo >= lo - slack) and np.all(bhi <= hi + slack))

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        lo, hi = self.extent
        pts = np.clip(pts, lo, hi)  # absorb round-off at the grid faces
        return self._interp(pts.reshape(-1, 3)).reshape(pts.shape[:-1])


# ---------------------------------------------------------------------------
# FieldGrid file format
#
#   ERCONVERT-FIELDGRID 1
#   dims <nx> <ny> <nz>
#   origin <x0> <y0> <z0>
#   spacing <dx> <dy> <dz>
#   units m
#   payload complex64-le C-order
#   end_header
#   <nx*ny*nz little-endian complex64 values, k fastest>
#
# Header lines are ASCII, newline-terminated; numbers use repr() so they
# round-trip exactly.

_MAGIC = "ERCONVERT-FIELDGRID 1"


def write_field_grid(path, grid: FieldGrid) -> None:
    nx, ny, nz = grid.samples.shape
    header = "\n".join([
        _MAGIC,
        f"dims {nx} {ny} {nz}",
        "origin " + " ".join(repr(float(v)) for v in grid.origin),
        "spacing " + " ".join(repr(float(v)) for v in grid.spacing),
        "units m",
        "payload complex64-le C-order",
        "end_header",
    ]) + "\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(grid.samples, dtype="<c8").tobytes())


def read_field_grid(path) -> FieldGrid:
    raw = Path(path).read_bytes()
    marker = b"end_header\n"
    cut = raw.find(marker)
    if cut < 0:
        raise GeometryError(f"{path}: missing end_header line")
    lines = raw[:cut].decode("ascii").splitlines()
    if not lines or lines[0].strip() != _MAGIC:
        raise GeometryError(f"{path}: not a field grid file")
    meta = {}
    for line in lines[1:]:
        key, _, rest = line.partition(" ")
        meta[key] = rest.split()
    if meta.get("units") != ["m"]:
        raise GeometryError(f"{path}: only metre grids are supported")
    dims = tuple(int(v) for v in meta["dims"])
    body = raw[cut + len(marker):]
    if len(body) != 8 * math.prod(dims):
        raise GeometryError(f"{path}: payload is {len(body)} bytes, header says {math.prod(dims)} complex64 values")
    payload = np.frombuffer(body, dtype="<c8")
    return FieldGrid(
        origin=tuple(float(v) for v in meta["origin"]),
        spacing=tuple(float(v) for v in meta["spacing"]),
        samples=payload.reshape(dims).astype(complex),
    )


# ---------------------------------------------------------------------------
# quadrature over a cylinder

def cylinder_rule(region: Cylinder, n_r: int, n_theta: int | None = None, n_z: int | None = None):
    """Tensor-product Gauss-Legendre nodes and weights for a cylinder.

    Each of (r, theta, z) is mapped affinely from [-1, 1]; the weights include
    the Jacobian r. Returns local coordinate arrays (r, theta, z) on the
    factor grids plus the factor weights, so callers can batch over z.
    """
    n_theta = n_theta or n_r
    n_z = n_z or n_r
    xr, wr = leggauss(n_r)
    xt, wt = leggauss(n_theta)
    xz, wz = leggauss(n_z)
    R, L = region.radius, region.length
    r = 0.5 * R * (xr + 1.0)
    wr = 0.5 * R * wr * r
    theta = math.pi * (xt + 1.0)
    wt = math.pi * wt
    z = 0.5 * L * xz
    wz = 0.5 * L * wz
    return (r, wr), (theta, wt), (z, wz)


def _integrate_fixed(integrand, region: Cylinder, n: int) -> tuple[complex, float]:
    """Integral of ``integrand(points)`` and of its magnitude at order ``n``."""
    (r, wr), (theta, wt), (z, wz) = cylinder_rule(region, n)
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    w_plane = np.outer(wr, wt).ravel()
    per_layer = rr.size
    layers = max(1, _BATCH // per_layer)
    total = 0j
    total_abs = 0.0
    for start in range(0, n, layers):
        zs = z[start:start + layers]
        pts = region.from_local(rr.ravel()[None, :], tt.ravel()[None, :], zs[:, None])
        vals = integrand(pts)
        wts = wz[start:start + layers, None] * w_plane[None, :]
        total += np.sum(vals * wts)
        total_abs += float(np.sum(np.abs(vals) * wts))
    return complex(total), total_abs


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float
    order: int


def integrate_cylinder(integrand, region: Cylinder, rtol: float = 1e-6,
                       orders=DEFAULT_ORDERS) -> QuadratureResult:
    """Integrate over ``region`` by doubling the Gauss-Legendre order.

    Convergence is declared when two successive orders agree to ``rtol``
    relative to the integral of |integrand| (so cancelling integrands such as
    a sign-flipped mode still terminate).
    """
    prev = None
    for n in orders:
        val, scale = _integrate_fixed(integrand, region, n)
        if prev is not None:
            err = abs(val - prev)
            # second clause: the integral has cancelled to round-off level
            if err <= rtol * abs(val) or err <= 1e-12 * scale or scale == 0.0:
                return QuadratureResult(val, err, n)
        prev = val
    raise ConvergenceError(f"cylinder quadrature did not reach rtol={rtol} by order {orders[-1]}",
                           err / max(abs(val), 1e-300))


def evaluate_mode(mode, position) -> complex:
    return complex(np.asarray(mode.evaluate(np.asarray(position, dtype=float)[None, :]))[0])


def _check_coverage(mode, region: Cylinder, name: str = "mode") -> None:
    if isinstance(mode, FieldGrid) and not mode.covers(region):
        raise CoverageError(f"{name}: field grid does not cover the integration region")


def mode_volume(mode, domain: Cylinder, rtol: float = 1e-6, orders=DEFAULT_ORDERS) -> float:
    """Peak-normalized mode volume  V = integral |u|^2 d^3r / max|u|^2  over ``domain``."""
    _check_coverage(mode, domain)
    peak = float(mode.peak)
    if not peak > 0:
        raise GeometryError("mode is identically zero")
    res = integrate_cylinder(lambda p: np.abs(mode.evaluate(p)) ** 2, domain, rtol, orders)
    return res.value.real / peak**2


@dataclass(frozen=True)
class GeometrySpec:
    """Crystal region, the three mode functions and the two mode volumes."""

    crystal: Cylinder
    chi: object
    psi: object
    phi: object
    V_mu: float
    V_o: float

    def __post_init__(self):
        for name in ("V_mu", "V_o"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvariantError("mode volume > 0", f"GeometrySpec.{name}", repr(v))


def overlap_integral(geom: GeometrySpec, rtol: float = 1e-6, orders=DEFAULT_ORDERS) -> QuadratureResult:
    """The complex triple overlap of chi*psi*phi over the crystal volume."""
    for name in ("chi", "psi", "phi"):
        _check_coverage(getattr(geom, name), geom.crystal, name)

    def integrand(p):
        return geom.chi.evaluate(p) * geom.psi.evaluate(p) * geom.phi.evaluate(p)

    return integrate_cylinder(integrand, geom.crystal, rtol, orders)


def filling_factor(geom: GeometrySpec, rtol: float = 1e-6, orders=DEFAULT_ORDERS) -> float:
    res = overlap_integral(geom, rtol, orders)
    return abs(res.value) / math.sqrt(geom.V_mu * geom.V_o)
