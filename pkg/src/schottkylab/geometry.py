"""Upper half-plane hyperbolic geometry and 2x2 real Moebius maps.

The model is the upper half-plane with curvature -1, boundary R u {oo}.
All spectral conventions are collected in :class:`GeometryConventions`:
with the positive root normalized to 1 the half-sum of roots is rho = 1/2,
the Casimir value on either character's principal series is 1/4 - lambda^2,
and the determinant variable is s = lambda + 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonInteriorPoint

# determinant drift handling for composed maps
_DET_TOL = 1e-13


@dataclass(frozen=True)
class GeometryConventions:
    """Fixed normalization constants of the half-plane model."""

    rho: float = 0.5
    curvature: float = -1.0
    casimir_offset: float = 0.25  # value 1/4 shared by both boundary characters

    def s_from_lambda(self, lam: complex) -> complex:
        """Determinant variable s = lambda + rho."""
        return lam + self.rho

    def lambda_from_s(self, s: complex) -> complex:
        return s - self.rho

    def casimir_parameter(self, lam: complex) -> complex:
        """z(lambda) = 1/4 - lambda^2, the resolvent parameter."""
        return self.casimir_offset - lam * lam

    def delta_gamma(self, delta_classical: float) -> float:
        """Shifted critical exponent: delta_classical - rho."""
        return delta_classical - self.rho


CONVENTIONS = GeometryConventions()


def _clamped_arccosh(x):
    """arccosh with arguments within 1e-14 below 1 clamped to 1 (float drift guard)."""
    x = np.asarray(x, dtype=float)
    bad = x < 1.0 - 1e-14
    if np.any(bad):
        raise ValueError("arccosh argument below 1 beyond drift tolerance: %r" % x[bad][:3])
    return np.arccosh(np.maximum(x, 1.0))


def hyperbolic_distance(x: complex, y: complex) -> float:
    """Distance between two points of the open upper half-plane.

    cosh d = 1 + |x - y|^2 / (2 Im x Im y).
    """
    x = complex(x)
    y = complex(y)
    if x.imag <= 0.0 or y.imag <= 0.0:
        raise NonInteriorPoint(f"points must have positive imaginary part: {x}, {y}")
    q = 1.0 + abs(x - y) ** 2 / (2.0 * x.imag * y.imag)
    return float(_clamped_arccosh(q))


def hyperbolic_distance_array(x, y):
    """Vectorized :func:`hyperbolic_distance` (no interiority check)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    q = 1.0 + np.abs(x - y) ** 2 / (2.0 * x.imag * y.imag)
    return _clamped_arccosh(q)


def displacement_distance(a, b, c, d, z: complex) -> float:
    """d(z, g z) for g = [[a, b], [c, d]] in SL(2, R), evaluated without the
    image point: cosh d = 1 + |-c z^2 + (a-d) z + b|^2 / (2 Im(z)^2).

    Stable for words with huge entries, where Im(g z) underflows.
    """
    num = -c * z * z + (a - d) * z + b
    q = 1.0 + (num.real * num.real + num.imag * num.imag) / (2.0 * z.imag * z.imag)
    return float(_clamped_arccosh(q))


def displacement_distance_batch(mats: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """d(z, g z) for a stack of matrices (K, 2, 2) against points (P,) -> (K, P)."""
    a = mats[:, 0, 0][:, None]
    b = mats[:, 0, 1][:, None]
    c = mats[:, 1, 0][:, None]
    d = mats[:, 1, 1][:, None]
    z = zs[None, :]
    num = -c * z * z + (a - d) * z + b
    q = 1.0 + (num.real * num.real + num.imag * num.imag) / (2.0 * z.imag * z.imag)
    return _clamped_arccosh(q)


class MobiusMap:
    """A real 2x2 unit-determinant matrix acting on the half-plane and its boundary.

    Instances are immutable values.  Composition renormalizes the determinant
    back to 1 whenever the drift exceeds 1e-13.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: float, b: float, c: float, d: float, *, renormalize: bool = True):
        det = a * d - b * c
        # ad - bc is only trustworthy when the products do not cancel
        # catastrophically; below the noise floor leave the entries alone.
        noise = 8.0 * 2.220446049250313e-16 * (abs(a * d) + abs(b * c))
        if det <= 0.0 and noise < 0.5:
            raise ValueError(f"matrix must have positive determinant, got {det}")
        if renormalize and abs(det - 1.0) > max(_DET_TOL, noise) and det > 0.0:
            s = math.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "b", float(b))
        object.__setattr__(self, "c", float(c))
        object.__setattr__(self, "d", float(d))

    def __setattr__(self, *_):
        raise AttributeError("MobiusMap is immutable")

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, m) -> "MobiusMap":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __mul__(self, other: "MobiusMap") -> "MobiusMap":
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        return MobiusMap(a, b, c, d)

    def inverse(self) -> "MobiusMap":
        # adjugate; exact for det = 1
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def apply(self, z: complex) -> complex:
        z = complex(z)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_real(self, x: float) -> float:
        """Boundary action on a real point (the pole must not be hit)."""
        den = self.c * x + self.d
        return (self.a * x + self.b) / den

    def __eq__(self, other) -> bool:
        if not isinstance(other, MobiusMap):
            return NotImplemented
        return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.c, self.d))

    def __repr__(self) -> str:
        return f"MobiusMap({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"

    def is_hyperbolic(self) -> bool:
        return abs(self.trace) > 2.0

    def translation_length(self) -> float:
        """Geodesic displacement 2*arccosh(|tr|/2) of a hyperbolic map."""
        t = abs(self.trace)
        if t <= 2.0:
            raise ValueError(f"map is not hyperbolic: |trace| = {t}")
        return 2.0 * float(_clamped_arccosh(t / 2.0))

    def fixed_points(self) -> tuple[float, float]:
        """Real fixed points (repelling, attracting) of a hyperbolic map with c != 0."""
        if self.c == 0.0:
            raise ValueError("map fixes infinity; finite fixed points unavailable")
        disc = self.trace * self.trace - 4.0
        if disc <= 0.0:
            raise ValueError("map is not hyperbolic")
        rt = math.sqrt(disc)
        p = (self.a - self.d + rt) / (2.0 * self.c)
        q = (self.a - self.d - rt) / (2.0 * self.c)
        # attracting fixed point has |derivative| < 1, i.e. (cx + d)^2 > 1
        if (self.c * p + self.d) ** 2 > 1.0:
            return q, p
        return p, q

    def derivative_at(self, x: float) -> float:
        den = self.c * x + self.d
        return 1.0 / (den * den)


def geodesic_length_from_trace(trace: float) -> float:
    """2*arccosh(|tr|/2) with the drift-guarded arccosh."""
    return 2.0 * float(_clamped_arccosh(abs(trace) / 2.0))


# ---------------------------------------------------------------------------
# half-disks (geodesic half-planes over boundary intervals)
# ---------------------------------------------------------------------------

def halfdisk_center_radius(lo: float, hi: float) -> tuple[float, float]:
    if not hi > lo:
        raise ValueError(f"degenerate interval [{lo}, {hi}]")
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


def point_in_halfdisk(z: complex, lo: float, hi: float) -> bool:
    c, r = halfdisk_center_radius(lo, hi)
    return abs(z - c) <= r


def dist_to_halfdisk(z: complex, lo: float, hi: float) -> float:
    """Hyperbolic distance from z to the closed half-disk over [lo, hi] (0 if inside).

    For z outside, the distance to the bounding geodesic (semicircle center c,
    radius r) satisfies cosh d = |(z - c)^2 - r^2| / (2 r Im z).
    """
    c, r = halfdisk_center_radius(lo, hi)
    z = complex(z)
    if abs(z - c) <= r:
        return 0.0
    q = abs((z - c) ** 2 - r * r) / (2.0 * r * z.imag)
    return float(_clamped_arccosh(max(q, 1.0)))


def halfdisk_normal(lo: float, hi: float) -> np.ndarray:
    """Unit spacelike normal of the geodesic over [lo, hi] in the hyperboloid model.

    Signature (-,+,+); sign chosen so that <X(z), n> = sinh(signed distance)
    is positive for z outside the half-disk.  Used for exact ray-crossing radii.
    """
    c, r = halfdisk_center_radius(lo, hi)
    n = np.array([-(1.0 + c * c - r * r), 1.0 - c * c + r * r, -2.0 * c], dtype=float)
    return n / (2.0 * r)


def embed_hyperboloid(z: complex) -> np.ndarray:
    """Half-plane point -> hyperboloid coordinates (X0, X1, X2), <X,X> = -1."""
    x, y = z.real, z.imag
    q = x * x + y * y
    return np.array([(q + 1.0) / (2.0 * y), (q - 1.0) / (2.0 * y), x / y], dtype=float)


def polar_point(rho, phi):
    """Point at hyperbolic distance rho from i in direction phi (vectorized).

    phi is the Euclidean angle of the initial tangent at i; phi = pi/2 is the
    upward vertical ray (z = i e^rho).
    """
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ch, sh = np.cosh(rho), np.sinh(rho)
    den = ch - sh * np.sin(phi)
    y = 1.0 / den
    x = sh * np.cos(phi) * y
    return x + 1j * y
