"""Radial test functions: heat and resolvent kernels on the hyperbolic plane.

Each kind carries the pointwise kernel k(d), the geodesic-side transform g(u)
and the spectral-side transform h(xi); g and h are a Fourier-cosine pair
(h(xi) = Integral g(u) e^{-i xi u} du) and the orbital integral of k over a
displacement-ell cross-section equals g(ell) / (2 sinh(ell/2)).

Kernel evaluation integrates with the endpoint substitution u = d + v^2,
using cosh u - cosh d = 2 sinh(v^2/2) sinh(d + v^2/2) to defuse the
inverse-square-root singularity, then fixed-order Gauss-Legendre with an
order-doubling accuracy check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureStall

_REL_TARGET = 1e-10
_EXP_CUTOFF = 42.0  # e^-42 ~ 5e-19 below double precision at unit scale


@lru_cache(maxsize=64)
def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _gl_nodes(n: int, hi: np.ndarray):
    """Nodes/weights of GL(n) mapped to [0, hi] per row of hi."""
    x, w = _gauss(n)
    hi = hi[:, None]
    return 0.5 * hi * (x[None, :] + 1.0), 0.5 * hi * w[None, :]


def heat_kernel(t: float, d, *, order: int = 72, check: bool = True) -> np.ndarray:
    """Heat kernel k_t(d) on the hyperbolic plane (vectorized over d)."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if np.any(d < 0):
        raise ValueError("distance must be nonnegative")
    val = _heat_quad(t, d, order)
    if check:
        ref = _heat_quad(t, d, order + order // 2)
        _accuracy_gate(val, ref, "heat kernel")
        val = ref
    return val


def _heat_quad(t: float, d: np.ndarray, order: int) -> np.ndarray:
    c = math.sqrt(2.0) * math.exp(-t / 4.0) / (4.0 * math.pi * t) ** 1.5
    # (d + V^2)^2 - d^2 = 4 t CUTOFF
    V = np.sqrt(-d + np.sqrt(d * d + 4.0 * _EXP_CUTOFF * t))
    v, w = _gl_nodes(order, V)
    s = d[:, None] + v * v
    integ = s * np.exp(-s * s / (4.0 * t)) * 2.0 * v / np.sqrt(
        2.0 * np.sinh(0.5 * v * v) * np.sinh(d[:, None] + 0.5 * v * v))
    return c * np.sum(w * integ, axis=1)


def resolvent_kernel(lam, d, *, order: int = 96, check: bool = True) -> np.ndarray:
    """Green kernel r_lambda(d) of (Delta - (1/4 - lambda^2))^{-1}, Re lambda > 0.

    Equals (1/2 pi) Q_{lambda - 1/2}(cosh d); logarithmically singular at d = 0.
    """
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if np.any(d <= 0):
        raise ValueError("resolvent kernel requires d > 0")
    val = _resolvent_quad(lam, d, order)
    if check:
        ref = _resolvent_quad(lam, d, order + order // 2)
        _accuracy_gate(val, ref, "resolvent kernel")
        val = ref
    return val


def _resolvent_quad(lam, d: np.ndarray, order: int) -> np.ndarray:
    rate = np.real(lam) + 0.25
    if rate <= 0:
        raise ValueError(f"Re lambda must exceed -1/4, got {lam}")
    V = np.full_like(d, math.sqrt(_EXP_CUTOFF / rate) + 1.0)
    v, w = _gl_nodes(order, V)
    u = d[:, None] + v * v
    integ = np.exp(-lam * u) * 2.0 * v / np.sqrt(
        4.0 * np.sinh(0.5 * v * v) * np.sinh(d[:, None] + 0.5 * v * v))
    return np.sum(w * integ, axis=1) / (2.0 * math.pi)


def _accuracy_gate(val, ref, what: str) -> None:
    scale = np.maximum(np.abs(ref), 1e-300)
    rel = np.max(np.abs(val - ref) / scale)
    if rel > 1e3 * _REL_TARGET:
        raise QuadratureStall(f"{what} quadrature stalled at relative error {rel:.2e}")


@dataclass(frozen=True)
class RadialTestFunction:
    """A bi-invariant test function of kind 'heat' (parameter t > 0) or
    'resolvent' (parameter lambda, Re lambda > 0)."""

    kind: str
    parameter: float

    def __post_init__(self):
        if self.kind == "heat":
            if not self.parameter > 0:
                raise ValueError(f"heat time must be positive, got {self.parameter}")
        elif self.kind == "resolvent":
            if not np.real(self.parameter) > 0:
                raise ValueError(f"resolvent needs Re lambda > 0, got {self.parameter}")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    # --- the three faces of the test function ---------------------------

    def kernel(self, d, *, check: bool = True) -> np.ndarray:
        """Pointwise kernel k(d); check=False skips the order-doubling accuracy
        gate (bulk callers validate once on a probe batch instead)."""
        if self.kind == "heat":
            return heat_kernel(self.parameter, d, check=check)
        return resolvent_kernel(self.parameter, d, check=check)

    def geodesic_transform(self, u) -> np.ndarray:
        """g(u): heat -> e^{-t/4} e^{-u^2/4t} / sqrt(4 pi t); resolvent -> e^{-lam|u|}/(2 lam)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "heat":
            t = self.parameter
            return np.exp(-t / 4.0) * np.exp(-u * u / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
        lam = self.parameter
        return np.exp(-lam * np.abs(u)) / (2.0 * lam)

    def spectral_transform(self, xi) -> np.ndarray:
        """h(xi): heat -> e^{-t(1/4 + xi^2)}; resolvent -> 1/(lambda^2 + xi^2)."""
        xi = np.asarray(xi, dtype=float)
        if self.kind == "heat":
            t = self.parameter
            return np.exp(-t * (0.25 + xi * xi))
        lam = self.parameter
        return 1.0 / (lam * lam + xi * xi)

    # --- decay helpers ---------------------------------------------------

    def kernel_tail_cut(self, eps: float) -> float:
        """Smallest probed d with kernel(d) <= eps (kernel decays monotonically
        past d = 1); probes integer distances then bisects."""
        lo, hi = 1.0, 2.0
        while float(self.kernel(hi)[0]) > eps:
            lo, hi = hi, hi * 1.6
            if hi > 400:
                raise ValueError("kernel does not reach eps within d = 400")
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if float(self.kernel(mid)[0]) > eps:
                lo = mid
            else:
                hi = mid
        return hi

    def spectral_cutoff(self, eps: float) -> float:
        """xi beyond which h(xi) <= eps."""
        if self.kind == "heat":
            t = self.parameter
            v = -math.log(eps) / t - 0.25
            return math.sqrt(max(v, 1.0))
        lam = self.parameter
        return math.sqrt(max(1.0 / eps - abs(lam) ** 2, 1.0))

    def geodesic_tail_cut(self, eps: float) -> float:
        """u beyond which g(u) <= eps."""
        if self.kind == "heat":
            t = self.parameter
            v = (-math.log(eps) - t / 4.0 - 0.5 * math.log(4.0 * math.pi * t)) * 4.0 * t
            return math.sqrt(max(v, 1.0))
        lam = np.real(self.parameter)
        return max(-math.log(eps * 2.0 * lam) / lam, 1.0)


def heat(t: float) -> RadialTestFunction:
    return RadialTestFunction("heat", float(t))


def resolvent(lam: float) -> RadialTestFunction:
    return RadialTestFunction("resolvent", float(lam))
