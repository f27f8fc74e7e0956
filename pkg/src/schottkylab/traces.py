"""The computable sides of the trace identities.

geometric_side     -- sum over conjugacy classes of weight * orbital integral
kernel_difference  -- fundamental-domain integral of the orbit-sum kernel
spectral_side      -- (1/4 pi) integral of L(i xi) h(xi) over the real line
resolvent trace    -- Q(lambda) = domain integral of the resolvent orbit sum,
                      tested against (1/2 lambda) Z'/Z(lambda)

All four are positive for heat-type inputs and agree within their declared
tails; the identities are exercised end to end by the acceptance suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RegimeViolation, TailTooLarge
from .geometry import CONVENTIONS
from .kernels import RadialTestFunction
from .orbits import batch_orbit_sums, build_orbit_cache
from .quadrature import domain_quadrature
from .schottky import SchottkyData
from .words import ClassTable, ConjClassRecord
from .zeta import TRIVIAL, class_table, critical_exponent, log_deriv_zeta


@dataclass(frozen=True)
class TraceResult:
    value: float
    side: str  # geometric | kernel_difference | spectral | resolvent_Q
    tail: float
    meta: dict = field(default_factory=dict, compare=False)


# ---------------------------------------------------------------------------
# orbital integrals
# ---------------------------------------------------------------------------

def orbital_integral(length_or_record, f: RadialTestFunction,
                     method: str = "closed") -> float:
    """Orbital integral of f over the class with geodesic length ell.

    closed:      g(ell) / (2 sinh(ell/2))
    quadrature:  cross-section integral of the kernel in coordinates along the
                 axis, cosh d = cosh(ell) + (cosh(ell) - 1) w^2 after w = sinh v.
    The primitive-length weight is NOT included here.
    """
    ell = (length_or_record.length
           if isinstance(length_or_record, ConjClassRecord)
           else float(length_or_record))
    if ell <= 0:
        raise ValueError(f"class length must be positive, got {ell}")
    if method == "closed":
        return float(f.geodesic_transform(ell)) / (2.0 * math.sinh(0.5 * ell))
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    # transverse-coordinate integral: d(v) = arccosh(cosh ell + (cosh ell - 1) sinh^2 v);
    # truncate where the kernel is negligible relative to its on-axis value
    d_cut = f.kernel_tail_cut(1e-16 * max(float(f.kernel(ell)[0]), 1e-280))
    ch = math.cosh(ell)
    w_cut = math.sqrt(max((math.cosh(d_cut) - ch) / (ch - 1.0), 1e-6))
    v_cut = math.asinh(w_cut)
    x, w = np.polynomial.legendre.leggauss(200)
    v = 0.5 * v_cut * (x + 1.0)
    weights = 0.5 * v_cut * w
    sh = np.sinh(v)
    d = np.arccosh(ch + (ch - 1.0) * sh * sh)
    vals = f.kernel(d) * np.cosh(v)
    return 2.0 * float(np.sum(weights * vals))


# ---------------------------------------------------------------------------
# geometric side
# ---------------------------------------------------------------------------

def geometric_side(group: SchottkyData, f: RadialTestFunction,
                   n_max: int | None = None, *, table: ClassTable | None = None,
                   tail_tol: float | None = None) -> TraceResult:
    """Sum over all conjugacy classes of ell0 * (orbital integral), closed form."""
    if table is None:
        table = class_table(group, n_max)
    lengths, prim, _, _, wlens = table.arrays()
    terms = prim * np.asarray(f.geodesic_transform(lengths)) / (2.0 * np.sinh(0.5 * lengths))
    # deterministic order: table order is (length, word); exact summation
    value = math.fsum(terms.tolist())

    levels = np.zeros(table.n_max + 1)
    np.add.at(levels, wlens, terms)
    levels = levels[1:]
    tail = _term_tail(levels)
    if tail_tol is not None and not tail <= tail_tol:
        raise TailTooLarge(f"geometric-side tail {tail:.3e} exceeds {tail_tol:.1e}")
    return TraceResult(value=value, side="geometric", tail=tail,
                       meta={"n_max": table.n_max, "kind": f.kind,
                             "parameter": f.parameter})


def _term_tail(levels: np.ndarray) -> float:
    """Geometric extrapolation of the per-word-length term sums."""
    if len(levels) < 2:
        return math.inf
    a, b = levels[-2], levels[-1]
    if b == 0.0:
        return 0.0
    if a <= 0.0 or b >= a:
        return math.inf
    q = b / a
    return float(b * q / (1.0 - q))


# ---------------------------------------------------------------------------
# kernel-difference trace over the fundamental domain
# ---------------------------------------------------------------------------

def kernel_difference_trace(group: SchottkyData, f: RadialTestFunction,
                            R: float, *, rel_tol: float = 1e-6,
                            kernel_eps: float | None = None,
                            tail_cut: float | None = None,
                            quad_kwargs: dict | None = None) -> TraceResult:
    """Integral over the fundamental domain of sum_{gamma != 1} k(d(x, gamma x)).

    The orbit sum is truncated at tail_cut (chosen so the kernel is below
    kernel_eps there); elements are enumerated once around the base point and
    reused for every quadrature node.
    """
    if kernel_eps is None:
        kernel_eps = 1e-12
    if tail_cut is None:
        tail_cut = f.kernel_tail_cut(kernel_eps)
    cache = build_orbit_cache(group, tail_cut + 2.0 * R + 1e-9)
    # validate the kernel quadrature once, then run the bulk without the gate
    probe = np.linspace(max(tail_cut * 0.05, 0.2), tail_cut, 16)
    f.kernel(probe, check=True)

    def fast_kernel(d):
        return f.kernel(d, check=False)

    def integrand(zs: np.ndarray) -> np.ndarray:
        return batch_orbit_sums(cache, zs, fast_kernel, tail_cut, group=group)

    kw = dict(rel_tol=rel_tol)
    if quad_kwargs:
        kw.update(quad_kwargs)
    res = domain_quadrature(group, integrand, R, **kw)
    mask_allowance = _mask_tail(group, f, tail_cut)
    tail = res.tail_estimate + mask_allowance
    return TraceResult(value=res.value, side="kernel_difference", tail=tail,
                       meta={"R": R, "tail_cut": tail_cut,
                             "elements": len(cache.words),
                             "panels": res.panels, "evaluations": res.evaluations,
                             "kind": f.kind, "parameter": f.parameter})


def _mask_tail(group: SchottkyData, f: RadialTestFunction, cut: float) -> float:
    """Domain integral of the orbit mass dropped by the tail_cut mask.

    Per class, the dropped mass is ell0 times the cross-section integral over
    the region d(v) > cut (the class-sum representation serves as an error
    gauge only; the main value never uses it).
    """
    table = class_table(group)
    lengths, prim, _, _, _ = table.arrays()
    far = lengths >= cut
    total = float(np.sum(prim[far] * np.asarray(f.geodesic_transform(lengths[far]))
                         / (2.0 * np.sinh(0.5 * lengths[far]))))
    near = np.nonzero(~far)[0]
    if len(near) == 0:
        return total
    x, w = np.polynomial.legendre.leggauss(64)
    d_far = f.kernel_tail_cut(1e-18)
    for i in near:
        ell, ell0 = float(lengths[i]), float(prim[i])
        ch = math.cosh(ell)
        v0 = math.asinh(math.sqrt((math.cosh(cut) - ch) / (ch - 1.0)))
        w1sq = max((math.cosh(max(d_far, cut)) - ch) / (ch - 1.0), 1e-12)
        v1 = max(math.asinh(math.sqrt(w1sq)), v0 + 1e-6)
        v = v0 + 0.5 * (v1 - v0) * (x + 1.0)
        weights = 0.5 * (v1 - v0) * w
        sh = np.sinh(v)
        d = np.arccosh(ch + (ch - 1.0) * sh * sh)
        total += ell0 * 2.0 * float(np.sum(weights * f.kernel(d) * np.cosh(v)))
    return total


# ---------------------------------------------------------------------------
# spectral side
# ---------------------------------------------------------------------------

def spectral_side(group: SchottkyData, f: RadialTestFunction,
                  xi_max: float | None = None, xi_res: float | None = None, *,
                  table: ClassTable | None = None,
                  require_negative_exponent: bool = True) -> TraceResult:
    """(1/4 pi) Integral over the full imaginary axis of L(i xi) h(xi) d xi.

    Valid in the negative-shifted-exponent regime (delta < 1/2): the density
    is then regular on the axis, the test function is spherical, and no
    discrete terms contribute.  Trapezoid in xi with a Richardson check.
    """
    if table is None:
        table = class_table(group)
    ce = critical_exponent(group, table=table)
    if require_negative_exponent and ce.delta_gamma >= 0:
        raise RegimeViolation(
            f"spectral side requires delta - 1/2 < 0, got {ce.delta_gamma:+.6f}")
    if xi_max is None:
        xi_max = f.spectral_cutoff(1e-13) + 1.0
    lengths, prim, _, _, _ = table.arrays()
    ell_max = float(lengths.max())
    if xi_res is None:
        # resolve the fastest oscillation cos(xi * ell_max) comfortably
        xi_res = min(2.0 * math.pi / ell_max / 12.0, 0.05)
    n = 2 * max(64, int(math.ceil(xi_max / xi_res))) + 1

    coef = prim / (1.0 - np.exp(-lengths)) * np.exp(-0.5 * lengths)

    def L_on_axis(xi: np.ndarray) -> np.ndarray:
        # sum_c ell0 e^{-ell/2} (e^{-i xi ell} + e^{i xi ell}) / (1 - e^{-ell})
        out = np.zeros(xi.shape)
        step = max(1, 2_000_000 // max(len(xi), 1))
        for i in range(0, len(coef), step):
            out += 2.0 * (coef[i:i + step] @ np.cos(np.multiply.outer(lengths[i:i + step], xi)))
        return out

    def trapezoid(m: int) -> float:
        xi = np.linspace(-xi_max, xi_max, m)
        vals = L_on_axis(xi) * f.spectral_transform(xi)
        return float(np.trapezoid(vals, xi)) / (4.0 * math.pi)

    coarse = trapezoid((n + 1) // 2 if ((n + 1) // 2) % 2 == 1 else (n + 1) // 2 + 1)
    fine = trapezoid(n)
    richardson = abs(fine - coarse) / 3.0

    l_edge = abs(float(L_on_axis(np.array([xi_max]))[0]))
    h_tail = float(f.spectral_transform(np.array([xi_max]))[0])
    if f.kind == "heat":
        t = f.parameter
        cut_tail = l_edge * h_tail / (2.0 * t * xi_max) / (4.0 * math.pi) * 2.0
    else:
        cut_tail = l_edge * h_tail * xi_max / (4.0 * math.pi)
    # class-table truncation enters through L itself
    _, l_tail = log_deriv_zeta(group, TRIVIAL, 0.0 + 0.0j, table=table,
                               check_convergence=False)
    h_mass = 2.0 * xi_max * float(np.max(f.spectral_transform(np.array([0.0]))))
    tail = richardson + cut_tail + 2.0 * l_tail * h_mass / (4.0 * math.pi)
    return TraceResult(value=fine, side="spectral", tail=tail,
                       meta={"xi_max": xi_max, "points": n, "kind": f.kind,
                             "parameter": f.parameter,
                             "delta_gamma": ce.delta_gamma})


# ---------------------------------------------------------------------------
# regularized resolvent trace and the zeta identity
# ---------------------------------------------------------------------------

def resolvent_regularized_trace(group: SchottkyData, lam: float, R: float, *,
                                rel_tol: float = 1e-6,
                                kernel_eps: float | None = None,
                                tail_cut: float | None = None,
                                table: ClassTable | None = None,
                                quad_kwargs: dict | None = None) -> dict:
    """Q(lambda) = domain integral of the resolvent orbit sum, plus its defect
    against (1/2 lambda) Z'/Z(lambda)."""
    if table is None:
        table = class_table(group)
    lam = float(lam)
    ce = critical_exponent(group, table=table)
    if not lam > max(0.0, ce.delta_classical - CONVENTIONS.rho):
        raise RegimeViolation(
            f"resolvent trace requires Re lambda > max(0, delta - 1/2) "
            f"= {max(0.0, ce.delta_classical - 0.5):.6f}, got {lam}")
    f = RadialTestFunction("resolvent", lam)
    q = kernel_difference_trace(group, f, R, rel_tol=rel_tol,
                                kernel_eps=kernel_eps, tail_cut=tail_cut,
                                quad_kwargs=quad_kwargs)
    zv, z_tail = log_deriv_zeta(group, TRIVIAL, lam, table=table)
    zeta_side = float(np.real(zv)) / (2.0 * lam)
    defect = abs(q.value - zeta_side) / abs(q.value)
    return {
        "Q": TraceResult(value=q.value, side="resolvent_Q", tail=q.tail, meta=q.meta),
        "zeta_side": zeta_side,
        "zeta_tail": z_tail / (2.0 * lam),
        "t5_defect": defect,
    }
