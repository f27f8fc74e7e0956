"""Zero location by the argument principle and residues of the density L.

Zeros of the continued determinant d_N(lambda + 1/2) are found per grid cell
by winding-number counts along adaptively refined contours, then polished by
multiplicity-aware Newton steps; the order is the winding of a small isolating
circle (never a derivative test, so order-2 zeros are handled uniformly).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContourThroughZero, SchottkyLabError
from .geometry import CONVENTIONS
from .schottky import SchottkyData
from .words import ClassTable
from .zeta import (
    DEFAULT_TRACE_ORDER,
    SigmaCharacter,
    class_table,
    determinant_eval,
)

_MIN_MODULUS = 1e-12
_MAX_REFINE_PASSES = 30


@dataclass(frozen=True)
class Resonance:
    """A zero of the continued zeta function in the lambda plane."""

    location: complex
    order: int
    residue_of_L: complex = complex("nan")
    integer_defect: float = math.nan


@dataclass(frozen=True)
class Rect:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValueError(f"degenerate rectangle {self}")

    def corners(self) -> list[complex]:
        return [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= z.real <= self.re_max + pad
                and self.im_min - pad <= z.imag <= self.im_max + pad)

    def shifted(self, dz: complex) -> "Rect":
        return Rect(self.re_min + dz.real, self.re_max + dz.real,
                    self.im_min + dz.imag, self.im_max + dz.imag)


def _det_factory(group: SchottkyData, sigma: SigmaCharacter, N: int,
                 table: ClassTable):
    def fn(lams: np.ndarray):
        exp = determinant_eval(group, sigma, lams, N=N, table=table, strict=False)
        return exp.values, exp.derivatives
    return fn


def winding_number(fn, loop: list[complex]) -> int:
    """Winding of fn along the closed polyline through `loop` (last->first edge
    implied).  Samples are refined until adjacent argument increments stay
    below pi/2; raises ContourThroughZero when a sample sits on a zero."""
    pts = list(loop)
    vals = list(fn(np.array(pts))[0])
    for _ in range(_MAX_REFINE_PASSES):
        if min(abs(v) for v in vals) < _MIN_MODULUS:
            raise ContourThroughZero(
                "contour sample within 1e-12 of a zero; jitter the grid")
        bad: list[int] = []
        for i in range(len(pts)):
            dphi = cmath.phase(vals[(i + 1) % len(pts)] / vals[i])
            if abs(dphi) > 0.5 * math.pi:
                bad.append(i)
        if not bad:
            break
        mids = [(pts[i] + pts[(i + 1) % len(pts)]) / 2.0 for i in bad]
        mvals = list(fn(np.array(mids))[0])
        for i, m, mv in zip(reversed(bad), reversed(mids), reversed(mvals)):
            pts.insert(i + 1, m)
            vals.insert(i + 1, mv)
    else:
        raise ContourThroughZero(
            "argument increments did not settle; a zero is too close to the contour")
    total = math.fsum(cmath.phase(vals[(i + 1) % len(pts)] / vals[i])
                      for i in range(len(pts)))
    w = total / (2.0 * math.pi)
    if abs(w - round(w)) > 1e-6:
        raise SchottkyLabError(f"winding number {w} is not near an integer")
    return int(round(w))


def _cell_loop(re0: float, re1: float, im0: float, im1: float, m: int) -> list[complex]:
    ts = np.linspace(0.0, 1.0, m, endpoint=False)
    bottom = [complex(re0 + t * (re1 - re0), im0) for t in ts]
    right = [complex(re1, im0 + t * (im1 - im0)) for t in ts]
    top = [complex(re1 - t * (re1 - re0), im1) for t in ts]
    left = [complex(re0, im1 - t * (im1 - im0)) for t in ts]
    return bottom + right + top + left


def circle_winding(fn, center: complex, radius: float, m: int = 32) -> int:
    loop = [center + radius * cmath.exp(2j * math.pi * k / m) for k in range(m)]
    return winding_number(fn, loop)


def zero_search(group: SchottkyData, sigma: SigmaCharacter, rect: Rect,
                grid: tuple[int, int] = (8, 8), tol: float = 1e-12, *,
                N: int = DEFAULT_TRACE_ORDER, table: ClassTable | None = None,
                samples_per_edge: int = 12, max_jitter: int = 4) -> list[Resonance]:
    """Isolate and refine the zeros of d_N(lambda + 1/2) inside `rect`.

    Argument-principle winding per grid cell isolates zeros; Newton with the
    cell's multiplicity refines them to `tol`; the reported order is the
    winding of a small isolating circle.  The whole grid is retried with a
    deterministic jitter when a contour lands on a zero.
    """
    if table is None:
        table = class_table(group, max(N, 1))
    fn = _det_factory(group, sigma, N, table)
    # the rectangle must avoid the continuation-failure region
    probes = rect.corners() + [complex(0.5 * (rect.re_min + rect.re_max),
                                       0.5 * (rect.im_min + rect.im_max))]
    determinant_eval(group, sigma, np.array(probes), N=N, table=table, strict=True)

    diag = math.hypot(rect.re_max - rect.re_min, rect.im_max - rect.im_min)
    last_exc: Exception | None = None
    for attempt in range(max_jitter):
        jit = attempt * 3.7e-7 * diag * (1.0 + 1.0j)
        try:
            found = _search_once(fn, rect.shifted(jit), grid, tol, samples_per_edge)
        except ContourThroughZero as exc:
            last_exc = exc
            continue
        return [r for r in found if rect.contains(r.location, pad=1e-9 * diag)]
    raise ContourThroughZero(
        f"grid jitter exhausted after {max_jitter} attempts: {last_exc}")


def _search_once(fn, rect: Rect, grid, tol, samples_per_edge) -> list[Resonance]:
    nx, ny = grid
    xs = np.linspace(rect.re_min, rect.re_max, nx + 1)
    ys = np.linspace(rect.im_min, rect.im_max, ny + 1)
    total = winding_number(fn, _cell_loop(rect.re_min, rect.re_max,
                                          rect.im_min, rect.im_max,
                                          samples_per_edge * 4))
    zeros: list[Resonance] = []
    for i in range(nx):
        for j in range(ny):
            cell = Rect(xs[i], xs[i + 1], ys[j], ys[j + 1])
            loop = _cell_loop(cell.re_min, cell.re_max, cell.im_min, cell.im_max,
                              samples_per_edge)
            w = winding_number(fn, loop)
            if w != 0:
                zeros.extend(_resolve_cell(fn, cell, w, tol, samples_per_edge, 0))
    zeros = _dedupe(zeros)
    if sum(r.order for r in zeros) != total:
        raise SchottkyLabError(
            f"argument-principle bookkeeping failed: cell orders sum to "
            f"{sum(r.order for r in zeros)} but the rectangle winds {total}")
    zeros.sort(key=lambda r: (abs(r.location), r.location.imag))
    return zeros


def _resolve_cell(fn, cell: Rect, w: int, tol, samples_per_edge,
                  depth: int) -> list[Resonance]:
    """Refine the zero of a winding-w cell; subdivide when the cell holds a
    cluster (isolating-circle order below the cell count) or Newton escapes."""
    width, height = cell.re_max - cell.re_min, cell.im_max - cell.im_min
    center = complex(cell.re_min + 0.5 * width, cell.im_min + 0.5 * height)
    starts = [center]
    starts += [center + 0.25 * complex(sx * width, sy * height)
               for sx in (-1, 1) for sy in (-1, 1)]
    for start in starts:
        z = _newton(fn, start, w, tol, leash=center, leash_radius=2.0 * (width + height))
        if z is not None and cell.contains(z, pad=1e-9):
            order = circle_winding(fn, z, min(width, height) / 6.0)
            if order == w:
                return [Resonance(location=z, order=order)]
            break
    if depth >= 8:
        raise SchottkyLabError(
            f"could not separate {w} zeros in cell around {center}")
    out: list[Resonance] = []
    xm, ym = cell.re_min + 0.5 * width, cell.im_min + 0.5 * height
    for sub in (Rect(cell.re_min, xm, cell.im_min, ym),
                Rect(xm, cell.re_max, cell.im_min, ym),
                Rect(cell.re_min, xm, ym, cell.im_max),
                Rect(xm, cell.re_max, ym, cell.im_max)):
        loop = _cell_loop(sub.re_min, sub.re_max, sub.im_min, sub.im_max,
                          samples_per_edge)
        sw = winding_number(fn, loop)
        if sw != 0:
            out.extend(_resolve_cell(fn, sub, sw, tol, samples_per_edge, depth + 1))
    return out


def _newton(fn, z0: complex, multiplicity: int, tol: float, *,
            leash: complex | None = None,
            leash_radius: float = math.inf) -> complex | None:
    """Multiplicity-aware Newton; returns None on escape or non-finite values."""
    z = z0
    m = max(1, abs(multiplicity))
    for _ in range(80):
        v, dv = fn(np.array([z]))
        v, dv = complex(v[0]), complex(dv[0])
        if not (cmath.isfinite(v) and cmath.isfinite(dv)) or dv == 0:
            return None
        step = m * v / dv
        z = z - step
        if leash is not None and abs(z - leash) > leash_radius:
            return None
        if abs(step) < tol:
            return z
    return z


def _dedupe(zeros: list[Resonance], eps: float = 1e-8) -> list[Resonance]:
    out: list[Resonance] = []
    for r in zeros:
        if any(abs(r.location - o.location) < eps for o in out):
            continue
        out.append(r)
    return out


# ---------------------------------------------------------------------------
# residues of L
# ---------------------------------------------------------------------------

def residue_check(group: SchottkyData, sigma: SigmaCharacter, mu: complex,
                  radius: float, *, N: int = DEFAULT_TRACE_ORDER,
                  table: ClassTable | None = None, n_theta: int = 512) -> dict:
    """Contour residue of L at mu (determinant method) against the
    argument-principle count ord_mu Z + ord_{-mu} Z.

    The circle of the given radius must isolate mu; defect is the distance of
    the residue to the nearest integer.
    """
    if table is None:
        table = class_table(group, max(N, 1))
    fn = _det_factory(group, sigma, N, table)
    mu = complex(mu)

    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    ring = np.exp(1j * theta)
    lams = mu + radius * ring
    vp, dvp = fn(lams)
    vm, dvm = fn(-lams)
    for v in (vp, vm):
        if np.min(np.abs(v)) < _MIN_MODULUS:
            raise ContourThroughZero(
                "residue contour passes within 1e-12 of a determinant zero")
    lvals = dvp / vp + dvm / vm
    residue = complex(radius * np.mean(lvals * ring))

    ord_mu = circle_winding(fn, mu, radius)
    # -lams traverses the circle around -mu counterclockwise as well
    ord_minus_mu = winding_number(fn, list(-lams[::8]))

    nearest = int(round(residue.real))
    defect = abs(residue - nearest)
    return {
        "residue": residue,
        "nearest_integer": nearest,
        "defect": float(defect),
        "ord_mu": ord_mu,
        "ord_minus_mu": ord_minus_mu,
        "count_matches": nearest == ord_mu + ord_minus_mu,
    }


def enrich_with_residues(group: SchottkyData, sigma: SigmaCharacter,
                         zeros: list[Resonance], radius: float, *,
                         N: int = DEFAULT_TRACE_ORDER,
                         table: ClassTable | None = None) -> list[Resonance]:
    """Attach residue data to located zeros, shrinking radii to isolate each."""
    out = []
    for r in zeros:
        others = [abs(r.location - o.location) for o in zeros if o is not r]
        # keep clear of the mirror set -mu as well
        others += [abs(r.location + o.location) for o in zeros]
        rad = min([radius] + [0.45 * d for d in others if d > 0])
        res = residue_check(group, sigma, r.location, rad, N=N, table=table)
        out.append(Resonance(location=r.location, order=r.order,
                             residue_of_L=res["residue"],
                             integer_defect=res["defect"]))
    return out
