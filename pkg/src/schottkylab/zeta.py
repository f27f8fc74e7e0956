"""Selberg zeta machinery: Euler product, transfer-operator traces, Fredholm
determinant continuation, critical exponent, spectral density L, functional
equation.

Conventions: the user-facing spectral parameter is lambda (rho = 1/2); the
determinant/trace variable is s = lambda + 1/2.  The Euler factor of a
primitive class p with character parity eps is

    1 - (sign tr p)^eps e^{-(lambda + 1/2 + k) ell_p},   k = 0, 1, 2, ...

(the boundary subgroup {+-1} is central, so the k-th symmetric power
contributes no extra sign).  The logarithmic derivative over all classes is

    Z'/Z(lambda) = sum_c ell0(c) sigma(c) e^{-(lambda+1/2) ell_c} / (1 - e^{-ell_c}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    NearZeroOfZ,
    NoZeroInBracket,
    NonDecaying,
    OutsideConvergence,
    QuadratureStall,
    StripViolation,
    TailTooLarge,
)
from .geometry import CONVENTIONS
from .schottky import SchottkyData
from .words import ClassTable, enumerate_classes

DEFAULT_TRACE_ORDER = 12
# rank-1 tables are two classes per level, so depth is nearly free; class sums
# at small Re(s) need it (per-level decay is only e^{-2 s length})
DEFAULT_N_MAX_RANK1 = 64
DEFAULT_N_MAX = 12
_CONVERGENCE_MARGIN = 0.02


@dataclass(frozen=True)
class SigmaCharacter:
    """Character of the boundary subgroup {+-1}: parity 0 (trivial) or 1 (sign)."""

    parity: int

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ValueError(f"parity must be 0 or 1, got {self.parity}")

    @property
    def name(self) -> str:
        return "trivial" if self.parity == 0 else "sign"

    def on_sign(self, sign):
        return 1.0 if self.parity == 0 else sign

    def on_signs(self, signs: np.ndarray) -> np.ndarray:
        return np.ones_like(signs) if self.parity == 0 else signs


TRIVIAL = SigmaCharacter(0)
SIGN = SigmaCharacter(1)


def sigma_by_name(name: str) -> SigmaCharacter:
    try:
        return {"trivial": TRIVIAL, "sign": SIGN}[name]
    except KeyError:
        raise ValueError(f"unknown character {name!r} (expected 'trivial' or 'sign')") from None


@dataclass(frozen=True)
class ZetaEval:
    """An evaluated zeta value with truncation metadata."""

    lam: complex
    value: complex
    method: str  # 'product' or 'determinant'
    truncation: tuple
    tail_bound: float


@dataclass(frozen=True)
class TraceTable:
    """Transfer-operator traces t_n = tr L_s^n for n = 1..N (and d/ds t_n)."""

    s: np.ndarray  # evaluation points, shape (S,)
    N: int
    traces: np.ndarray  # shape (N, S) complex
    dtraces: np.ndarray  # d/ds of traces, shape (N, S)


@dataclass(frozen=True)
class DetExpansion:
    """Fredholm expansion d_N(s) = sum c_n with the usual trace recursion."""

    s: np.ndarray
    N: int
    coefficients: np.ndarray  # (N+1, S)
    dcoefficients: np.ndarray  # (N+1, S)
    values: np.ndarray  # (S,)
    derivatives: np.ndarray  # (S,)
    error_estimate: np.ndarray  # |c_N| per point
    diagnostic: np.ndarray  # |c_N| / |c_{N-1}| per point

    def decaying(self) -> np.ndarray:
        """|c_N| < |c_{N-3}|, or c_N already at the double-precision noise
        floor (which means the expansion converged as far as it can)."""
        cN = np.abs(self.coefficients[self.N])
        cRef = np.abs(self.coefficients[max(self.N - 3, 0)])
        floor = 1e-12 * np.max(np.abs(self.coefficients), axis=0)
        return (cN < cRef) | (cN <= floor)


# ---------------------------------------------------------------------------
# tables and helpers
# ---------------------------------------------------------------------------

def default_n_max(group: SchottkyData, N: int | None = None) -> int:
    if group.rank == 1:
        return max(DEFAULT_N_MAX_RANK1, N or 0)
    return max(DEFAULT_N_MAX, N or 0)


def class_table(group: SchottkyData, n_max: int | None = None) -> ClassTable:
    return enumerate_classes(group, default_n_max(group) if n_max is None else n_max)


def _level_sums(table: ClassTable, s_re: float, weight: str) -> np.ndarray:
    """Per-word-length sums A_n used by tail extrapolation.

    weight 'logzeta': primitive classes only, with the full power series over
    m absorbed into the bound x / ((1-x)(1-e^-ell)), x = e^{-s ell}; this is
    the per-level log-product contribution.  'logderiv': all classes with
    weight ell0.  'trace': all classes with weight = primitive period.
    """
    lengths, prim, _, powers, wlens = table.arrays()
    if weight == "logzeta":
        sel = powers == 1
        x = np.exp(-s_re * lengths[sel])
        x = np.minimum(x, 1.0 - 1e-12)
        base = x / ((1.0 - x) * (1.0 - np.exp(-lengths[sel])))
        wl = wlens[sel]
    elif weight == "logderiv":
        base = prim * np.exp(-s_re * lengths) / (1.0 - np.exp(-lengths))
        wl = wlens
    elif weight == "trace":
        base = (wlens // powers) * np.exp(-s_re * lengths) / (1.0 - np.exp(-lengths))
        wl = wlens
    else:
        raise ValueError(weight)
    out = np.zeros(table.n_max + 1)
    np.add.at(out, wl, base)
    return out[1:]


def _geometric_tail(levels: np.ndarray) -> float:
    """Extrapolate the omitted levels geometrically from the last two computed."""
    if len(levels) < 2:
        return math.inf
    a, b = levels[-2], levels[-1]
    if b == 0.0:
        return 0.0
    if a <= 0.0 or b >= a:
        return math.inf
    q = b / a
    return b * q / (1.0 - q)


_DELTA_MEMO: dict[tuple[str, int, int], "CriticalExponent"] = {}


def _require_convergence(group: SchottkyData, table: ClassTable, lam: complex,
                         margin: float = _CONVERGENCE_MARGIN) -> float:
    delta = critical_exponent(group, table=table).delta_classical
    if np.real(lam) + CONVENTIONS.rho <= delta + margin:
        raise OutsideConvergence(
            f"Re(lambda) + 1/2 = {np.real(lam) + 0.5:.6f} is not above "
            f"delta + margin = {delta + margin:.6f}")
    return delta


# ---------------------------------------------------------------------------
# the product and its logarithmic derivative
# ---------------------------------------------------------------------------

def zeta_product(group: SchottkyData, sigma: SigmaCharacter, lam: complex,
                 n_max: int | None = None, k_max: int | None = None, *,
                 table: ClassTable | None = None, tail_tol: float = 1e-6,
                 check_convergence: bool = True) -> ZetaEval:
    """Evaluate the zeta function by its Euler product over primitive classes."""
    if table is None:
        table = class_table(group, n_max)
    lam = complex(lam)
    s = CONVENTIONS.s_from_lambda(lam)
    if check_convergence:
        _require_convergence(group, table, lam)

    prim = table.primitives()
    ell = np.array([r.length for r in prim])
    sgn = sigma.on_signs(np.array([float(r.sign) for r in prim]))
    ell_min = float(ell.min())
    if k_max is None:
        k_max = max(2, math.ceil(42.0 / ell_min - np.real(s)))

    decay = np.exp(-ell)  # e^{-ell_p}, advances the k index
    term = sgn * np.exp(-s * ell)  # sigma_p e^{-s ell_p} at k = 0
    slog = 0.0 + 0.0j
    for _ in range(k_max + 1):
        slog += np.sum(np.log(1.0 - term))
        term = term * decay
    value = np.exp(slog)

    # omitted primitive classes (word length > n_max), geometric in the level sums
    levels = _level_sums(table, float(np.real(s)), "logzeta")
    tail_log = _geometric_tail(levels)
    # omitted k beyond k_max: geometric series in e^{-ell}
    k_tail = float(np.sum(np.exp(-(np.real(s) + k_max + 1) * ell) / (1.0 - np.exp(-ell))))
    tail_log = tail_log + k_tail
    tail_bound = abs(value) * (math.expm1(tail_log) if tail_log < 1.0 else math.inf)
    if not tail_bound <= tail_tol * max(abs(value), 1e-300):
        raise TailTooLarge(
            f"zeta product tail bound {tail_bound:.3e} exceeds tolerance "
            f"{tail_tol:.1e} (relative) at lambda = {lam}")
    return ZetaEval(lam=lam, value=complex(value), method="product",
                    truncation=(table.n_max, k_max), tail_bound=tail_bound)


def log_deriv_zeta(group: SchottkyData, sigma: SigmaCharacter, lam,
                   *, table: ClassTable | None = None,
                   check_convergence: bool = True) -> tuple[complex, float]:
    """Z'/Z(lambda) as the primitive-weight class sum, with a tail estimate.

    Accepts a scalar or an ndarray of lambda values (the tail estimate is then
    taken at the worst real part).
    """
    if table is None:
        table = class_table(group)
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    if check_convergence:
        _require_convergence(group, table, complex(lam_arr[np.argmin(lam_arr.real)]))
    s = lam_arr + CONVENTIONS.rho
    lengths, prim, signs, _, _ = table.arrays()
    sgn = sigma.on_signs(signs)
    coef = prim * sgn / (1.0 - np.exp(-lengths))
    value = _chunked_exp_sum(coef, lengths, s)
    levels = _level_sums(table, float(np.min(s.real)), "logderiv")
    tail = _geometric_tail(levels)
    if np.isscalar(lam) or np.asarray(lam).ndim == 0:
        return complex(value[0]), tail
    return value, tail


def _chunked_exp_sum(coef: np.ndarray, lengths: np.ndarray, s: np.ndarray,
                     chunk: int = 2_000_000) -> np.ndarray:
    """sum_c coef_c e^{-s ell_c} for an array of s, bounding the outer product size."""
    out = np.zeros(s.shape, dtype=complex)
    step = max(1, chunk // max(len(s), 1))
    # far-left probes may overflow to inf; callers treat non-finite as "move"
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(0, len(coef), step):
            block = np.exp(-np.multiply.outer(lengths[i:i + step], s))
            out += coef[i:i + step] @ block
    return out


def _chunked_exp_sum_pair(coef1, coef2, lengths, s, chunk: int = 2_000_000):
    """Two coefficient sums sharing one e^{-s ell} evaluation."""
    out1 = np.zeros(s.shape, dtype=complex)
    out2 = np.zeros(s.shape, dtype=complex)
    step = max(1, chunk // max(len(s), 1))
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(0, len(coef1), step):
            block = np.exp(-np.multiply.outer(lengths[i:i + step], s))
            out1 += coef1[i:i + step] @ block
            out2 += coef2[i:i + step] @ block
    return out1, out2


# ---------------------------------------------------------------------------
# transfer traces and the Fredholm determinant
# ---------------------------------------------------------------------------

_LEVEL_ARRAYS_MEMO: dict[tuple[str, int], dict[int, tuple[np.ndarray, ...]]] = {}


def _by_length_arrays(table: ClassTable) -> dict[int, tuple[np.ndarray, ...]]:
    """Per word length: (geodesic lengths, signs, primitive periods)."""
    key = (table.group_hash, table.n_max)
    hit = _LEVEL_ARRAYS_MEMO.get(key)
    if hit is not None:
        return hit
    lengths, _, signs, powers, wlens = table.arrays()
    periods = wlens // powers
    out: dict[int, tuple[np.ndarray, ...]] = {}
    for n in range(1, table.n_max + 1):
        sel = wlens == n
        out[n] = (lengths[sel], signs[sel], periods[sel].astype(float))
    _LEVEL_ARRAYS_MEMO[key] = out
    return out


def transfer_trace_table(group: SchottkyData, sigma: SigmaCharacter, s, N: int,
                         *, table: ClassTable | None = None) -> TraceTable:
    """t_n = sum over cyclically reduced length-n sequences (rotations counted
    once) of sigma_w e^{-s ell_w} / (1 - e^{-ell_w}); a class of primitive
    period p contributes p identical terms."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if table is None or table.n_max < N:
        table = class_table(group, N)
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    by_len = _by_length_arrays(table)
    traces = np.zeros((N, len(s_arr)), dtype=complex)
    dtraces = np.zeros((N, len(s_arr)), dtype=complex)
    for n in range(1, N + 1):
        ell, signs, periods = by_len[n]
        if len(ell) == 0:
            continue
        amp = periods * sigma.on_signs(signs) / (1.0 - np.exp(-ell))
        traces[n - 1], dtraces[n - 1] = _chunked_exp_sum_pair(amp, -ell * amp, ell, s_arr)
    return TraceTable(s=s_arr, N=N, traces=traces, dtraces=dtraces)


def dynamical_determinant(tt: TraceTable, *, strict: bool = True) -> DetExpansion:
    """Plemelj-Smithies expansion: c_0 = 1, c_n = -(1/n) sum_k t_k c_{n-k}."""
    N, S = tt.N, len(tt.s)
    c = np.zeros((N + 1, S), dtype=complex)
    dc = np.zeros((N + 1, S), dtype=complex)
    c[0] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, N + 1):
            acc = np.zeros(S, dtype=complex)
            dacc = np.zeros(S, dtype=complex)
            for k in range(1, n + 1):
                acc += tt.traces[k - 1] * c[n - k]
                dacc += tt.dtraces[k - 1] * c[n - k] + tt.traces[k - 1] * dc[n - k]
            c[n] = -acc / n
            dc[n] = -dacc / n
        values = c.sum(axis=0)
        derivatives = dc.sum(axis=0)
    cN = np.abs(c[N])
    cPrev = np.abs(c[N - 1]) if N >= 1 else cN
    expansion = DetExpansion(
        s=tt.s, N=N, coefficients=c, dcoefficients=dc,
        values=values, derivatives=derivatives,
        error_estimate=cN,
        diagnostic=cN / np.maximum(cPrev, 1e-300),
    )
    if strict and not bool(np.all(expansion.decaying())):
        worst = int(np.argmax(cN / np.maximum(np.abs(c[max(N - 3, 0)]), 1e-300)))
        raise NonDecaying(
            f"|c_N| did not decay at s = {tt.s[worst]} "
            f"(|c_N| = {cN[worst]:.3e}); increase the trace order or move s")
    return expansion


def determinant_eval(group: SchottkyData, sigma: SigmaCharacter, lam, *,
                     N: int = DEFAULT_TRACE_ORDER, table: ClassTable | None = None,
                     strict: bool = True) -> DetExpansion:
    """Fredholm determinant d_N at s = lambda + 1/2 (lambda scalar or array)."""
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    tt = transfer_trace_table(group, sigma, lam_arr + CONVENTIONS.rho, N, table=table)
    return dynamical_determinant(tt, strict=strict)


def zeta_determinant(group: SchottkyData, sigma: SigmaCharacter, lam: complex, *,
                     N: int = DEFAULT_TRACE_ORDER,
                     table: ClassTable | None = None) -> ZetaEval:
    exp = determinant_eval(group, sigma, lam, N=N, table=table)
    return ZetaEval(lam=complex(lam), value=complex(exp.values[0]),
                    method="determinant", truncation=(N,),
                    tail_bound=float(exp.error_estimate[0]))


# ---------------------------------------------------------------------------
# critical exponent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalExponent:
    delta_classical: float
    delta_gamma: float
    poincare_delta: float
    agreement: float  # |determinant root - Poincare bracketing|


def critical_exponent(group: SchottkyData, tol: float = 1e-10, *,
                      N: int = DEFAULT_TRACE_ORDER,
                      table: ClassTable | None = None) -> CriticalExponent:
    """delta_classical as the largest real zero of d_N, cross-checked against
    the divergence abscissa of the Poincare-type class series."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if table is None:
        table = class_table(group, N)
    memo_key = (table.group_hash, table.n_max, N)
    hit = _DELTA_MEMO.get(memo_key)
    if hit is not None:
        return hit

    def det_vals(s_arr):
        tt = transfer_trace_table(group, TRIVIAL, np.asarray(s_arr, dtype=complex),
                                  N, table=table)
        exp = dynamical_determinant(tt, strict=False)
        return exp.values.real, exp.derivatives.real

    lo, hi = -0.05, 1.0
    grid = np.linspace(lo, hi, 241)
    dv, dd = det_vals(grid)
    scale = float(np.max(np.abs(dv)))

    roots: list[float] = []
    # simple zeros: sign changes of d
    for i in range(len(grid) - 1):
        if dv[i] == 0.0:
            roots.append(float(grid[i]))
        elif dv[i] * dv[i + 1] < 0.0:
            r = brentq(lambda x: det_vals([x])[0][0], grid[i], grid[i + 1], xtol=1e-14)
            roots.append(float(r))
    # even-order zeros: d' crosses zero at a local minimum with tiny |d|
    # (pre-filter at grid resolution; the post-check rejects nonzero minima)
    for i in range(len(grid) - 1):
        if dd[i] * dd[i + 1] < 0.0 and min(abs(dv[i]), abs(dv[i + 1])) < 1e-3 * scale:
            r = brentq(lambda x: det_vals([x])[1][0], grid[i], grid[i + 1], xtol=1e-14)
            if abs(det_vals([r])[0][0]) <= 1e-7 * scale:
                roots.append(float(r))
    if not roots:
        raise NoZeroInBracket(
            "determinant has no zero on [0, 1]; the group data looks invalid")
    delta = max(roots)

    # Poincare-series divergence abscissa: bracket the s where the two-step
    # level ratio S_n / S_{n-2} crosses 1 (two steps cancel the alternating
    # subleading eigenvalue), then one Aitken step on the geometrically
    # converging bracket sequence.
    def bracket_root(top: int) -> float:
        def ratio_minus_one(s_val: float) -> float:
            levels = _level_sums(table, s_val, "logderiv")
            return levels[top - 1] / levels[top - 3] - 1.0

        a, b = -0.2, 1.0
        if ratio_minus_one(a) * ratio_minus_one(b) >= 0:
            return math.nan
        return float(brentq(ratio_minus_one, a, b, xtol=1e-14))

    tops = [table.n_max - 4, table.n_max - 2, table.n_max]
    if tops[0] < 3:
        tops = [table.n_max]
    brackets = [bracket_root(n) for n in tops]
    if any(math.isnan(v) for v in brackets):
        poincare = math.nan
    elif len(brackets) >= 3:
        d0, d1, d2 = brackets
        denom = (d2 - d1) - (d1 - d0)
        poincare = d2 - (d2 - d1) ** 2 / denom if abs(denom) > 1e-13 * max(abs(d2), 1.0) else d2
    else:
        poincare = brackets[-1]
    result = CriticalExponent(
        delta_classical=float(delta),
        delta_gamma=CONVENTIONS.delta_gamma(float(delta)),
        poincare_delta=poincare,
        agreement=abs(delta - poincare) if not math.isnan(poincare) else math.inf,
    )
    _DELTA_MEMO[memo_key] = result
    return result


# ---------------------------------------------------------------------------
# the spectral density L and the functional equation
# ---------------------------------------------------------------------------

def L_gamma(group: SchottkyData, sigma: SigmaCharacter, lam, method: str = "product",
            *, table: ClassTable | None = None, N: int = DEFAULT_TRACE_ORDER):
    """L(lambda) = Z'/Z(lambda) + Z'/Z(-lambda); even by construction.

    method 'product' uses the class sums (needs |Re lambda| < 1/2 - delta);
    method 'determinant' uses d'/d at s = +-lambda + 1/2 away from zeros.
    Accepts a scalar or ndarray of lambda values.
    """
    if table is None:
        table = class_table(group)
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    scalar = np.isscalar(lam) or np.asarray(lam).ndim == 0
    if method == "product":
        delta = critical_exponent(group, table=table).delta_classical
        strip = CONVENTIONS.rho - delta
        worst = float(np.max(np.abs(lam_arr.real)))
        if worst >= strip:
            raise StripViolation(
                f"|Re lambda| = {worst:.6f} outside the two-sided product strip "
                f"(need < 1/2 - delta = {strip:.6f})")
        plus, _ = log_deriv_zeta(group, sigma, lam_arr, table=table,
                                 check_convergence=False)
        minus, _ = log_deriv_zeta(group, sigma, -lam_arr, table=table,
                                  check_convergence=False)
        vals = plus + minus
    elif method == "determinant":
        exp_p = determinant_eval(group, sigma, lam_arr, N=N, table=table, strict=False)
        exp_m = determinant_eval(group, sigma, -lam_arr, N=N, table=table, strict=False)
        for exp in (exp_p, exp_m):
            dist = np.abs(exp.values) / np.maximum(np.abs(exp.derivatives), 1e-300)
            if np.any(np.abs(exp.values) < 1e-300) or np.any(dist < 1e-6):
                raise NearZeroOfZ(
                    "determinant log-derivative within 1e-6 of a zero; move lambda")
        vals = exp_p.derivatives / exp_p.values + exp_m.derivatives / exp_m.values
    else:
        raise ValueError(f"unknown method {method!r}")
    return complex(vals[0]) if scalar else vals


def functional_equation_defect(group: SchottkyData, sigma: SigmaCharacter,
                               lam: complex, *, table: ClassTable | None = None,
                               quad_order: int = 64) -> float:
    """| Z(lambda)/Z(-lambda) - exp(int_0^lambda L) | with both zeta factors by
    the product method and the integral by Gauss-Legendre along the segment."""
    if table is None:
        table = class_table(group)
    lam = complex(lam)
    delta = critical_exponent(group, table=table).delta_classical
    strip = CONVENTIONS.rho - delta
    if abs(lam.real) >= strip:
        raise StripViolation(
            f"|Re lambda| = {abs(lam.real):.6f} outside the strip (< {strip:.6f})")
    z_plus = zeta_product(group, sigma, lam, table=table, check_convergence=False)
    z_minus = zeta_product(group, sigma, -lam, table=table, check_convergence=False)
    lhs = z_plus.value / z_minus.value

    def seg_integral(order: int) -> complex:
        x, w = np.polynomial.legendre.leggauss(order)
        t = 0.5 * (x + 1.0)
        pts = t * lam
        vals = L_gamma(group, sigma, pts, method="product", table=table)
        return 0.5 * lam * np.sum(w * vals)

    i1 = seg_integral(quad_order)
    i2 = seg_integral(2 * quad_order)
    if abs(i2 - i1) > 1e-9 * max(1.0, abs(i2)):
        raise QuadratureStall(
            f"path integral did not converge: |diff| = {abs(i2 - i1):.3e}")
    rhs = np.exp(i2)
    return float(abs(lhs - rhs))
