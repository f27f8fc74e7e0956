"""Orbit sums over a Schottky group with geometric pruning.

A reduced word w = w1...wn confines its whole subtree: for every reduced
extension u the point (w u) x lies in the half-disk
B_w = M(w1...w_{n-1}) D(target(w_n)), provided x lies in the fundamental
domain.  The DFS therefore prunes the subtree below w as soon as the
hyperbolic distance from x to B_w exceeds the cutoff, which makes the
enumeration of {gamma != 1 : d(x, gamma x) <= cut} exact and finite.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import CapacityExceeded, PruneBoundViolated
from .geometry import displacement_distance, displacement_distance_batch
from .schottky import SchottkyData
from .words import word_key

_NODE_BUDGET = 20_000_000

# The nested boundary interval of a deep word collapses to one double-precision
# ulp, which saturates the computable prune bound near arccosh(scale/ulp) ~ 37.
# Cuts are capped below that so the DFS always terminates; the interval radius
# only ever rounds UP, so pruning stays conservative (no element is missed).
MAX_CUT = 36.0


def _halfdisk_distance(z: complex, lo: float, hi: float) -> float:
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    if r <= 0.0:  # interval collapsed below double resolution: certainly far
        return math.inf
    if abs(z - c) <= r:
        return 0.0
    q = abs((z - c) ** 2 - r * r) / (2.0 * r * z.imag)
    if not q == q:  # NaN from non-finite entries: certainly far
        return math.inf
    return math.acosh(max(q, 1.0))


def enumerate_orbit(group: SchottkyData, x: complex, cut: float, *,
                    debug: bool = False, rng_seed: int = 2024,
                    node_budget: int = _NODE_BUDGET):
    """All (word, matrix, distance) with d(x, w x) <= cut, sorted by word.

    Requires x in the fundamental domain (the nesting argument needs the
    base outside every half-disk).
    """
    if not group.in_fundamental_domain(x):
        raise ValueError(f"orbit enumeration requires x in the fundamental domain: {x}")
    if not cut <= MAX_CUT:
        raise ValueError(
            f"orbit cut {cut} exceeds the prune-bound resolution ceiling {MAX_CUT}")
    letters = group.letters()
    mats = {a: group.letter_matrix(a).as_array() for a in letters}
    targets = {a: group.letter_target(a) for a in letters}
    rng = random.Random(rng_seed) if debug else None

    found: list[tuple[tuple[int, ...], np.ndarray, float]] = []
    nodes = 0

    def visit(word: tuple[int, ...], prefix: np.ndarray, interval: tuple[float, float]):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise CapacityExceeded(f"orbit DFS exceeded {node_budget} nodes at cut={cut}")
        lo, hi = interval
        bound = _halfdisk_distance(x, lo, hi)
        if not bound <= cut:  # prunes NaN/degenerate intervals as well
            if rng is not None:
                _debug_recheck(word, prefix, rng)
            return
        d = displacement_distance(prefix[0, 0], prefix[0, 1],
                                  prefix[1, 0], prefix[1, 1], x)
        if d <= cut:
            found.append((word, prefix, d))
        last = word[-1]
        for a in letters:
            if a == -last:
                continue
            lo_t, hi_t = targets[a]
            p, q = _apply_real(prefix, lo_t), _apply_real(prefix, hi_t)
            child_iv = (p, q) if p <= q else (q, p)
            visit(word + (a,), prefix @ mats[a], child_iv)

    def _debug_recheck(word, prefix, rng):
        # probe random extensions of a pruned node: every element strictly
        # beyond the cut, otherwise the prune bound is broken
        for _ in range(3):
            w, m = word, prefix
            for _ in range(rng.randint(0, 3)):
                choices = [a for a in letters if a != -w[-1]]
                a = rng.choice(choices)
                w, m = w + (a,), m @ mats[a]
            d = displacement_distance(m[0, 0], m[0, 1], m[1, 0], m[1, 1], x)
            if d <= cut:
                raise PruneBoundViolated(
                    f"pruned subtree contains element {w} at distance {d} <= {cut}")

    for a in letters:
        visit((a,), mats[a].copy(), targets[a])

    found.sort(key=lambda item: (len(item[0]), word_key(item[0], group.rank)))
    return found


def _apply_real(m: np.ndarray, t: float) -> float:
    return (m[0, 0] * t + m[0, 1]) / (m[1, 0] * t + m[1, 1])


def orbit_sum(group: SchottkyData, x: complex, kernel, tail_cut: float, *,
              debug: bool = False) -> float:
    """Sum of kernel(d(x, gamma x)) over all gamma != 1 with d <= tail_cut.

    kernel maps a float array of distances to values; summation is exact
    (math.fsum) over terms in canonical word order.
    """
    elements = enumerate_orbit(group, x, tail_cut, debug=debug)
    if not elements:
        return 0.0
    ds = np.array([e[2] for e in elements])
    vals = np.asarray(kernel(ds), dtype=float)
    return math.fsum(vals.tolist())


def multi_point_orbit_sums(group: SchottkyData, xs, kernel, tail_cut: float, *,
                           node_budget: int = _NODE_BUDGET) -> np.ndarray:
    """orbit_sum at several points through one shared word tree.

    A subtree is pruned only when every point is beyond its half-disk bound,
    so each point receives exactly the terms the per-point DFS would produce
    (same distances, same canonical order, same fsum reduction).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=complex))
    for x in xs:
        if not group.in_fundamental_domain(complex(x)):
            raise ValueError(f"orbit sums require points in the fundamental domain: {x}")
    if not tail_cut <= MAX_CUT:
        raise ValueError(
            f"orbit cut {tail_cut} exceeds the prune-bound resolution ceiling {MAX_CUT}")
    letters = group.letters()
    mats = {a: group.letter_matrix(a).as_array() for a in letters}
    targets = {a: group.letter_target(a) for a in letters}
    terms: list[list] = [[] for _ in range(xs.shape[0])]
    im2 = 2.0 * xs.imag * xs.imag
    nodes = 0

    def visit(word, prefix, interval, live):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise CapacityExceeded(f"orbit DFS exceeded {node_budget} nodes")
        lo, hi = interval
        c, r = 0.5 * (lo + hi), 0.5 * (hi - lo)
        pts = xs[live]
        if r <= 0.0:
            return
        inside = np.abs(pts - c) <= r
        with np.errstate(invalid="ignore", divide="ignore"):
            q = np.abs((pts - c) ** 2 - r * r) / (2.0 * r * pts.imag)
        bound = np.where(inside, 0.0, np.arccosh(np.maximum(q, 1.0)))
        ok = bound <= tail_cut  # NaN compares False: far
        if not ok.any():
            return
        live = live[ok]
        a, b, cc, dd = prefix[0, 0], prefix[0, 1], prefix[1, 0], prefix[1, 1]
        z = xs[live]
        num = -cc * z * z + (a - dd) * z + b
        qd = 1.0 + (num.real * num.real + num.imag * num.imag) / im2[live]
        dvec = np.arccosh(np.maximum(qd, 1.0))
        hit = dvec <= tail_cut
        if hit.any():
            vals = np.asarray(kernel(dvec[hit]), dtype=float)
            for idx, v in zip(live[hit], vals):
                terms[idx].append((word, float(v)))
        last = word[-1]
        for let in letters:
            if let == -last:
                continue
            lo_t, hi_t = targets[let]
            p1, p2 = _apply_real(prefix, lo_t), _apply_real(prefix, hi_t)
            child_iv = (p1, p2) if p1 <= p2 else (p2, p1)
            visit(word + (let,), prefix @ mats[let], child_iv, live)

    all_live = np.arange(xs.shape[0])
    for a0 in letters:
        visit((a0,), mats[a0].copy(), targets[a0], all_live)

    out = np.zeros(xs.shape[0])
    rank = group.rank
    for i, tl in enumerate(terms):
        if tl:
            tl.sort(key=lambda item: (len(item[0]), word_key(item[0], rank)))
            out[i] = math.fsum(v for _, v in tl)
    return out


@dataclass(frozen=True)
class OrbitCache:
    """Group elements with d(base, gamma base) <= bound, in canonical order.

    Complete for any query point z with d(base, z) <= (bound - tail_cut) / 2:
    d(base, gamma base) <= d(base,z) + d(z, gamma z) + d(gamma z, gamma base)
    (triangle inequality through z and gamma z).
    """

    base: complex
    bound: float
    words: tuple[tuple[int, ...], ...]
    matrices: np.ndarray  # (K, 2, 2), read-only

    def query_radius(self, tail_cut: float) -> float:
        return 0.5 * (self.bound - tail_cut)


_CACHE_MEMO: dict[tuple[str, complex, float], OrbitCache] = {}


def build_orbit_cache(group: SchottkyData, bound: float) -> OrbitCache:
    """Cache elements around the base point; `bound` is clamped to MAX_CUT
    (queries beyond the resulting radius fall back to a per-point DFS)."""
    base = group.base_point
    bound = min(float(bound), MAX_CUT)
    key = (group.content_hash(), base, bound)
    hit = _CACHE_MEMO.get(key)
    if hit is not None:
        return hit
    elements = enumerate_orbit(group, base, bound)
    words = tuple(e[0] for e in elements)
    mats = np.array([e[1] for e in elements]) if elements else np.empty((0, 2, 2))
    mats.flags.writeable = False
    cache = OrbitCache(base=base, bound=bound, words=words, matrices=mats)
    _CACHE_MEMO[key] = cache
    return cache


def batch_orbit_sums(cache: OrbitCache, zs, kernel, tail_cut: float, *,
                     group: SchottkyData | None = None) -> np.ndarray:
    """orbit_sum at every point of zs using the precomputed element list.

    Points within the cache's completeness radius are handled vectorized;
    farther points (only possible when the requested bound was clamped) fall
    back to the per-point DFS when `group` is given.  Term sets and their
    canonical order match the per-point DFS exactly.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    out = np.zeros(zs.shape, dtype=float)
    from .geometry import hyperbolic_distance_array

    rq = cache.query_radius(tail_cut)
    base_d = hyperbolic_distance_array(np.full(zs.shape, cache.base), zs)
    far = base_d > rq
    if np.any(far):
        if group is None:
            worst = float(np.max(base_d))
            raise ValueError(
                f"query point at distance {worst:.3f} from base exceeds cache "
                f"radius {rq:.3f}; rebuild with a larger bound or pass group=")
        out[far] = multi_point_orbit_sums(group, zs[far], kernel, tail_cut)
    near = ~far
    if np.any(near) and cache.matrices.shape[0] > 0:
        znear = zs[near]
        dists = displacement_distance_batch(cache.matrices, znear)
        mask = dists <= tail_cut
        flat_vals = np.zeros_like(dists)
        if np.any(mask):
            flat_vals[mask] = kernel(dists[mask])
        sums = np.zeros(znear.shape, dtype=float)
        for j in range(znear.shape[0]):
            col = flat_vals[:, j][mask[:, j]]
            sums[j] = math.fsum(col.tolist())
        out[near] = sums
    return out
