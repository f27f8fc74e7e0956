"""Schottky group data: generators, paired boundary intervals, validation, I/O.

A rank-r group is given by r hyperbolic Moebius maps g_i together with 2r
pairwise disjoint closed real intervals I^-_i, I^+_i such that g_i maps the
exterior of the half-disk over I^-_i onto the interior of the half-disk over
I^+_i.  The fundamental domain is the common exterior of the 2r half-disks.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InputError, NonHyperbolicGenerator, OverlappingIntervals
from .geometry import (
    MobiusMap,
    dist_to_halfdisk,
    halfdisk_center_radius,
    halfdisk_normal,
    hyperbolic_distance,
    point_in_halfdisk,
)

GROUP_SCHEMA_VERSION = 1

# endpoint-pairing check tolerance used by validation
_PAIRING_TOL = 1e-9


@dataclass(frozen=True)
class IntervalPair:
    """Paired closed boundary intervals of one generator: g maps ext(minus) onto int(plus)."""

    minus: tuple[float, float]
    plus: tuple[float, float]


@dataclass(frozen=True)
class SchottkyData:
    """Validated Schottky group: generators plus pairing intervals.

    Immutable after construction; derived geometric tables are precomputed.
    Letters are the nonzero integers -r..-1, 1..r; letter +i acts by g_i and
    letter -i by g_i^{-1}.
    """

    rank: int
    generators: tuple[MobiusMap, ...]
    intervals: tuple[IntervalPair, ...]
    base_point: complex = 1j
    template: dict | None = None
    validation: tuple[dict, ...] = field(default=(), compare=False, repr=False)

    # --- letters -------------------------------------------------------

    def letters(self) -> tuple[int, ...]:
        """All letters in the canonical order -r < ... < -1 < 1 < ... < r."""
        r = self.rank
        return tuple(range(-r, 0)) + tuple(range(1, r + 1))

    def letter_matrix(self, letter: int) -> MobiusMap:
        if letter > 0:
            return self.generators[letter - 1]
        return self.generators[-letter - 1].inverse()

    def letter_target(self, letter: int) -> tuple[float, float]:
        """Interval whose half-disk receives every point from letter's allowed domain."""
        pair = self.intervals[abs(letter) - 1]
        return pair.plus if letter > 0 else pair.minus

    def letter_forbidden(self, letter: int) -> tuple[float, float]:
        """Interval whose half-disk the letter must not be applied to (its inverse's target)."""
        pair = self.intervals[abs(letter) - 1]
        return pair.minus if letter > 0 else pair.plus

    # --- derived geometry ---------------------------------------------

    def all_disks(self) -> list[tuple[float, float]]:
        out = []
        for pair in self.intervals:
            out.append(pair.minus)
            out.append(pair.plus)
        return out

    def disk_centers_radii(self) -> np.ndarray:
        """(2r, 2) array of (center, radius) rows for membership tests."""
        return np.array([halfdisk_center_radius(*iv) for iv in self.all_disks()])

    def disk_normals(self) -> np.ndarray:
        """(2r, 3) unit normals of the bounding geodesics (hyperboloid model)."""
        return np.array([halfdisk_normal(*iv) for iv in self.all_disks()])

    def in_fundamental_domain(self, z: complex) -> bool:
        return all(not point_in_halfdisk(z, lo, hi) for lo, hi in self.all_disks())

    def min_translation_length(self) -> float:
        return min(g.translation_length() for g in self.generators)

    def word_matrix(self, word: tuple[int, ...]) -> MobiusMap:
        m = MobiusMap.identity()
        for letter in word:
            m = m * self.letter_matrix(letter)
        return m

    # --- hashing and serialization ------------------------------------

    def content_hash(self) -> str:
        """SHA-256 over the canonical decimal-string serialization.

        Covers rank, generators, intervals and base point only, so the same
        group hashes identically whether built from a template or explicitly.
        """
        doc = self.to_document()
        doc.pop("meta", None)
        doc.pop("template", None)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("ascii")).hexdigest()

    def to_document(self) -> dict:
        """JSON document with all reals as decimal strings (schema shipped in docs)."""
        def fmt(x: float) -> str:
            return format(float(x), ".17g")

        doc = {
            "schema": GROUP_SCHEMA_VERSION,
            "rank": self.rank,
            "generators": [[fmt(g.a), fmt(g.b), fmt(g.c), fmt(g.d)] for g in self.generators],
            "intervals": [
                {"minus": [fmt(p.minus[0]), fmt(p.minus[1])],
                 "plus": [fmt(p.plus[0]), fmt(p.plus[1])]}
                for p in self.intervals
            ],
            "base_point": [fmt(self.base_point.real), fmt(self.base_point.imag)],
        }
        if self.template is not None:
            doc["template"] = self.template
        return doc


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def _pairing_generator(p: float, q: float, w: float) -> MobiusMap:
    """Hyperbolic map with isometric circles of radius w centered at p (source)
    and q (target): maps ext of the half-disk over [p-w, p+w] onto the interior
    of the half-disk over [q-w, q+w]."""
    return MobiusMap(q / w, -(q * p) / w - w, 1.0 / w, -p / w)


def symmetric_template(rank: int, centers=None, half_width: float = 0.3) -> "SchottkyData":
    """Symmetric configuration: generator i pairs [-c_i - w, -c_i + w] -> [c_i - w, c_i + w]."""
    if centers is None:
        centers = [1.0 + 2.0 * i for i in range(rank)]
    centers = [float(c) for c in centers]
    if len(centers) != rank:
        raise InputError(f"need {rank} centers, got {len(centers)}")
    gens = []
    pairs = []
    for c in centers:
        gens.append(_pairing_generator(-c, c, half_width))
        pairs.append(IntervalPair(minus=(-c - half_width, -c + half_width),
                                  plus=(c - half_width, c + half_width)))
    template = {
        "kind": "symmetric",
        "rank": rank,
        "centers": [format(c, ".17g") for c in centers],
        "half_width": format(half_width, ".17g"),
    }
    return _validated(rank, tuple(gens), tuple(pairs), 1j, template)


def cylinder_template(length: float) -> "SchottkyData":
    """Rank-1 group generated by the hyperbolic map of displacement `length`
    whose axis is the unit semicircle (fixed points -1 and +1)."""
    if not length > 0:
        raise InputError(f"cylinder length must be positive, got {length}")
    t = 0.5 * length
    g = MobiusMap(math.cosh(t), math.sinh(t), math.sinh(t), math.cosh(t))
    # isometric-circle intervals: [-coth(l/4), -tanh(l/4)] and its mirror
    lo, hi = math.tanh(0.25 * length), 1.0 / math.tanh(0.25 * length)
    pair = IntervalPair(minus=(-hi, -lo), plus=(lo, hi))
    template = {"kind": "cylinder", "length": format(float(length), ".17g")}
    return _validated(1, (g,), (pair,), 1j, template)


def build_schottky(
    rank: int | None = None,
    generators=None,
    intervals=None,
    *,
    template: dict | None = None,
    base_point: complex = 1j,
) -> SchottkyData:
    """Build and validate a Schottky group.

    Either pass explicit `generators` (length-4 rows or MobiusMaps) together
    with `intervals` ([{"minus": [lo, hi], "plus": [lo, hi]}, ...]), or a
    template: {"kind": "cylinder", "length": l} or
    {"kind": "symmetric", "rank": r, "centers": [...], "half_width": w}.
    """
    if template is not None:
        kind = template.get("kind")
        if kind == "cylinder":
            return cylinder_template(float(template["length"]))
        if kind == "symmetric":
            centers = template.get("centers")
            if centers is not None:
                centers = [float(c) for c in centers]
            return symmetric_template(
                int(template["rank"]),
                centers=centers,
                half_width=float(template.get("half_width", 0.3)),
            )
        raise InputError(f"unknown template kind: {kind!r}")
    if rank is None or generators is None or intervals is None:
        raise InputError("need rank, generators and intervals (or a template)")
    gens = tuple(
        g if isinstance(g, MobiusMap) else MobiusMap(*[float(v) for v in g])
        for g in generators
    )
    pairs = []
    for iv in intervals:
        if isinstance(iv, IntervalPair):
            pairs.append(iv)
        else:
            pairs.append(IntervalPair(
                minus=(float(iv["minus"][0]), float(iv["minus"][1])),
                plus=(float(iv["plus"][0]), float(iv["plus"][1])),
            ))
    return _validated(int(rank), gens, tuple(pairs), complex(base_point), None)


def _validated(rank, gens, pairs, base_point, template) -> SchottkyData:
    report = validate(rank, gens, pairs, base_point)
    failed = [r for r in report if not r["passed"]]
    if failed:
        first = failed[0]
        exc = {"disjoint_intervals": OverlappingIntervals,
               "hyperbolic_generators": NonHyperbolicGenerator}.get(first["check"], InputError)
        raise exc(f"{first['check']} failed: {first['detail']}")
    return SchottkyData(rank=rank, generators=gens, intervals=pairs,
                        base_point=base_point, template=template,
                        validation=tuple(report))


def validate(rank, gens, pairs, base_point) -> list[dict]:
    """Run every construction invariant; one report entry per check."""
    report: list[dict] = []

    def record(check: str, passed: bool, detail: str):
        report.append({"check": check, "passed": bool(passed), "detail": detail})

    record("rank_positive", rank >= 1, f"rank = {rank}")
    record("generator_count", len(gens) == rank, f"{len(gens)} generators for rank {rank}")
    record("interval_count", len(pairs) == rank, f"{len(pairs)} interval pairs for rank {rank}")

    dets = [abs(g.det - 1.0) for g in gens]
    record("unit_determinant", max(dets, default=0.0) <= 1e-12,
           f"max |det-1| = {max(dets, default=0.0):.3e}")

    bad_tr = [i + 1 for i, g in enumerate(gens) if abs(g.trace) <= 2.0]
    record("hyperbolic_generators", not bad_tr,
           "all |tr| > 2" if not bad_tr else f"|tr| <= 2 for generators {bad_tr}")

    # pairwise disjoint closed intervals
    disks = []
    for p in pairs:
        disks.append(p.minus)
        disks.append(p.plus)
    overlap = None
    srt = sorted(disks)
    for (a_lo, a_hi), (b_lo, b_hi) in zip(srt, srt[1:]):
        if b_lo <= a_hi:
            overlap = ((a_lo, a_hi), (b_lo, b_hi))
            break
    record("disjoint_intervals", overlap is None,
           "closed intervals pairwise disjoint" if overlap is None
           else f"intervals touch/overlap: {overlap[0]} and {overlap[1]}")

    # pairing: g maps exterior of minus onto interior of plus.  Checked on the
    # endpoints (boundary -> boundary) plus one exterior sample point.
    if overlap is None and not bad_tr and len(gens) == rank == len(pairs):
        worst = 0.0
        pair_ok = True
        detail = "endpoint images match and exterior sample maps inside"
        for g, p in zip(gens, pairs):
            lo, hi = p.minus
            images = sorted((g.apply_real(lo), g.apply_real(hi)))
            err = max(abs(images[0] - p.plus[0]), abs(images[1] - p.plus[1]))
            worst = max(worst, err)
            if err > _PAIRING_TOL:
                pair_ok = False
                detail = f"endpoint image error {err:.3e} exceeds {_PAIRING_TOL}"
                break
            far = max(abs(v) for d in disks for v in d) + 1.0
            img = g.apply_real(far)
            if not (p.plus[0] < img < p.plus[1]):
                pair_ok = False
                detail = f"exterior sample {far} maps to {img}, outside plus interval"
                break
        record("pairing", pair_ok, detail + (f" (worst endpoint error {worst:.3e})" if pair_ok else ""))

    if base_point.imag <= 0:
        record("base_point_interior", False, f"Im base = {base_point.imag}")
    else:
        outside = all(not point_in_halfdisk(base_point, lo, hi) for lo, hi in disks) \
            if overlap is None else False
        record("base_point_in_domain", outside,
               "base point lies in the fundamental domain" if outside
               else "base point inside a half-disk")
    return report


# ---------------------------------------------------------------------------
# group files
# ---------------------------------------------------------------------------

def load_group_document(doc: dict) -> SchottkyData:
    try:
        rank = int(doc["rank"])
        gens = [[float(v) for v in row] for row in doc["generators"]]
        intervals = doc["intervals"]
        base = doc.get("base_point", ["0", "1"])
        base_point = complex(float(base[0]), float(base[1]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed group document: {exc}") from exc
    data = build_schottky(rank, gens, intervals, base_point=base_point)
    if doc.get("template") is not None:
        import dataclasses

        data = dataclasses.replace(data, template=doc["template"])
    return data


def load_group(path: str | Path) -> SchottkyData:
    """Load a group specification file (JSON, reals as decimal strings).

    Bare names resolve against the shipped fixtures (cylinder.json, thin2.json).
    """
    p = Path(path)
    if not p.exists():
        fixture = resources.files("schottkylab") / "fixtures" / p.name
        if fixture.is_file():
            return load_group_document(json.loads(fixture.read_text()))
        raise InputError(f"group file not found: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"group file is not valid JSON: {path}: {exc}") from exc
    return load_group_document(doc)


def save_group(data: SchottkyData, path: str | Path, *, meta: dict | None = None) -> None:
    doc = data.to_document()
    if meta:
        doc["meta"] = meta
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# convenient aliases used throughout tests and the CLI
def cylinder(length: float = 2.0) -> SchottkyData:
    return cylinder_template(length)


def distance_to_domain_walls(data: SchottkyData, z: complex) -> float:
    """Distance from z to the nearest bounding half-disk (0 if inside one)."""
    return min(dist_to_halfdisk(z, lo, hi) for lo, hi in data.all_disks())


def base_to_axis_distance(data: SchottkyData) -> float:
    """Max over generators of d(base, axis of g); a crude core-size proxy."""
    out = 0.0
    for g in data.generators:
        p, q = g.fixed_points()
        lo, hi = min(p, q), max(p, q)
        c, r = halfdisk_center_radius(lo, hi)
        z = data.base_point
        q2 = abs((z - c) ** 2 - r * r) / (2.0 * r * z.imag)
        out = max(out, math.acosh(max(q2, 1.0)))
    return out
