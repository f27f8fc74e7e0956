"""The verification suite: every identity the package makes computable, run at
fixed tolerances on the shipped fixtures (the hyperbolic cylinder of
displacement 2 and the thin symmetric rank-2 group).

Each criterion returns a record {criterion, passed, tolerance, details,
elapsed_s}; run_all prints one pass/fail line per criterion.  Tolerances are
pinned here and nowhere else.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .kernels import RadialTestFunction, heat
from .schottky import SchottkyData, load_group, symmetric_template
from .traces import (
    geometric_side,
    kernel_difference_trace,
    orbital_integral,
    resolvent_regularized_trace,
    spectral_side,
)
from .words import (
    canonical_necklace,
    cyclic_reduce,
    enumerate_classes,
    invert_word,
    reduce_word,
)
from .zeros import Rect, enrich_with_residues, zero_search
from .zeta import (
    TRIVIAL,
    L_gamma,
    class_table,
    critical_exponent,
    determinant_eval,
    functional_equation_defect,
    zeta_product,
)


class _Ctx:
    """Shared fixture state so criteria reuse tables."""

    def __init__(self):
        self.cylinder = load_group("cylinder.json")
        self.thin2 = load_group("thin2.json")
        self.cyl_table = class_table(self.cylinder)
        self.thin_table = class_table(self.thin2)


def _record(name, passed, tolerance, details, t0):
    return {
        "criterion": name,
        "passed": bool(passed),
        "tolerance": tolerance,
        "details": details,
        "elapsed_s": time.perf_counter() - t0,
    }


# --- 1: cylinder zeta closed form -----------------------------------------

def criterion_1(ctx: _Ctx) -> dict:
    t0 = time.perf_counter()
    lam = 0.5
    z = zeta_product(ctx.cylinder, TRIVIAL, lam, table=ctx.cyl_table)
    # independent oracle: the direct product over k of (1 - e^{-2(1+k)})^2
    oracle = 1.0
    for k in range(40):
        oracle *= (1.0 - math.exp(-2.0 * (1.0 + k))) ** 2
    rel = abs(z.value - oracle) / abs(oracle)
    return _record("1-cylinder-zeta-product", rel <= 1e-9, 1e-9,
                   {"value": z.value.real, "oracle": oracle, "rel_error": rel}, t0)


# --- 2: product vs determinant continuation --------------------------------

def criterion_2(ctx: _Ctx) -> dict:
    t0 = time.perf_counter()
    res = [0.05, 0.25, 0.5, 0.8]
    ims = [-1.0, -0.3, 0.0, 0.4, 1.2]
    worst = 0.0
    for re in res:
        for im in ims:
            lam = complex(re, im)
            zp = zeta_product(ctx.thin2, TRIVIAL, lam, table=ctx.thin_table)
            zd = determinant_eval(ctx.thin2, TRIVIAL, lam, N=12,
                                  table=ctx.thin_table)
            rel = abs(zp.value - zd.values[0]) / abs(zp.value)
            worst = max(worst, rel)
    return _record("2-continuation-crossvalidation", worst <= 1e-8, 1e-8,
                   {"points": len(res) * len(ims), "worst_rel_error": worst}, t0)


# --- 3: critical exponent ---------------------------------------------------

def criterion_3(ctx: _Ctx) -> dict:
    t0 = time.perf_counter()
    ce_cyl = critical_exponent(ctx.cylinder, tol=1e-10, table=ctx.cyl_table)
    ce_thin = critical_exponent(ctx.thin2, table=ctx.thin_table)
    wide = symmetric_template(2, centers=[1.0, 3.0], half_width=0.12)
    narrow = symmetric_template(2, centers=[1.0, 3.0], half_width=0.10)
    d_wide = critical_exponent(wide, N=8, table=enumerate_classes(wide, 8))
    d_narrow = critical_exponent(narrow, N=8, table=enumerate_classes(narrow, 8))
    ok = (abs(ce_cyl.delta_classical) <= 1e-10
          and ce_thin.agreement <= 1e-6
          and d_narrow.delta_classical < d_wide.delta_classical)
    return _record("3-critical-exponent", ok, 1e-6, {
        "cylinder_delta": ce_cyl.delta_classical,
        "thin2_delta": ce_thin.delta_classical,
        "thin2_poincare": ce_thin.poincare_delta,
        "thin2_agreement": ce_thin.agreement,
        "delta_shrink_pair": [d_wide.delta_classical, d_narrow.delta_classical],
    }, t0)


# --- 4: residue integrality -------------------------------------------------

def criterion_4(ctx: _Ctx) -> dict:
    t0 = time.perf_counter()
    zeros = zero_search(ctx.thin2, TRIVIAL, Rect(-0.45, -0.05, -1.3, 1.3),
                        grid=(6, 10), table=ctx.thin_table)
    smallest = sorted(zeros, key=lambda r: (abs(r.location), r.location.imag))[:3]
    enriched = enrich_with_residues(ctx.thin2, TRIVIAL, smallest, 0.12,
                                    table=ctx.thin_table)
    from .zeros import residue_check

    details = []
    ok = len(enriched) == 3
    for r in enriched:
        rc = residue_check(ctx.thin2, TRIVIAL, r.location, 0.1,
                           table=ctx.thin_table)
        match = rc["nearest_integer"] == rc["ord_mu"] + rc["ord_minus_mu"]
        ok = ok and r.integer_defect <= 1e-3 and match
        details.append({
            "location": r.location,
            "order": r.order,
            "residue": r.residue_of_L,
            "integer_defect": r.integer_defect,
            "ord_mu": rc["ord_mu"],
            "ord_minus_mu": rc["ord_minus_mu"],
        })
    return _record("4-residue-integrality", ok, 1e-3,
                   {"resonances": details}, t0)


# --- 5: geometric side vs kernel-difference trace ---------------------------

_KD_SETTINGS = {
    # (group name, t): radius, rel_tol
    ("cylinder", 0.5): (4.8, 2e-8),
    ("cylinder", 1.0): (6.2, 2e-8),
    ("cylinder", 2.0): (8.6, 2e-8),
    ("thin2", 0.5): (4.2, 3e-6),
    ("thin2", 1.0): (5.5, 3e-6),
    ("thin2", 2.0): (7.6, 3e-6),
}


def criterion_5(ctx: _Ctx) -> dict:
    t0 = time.perf_counter()
    details = {}
    ok = True
    for name, group, table, tol in (("cylinder", ctx.cylinder, ctx.cyl_table, 1e-6),
                                    ("thin2", ctx.thin2, ctx.thin_table, 1e-3)):
        for t in (0.5, 1.0, 2.0):
            f = heat(t)
            gs = geometric_side(group, f, table=table)
            radius, rel_tol = _KD_SETTINGS[(name, t)]
            kd = kernel_difference_trace(group, f, radius, rel_tol=rel_tol)
            rel = abs(gs.value - kd.value) / gs.value
            details[f"{name}_t={t}"] = {"geometric": gs.value,
                                        "kernel_difference": kd.value,
                                        "rel_defect": rel, "tolerance": tol}
            ok = ok and rel <= tol
    return _record("5-kernel-difference-identity", ok, "1e-6 / 1e-3",
                   details, t0)


# --- 6: spectral side --------------------------------------------------------

def criterion_6(ctx: _Ctx) -> dict:
    t0 = time.perf_counter()
    details = {}
    ok = True
    for name, group, table, tol in (("cylinder", ctx.cylinder, ctx.cyl_table, 1e-6),
                                    ("thin2", ctx.thin2, ctx.thin_table, 1e-3)):
        for t in (0.5, 1.0, 2.0):
            f = heat(t)
            gs = geometric_side(group, f, table=table)
            sp = spectral_side(group, f, table=table)
            rel = abs(gs.value - sp.value) / gs.value
            # residual defect doubles as the empirical bound on the possible
            # point-mass term at the bottom of the spectrum
            details[f"{name}_t={t}"] = {"geometric": gs.value,
                                        "spectral": sp.value,
                                        "rel_defect": rel,
                                        "empirical_point_mass_bound":
                                            abs(gs.value - sp.value)
                                            / float(f.spectral_transform(np.array([0.0]))[0]),
                                        "tolerance": tol}
            ok = ok and rel <= tol
    return _record("6-spectral-side", ok, "1e-6 / 1e-3", details, t0)


# --- 7: resolvent trace identity ---------------------------------------------

_T5_SETTINGS = {
    ("cylinder", 0.75): dict(R=14.2, rel_tol=3e-8, tail_cut=26.5),
    ("cylinder", 1.0): dict(R=12.5, rel_tol=3e-8, tail_cut=22.0),
    ("thin2", 0.75): dict(R=10.0, rel_tol=1e-5, kernel_eps=1e-11,
                          quad_kwargs={"tail_tol": 3e-6}),
    ("thin2", 1.0): dict(R=10.0, rel_tol=1e-5, kernel_eps=1e-11,
                         quad_kwargs={"tail_tol": 3e-6}),
}


def criterion_7(ctx: _Ctx) -> dict:
    t0 = time.perf_counter()
    details = {}
    ok = True
    for name, group, table, tol in (("cylinder", ctx.cylinder, ctx.cyl_table, 1e-6),
                                    ("thin2", ctx.thin2, ctx.thin_table, 1e-3)):
        for lam in (0.75, 1.0):
            kw = dict(_T5_SETTINGS[(name, lam)])
            radius = kw.pop("R")
            out = resolvent_regularized_trace(group, lam, radius, table=table, **kw)
            details[f"{name}_lam={lam}"] = {"Q": out["Q"].value,
                                            "zeta_side": out["zeta_side"],
                                            "t5_defect": out["t5_defect"],
                                            "tolerance": tol}
            ok = ok and out["t5_defect"] <= tol
    return _record("7-resolvent-trace-identity", ok, "1e-6 / 1e-3", details, t0)


# --- 8: functional equation ---------------------------------------------------

def criterion_8(ctx: _Ctx) -> dict:
    t0 = time.perf_counter()
    d_cyl = functional_equation_defect(ctx.cylinder, TRIVIAL, 0.3,
                                       table=ctx.cyl_table)
    d1 = functional_equation_defect(ctx.thin2, TRIVIAL, 0.1,
                                    table=ctx.thin_table)
    d2 = functional_equation_defect(ctx.thin2, TRIVIAL, 0.1j,
                                    table=ctx.thin_table)
    ok = d_cyl <= 1e-8 and d1 <= 1e-6 and d2 <= 1e-6
    return _record("8-functional-equation", ok, "1e-8 / 1e-6",
                   {"cylinder_0.3": d_cyl, "thin2_0.1": d1, "thin2_0.1i": d2}, t0)


# --- 9: property mini-suite ----------------------------------------------------

def criterion_9(ctx: _Ctx) -> dict:
    t0 = time.perf_counter()
    checks = {}

    # necklace canonicalization invariant under rotation
    words = [(1, 2, -1, 2), (2, 2, -1), (1, -2, 1, -2, 2)]
    ok_neck = True
    for w in words:
        w = cyclic_reduce(w)
        base = canonical_necklace(w)
        for k in range(1, len(w)):
            ok_neck &= canonical_necklace(w[k:] + w[:k]) == base
    checks["necklace_rotation_invariance"] = ok_neck

    # class table equals brute-force dedup of reduced words up to length 6
    table = enumerate_classes(ctx.thin2, 6)
    brute = set()
    def grow(word):
        if len(word) >= 1:
            red = cyclic_reduce(word)
            if red:
                brute.add(canonical_necklace(red))
        if len(word) == 6:
            return
        for a in (-2, -1, 1, 2):
            if word and a == -word[-1]:
                continue
            grow(word + (a,))
    grow(())
    mine = {r.word for r in table.records}
    checks["brute_force_class_table_n6"] = mine == brute

    # inverse classes appear with identical data
    by_word = {r.word: r for r in table.records}
    ok_inv = True
    for r in table.records[:200]:
        inv = by_word[canonical_necklace(invert_word(r.word))]
        ok_inv &= (abs(inv.length - r.length) <= 1e-9 and inv.sign == r.sign)
    checks["inverse_class_symmetry"] = ok_inv

    # conjugation/symmetry invariants of the zeta data
    lam = 0.4 + 0.7j
    z1 = zeta_product(ctx.thin2, TRIVIAL, lam, table=ctx.thin_table).value
    z2 = zeta_product(ctx.thin2, TRIVIAL, lam.conjugate(), table=ctx.thin_table).value
    checks["zeta_conjugation_symmetry"] = abs(z1.conjugate() - z2) <= 1e-10 * abs(z1)
    lv = L_gamma(ctx.thin2, TRIVIAL, 0.23j, table=ctx.thin_table)
    le = L_gamma(ctx.thin2, TRIVIAL, -0.23j, table=ctx.thin_table)
    checks["L_even_and_real_on_axis"] = (lv == le and abs(lv.imag) <= 1e-10)

    # transform pair: h(xi) = Integral g(u) e^{-i xi u} du on a grid
    # (g is even; integrate the smooth half line to handle the resolvent corner)
    from scipy.integrate import simpson

    ok_pair = True
    for f in (heat(1.0), RadialTestFunction("resolvent", 0.8)):
        u = np.linspace(0.0, 80.0, 32001)
        g = f.geodesic_transform(u)
        for xi in (0.0, 0.5, 1.0, 2.0):
            h_num = 2.0 * float(simpson(g * np.cos(xi * u), x=u))
            ok_pair &= abs(h_num - float(f.spectral_transform(np.array([xi]))[0])) <= 1e-8
    checks["fourier_transform_pair"] = ok_pair

    # orbital integral dual path at 1e-8
    ok_orb = True
    for t in (0.5, 1.0, 2.0):
        for ell in (1.0, 2.0, 3.0):
            a = orbital_integral(ell, heat(t), "closed")
            b = orbital_integral(ell, heat(t), "quadrature")
            ok_orb &= abs(a - b) / a <= 1e-8
    checks["orbital_integral_dual_path"] = ok_orb

    # CLI determinism at jobs 1 vs 4
    from . import cli

    out1 = cli.capture_run(["zeta-eval", "--group", "thin2.json", "--lam", "0.5",
                            "--lam", "0.8+0.3j", "--method", "product", "--jobs", "1"])
    out4 = cli.capture_run(["zeta-eval", "--group", "thin2.json", "--lam", "0.5",
                            "--lam", "0.8+0.3j", "--method", "product", "--jobs", "4"])
    checks["cli_determinism_jobs_1_vs_4"] = (
        cli.strip_wall_time(out1) == cli.strip_wall_time(out4))

    ok = all(checks.values())
    return _record("9-property-suites", ok, "various", checks, t0)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def run_all(printer=print) -> list[dict]:
    """Run every criterion, printing one pass/fail line each."""
    ctx = _Ctx()
    results = []
    for crit in CRITERIA:
        rec = crit(ctx)
        results.append(rec)
        status = "PASS" if rec["passed"] else "FAIL"
        printer(f"{status} {rec['criterion']} ({rec['elapsed_s']:.1f}s)")
    return results
