"""Command-line drivers: validation, class tables, zeta evaluation, zero
search, trace comparisons, and the full verification suite.

Records are JSON lines on stdout (or --out file); diagnostics go to stderr.
Exit codes: 0 success, 1 verification failure (a defect above tolerance),
2 input error.
"""

from __future__ import annotations

import argparse
import io
import re
import sys
import time
from contextlib import redirect_stdout

import numpy as np

from . import acceptance
from .cache import Cache
from .errors import InputError, SchottkyLabError, VerificationFailure
from .kernels import RadialTestFunction
from .parallel import ordered_map
from .records import ResultRecord, csv_lines, dumps_canonical
from .schottky import load_group
from .traces import (
    geometric_side,
    kernel_difference_trace,
    resolvent_regularized_trace,
    spectral_side,
)
from .words import ClassTable, ConjClassRecord, enumerate_classes
from .zeros import Rect, zero_search
from .zeta import (
    DEFAULT_TRACE_ORDER,
    L_gamma,
    critical_exponent,
    default_n_max,
    sigma_by_name,
    zeta_determinant,
    zeta_product,
)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise InputError(f"cannot parse complex number {text!r}") from exc


def _emit(records: list[ResultRecord], args, csv_rows=None, csv_columns=None) -> None:
    if args.format == "csv" and csv_rows is not None:
        lines = csv_lines(csv_rows, csv_columns)
    else:
        lines = [r.to_json_line() for r in records]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "a") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table_payload(table: ClassTable) -> dict:
    return {
        "group_hash": table.group_hash,
        "rank": table.rank,
        "n_max": table.n_max,
        "records": [[list(r.word), len(r.primitive_root), r.power,
                     r.length, r.sign, r.trace] for r in table.records],
    }


def _table_from_payload(doc: dict) -> ClassTable:
    records = []
    for word, root_len, power, length, sign, trace in doc["records"]:
        w = tuple(int(x) for x in word)
        records.append(ConjClassRecord(
            word=w, primitive_root=w[:root_len], power=int(power),
            length=float(length), primitive_length=float(length) / int(power),
            sign=int(sign), trace=float(trace)))
    return ClassTable(group_hash=doc["group_hash"], rank=int(doc["rank"]),
                      n_max=int(doc["n_max"]), records=tuple(records))


def _load_table(group, n_max: int, cache: Cache) -> ClassTable:
    payload, hit = cache.lookup(
        "classes", group.content_hash(), {"n_max": n_max},
        lambda: _table_payload(enumerate_classes(group, n_max)))
    if hit:
        print(f"cache hit: classes n_max={n_max}", file=sys.stderr)
        return _table_from_payload(payload)
    return _table_from_payload(payload)


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------

def _cmd_group_validate(args) -> int:
    t0 = time.perf_counter()
    group = load_group(args.group)
    rec = ResultRecord(
        group_hash=group.content_hash(), command="group-validate",
        inputs={"group": str(args.group)},
        outputs={"rank": group.rank,
                 "validation": list(group.validation),
                 "min_translation_length": group.min_translation_length()},
        wall_time_s=time.perf_counter() - t0)
    _emit([rec], args)
    return 0


def _cmd_classes(args) -> int:
    t0 = time.perf_counter()
    group = load_group(args.group)
    n_max = args.n_max or default_n_max(group)
    cache = Cache(args.cache_dir)
    table = _load_table(group, n_max, cache)
    counts = table.counts_per_length()
    rec = ResultRecord(
        group_hash=group.content_hash(), command="classes",
        inputs={"group": str(args.group), "n_max": n_max},
        outputs={"classes": len(table.records),
                 "counts_per_length": {str(k): v for k, v in sorted(counts.items())},
                 "min_length_per_word_length":
                     {str(k): v for k, v in sorted(table.min_length_per_word_length().items())}},
        wall_time_s=time.perf_counter() - t0)
    _emit([rec], args)
    return 0


def _cmd_zeta_eval(args) -> int:
    group = load_group(args.group)
    cache = Cache(args.cache_dir)
    n_max = args.n_max or default_n_max(group, args.trace_order)
    table = _load_table(group, n_max, cache)
    sigma = sigma_by_name(args.sigma)
    lams = [_parse_complex(s) for s in args.lam]

    def one(lam: complex):
        t0 = time.perf_counter()
        if args.method == "product":
            z = zeta_product(group, sigma, lam, k_max=args.k_max, table=table)
        else:
            z = zeta_determinant(group, sigma, lam, N=args.trace_order, table=table)
        return ResultRecord(
            group_hash=group.content_hash(), command="zeta-eval",
            inputs={"sigma": sigma.name, "lambda": lam, "method": args.method,
                    "n_max": table.n_max, "trace_order": args.trace_order},
            outputs={"value": z.value, "tail_bound": z.tail_bound,
                     "truncation": list(z.truncation)},
            wall_time_s=time.perf_counter() - t0)

    records = ordered_map(one, lams, args.jobs)
    rows = [{"group_hash": group.content_hash(), "sigma": sigma.name,
             "lambda_re": lam.real, "lambda_im": lam.imag,
             "value_re": r.outputs["value"].real, "value_im": r.outputs["value"].imag,
             "method": args.method, "tail_bound": r.outputs["tail_bound"]}
            for lam, r in zip(lams, records)]
    _emit(records, args, rows, ["group_hash", "sigma", "lambda_re", "lambda_im",
                                "value_re", "value_im", "method", "tail_bound"])
    return 0


def _cmd_zeta_zeros(args) -> int:
    t0 = time.perf_counter()
    group = load_group(args.group)
    cache = Cache(args.cache_dir)
    table = _load_table(group, args.n_max or default_n_max(group, args.trace_order), cache)
    rect = Rect(*args.rect)
    zeros = zero_search(group, sigma_by_name(args.sigma), rect,
                        grid=tuple(args.grid), N=args.trace_order, table=table)
    outputs = {"zeros": [{"lambda": z.location, "order": z.order} for z in zeros],
               "total_order": sum(z.order for z in zeros)}
    rec = ResultRecord(
        group_hash=group.content_hash(), command="zeta-zeros",
        inputs={"sigma": args.sigma, "rect": list(args.rect), "grid": list(args.grid),
                "trace_order": args.trace_order},
        outputs=outputs, wall_time_s=time.perf_counter() - t0)
    rows = [{"lambda_re": z.location.real, "lambda_im": z.location.imag,
             "order": z.order} for z in zeros]
    _emit([rec], args, rows, ["lambda_re", "lambda_im", "order"])
    return 0


def _cmd_delta(args) -> int:
    t0 = time.perf_counter()
    group = load_group(args.group)
    cache = Cache(args.cache_dir)
    table = _load_table(group, args.n_max or default_n_max(group), cache)
    ce = critical_exponent(group, tol=args.tol, table=table)
    rec = ResultRecord(
        group_hash=group.content_hash(), command="delta",
        inputs={"group": str(args.group), "tol": args.tol},
        outputs={"delta_classical": ce.delta_classical,
                 "delta_gamma": ce.delta_gamma,
                 "poincare_delta": ce.poincare_delta,
                 "agreement": ce.agreement},
        wall_time_s=time.perf_counter() - t0)
    _emit([rec], args)
    if args.fail_above is not None and ce.agreement > args.fail_above:
        return 1
    return 0


def _cmd_l_gamma(args) -> int:
    group = load_group(args.group)
    cache = Cache(args.cache_dir)
    table = _load_table(group, args.n_max or default_n_max(group, args.trace_order), cache)
    sigma = sigma_by_name(args.sigma)
    lams = [_parse_complex(s) for s in args.lam]

    def one(lam: complex):
        t0 = time.perf_counter()
        val = L_gamma(group, sigma, lam, args.method, table=table, N=args.trace_order)
        return ResultRecord(
            group_hash=group.content_hash(), command="l-gamma",
            inputs={"sigma": sigma.name, "lambda": lam, "method": args.method},
            outputs={"value": val},
            wall_time_s=time.perf_counter() - t0)

    records = ordered_map(one, lams, args.jobs)
    rows = [{"group_hash": group.content_hash(), "sigma": sigma.name,
             "lambda_re": lam.real, "lambda_im": lam.imag,
             "value_re": r.outputs["value"].real, "value_im": r.outputs["value"].imag,
             "method": args.method, "tail_bound": 0.0}
            for lam, r in zip(lams, records)]
    _emit(records, args, rows, ["group_hash", "sigma", "lambda_re", "lambda_im",
                                "value_re", "value_im", "method", "tail_bound"])
    return 0


def _cmd_trace_compare(args) -> int:
    group = load_group(args.group)
    cache = Cache(args.cache_dir)
    table = _load_table(group, args.n_max or default_n_max(group), cache)
    if args.kind != "heat":
        raise InputError("trace-compare supports kind 'heat'")
    worst = 0.0

    def one(t: float):
        t0 = time.perf_counter()
        f = RadialTestFunction("heat", t)
        radius = args.radius if args.radius else 1.3 * (27.0 * t) ** 0.5 + 0.3
        gs = geometric_side(group, f, table=table)
        kd = kernel_difference_trace(group, f, radius, rel_tol=args.rel_tol)
        sp = spectral_side(group, f, table=table)
        return ResultRecord(
            group_hash=group.content_hash(), command="trace-compare",
            inputs={"kind": "heat", "t": t, "radius": radius,
                    "rel_tol": args.rel_tol, "n_max": table.n_max},
            outputs={
                "geometric": gs.value, "geometric_tail": gs.tail,
                "kernel_difference": kd.value, "kernel_difference_tail": kd.tail,
                "spectral": sp.value, "spectral_tail": sp.tail,
                "kd_rel_defect": abs(kd.value - gs.value) / gs.value,
                "spectral_rel_defect": abs(sp.value - gs.value) / gs.value,
            },
            wall_time_s=time.perf_counter() - t0)

    records = ordered_map(one, args.t, args.jobs)
    rows = [{"t": r.inputs["t"], "geometric": r.outputs["geometric"],
             "kernel_difference": r.outputs["kernel_difference"],
             "spectral": r.outputs["spectral"],
             "kd_rel_defect": r.outputs["kd_rel_defect"],
             "spectral_rel_defect": r.outputs["spectral_rel_defect"]}
            for r in records]
    _emit(records, args, rows, ["t", "geometric", "kernel_difference", "spectral",
                                "kd_rel_defect", "spectral_rel_defect"])
    for r in records:
        worst = max(worst, r.outputs["kd_rel_defect"], r.outputs["spectral_rel_defect"])
    if args.fail_above is not None and worst > args.fail_above:
        print(f"verification failure: defect {worst:.3e} > {args.fail_above:.1e}",
              file=sys.stderr)
        return 1
    return 0


def _cmd_resolvent_t5(args) -> int:
    group = load_group(args.group)
    cache = Cache(args.cache_dir)
    table = _load_table(group, args.n_max or default_n_max(group), cache)
    worst = 0.0
    records = []
    for lam_text in args.lam:
        lam = _parse_complex(lam_text)
        if lam.imag != 0:
            raise InputError("resolvent-t5 takes real lambda values")
        t0 = time.perf_counter()
        out = resolvent_regularized_trace(
            group, lam.real, args.radius, rel_tol=args.rel_tol,
            tail_cut=args.tail_cut, table=table,
            quad_kwargs={"tail_tol": args.quad_tail_tol} if args.quad_tail_tol else None)
        records.append(ResultRecord(
            group_hash=group.content_hash(), command="resolvent-t5",
            inputs={"lambda": lam.real, "radius": args.radius,
                    "rel_tol": args.rel_tol},
            outputs={"Q": out["Q"].value, "Q_tail": out["Q"].tail,
                     "zeta_side": out["zeta_side"],
                     "t5_defect": out["t5_defect"]},
            wall_time_s=time.perf_counter() - t0))
        worst = max(worst, out["t5_defect"])
    _emit(records, args)
    if args.fail_above is not None and worst > args.fail_above:
        print(f"verification failure: t5 defect {worst:.3e} > {args.fail_above:.1e}",
              file=sys.stderr)
        return 1
    return 0


def _cmd_verify_all(args) -> int:
    if args.group:
        load_group(args.group)  # validated; the suite runs the shipped fixtures
    results = acceptance.run_all(printer=lambda msg: print(msg, file=sys.stderr))
    records = [ResultRecord(group_hash="acceptance-suite", command="verify-all",
                            inputs={"criterion": r["criterion"]},
                            outputs={"passed": r["passed"],
                                     "tolerance": str(r["tolerance"]),
                                     "details": r["details"]},
                            wall_time_s=r["elapsed_s"])
               for r in results]
    _emit(records, args)
    return 0 if all(r["passed"] for r in results) else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="schottkylab",
                                  description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, group_required=True):
        p.add_argument("--group", required=group_required,
                       help="group file (JSON; bare names resolve to shipped fixtures)")
        p.add_argument("--out", help="append records to this file instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--cache-dir", default=None,
                       help="cache root (default: $SCHOTTKYLAB_CACHE)")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--fail-above", type=float, default=None,
                       help="exit 1 when a defect exceeds this tolerance")
        p.add_argument("--n-max", type=int, default=None)

    p = sub.add_parser("group-validate", help="validate a group file")
    common(p)
    p.set_defaults(fn=_cmd_group_validate)

    p = sub.add_parser("classes", help="build/cache the conjugacy-class table")
    common(p)
    p.set_defaults(fn=_cmd_classes)

    p = sub.add_parser("zeta-eval", help="evaluate the zeta function")
    common(p)
    p.add_argument("--sigma", choices=("trivial", "sign"), default="trivial")
    p.add_argument("--method", choices=("product", "determinant"), default="product")
    p.add_argument("--lam", action="append", required=True,
                   help="spectral parameter (repeatable), e.g. 0.5 or 0.1+0.3j")
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--trace-order", type=int, default=DEFAULT_TRACE_ORDER)
    p.set_defaults(fn=_cmd_zeta_eval)

    p = sub.add_parser("zeta-zeros", help="argument-principle zero search")
    common(p)
    p.add_argument("--sigma", choices=("trivial", "sign"), default="trivial")
    p.add_argument("--rect", type=float, nargs=4, required=True,
                   metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))
    p.add_argument("--grid", type=int, nargs=2, default=(8, 8))
    p.add_argument("--trace-order", type=int, default=DEFAULT_TRACE_ORDER)
    p.set_defaults(fn=_cmd_zeta_zeros)

    p = sub.add_parser("delta", help="critical exponent")
    common(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(fn=_cmd_delta)

    p = sub.add_parser("l-gamma", help="spectral density L")
    common(p)
    p.add_argument("--sigma", choices=("trivial", "sign"), default="trivial")
    p.add_argument("--method", choices=("product", "determinant"), default="product")
    p.add_argument("--lam", action="append", required=True)
    p.add_argument("--trace-order", type=int, default=DEFAULT_TRACE_ORDER)
    p.set_defaults(fn=_cmd_l_gamma)

    p = sub.add_parser("trace-compare",
                       help="geometric vs kernel-difference vs spectral sides")
    common(p)
    p.add_argument("--kind", default="heat")
    p.add_argument("--t", type=float, action="append", required=True)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.set_defaults(fn=_cmd_trace_compare)

    p = sub.add_parser("resolvent-t5", help="regularized resolvent trace identity")
    common(p)
    p.add_argument("--lam", action="append", required=True)
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--rel-tol", type=float, default=1e-5)
    p.add_argument("--tail-cut", type=float, default=None)
    p.add_argument("--quad-tail-tol", type=float, default=None)
    p.set_defaults(fn=_cmd_resolvent_t5)

    p = sub.add_parser("verify-all", help="run the full verification suite")
    common(p, group_required=False)
    p.set_defaults(fn=_cmd_verify_all)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except SchottkyLabError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2


run = main  # argv -> exit code


def capture_run(argv) -> str:
    """Run the CLI in-process, returning stdout text (used by tests)."""
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    if code != 0:
        raise VerificationFailure(f"CLI exited {code} for {argv}")
    return buf.getvalue()


_WALL = re.compile(r'"wall_time_s":[-+0-9.eE]+')


def strip_wall_time(text: str) -> str:
    return _WALL.sub('"wall_time_s":0', text)


if __name__ == "__main__":
    sys.exit(main())
