"""Command-line surface: evaluate, construct, verify, render, export.

Exit codes: 0 success, 1 a verification suite found a failure, 2 usage
error.  All randomized suites take an explicit seed, every report embeds
its configuration and seed, and identical invocations produce
byte-identical outputs.  The WALSH_THREADS environment variable caps
worker parallelism; the current implementation is sequential (the cap is
honored trivially) and output never depends on it.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import counterexamples as ce
from . import sets as sets_mod
from . import verify as harness
from .group import (
    DyadicCube,
    DyadicElement,
    DyadicPoint,
    Partition,
    parse_cube,
    parse_element,
    parse_point,
    zero_point,
)
from .series import (
    check_additivity,
    constant_series,
    partial_sum_rect,
    quasimeasure_from_series,
    quasimeasure_to_csv,
    series_from_json,
    series_to_json,
    support_mask,
    walsh_functional,
)
from .sets import rasterize, set_from_json, to_pgm
from .walsh import dirichlet_closed, dirichlet_multi, dirichlet_naive, walsh_eval, walsh_eval_multi


@dataclass
class RunConfig:
    """Run parameters embedded into every produced report."""

    subcommand: str
    d: int | None = None
    rank: int | None = None
    seed: int | None = None
    exact: bool = True
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "d": self.d,
            "rank": self.rank,
            "seed": self.seed,
            "exact": self.exact,
            "inputs": self.inputs,
            "outputs": self.outputs,
        }


def _threads_cap() -> int:
    raw = os.environ.get("WALSH_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"WALSH_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise ValueError("WALSH_THREADS must be >= 1")
    return cap


def _parse_multi(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(","))


def _emit(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    print(text)


# -- eval --------------------------------------------------------------------

def cmd_eval(args) -> int:
    if args.what == "walsh":
        if ";" in args.g:
            g = parse_point(args.g)
            print(walsh_eval_multi(_parse_multi(args.n), g))
        else:
            print(walsh_eval(int(args.n), parse_element(args.g)))
        return 0
    if args.what == "dirichlet":
        if ";" in args.g:
            print(dirichlet_multi(_parse_multi(args.N), parse_point(args.g)))
        else:
            N = int(args.N)
            g = parse_element(args.g)
            print(dirichlet_naive(N, g) if args.naive else dirichlet_closed(N, g))
        return 0
    if args.what == "partial-sum":
        with open(args.series) as fh:
            series = series_from_json(fh.read(), approx=args.approx)
        g = parse_point(args.g)
        N = _parse_multi(args.N)
        if len(N) == 1:
            N = N * series.d
        print(partial_sum_rect(series, N, g))
        return 0
    raise ValueError(f"unknown eval target {args.what!r}")


# -- render --------------------------------------------------------------------

def cmd_render(args) -> int:
    with open(args.set) as fh:
        spec = set_from_json(fh.read())
    slice_elems = ()
    if args.slice:
        slice_elems = tuple(parse_element(t) for t in args.slice.split(";"))
    bitmap = rasterize(spec, args.rank, slice_elems)
    data = to_pgm(bitmap)
    with open(args.out, "wb") as fh:
        fh.write(data)
    counts = {"in": 0, "out": 0, "undetermined": 0}
    for row in bitmap:
        for v in row:
            counts["in" if v == 255 else "out" if v == 0 else "undetermined"] += 1
    _emit({"config": RunConfig("render", rank=args.rank,
                               inputs={"set": args.set},
                               outputs={"pgm": args.out}).to_dict(),
           "pixels": counts}, None)
    return 0


# -- series --------------------------------------------------------------------

def cmd_series(args) -> int:
    if args.action == "build":
        if args.kind == "random":
            rng = random.Random(args.seed)
            series = harness.random_series(rng, args.d, args.bound_rank, args.nnz)
        elif args.kind == "constant":
            series = constant_series(args.d, Fraction(args.value), args.bound_rank)
        elif args.kind == "theorem8":
            idx = ce.default_indices(args.depth)
            sched = ce.default_schedule(args.depth)
            series = ce.build_theorem8_series(idx, sched)
        else:
            raise ValueError(f"unknown series kind {args.kind!r}")
        text = series_to_json(series)
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(text)
        return 0
    if args.action == "inspect":
        with open(args.infile) as fh:
            series = series_from_json(fh.read())
        items = list(series.items_below(((1 << series.bound_rank),) * series.d))
        _emit(
            {
                "d": series.d,
                "bound_rank": series.bound_rank,
                "nonzero": len(items),
                "head": [{"n": list(n), "c": str(c)} for n, c in items[:10]],
            },
            None,
        )
        return 0
    raise ValueError(f"unknown series action {args.action!r}")


def cmd_qm(args) -> int:
    with open(args.series) as fh:
        series = series_from_json(fh.read(), approx=args.approx)
    tau = quasimeasure_from_series(series, args.rank, method="naive" if args.naive else "fast")
    text = quasimeasure_to_csv(tau)
    with open(args.out, "w") as fh:
        fh.write(text)
    ok, violation = check_additivity(tau)
    _emit(
        {
            "config": RunConfig("qm", d=series.d, rank=args.rank, exact=not args.approx,
                                inputs={"series": args.series},
                                outputs={"csv": args.out}).to_dict(),
            "additivity": ok,
            "cells": sum(len(t) for t in tau.tables),
        },
        None,
    )
    return 0 if ok else 1


# -- verify suites ---------------------------------------------------------------

def _suite_kernels(args) -> tuple[bool, dict]:
    rank, max_N = args.rank, args.max_N
    mismatches = []
    for bits in range(1 << rank):
        g = DyadicElement(rank, bits, 0)
        acc = 0
        naive = []
        for n in range(max_N):
            acc += walsh_eval(n, g)
            naive.append(acc)
        for N in range(1, max_N + 1):
            if dirichlet_closed(N, g) != naive[N - 1]:
                mismatches.append({"N": N, "g": str(g)})
    ok = not mismatches
    return ok, {"checked": (1 << rank) * max_N, "mismatches": mismatches[:10]}


def _suite_lemma1(args) -> tuple[bool, dict]:
    report = harness.lemma1_grid(args.d, args.trials, args.points, args.seed)
    return report.ok, report.to_dict()


def _suite_lemma2(args) -> tuple[bool, dict]:
    K, d = args.rank, args.d
    delta = DyadicCube(1, (0,) * d)
    span = K - delta.rank
    full = {
        tuple(m) for m in __import__("itertools").product(range(1 << span), repeat=d)
    }
    cases = []
    # whole cube: any point works
    pt = harness.lemma2_search(full, K, d, delta, [K - 1])
    cases.append({"case": "full_cube", "found": pt is not None})
    # cube minus one cell: a point must exist
    dent = set(full)
    dent.discard(next(iter(sorted(dent))))
    pt2 = harness.lemma2_search(dent, K, d, delta, [K - 1])
    cases.append({"case": "dented_cube", "found": pt2 is not None})
    # single sparse cell: NotFound is permitted (hypothesis fails)
    lone = {next(iter(sorted(full)))}
    pt3 = harness.lemma2_search(lone, K, d, delta, [K - 1])
    cases.append({"case": "single_cell", "found": pt3 is not None})
    ok = cases[0]["found"] and cases[1]["found"]
    return ok, {"cases": cases}


def _wd_member(rng: random.Random, d: int, K: int, k_set) -> DyadicPoint:
    comps = [rng.getrandbits(K) for _ in range(d)]
    for k in k_set:
        parity = 0
        for c in comps[:-1]:
            parity ^= (c >> k) & 1
        last = comps[-1]
        if ((last >> k) & 1) != parity:
            comps[-1] = last ^ (1 << k)
    return DyadicPoint(tuple(DyadicElement(K, c, 0) for c in comps))


def _suite_lemma4(args) -> tuple[bool, dict]:
    from .group import DyadicBox
    from .series import integrate_walsh, quasimeasure_from_masses

    rng = random.Random(args.seed)
    K, d = args.rank, args.d
    failures = []
    for i in range(args.trials):
        k_set = sorted(rng.sample(range(K - 1), rng.randint(1, 3)))
        masses = [
            (_wd_member(rng, d, K, k_set), Fraction(rng.randint(-9, 9) or 1, rng.choice((1, 2, 3))))
            for _ in range(rng.randint(1, 5))
        ]
        tau = quasimeasure_from_masses(d, K, masses)
        N = (1 << rng.choice(k_set),) * d
        intervals = []
        for _ in range(d):
            rho = rng.randint(0, K - 1)
            intervals.append((rho, rng.randrange(1 << rho)))
        box = DyadicBox(tuple(intervals))
        got = integrate_walsh(tau, N, box)
        want = tau.box_value(box)
        if got != want:
            failures.append({"instance": i, "got": str(got), "want": str(want)})
    return not failures, {"instances": args.trials, "failures": failures[:10]}


def _suite_tk(args) -> tuple[bool, dict]:
    report = harness.tk_grid(args.d, args.trials, args.seed)
    return report.ok, report.to_dict()


def _suite_theorem8(args) -> tuple[bool, dict]:
    idx = ce.default_indices(args.depth)
    sched = ce.default_schedule(args.depth)
    series = ce.build_theorem8_series(idx, sched)
    from .group import generator

    report = ce.verify_counterexample(
        series, idx, sched, K=args.rank, N_max=args.max_N,
        g2_rank=min(8, args.rank), g1_probes=(generator(0),), seed=args.seed,
    )
    return report["ok"], report


def _suite_probes(args) -> tuple[bool, dict]:
    idx = ce.default_indices(4)
    sched = ce.default_schedule(4)
    series = ce.build_theorem8_series(idx, sched)
    power_probes = tuple(1 << j for j in range(idx.n_values[-1].bit_length()))
    probe_a = ce.cantor_lebesgue_probe(series, power_probes, bound=1)
    probe_b = ce.cantor_lebesgue_probe(series, idx.n_values, bound=None)
    finite = constant_series(2, Fraction(1))
    probe_c = ce.cantor_lebesgue_probe(finite, power_probes, bound=1)
    grow = [Fraction(p["abs_c"]) for p in probe_b["probes"]]
    ok = (
        probe_a["all_zero"]
        and probe_c["tail_nonincreasing_from"] == 0
        and all(a < b for a, b in zip(grow, grow[1:]))
    )
    return ok, {"bounded_weight": probe_a, "contrast": probe_b, "finite": probe_c}


def _suite_falsify(args) -> tuple[bool, dict]:
    K = args.rank
    empty = harness.uset_falsify(sets_mod.empty_set(2), K, harness.FalsifierConstraints())
    whole = harness.uset_falsify(sets_mod.whole_group(2), K, harness.FalsifierConstraints())
    d0 = sets_mod.DiagonalPlane(Partition(2, ()))
    dims = []
    basis_ok = True
    for kmax in range(0, min(3, K - 1) + 1):
        res = harness.uset_falsify(d0, K, harness.FalsifierConstraints(rademacher_kmax=kmax))
        dims.append(res.dimension)
        for b in res.basis:
            good, _ = check_additivity(b)
            basis_ok = basis_ok and good and support_mask(b).cells <= set(res.mask)
    ok = (
        empty.dimension == 0
        and whole.dimension == (1 << (2 * K))
        and all(a >= b for a, b in zip(dims, dims[1:]))
        and basis_ok
    )
    return ok, {
        "empty_dimension": empty.dimension,
        "whole_dimension": whole.dimension,
        "diagonal_dims_by_kmax": dims,
        "basis_checks": basis_ok,
        "note": empty.note,
    }


_SUITES = {
    "kernels": _suite_kernels,
    "lemma1": _suite_lemma1,
    "lemma2": _suite_lemma2,
    "lemma4": _suite_lemma4,
    "tk": _suite_tk,
    "theorem8": _suite_theorem8,
    "probes": _suite_probes,
    "falsify": _suite_falsify,
}


def cmd_verify(args) -> int:
    ok, payload = _SUITES[args.suite](args)
    config = RunConfig(
        f"verify:{args.suite}",
        d=getattr(args, "d", None),
        rank=getattr(args, "rank", None),
        seed=getattr(args, "seed", None),
    )
    report = {"config": config.to_dict(), "ok": ok, "report": payload}
    _emit(report, args.out)
    return 0 if ok else 1


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadicwalsh",
        description="Exact Walsh analysis on the dyadic group: evaluate, "
        "construct, verify, render.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate Walsh functions, kernels, partial sums")
    eval_sub = p_eval.add_subparsers(dest="what", required=True)
    p_w = eval_sub.add_parser("walsh", help="W_n(g); multi-d via comma n and ';' point")
    p_w.add_argument("--n", required=True)
    p_w.add_argument("--g", required=True, help="element `digits|tail` or point `e1;e2`")
    p_d = eval_sub.add_parser("dirichlet", help="Dirichlet kernel value")
    p_d.add_argument("--N", required=True)
    p_d.add_argument("--g", required=True)
    p_d.add_argument("--naive", action="store_true", help="sum term by term instead of the closed form")
    p_s = eval_sub.add_parser("partial-sum", help="rectangular/cubic partial sum of a series")
    p_s.add_argument("--series", required=True, help="SeriesSpec JSON path")
    p_s.add_argument("--N", required=True, help="single N (cubic) or comma list (rectangular)")
    p_s.add_argument("--g", required=True)
    p_s.add_argument("--approx", action="store_true", help="float coefficients (plot scale only)")

    p_r = sub.add_parser("render", help="rasterize a set specification to binary PGM")
    p_r.add_argument("--set", required=True, help="SetSpec JSON path")
    p_r.add_argument("--rank", type=int, required=True)
    p_r.add_argument("--out", required=True)
    p_r.add_argument("--slice", help="fixed elements for coordinates beyond the first two, ';'-joined")

    p_se = sub.add_parser("series", help="build or inspect SeriesSpec JSON")
    series_sub = p_se.add_subparsers(dest="action", required=True)
    p_build = series_sub.add_parser("build")
    p_build.add_argument("--kind", choices=("random", "constant", "theorem8"), required=True)
    p_build.add_argument("--d", type=int, default=2)
    p_build.add_argument("--bound-rank", dest="bound_rank", type=int, default=4)
    p_build.add_argument("--nnz", type=int, default=8)
    p_build.add_argument("--value", default="1")
    p_build.add_argument("--depth", type=int, default=4, help="truncation depth for theorem8")
    p_build.add_argument("--seed", type=int, default=0)
    p_build.add_argument("--out", required=True)
    p_inspect = series_sub.add_parser("inspect")
    p_inspect.add_argument("--in", dest="infile", required=True)

    p_qm = sub.add_parser("qm", help="build a quasimeasure table and export CSV")
    p_qm.add_argument("--series", required=True)
    p_qm.add_argument("--rank", type=int, required=True)
    p_qm.add_argument("--out", required=True)
    p_qm.add_argument("--naive", action="store_true", help="use the naive construction path")
    p_qm.add_argument("--approx", action="store_true")

    p_v = sub.add_parser("verify", help="run a named verification suite")
    p_v.add_argument("--suite", choices=sorted(_SUITES), required=True)
    p_v.add_argument("--d", type=int, default=2)
    p_v.add_argument("--rank", type=int, default=6)
    p_v.add_argument("--max-N", dest="max_N", type=int, default=256)
    p_v.add_argument("--trials", type=int, default=50)
    p_v.add_argument("--points", type=int, default=20)
    p_v.add_argument("--depth", type=int, default=4)
    p_v.add_argument("--seed", type=int, default=0)
    p_v.add_argument("--out", help="also write the JSON report to this path")
    return parser


_COMMANDS = {
    "eval": cmd_eval,
    "render": cmd_render,
    "series": cmd_series,
    "qm": cmd_qm,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _threads_cap()
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
