"""Command line entry point.

Subcommands: ``noe``, ``adversary``, ``pc2``, ``collision``, ``experiment``.
``--seed`` falls back to the ``OBLIVIOUS_TRADEOFFS_SEED`` environment
variable, then to 0.  Results go to ``--out`` or stdout; a cost summary
goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import collision as col
from . import formats, harness, noe
from .expander import default_right_size, gen_candidate_expander
from .hard_instances import InfeasibleParameters, StageSchedule, build_partition, sample_D
from .pointer_chasing import nearest_valid, pc2_adaptive, pc2_alg1, pc2_randomized_oblivious, validate_alg1_params
from .query_model import CostReport, QueryContext, RandomStream, ceil_log2, dump_trace, load_trace

SEED_ENV = "OBLIVIOUS_TRADEOFFS_SEED"


def _seed(args: argparse.Namespace) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    return int(env) if env else 0


def _emit(args: argparse.Namespace, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _cost(rep: CostReport) -> None:
    print(
        f"queries={rep.total_queries} charged={rep.charged_queries} "
        f"space_words={rep.space_words} outputs={rep.outputs_emitted}",
        file=sys.stderr,
    )


# --- noe -------------------------------------------------------------------

def cmd_noe(args: argparse.Namespace) -> int:
    inst = formats.parse_noe_instance(formats.read_text(args.input))
    if args.action == "brute":
        Y = noe.noe_bruteforce(inst)
        _emit(args, "".join(f"{y}\n" for y in sorted(Y)))
        return 0
    ctx = QueryContext(record_trace=bool(args.trace))
    X = inst.tape(ctx)
    stream = RandomStream(_seed(args))
    if args.action == "check":
        params = noe.SketchParams.for_problem(inst.n, inst.p, warn=False)
        reps = args.reps or max(1, ceil_log2(inst.n))
        ok = noe.promise_check(X, params, stream, reps)
        _emit(args, "accept\n" if ok else "reject\n")
    else:
        Y = noe.noe_solve(X, inst.n, inst.p, stream, reps=args.reps)
        _emit(args, "".join(f"{y}\n" for y in sorted(Y)))
    if args.trace:
        Path(args.trace).write_text(dump_trace(ctx.trace))
    _cost(ctx.report())
    return 0


# --- adversary -------------------------------------------------------------

def cmd_adversary(args: argparse.Namespace) -> int:
    trace = load_trace(formats.read_text(args.trace))
    schedule = StageSchedule.from_trace(args.n, trace, args.tape)
    try:
        part = build_partition(schedule, args.p)
    except InfeasibleParameters as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    lines = [f"# n={args.n} p={args.p} T={schedule.T} stages={schedule.num_stages}"]
    for pt, k in zip(part.parts, part.provenance):
        tag = "-" if k is None else str(k)
        lines.append(f"{tag}\t{' '.join(map(str, pt))}")
    stream = RandomStream(_seed(args))
    for _ in range(args.samples):
        lines.append("sample\t" + " ".join(map(str, sample_D(part, stream))))
    _emit(args, "\n".join(lines) + "\n")
    return 0


# --- pc2 -------------------------------------------------------------------

def cmd_pc2_run(args: argparse.Namespace) -> int:
    f = formats.parse_list(formats.read_text(args.input))
    n = len(f)
    ctx = QueryContext(record_trace=False)
    tape = ctx.tape(f, "f")
    if args.algo == "adaptive":
        pairs = pc2_adaptive(tape)
    elif args.algo == "random":
        S = args.space or 1
        res = pc2_randomized_oblivious(tape, S, RandomStream(_seed(args)), args.rounds)
        pairs = sorted(res.pairs.items())
        print(f"coverage={res.coverage:.4f}", file=sys.stderr)
    else:
        k, S = args.k or 1, args.space or 1
        try:
            validate_alg1_params(n, k, S)
        except ValueError as exc:
            kk, ss = nearest_valid(n, k, S)
            print(f"error: {exc}; nearest valid choice is --k {kk} --space {ss}", file=sys.stderr)
            return 2
        if args.graph:
            G = formats.parse_graph(formats.read_text(args.graph))
        else:
            m = args.m or default_right_size(n, k)
            G, _ = gen_candidate_expander(n, k, args.degree or k, m, RandomStream(_seed(args)))
        pairs = pc2_alg1(tape, G, k, S)
    _emit(args, "".join(f"{x} {z}\n" for x, z in pairs))
    _cost(ctx.report())
    return 0


def cmd_pc2_graph(args: argparse.Namespace) -> int:
    m = args.m or default_right_size(args.n, args.k)
    G, retries = gen_candidate_expander(args.n, args.k, args.degree, m, RandomStream(_seed(args)))
    print(f"verified (k={args.k},1)-expander after {retries} rejections", file=sys.stderr)
    _emit(args, formats.format_graph(G))
    return 0


# --- collision -------------------------------------------------------------

def _triples(ts) -> str:
    return "".join(f"{t.i} {t.j} {t.x}\n" for t in sorted(ts))


def cmd_collision(args: argparse.Namespace) -> int:
    if args.action == "set":
        a = formats.parse_list(formats.read_text(args.a))
        b = formats.parse_list(formats.read_text(args.b))
        got, rep = col.set_collision(a, b, args.algo, args.space)
    else:
        values = formats.parse_list(formats.read_text(args.input))
        got, rep = col.list_collisions(values, args.space)
    _emit(args, _triples(got))
    _cost(rep)
    return 0


# --- experiment ------------------------------------------------------------

def _parse_grid(items: list[str]) -> dict[str, list[int]]:
    grid: dict[str, list[int]] = {}
    for item in items:
        key, _, vals = item.partition("=")
        if not vals:
            raise SystemExit(f"bad --grid entry {item!r}; expected key=v1,v2")
        grid[key] = [int(v) for v in vals.split(",")]
    return grid


def _config(args: argparse.Namespace) -> harness.ExperimentConfig:
    if args.config:
        d = json.loads(formats.read_text(args.config))
        d.setdefault("base_seed", _seed(args))
        return harness.ExperimentConfig.from_dict(d)
    if not args.problem:
        raise SystemExit("--problem or --config is required")
    return harness.ExperimentConfig(
        problem=args.problem,
        grid=_parse_grid(args.grid or []),
        trials=args.trials,
        base_seed=_seed(args),
        instance=args.instance,
        record_time=args.time,
    )


def cmd_experiment(args: argparse.Namespace) -> int:
    if args.action == "fit":
        recs = harness.read_records_csv(formats.read_text(args.input))
        fit = harness.fit_exponent(recs, args.column)
        _emit(args, f"slope={fit.slope:.4f} intercept={fit.intercept:.4f} residual={fit.residual:.4g}\n")
        return 0
    if args.action == "default":
        outdir = Path(args.out or "results")
        outdir.mkdir(parents=True, exist_ok=True)
        for i, cfg in enumerate(harness.default_suite(_seed(args))):
            path = harness.run_suite(cfg, outdir / harness.suite_filename(i, cfg))
            print(f"wrote {path}", file=sys.stderr)
        return 0
    cfg = _config(args)
    if args.action == "success":
        lines = [harness.wilson_summary(e) for e in harness.estimate_success(cfg)]
        _emit(args, "\n".join(lines) + ("\n" if lines else ""))
        return 0
    if args.out:
        harness.run_suite(cfg, args.out)
    else:
        sys.stdout.write(harness.records_to_csv(harness.run_records(cfg)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=f"seed (env {SEED_ENV})")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    common.add_argument("--format", choices=["csv"], default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="oblivious-tradeoffs", parents=[common], description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_noe = sub.add_parser("noe", help="non-occurring elements")
    noe_sub = p_noe.add_subparsers(dest="action", required=True)
    for name in ("solve", "check", "brute"):
        sp = noe_sub.add_parser(name, parents=[common])
        sp.add_argument("--input", required=True)
        if name != "brute":
            sp.add_argument("--reps", type=int)
            sp.add_argument("--trace", help="write the query trace here")
    p_noe.set_defaults(func=cmd_noe)

    p_adv = sub.add_parser("adversary", help="hard input distribution")
    adv_sub = p_adv.add_subparsers(dest="action", required=True)
    sp = adv_sub.add_parser("build", parents=[common])
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--trace", required=True, help="query trace dump")
    sp.add_argument("--tape", default="X")
    sp.add_argument("--samples", type=int, default=1)
    p_adv.set_defaults(func=cmd_adversary)

    p_pc2 = sub.add_parser("pc2", help="2-step pointer chasing")
    pc2_sub = p_pc2.add_subparsers(dest="action", required=True)
    sp = pc2_sub.add_parser("run", parents=[common])
    sp.add_argument("--algo", choices=["adaptive", "random", "expander"], required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--graph")
    sp.add_argument("--k", type=int)
    sp.add_argument("--space", type=int)
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--degree", type=int)
    sp.add_argument("--m", type=int)
    sp.set_defaults(func=cmd_pc2_run)
    sp = pc2_sub.add_parser("graph", parents=[common], help="generate a verified expander")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--m", type=int)
    sp.set_defaults(func=cmd_pc2_graph)

    p_col = sub.add_parser("collision", help="SetCollision / n-Collision")
    col_sub = p_col.add_subparsers(dest="action", required=True)
    sp = col_sub.add_parser("set", parents=[common])
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--space", type=int, default=1)
    sp.add_argument("--algo", choices=["alg2", "alg3"], default="alg2")
    sp = col_sub.add_parser("ncol", parents=[common])
    sp.add_argument("--input", required=True)
    sp.add_argument("--space", type=int, default=1)
    p_col.set_defaults(func=cmd_collision)

    p_exp = sub.add_parser("experiment", help="seeded experiment driver")
    exp_sub = p_exp.add_subparsers(dest="action", required=True)
    for name in ("run", "success"):
        sp = exp_sub.add_parser(name, parents=[common])
        sp.add_argument("--problem", choices=sorted(harness.PROBLEMS))
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--grid", action="append", help="key=v1,v2 (repeatable)")
        sp.add_argument("--trials", type=int, default=1)
        sp.add_argument("--instance")
        sp.add_argument("--time", action="store_true", help="record wall time (breaks byte-identity)")
    sp = exp_sub.add_parser("fit", parents=[common])
    sp.add_argument("--input", required=True)
    sp.add_argument("--column", default="total_queries")
    exp_sub.add_parser("default", parents=[common], help="run the default suite into --out DIR")
    p_exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
