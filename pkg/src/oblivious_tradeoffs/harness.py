"""Seeded experiments: success rates, scaling fits and CSV records.

Trial ``i`` of every grid point uses seed ``base_seed + i``.  The seed keys
the algorithm's :class:`RandomStream` directly; instances are generated from
a separate ``random.Random`` keyed by the problem, grid point and seed.
Algorithms only ever receive tapes.
"""

from __future__ import annotations

import csv
import io
import itertools
import random
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import binomtest

from . import collision as col
from . import noe
from .expander import default_right_size, gen_candidate_expander
from .pointer_chasing import compose, pc2_adaptive, pc2_alg1, pc2_randomized_oblivious
from .query_model import CostReport, QueryContext, RandomStream, ceil_log2

SCHEMA_VERSION = 1
COLUMNS = (
    "problem", "n", "p", "S", "k", "seed", "total_queries", "physical_queries",
    "space_words", "success", "outputs_emitted", "wall_time",
)
# salt for graph generation so the expander is independent of the algorithm stream
_GRAPH_SALT = 0x9E3779B97F4A7C15


class UnknownProblem(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problem: str
    grid: Mapping[str, Sequence[int]] | Sequence[Mapping[str, int]] = field(default_factory=dict)
    trials: int = 1
    base_seed: int = 0
    out: str | None = None
    instance: str | None = None
    record_time: bool = False

    def __post_init__(self) -> None:
        if self.problem not in PROBLEMS:
            raise UnknownProblem(f"unknown problem {self.problem!r}; choose from {sorted(PROBLEMS)}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for point in self.points():
            for key, v in point.items():
                if not isinstance(v, int) or v < 1:
                    raise ValueError(f"grid value {key}={v!r} must be a positive integer")

    def points(self) -> list[dict[str, int]]:
        if isinstance(self.grid, Mapping):
            if not self.grid:
                return []
            keys = list(self.grid)
            return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]
        return [dict(p) for p in self.grid]

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ExperimentConfig:
        return cls(**d)


@dataclass
class ExperimentRecord:
    problem: str
    n: int
    p: int | None
    S: int | None
    k: int | None
    seed: int
    total_queries: int
    physical_queries: int
    space_words: int
    success: bool
    outputs_emitted: int
    wall_time: float | None = None


@dataclass
class SuccessEstimate:
    point: dict[str, int]
    trials: int
    successes: int
    rate: float
    low: float
    high: float


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


# --- per-problem trials ----------------------------------------------------
# each returns (success, CostReport)


def _noe_instance(kind: str, n: int, p: int, rng: random.Random) -> noe.NoeInstance:
    if kind == "promise":
        return noe.random_promise_instance(n, p, rng)
    if kind == "violating":
        return noe.random_violating_instance(n, p, rng)
    if kind == "uniform":
        return noe.NoeInstance.of(n, p, [rng.randint(1, n) for _ in range(n)])
    raise ValueError(f"unknown NOE instance kind {kind!r}")


def _trial_noe(pt, seed, rng, kind):
    n, p = pt["n"], pt["p"]
    inst = _noe_instance(kind or "promise", n, p, rng)
    ctx = QueryContext(record_trace=False)
    Y = noe.noe_solve(inst.tape(ctx), n, p, RandomStream(seed), reps=pt.get("reps"))
    return Y == noe.noe_bruteforce(inst), ctx.report()


def _trial_promise(pt, seed, rng, kind):
    n, p = pt["n"], pt["p"]
    inst = _noe_instance(kind or "promise", n, p, rng)
    params = noe.SketchParams.for_problem(n, p, warn=False)
    ctx = QueryContext(record_trace=False)
    reps = pt.get("reps", max(1, ceil_log2(n)))
    verdict = noe.promise_check(inst.tape(ctx), params, RandomStream(seed), reps)
    return verdict == noe.promise_holds(inst.X, p), ctx.report()


def _random_f(n: int, rng: random.Random) -> list[int]:
    return [rng.randint(1, n) for _ in range(n)]


def _trial_pc2_adaptive(pt, seed, rng, kind):
    f = _random_f(pt["n"], rng)
    ctx = QueryContext(record_trace=False)
    out = pc2_adaptive(ctx.tape(f, "f"))
    return out == compose(f), ctx.report()


def _trial_pc2_random(pt, seed, rng, kind):
    n, S = pt["n"], pt["S"]
    f = _random_f(n, rng)
    ctx = QueryContext(record_trace=False)
    res = pc2_randomized_oblivious(ctx.tape(f, "f"), S, RandomStream(seed), pt.get("rounds"))
    truth = dict(compose(f))
    sound = all(truth[x] == z for x, z in res.pairs.items())
    return sound and res.coverage == 1.0, ctx.report()


def _trial_pc2_expander(pt, seed, rng, kind):
    n, k, S = pt["n"], pt["k"], pt["S"]
    m = pt.get("m", default_right_size(n, k))
    degree = pt.get("degree", k)
    G, _ = gen_candidate_expander(n, k, degree, m, RandomStream(seed ^ _GRAPH_SALT))
    f = _random_f(n, rng)
    ctx = QueryContext(record_trace=False)
    out = pc2_alg1(ctx.tape(f, "f"), G, k, S)
    return out == compose(f), ctx.report()


def collision_instance(kind: str, n: int, rng: random.Random) -> tuple[list[int], list[int]]:
    """``permutation``: both lists permute ``[n]``; ``random``: two random
    ``n``-subsets of ``[2n]``; ``disjoint``: ``[n]`` against ``n+1 .. 2n``."""
    if kind == "permutation":
        a, b = list(range(1, n + 1)), list(range(1, n + 1))
        rng.shuffle(a)
        rng.shuffle(b)
    elif kind == "random":
        a, b = rng.sample(range(1, 2 * n + 1), n), rng.sample(range(1, 2 * n + 1), n)
    elif kind == "disjoint":
        a, b = list(range(1, n + 1)), list(range(n + 1, 2 * n + 1))
        rng.shuffle(a)
        rng.shuffle(b)
    else:
        raise ValueError(f"unknown collision instance kind {kind!r}")
    return a, b


def _trial_setcollision(algo):
    def run(pt, seed, rng, kind):
        a, b = collision_instance(kind or "permutation", pt["n"], rng)
        got, rep = col.set_collision(a, b, algo, pt.get("S", 1))
        return got == col.collision_bruteforce(a, b), rep
    return run


def _trial_ncollision(pt, seed, rng, kind):
    n = pt["n"]
    values = [rng.randint(1, n) for _ in range(n)]
    got, rep = col.list_collisions(values, pt.get("S", 1))
    truth = col.ncollision_bruteforce(values)
    ok = got <= truth and len(got) == min(n, len(truth))
    return ok, rep


PROBLEMS: dict[str, Callable[..., tuple[bool, CostReport]]] = {
    "noe": _trial_noe,
    "promise": _trial_promise,
    "pc2-adaptive": _trial_pc2_adaptive,
    "pc2-random": _trial_pc2_random,
    "pc2-expander": _trial_pc2_expander,
    "setcollision-alg2": _trial_setcollision("alg2"),
    "setcollision-alg3": _trial_setcollision("alg3"),
    "ncollision": _trial_ncollision,
}


def run_trial(config: ExperimentConfig, point: Mapping[str, int], i: int) -> ExperimentRecord:
    seed = config.base_seed + i
    key = "|".join(f"{k}={point[k]}" for k in sorted(point))
    rng = random.Random(f"{config.problem}|{config.instance}|{key}|{seed}")
    t0 = time.perf_counter()
    ok, rep = PROBLEMS[config.problem](point, seed, rng, config.instance)
    elapsed = time.perf_counter() - t0
    return ExperimentRecord(
        problem=config.problem,
        n=point["n"],
        p=point.get("p"),
        S=point.get("S"),
        k=point.get("k"),
        seed=seed,
        total_queries=rep.charged_queries,
        physical_queries=rep.total_queries,
        space_words=rep.space_words,
        success=bool(ok),
        outputs_emitted=rep.outputs_emitted,
        wall_time=elapsed if config.record_time else None,
    )


def run_records(config: ExperimentConfig) -> list[ExperimentRecord]:
    return [run_trial(config, pt, i) for pt in config.points() for i in range(config.trials)]


def estimate_success(config: ExperimentConfig) -> list[SuccessEstimate]:
    out = []
    for pt in config.points():
        wins = sum(run_trial(config, pt, i).success for i in range(config.trials))
        lo, hi = wilson_interval(wins, config.trials)
        out.append(SuccessEstimate(pt, config.trials, wins, wins / config.trials, lo, hi))
    return out


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    residual: float
    points: list[tuple[int, float]]


def fit_exponent(records: Iterable[ExperimentRecord | tuple[int, float]], column: str = "total_queries") -> ExponentFit:
    """Least-squares slope of ``log2(queries)`` against ``log2(n)``.

    Queries are averaged per ``n`` first.  ``residual`` is the RMS deviation
    of the fitted line in log2 units.
    """
    by_n: dict[int, list[float]] = {}
    for r in records:
        n, q = (r.n, getattr(r, column)) if isinstance(r, ExperimentRecord) else r
        by_n.setdefault(int(n), []).append(float(q))
    if len(by_n) < 3:
        raise ValueError(f"need at least 3 distinct n values, got {len(by_n)}")
    ns = sorted(by_n)
    means = [sum(by_n[n]) / len(by_n[n]) for n in ns]
    if any(q <= 0 for q in means):
        raise ValueError("query counts must be positive")
    x = np.log2(ns)
    y = np.log2(means)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return ExponentFit(float(slope), float(intercept), resid, list(zip(ns, means)))


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"schema={SCHEMA_VERSION}"])
    w.writerow(COLUMNS)
    for r in records:
        d = asdict(r)
        w.writerow([_cell(d[c]) for c in COLUMNS])
    return buf.getvalue()


def read_records_csv(text: str) -> list[ExperimentRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != [f"schema={SCHEMA_VERSION}"]:
        raise ValueError("missing or unsupported schema row")
    header = rows[1]
    out = []
    for row in rows[2:]:
        d = dict(zip(header, row))
        opt = lambda s: int(s) if s != "" else None  # noqa: E731
        out.append(ExperimentRecord(
            problem=d["problem"], n=int(d["n"]), p=opt(d["p"]), S=opt(d["S"]), k=opt(d["k"]),
            seed=int(d["seed"]), total_queries=int(d["total_queries"]),
            physical_queries=int(d["physical_queries"]), space_words=int(d["space_words"]),
            success=d["success"] == "1", outputs_emitted=int(d["outputs_emitted"]),
            wall_time=float(d["wall_time"]) if d["wall_time"] else None,
        ))
    return out


def run_suite(config: ExperimentConfig, path: str | Path | None = None) -> Path:
    """Run every trial and write the CSV; returns the path written."""
    target = Path(path or config.out or f"{config.problem}.csv")
    text = records_to_csv(run_records(config))
    try:
        target.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {target}: {exc}") from exc
    return target


def default_suite(base_seed: int = 0) -> list[ExperimentConfig]:
    """The standard experiment set; one CSV per entry."""
    return [
        ExperimentConfig("noe", [{"n": 49, "p": 7}], trials=500, base_seed=base_seed),
        ExperimentConfig("noe", [{"n": 121, "p": 11}, {"n": 169, "p": 13}], trials=50, base_seed=base_seed),
        ExperimentConfig("noe", [{"n": 49, "p": 7}], trials=200, base_seed=base_seed, instance="violating"),
        ExperimentConfig(
            "promise",
            [{"n": 4, "p": 2}, {"n": 49, "p": 7}, {"n": 128, "p": 2}, {"n": 121, "p": 11}],
            trials=100,
            base_seed=base_seed,
        ),
        ExperimentConfig("pc2-adaptive", {"n": [256, 1024]}, trials=5, base_seed=base_seed),
        ExperimentConfig("pc2-random", {"n": [256], "S": [4, 16]}, trials=10, base_seed=base_seed),
        ExperimentConfig(
            "pc2-expander", [{"n": 32, "k": 4, "S": 2, "degree": 3, "m": 16}], trials=20, base_seed=base_seed
        ),
        ExperimentConfig(
            "setcollision-alg2", {"n": [256, 512, 1024, 2048, 4096]}, trials=2, base_seed=base_seed
        ),
        ExperimentConfig(
            "setcollision-alg3", {"n": [256, 1024], "S": [1, 4, 16]}, trials=2, base_seed=base_seed
        ),
        ExperimentConfig("ncollision", {"n": [64, 256, 512], "S": [1, 4]}, trials=5, base_seed=base_seed),
    ]


def suite_filename(index: int, config: ExperimentConfig) -> str:
    suffix = f"-{config.instance}" if config.instance else ""
    return f"{index:02d}-{config.problem}{suffix}.csv"


def wilson_summary(est: SuccessEstimate) -> str:
    pt = " ".join(f"{k}={v}" for k, v in est.point.items())
    return f"{pt}: {est.successes}/{est.trials} = {est.rate:.4f} [{est.low:.4f}, {est.high:.4f}]"


def expected_noe_rate(n: int) -> float:
    """The ``1 - 2/n`` success guarantee for the NOE solver."""
    return 1 - 2 / n

