"""SetCollision and n-Collision by divide and conquer over a distinctness oracle.

``A(l, s, s')`` finds all collisions between ``a[s : s+l]`` and
``b[s' : s'+l]``: if the oracle says the ``2l`` values are distinct it
stops, otherwise it recurses on the four pairs of halves.  Only interval
pairs holding a collision survive the oracle, so each level has at most as
many live calls as there are collisions.

The parallel variant keeps a queue of up to ``S`` interval pairs of the same
length and runs their oracle instances in lockstep.  Because an oblivious
oracle reads the same offsets at the same step in every instance, instances
whose intervals coincide on one side share that side's reads.

Oracles
-------
An oracle exposes a fixed read schedule for a given interval length, a state
transition and a verdict.  The verdict is ``True`` when the interval pair is
free of collisions (so the search can prune it).  Two reference oracles are
provided; both keep an exact set of the values seen, so they use ``O(l)``
words rather than polylogarithmic space.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

import numpy as np

from .query_model import CostReport, QueryContext, Tape

A_SIDE = 0
B_SIDE = 1
CHILD_OFFSETS = ((0, 0), (1, 0), (0, 1), (1, 1))  # in units of the half length


class CollisionTriple(NamedTuple):
    i: int
    j: int
    x: int


class ObliviousOracle:
    """Base oracle: read the A interval, then the B interval, left to right."""

    name = "oracle"

    def __init__(self) -> None:
        self._schedules: dict[int, tuple[tuple[int, int], ...]] = {}

    def schedule(self, length: int) -> tuple[tuple[int, int], ...]:
        """``(side, offset)`` reads; depends on ``length`` only."""
        sched = self._schedules.get(length)
        if sched is None:
            sched = tuple((A_SIDE, o) for o in range(length)) + tuple((B_SIDE, o) for o in range(length))
            self._schedules[length] = sched
        return sched

    def start(self) -> Any:
        raise NotImplementedError

    def step(self, state: Any, side: int, value: int) -> None:
        raise NotImplementedError

    def verdict(self, state: Any) -> bool:
        raise NotImplementedError

    def space(self, length: int) -> int:
        return 2 * length + 1


class EDOracle(ObliviousOracle):
    """Element distinctness of the concatenated intervals."""

    name = "ed"

    def start(self) -> list:
        return [set(), False]

    def step(self, state: list, side: int, value: int) -> None:
        seen = state[0]
        if value in seen:
            state[1] = True
        else:
            seen.add(value)

    def verdict(self, state: list) -> bool:
        return not state[1]


class LDOracle(ObliviousOracle):
    """List distinctness: no ``a`` value equals a ``b`` value.

    Repeats inside one list are ignored.
    """

    name = "ld"

    def start(self) -> list:
        return [set(), False]

    def step(self, state: list, side: int, value: int) -> None:
        if side == A_SIDE:
            state[0].add(value)
        elif value in state[0]:
            state[1] = True

    def verdict(self, state: list) -> bool:
        return not state[1]

    def space(self, length: int) -> int:
        return length + 1


def run_oracle(oracle: ObliviousOracle, A: Tape, B: Tape, s: int, s2: int, length: int) -> bool:
    state = oracle.start()
    for side, off in oracle.schedule(length):
        v = A.read(s + off) if side == A_SIDE else B.read(s2 + off)
        oracle.step(state, side, v)
    return oracle.verdict(state)


def _oracle_on_values(oracle: ObliviousOracle, a: Sequence[int], b: Sequence[int]) -> bool:
    if len(a) != len(b):
        raise ValueError("intervals must have equal length")
    ctx = QueryContext(record_trace=False)
    return run_oracle(oracle, ctx.tape(a, "A"), ctx.tape(b, "B"), 1, 1, len(a))


def ed_reference(a: Sequence[int], b: Sequence[int]) -> bool:
    """True iff the ``2l`` values of both intervals are pairwise distinct."""
    return _oracle_on_values(EDOracle(), a, b)


def ld_reference(a: Sequence[int], b: Sequence[int]) -> int:
    """1 iff some ``a_i`` equals some ``b_j``."""
    return 0 if _oracle_on_values(LDOracle(), a, b) else 1


@dataclass
class LockstepResult:
    verdicts: list[bool]
    physical_queries: int
    logical_queries: int


def lockstep_run(
    pairs: Sequence[tuple[int, int]],
    A: Tape,
    B: Tape,
    oracle: ObliviousOracle,
    length: int,
) -> LockstepResult:
    """Advance one oracle instance per ``(s, s')`` through the shared schedule.

    At every step, instances aiming at the same tape position share a single
    physical read.  The context is charged the logical (undeduplicated) cost.
    """
    ctx = A.ctx
    before = ctx.total_queries
    states = [oracle.start() for _ in pairs]
    a_starts = [s for s, _ in pairs]
    b_starts = [s2 for _, s2 in pairs]
    sched = oracle.schedule(length)
    for side, off in sched:
        tape, starts = (A, a_starts) if side == A_SIDE else (B, b_starts)
        got: dict[int, int] = {}
        for st, s in zip(states, starts):
            pos = s + off
            v = got.get(pos)
            if v is None:
                v = got[pos] = tape.read(pos)
            oracle.step(st, side, v)
    physical = ctx.total_queries - before
    logical = len(pairs) * len(sched)
    ctx.charge(logical - physical)
    return LockstepResult([oracle.verdict(st) for st in states], physical, logical)


@dataclass
class SearchStats:
    """Per interval length: calls made, calls not pruned, lockstep batches."""

    calls: Counter = field(default_factory=Counter)
    actual: Counter = field(default_factory=Counter)
    batches: Counter = field(default_factory=Counter)
    call_log: list[tuple[int, int, int]] | None = None


class _Search:
    def __init__(
        self,
        A: Tape,
        B: Tape,
        oracle: ObliviousOracle,
        stats: SearchStats | None = None,
        limit: int | None = None,
        debug: bool = False,
    ) -> None:
        self.A, self.B, self.oracle = A, B, oracle
        self.stats = stats if stats is not None else SearchStats()
        self.limit = limit
        self.debug = debug
        self.found: list[CollisionTriple] = []

    def done(self) -> bool:
        return self.limit is not None and len(self.found) >= self.limit

    def _log(self, length: int, s: int, s2: int) -> None:
        if self.stats.call_log is not None:
            self.stats.call_log.append((length, s, s2))

    def _emit(self, s: int, s2: int, x: int) -> None:
        t = CollisionTriple(s, s2, x)
        self.found.append(t)
        self.A.ctx.emit(t)

    def _check_pruned(self, s: int, s2: int, length: int) -> None:
        a = self.A.ground_truth()[s - 1:s - 1 + length]
        b = set(self.B.ground_truth()[s2 - 1:s2 - 1 + length])
        if any(v in b for v in a):
            raise AssertionError(f"oracle pruned ({length}, {s}, {s2}) which holds a collision")

    def sequential(self, length: int, s: int, s2: int) -> None:
        if self.done():
            return
        self.stats.calls[length] += 1
        self._log(length, s, s2)
        if length == 1:
            a, b = self.A.read(s), self.B.read(s2)
            if a == b:
                self.stats.actual[1] += 1
                self._emit(s, s2, a)
            return
        if run_oracle(self.oracle, self.A, self.B, s, s2, length):
            if self.debug:
                self._check_pruned(s, s2, length)
            return
        self.stats.actual[length] += 1
        h = length // 2
        for ds, ds2 in CHILD_OFFSETS:
            self.sequential(h, s + ds * h, s2 + ds2 * h)

    def parallel(self, length: int, pairs: list[tuple[int, int]], S: int) -> None:
        if self.done() or not pairs:
            return
        self.stats.calls[length] += len(pairs)
        self.stats.batches[length] += 1
        for s, s2 in pairs:
            self._log(length, s, s2)
        if length == 1:
            avals: dict[int, int] = {}
            bvals: dict[int, int] = {}
            for s, s2 in pairs:
                if s not in avals:
                    avals[s] = self.A.read(s)
                if s2 not in bvals:
                    bvals[s2] = self.B.read(s2)
            for s, s2 in pairs:
                if self.done():
                    return
                if avals[s] == bvals[s2]:
                    self.stats.actual[1] += 1
                    self._emit(s, s2, avals[s])
            return
        verdicts = lockstep_run(pairs, self.A, self.B, self.oracle, length).verdicts
        h = length // 2
        queue: list[tuple[int, int]] = []
        for (s, s2), distinct in zip(pairs, verdicts):
            if distinct:
                if self.debug:
                    self._check_pruned(s, s2, length)
                continue
            self.stats.actual[length] += 1
            for ds, ds2 in CHILD_OFFSETS:
                queue.append((s + ds * h, s2 + ds2 * h))
                if len(queue) == S:
                    self.parallel(h, queue, S)
                    queue = []
        if queue:
            self.parallel(h, queue, S)


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


def pad_lists(a: Sequence[int], b: Sequence[int]) -> tuple[list[int], list[int]]:
    """Pad both lists to a common power-of-two length with unique sentinels.

    Sentinels exceed every real value and are distinct across both lists,
    so they never take part in a collision.
    """
    N = next_pow2(max(len(a), len(b), 1))
    top = max([*a, *b, 0]) + 1
    pa = list(a) + list(range(top, top + N - len(a)))
    top += N - len(a)
    pb = list(b) + list(range(top, top + N - len(b)))
    return pa, pb


def _check_tapes(A: Tape, B: Tape) -> int:
    n = len(A)
    if len(B) != n or not _is_pow2(n):
        raise ValueError(f"tapes must share a power-of-two length, got {len(A)} and {len(B)}")
    return n


def _depth(n: int) -> int:
    return n.bit_length()


def alg2_setcollision(
    A: Tape,
    B: Tape,
    oracle: ObliviousOracle | None = None,
    stats: SearchStats | None = None,
    debug: bool = False,
) -> frozenset[CollisionTriple]:
    """Sequential divide and conquer from the root ``A(n, 1, 1)``.

    Space: 3 words per recursion level, plus one oracle instance.
    """
    oracle = oracle or EDOracle()
    n = _check_tapes(A, B)
    ctx = A.ctx
    ctx.declare_space("reduction", 3 * _depth(n) + 1)
    ctx.declare_space("oracle", oracle.space(n))
    search = _Search(A, B, oracle, stats, debug=debug)
    search.sequential(n, 1, 1)
    return frozenset(search.found)


def initial_length(n: int) -> int:
    """Power of two closest to ``sqrt(n)`` from above."""
    log = n.bit_length() - 1
    return 1 << ((log + 1) // 2)


def initial_batches(n: int, S: int, length: int | None = None) -> list[list[tuple[int, int]]]:
    """Pairs of interval starts at the first parallel level, one batch per group pair.

    The ``n / length`` aligned starts are cut into groups of ``floor(sqrt S)``
    (the last group may be smaller) and each pair of groups forms one batch.
    """
    if length is None:
        length = initial_length(n)
    starts = list(range(1, n + 1, length))
    gs = max(1, math.isqrt(S))
    groups = [starts[i:i + gs] for i in range(0, len(starts), gs)]
    return [[(s, s2) for s in g for s2 in g2] for g in groups for g2 in groups]


def alg3_parallel(
    A: Tape,
    B: Tape,
    S: int,
    oracle: ObliviousOracle | None = None,
    stats: SearchStats | None = None,
    debug: bool = False,
    start_length: int | None = None,
) -> frozenset[CollisionTriple]:
    """Queue-based parallel divide and conquer with lockstep oracle batches.

    The search starts at interval length ``start_length`` (default: the
    power of two at or above ``sqrt n``) with every aligned pair of starts,
    batched by group pairs.  The queue of each call flushes at ``S`` entries
    and once more at the end of that call's own loop.

    Space: two ``S``-entry pair lists per level plus ``S`` oracle instances.
    """
    if S < 1:
        raise ValueError("S must be at least 1")
    oracle = oracle or EDOracle()
    n = _check_tapes(A, B)
    length = start_length or initial_length(n)
    if not _is_pow2(length) or length > n:
        raise ValueError(f"start length {length} must be a power of two <= n={n}")
    ctx = A.ctx
    ctx.declare_space("reduction", 4 * S * _depth(n) + 2)
    ctx.declare_space("oracle", S * oracle.space(length))
    search = _Search(A, B, oracle, stats, debug=debug)
    for batch in initial_batches(n, S, length):
        search.parallel(length, batch, S)
    return frozenset(search.found)


def collision_bruteforce(a: Sequence[int], b: Sequence[int]) -> frozenset[CollisionTriple]:
    """All ``(i, j, x)`` with ``a_i = b_j = x`` by a full ``|a| x |b|`` comparison."""
    if not len(a) or not len(b):
        return frozenset()
    av = np.asarray(a, dtype=np.int64)
    bv = np.asarray(b, dtype=np.int64)
    ii, jj = np.nonzero(av[:, None] == bv[None, :])
    return frozenset(CollisionTriple(int(i) + 1, int(j) + 1, int(av[i])) for i, j in zip(ii, jj))


def ncollision_bruteforce(values: Sequence[int]) -> frozenset[CollisionTriple]:
    """Every unordered colliding pair, as ``(i, j, x)`` with ``i < j``."""
    where: dict[int, list[int]] = defaultdict(list)
    for i, v in enumerate(values, start=1):
        where[v].append(i)
    out = set()
    for v, pos in where.items():
        for u in range(len(pos)):
            for w in range(u + 1, len(pos)):
                out.add(CollisionTriple(pos[u], pos[w], v))
    return frozenset(out)


def bipartite_pieces(n: int) -> list[tuple[int, int, int]]:
    """``(length, s, s')`` pieces partitioning all pairs ``i < j`` of ``[n]``.

    Level ``t`` contributes ``2^(t-1)`` pieces of size ``n / 2^t``: the two
    halves of every aligned block of length ``n / 2^(t-1)``.
    """
    if not _is_pow2(n):
        raise ValueError("n must be a power of two")
    out = []
    b = n // 2
    while b >= 1:
        for s in range(1, n + 1, 2 * b):
            out.append((b, s, s + b))
        b //= 2
    return out


def n_collision(
    A: Tape,
    S: int = 1,
    limit: int | None = None,
    oracle: ObliviousOracle | None = None,
    stats: SearchStats | None = None,
) -> frozenset[CollisionTriple]:
    """Up to ``limit`` (default ``len(A)``) distinct collisions ``i < j`` inside one list.

    Runs the list-collision search with a shared output counter on each
    complete bipartite piece, largest pieces first, until the counter is
    full.  ``S == 1`` is the sequential search; larger ``S`` batches each
    piece's search through the lockstep queue from the piece's root.
    """
    if S < 1:
        raise ValueError("S must be at least 1")
    n = len(A)
    if not _is_pow2(n):
        raise ValueError("list length must be a power of two (pad first)")
    oracle = oracle or LDOracle()
    if limit is None:
        limit = n
    ctx = A.ctx
    ctx.declare_space("reduction", 4 * S * _depth(n) + 3)
    ctx.declare_space("oracle", S * oracle.space(max(1, n // 2)))
    search = _Search(A, A, oracle, stats, limit=limit)
    for length, s, s2 in bipartite_pieces(n):
        if search.done():
            break
        if S == 1:
            search.sequential(length, s, s2)
        else:
            search.parallel(length, [(s, s2)], S)
    return frozenset(search.found)


def pad_single(values: Sequence[int]) -> list[int]:
    N = next_pow2(max(len(values), 1))
    top = max([*values, 0]) + 1
    return list(values) + list(range(top, top + N - len(values)))


@dataclass(frozen=True)
class CollisionInstance:
    A: tuple[int, ...]
    B: tuple[int, ...]

    @property
    def duplicate_free(self) -> tuple[bool, bool]:
        return len(set(self.A)) == len(self.A), len(set(self.B)) == len(self.B)


def set_collision(
    a: Sequence[int],
    b: Sequence[int],
    algo: str = "alg2",
    S: int = 1,
    oracle: ObliviousOracle | None = None,
    record_trace: bool = False,
    stats: SearchStats | None = None,
) -> tuple[frozenset[CollisionTriple], CostReport]:
    """Pad, tape and solve; sentinel positions are dropped from the answer."""
    pa, pb = pad_lists(a, b)
    ctx = QueryContext(record_trace=record_trace)
    A, B = ctx.tape(pa, "A"), ctx.tape(pb, "B")
    if algo == "alg2":
        got = alg2_setcollision(A, B, oracle, stats)
    elif algo == "alg3":
        got = alg3_parallel(A, B, S, oracle, stats)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    got = frozenset(t for t in got if t.i <= len(a) and t.j <= len(b))
    return got, ctx.report()


def list_collisions(
    values: Sequence[int],
    S: int = 1,
    record_trace: bool = False,
    stats: SearchStats | None = None,
) -> tuple[frozenset[CollisionTriple], CostReport]:
    n = len(values)
    ctx = QueryContext(record_trace=record_trace)
    A = ctx.tape(pad_single(values), "A")
    got = n_collision(A, S, limit=n, stats=stats)
    return frozenset(t for t in got if t.j <= n), ctx.report()
