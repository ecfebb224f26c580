"""Instrumented query model.

Every algorithm in this package touches its input only through :class:`Tape`
reads and consumes randomness only through a :class:`RandomStream`.  A
:class:`QueryContext` owns the trace, the per-tape counters, the declared
working storage and the output sink of one run, so a run's cost and its
query pattern can be inspected after the fact.

Indices are 1-based at every public interface.

Randomness
----------
``RandomStream`` is a forward-only bit stream over Philox4x64-10 (numpy's
counter-based generator) keyed by the 64-bit seed.  Stream bit ``t`` is bit
``t % 64`` (least significant first) of the ``t // 64``-th 64-bit output.  The
mapping is fixed, so ``(seed, cursor)`` pins every bit.

Space
-----
Space is self-reported.  Algorithms call :meth:`QueryContext.declare_space`
with a label and a word count; the report keeps the peak per label and sums
the peaks.  Program-counter state is not included.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np

MASK64 = (1 << 64) - 1


class InconsistentOutputError(RuntimeError):
    """Two output statements for the same key disagree."""


class OutputSink:
    """Collects output statements; consistent duplicates collapse to one.

    ``emit(key)`` records a set-style statement, ``emit(key, value)`` a
    keyed claim ``F(x)_key = value``.
    """

    def __init__(self) -> None:
        self._items: dict[Hashable, Any] = {}
        self.statements = 0

    def emit(self, key: Hashable, value: Any = None) -> None:
        self.statements += 1
        if key in self._items:
            if self._items[key] != value:
                raise InconsistentOutputError(
                    f"conflicting outputs for {key!r}: {self._items[key]!r} vs {value!r}"
                )
            return
        self._items[key] = value

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._items

    def keys(self) -> set:
        return set(self._items)

    def items(self) -> dict:
        return dict(self._items)


@dataclass
class CostReport:
    """Cost of one run.

    ``total_queries`` is the number of physical tape reads and always equals
    the trace length.  ``charged_queries`` is the model cost, which can be
    larger when one physical read stands in for several logical ones (an
    interleaved multi-accumulator pass, or lockstep oracle instances).
    """

    queries_per_tape: dict[str, int]
    total_queries: int
    charged_queries: int
    space_words: int
    outputs_emitted: int
    space_breakdown: dict[str, int] = field(default_factory=dict)


class QueryContext:
    """State of a single run: trace, counters, space, outputs."""

    def __init__(self, record_trace: bool = True) -> None:
        self.trace: list[tuple[str, int]] | None = [] if record_trace else None
        self.counts: Counter[str] = Counter()
        self.extra_charge = 0
        self.space: dict[str, int] = {}
        self.sink = OutputSink()
        self._tapes: dict[str, Tape] = {}

    def tape(self, values: Iterable[int], tape_id: str = "X") -> Tape:
        if tape_id in self._tapes:
            raise ValueError(f"tape id {tape_id!r} already used in this context")
        t = Tape(self, tape_id, values)
        self._tapes[tape_id] = t
        self.counts[tape_id] += 0
        return t

    def declare_space(self, label: str, words: int) -> None:
        if words > self.space.get(label, -1):
            self.space[label] = int(words)

    def charge(self, queries: int) -> None:
        """Charge logical queries that were served without a physical read."""
        self.extra_charge += queries

    def emit(self, key: Hashable, value: Any = None) -> None:
        self.sink.emit(key, value)

    @property
    def total_queries(self) -> int:
        return sum(self.counts.values())

    def report(self) -> CostReport:
        total = self.total_queries
        if self.trace is not None:
            assert len(self.trace) == total
        return CostReport(
            queries_per_tape=dict(self.counts),
            total_queries=total,
            charged_queries=total + self.extra_charge,
            space_words=sum(self.space.values()),
            outputs_emitted=len(self.sink),
            space_breakdown=dict(self.space),
        )


class Tape:
    """Read-only input sequence; every read is counted and traced."""

    __slots__ = ("ctx", "id", "_values")

    def __init__(self, ctx: QueryContext, tape_id: str, values: Iterable[int]):
        self.ctx = ctx
        self.id = tape_id
        self._values = tuple(int(v) for v in values)

    def __len__(self) -> int:
        return len(self._values)

    @property
    def length(self) -> int:
        return len(self._values)

    def read(self, i: int) -> int:
        if not 1 <= i <= len(self._values):
            raise IndexError(f"tape {self.id!r}: index {i} outside [1, {len(self._values)}]")
        ctx = self.ctx
        ctx.counts[self.id] += 1
        if ctx.trace is not None:
            ctx.trace.append((self.id, i))
        return self._values[i - 1]

    def read_many(self, indices: Sequence[int]) -> list[int]:
        """Read several positions in order; identical to repeated :meth:`read`."""
        n = len(self._values)
        for i in indices:
            if not 1 <= i <= n:
                raise IndexError(f"tape {self.id!r}: index {i} outside [1, {n}]")
        ctx = self.ctx
        ctx.counts[self.id] += len(indices)
        if ctx.trace is not None:
            tid = self.id
            ctx.trace.extend((tid, i) for i in indices)
        vals = self._values
        return [vals[i - 1] for i in indices]

    def ground_truth(self) -> tuple[int, ...]:
        """Untraced view of the contents, for test accounting only."""
        return self._values


def read(tape: Tape, i: int) -> int:
    return tape.read(i)


class RandomStream:
    """One-way random bit stream (see module docstring for the bit layout)."""

    _REFILL_WORDS = 16

    def __init__(self, seed: int) -> None:
        self.seed = int(seed) & MASK64
        self._gen = np.random.Philox(key=self.seed)
        self._buf = 0
        self._nbuf = 0
        self.cursor = 0

    def _ensure(self, k: int) -> None:
        if self._nbuf >= k:
            return
        need = -(-(k - self._nbuf) // 64)
        words = self._gen.random_raw(max(need, self._REFILL_WORDS))
        chunk = int.from_bytes(words.astype("<u8").tobytes(), "little")
        self._buf |= chunk << self._nbuf
        self._nbuf += 64 * len(words)

    def draw_uint(self, k: int) -> int:
        """Consume ``k`` bits; bit ``j`` of the result is the ``j``-th bit drawn."""
        if k < 0:
            raise ValueError("k must be non-negative")
        if k == 0:
            return 0
        self._ensure(k)
        out = self._buf & ((1 << k) - 1)
        self._buf >>= k
        self._nbuf -= k
        self.cursor += k
        return out

    def draw_bits(self, k: int) -> list[int]:
        v = self.draw_uint(k)
        return [(v >> j) & 1 for j in range(k)]

    def draw_below(self, bound: int) -> int:
        """Uniform-ish value in ``[0, bound)`` from one 64-bit draw.

        Plain modular reduction; bias is below ``bound / 2**64``, i.e. under
        2**-32 for any bound below 2**32.
        """
        if bound < 1:
            raise ValueError("bound must be positive")
        return self.draw_uint(64) % bound

    def draw_below_many(self, bounds: int | Sequence[int], count: int | None = None) -> np.ndarray:
        """Vectorized :meth:`draw_below`; consumes the same bits in the same order."""
        if count is None:
            b = np.asarray(bounds, dtype=np.uint64)
            count = len(b)
        else:
            b = np.uint64(bounds)
        if count == 0:
            return np.zeros(0, dtype=np.int64)
        raw = self.draw_uint(64 * count).to_bytes(8 * count, "little")
        words = np.frombuffer(raw, dtype="<u8")
        return (words % b).astype(np.int64)


@dataclass
class ObliviousCheck:
    oblivious: bool
    divergence: int | None = None
    inputs: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.oblivious


def first_divergence(a: Sequence, b: Sequence) -> int | None:
    """0-based position of the first differing entry, ``None`` if equal."""
    for pos, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return pos
    if len(a) != len(b):
        return min(len(a), len(b))
    return None


def traced_run(
    run: Callable[..., Any],
    values: Sequence[Sequence[int]],
    seed: int,
    tape_ids: Sequence[str] | None = None,
) -> tuple[Any, QueryContext]:
    """Run ``run(stream, *tapes)`` in a fresh traced context."""
    ids = list(tape_ids) if tape_ids is not None else [f"t{k}" for k in range(len(values))]
    if len(ids) != len(values):
        raise ValueError("one tape id per input sequence is required")
    ctx = QueryContext(record_trace=True)
    tapes = [ctx.tape(v, tid) for v, tid in zip(values, ids)]
    result = run(RandomStream(seed), *tapes)
    return result, ctx


def check_oblivious(
    run: Callable[..., Any],
    inputs: Sequence[Sequence[Sequence[int]]],
    seed: int,
    tape_ids: Sequence[str] | None = None,
) -> ObliviousCheck:
    """Run one procedure on several inputs under one seed and compare traces.

    ``run(stream, *tapes)`` receives a fresh :class:`RandomStream` and one
    tape per sequence of the input tuple.  All inputs must have the same
    shape.  On failure the result carries the earliest diverging trace
    position and the pair of input indices where it was seen.
    """
    if not inputs:
        return ObliviousCheck(True)
    shape = [len(v) for v in inputs[0]]
    for k, inp in enumerate(inputs):
        if [len(v) for v in inp] != shape:
            raise ValueError(f"input {k} has shape {[len(v) for v in inp]}, expected {shape}")
    traces = [traced_run(run, inp, seed, tape_ids)[1].trace for inp in inputs]
    best: tuple[int, int] | None = None
    where = None
    for k in range(1, len(traces)):
        d = first_divergence(traces[0], traces[k])
        if d is not None and (where is None or d < where):
            where, best = d, (0, k)
    if where is None:
        return ObliviousCheck(True)
    return ObliviousCheck(False, where, best)


def dump_trace(trace: Iterable[tuple[str, int]]) -> str:
    return "".join(f"{tid}\t{i}\n" for tid, i in trace)


def load_trace(text: str) -> list[tuple[str, int]]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        tid, idx = line.split("\t")
        out.append((tid, int(idx)))
    return out


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0
