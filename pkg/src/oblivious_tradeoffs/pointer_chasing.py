"""2-StepPointerChasing: output ``(x, f(f(x)))`` for every ``x`` in ``[n]``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .expander import BipartiteGraph, expander_matching, sample_distinct
from .query_model import RandomStream, Tape


@dataclass(frozen=True)
class PcInstance:
    n: int
    f: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.f) != self.n:
            raise ValueError(f"expected {self.n} values, got {len(self.f)}")
        bad = [v for v in self.f if not 1 <= v <= self.n]
        if bad:
            raise ValueError(f"values outside [1, {self.n}]: {bad[:5]}")

    @classmethod
    def of(cls, values: Sequence[int]) -> PcInstance:
        return cls(len(values), tuple(int(v) for v in values))


def compose(f: Sequence[int]) -> list[tuple[int, int]]:
    """Table lookup ``f(f(x))``; the reference every algorithm is checked against."""
    return [(x, f[f[x - 1] - 1]) for x in range(1, len(f) + 1)]


def pc2_adaptive(f: Tape) -> list[tuple[int, int]]:
    """Query ``f(x)`` then ``f(f(x))`` for each ``x``: ``2n`` adaptive queries, 3 words."""
    ctx = f.ctx
    ctx.declare_space("pc2", 3)
    out = []
    for x in range(1, len(f) + 1):
        z = f.read(f.read(x))
        ctx.emit(x, z)
        out.append((x, z))
    return out


@dataclass
class RandomizedResult:
    pairs: dict[int, int]
    coverage: float


def default_rounds(n: int, S: int) -> int:
    return max(1, math.ceil(3 * (n / S) * math.log(max(n, 2))))


def pc2_randomized_oblivious(f: Tape, S: int, stream: RandomStream, rounds: int | None = None) -> RandomizedResult:
    """Random-subset rounds: pairs with ``x`` in ``X`` and ``f(x)`` in ``Y`` get answered.

    Each round samples ``X`` and ``Y`` of size ``ceil(sqrt(n S))``, reads
    ``f`` on ``X`` (ascending), keeps up to ``ceil(S log2 n)`` pairs with
    ``f(x)`` in ``Y`` (smallest ``x`` first), then reads ``f`` on ``Y``.
    The membership test for ``Y`` plays the role of a hardwired random
    choice and is not counted as working storage; the pair store is.
    """
    n = len(f)
    if not 1 <= S <= n:
        raise ValueError(f"S={S} must lie in [1, n={n}]")
    if rounds is None:
        rounds = default_rounds(n, S)
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    ctx = f.ctx
    size = min(n, math.isqrt(n * S - 1) + 1)
    capacity = max(1, math.ceil(S * math.log2(n))) if n > 1 else 1
    ctx.declare_space("pc2_pairs", 2 * capacity + 4)
    found: dict[int, int] = {}
    for _ in range(rounds):
        X = sample_distinct(stream, n, size)
        Y = sample_distinct(stream, n, size)
        ys = set(Y)
        fx = f.read_many(X)
        waiting: dict[int, list[int]] = {}
        kept = 0
        for x, v in zip(X, fx):
            if kept == capacity:
                break
            if v in ys:
                waiting.setdefault(v, []).append(x)
                kept += 1
        fy = f.read_many(Y)
        for y, z in zip(Y, fy):
            for x in waiting.get(y, ()):
                ctx.emit(x, z)
                found[x] = z
    return RandomizedResult(found, len(found) / n)


def validate_alg1_params(n: int, k: int, S: int) -> None:
    if k < 1 or S < 1:
        raise ValueError("k and S must be positive")
    if n % k:
        raise ValueError(f"k={k} must divide n={n}")
    if n % (k * S):
        raise ValueError(f"k*S={k * S} must divide n={n}")


def nearest_valid(n: int, k: int, S: int) -> tuple[int, int]:
    """Closest ``(k', S')`` with ``k' * S'`` dividing ``n`` (by ``|k-k'| + |S-S'|``)."""
    best = None
    for kk in range(1, n + 1):
        if n % kk:
            continue
        for ss in range(1, n // kk + 1):
            if (n // kk) % ss:
                continue
            key = (abs(kk - k) + abs(ss - S), kk, ss)
            if best is None or key < best:
                best = key
    assert best is not None
    return best[1], best[2]


def pc2_alg1(f: Tape, G: BipartiteGraph, k: int, S: int) -> list[tuple[int, int]]:
    """Deterministic oblivious 2-PC driven by a (k, 1)-expander.

    Blocks ``B_b`` are ``k`` consecutive points; stage ``l`` handles blocks
    ``lS .. lS + S - 1``.  For each right vertex ``y`` and block ``i`` the
    matching subroutine reads ``f`` on the block and locally computes
    ``u_i``, the vertex of ``f(B_i)`` matched to ``y``.  Then ``f`` is read on
    every left neighbour of ``y`` (which includes each ``u_i``) and on every
    point of the stage.  All read positions are fixed by ``(n, k, S, G)``.

    A hit ``f(x) = u_i`` may come from a block other than ``i``; it is still
    a correct answer and the sink deduplicates it.

    Space: ``u_store`` holds ``u_i`` and ``f(u_i)``; ``matching`` is the
    subroutine workspace (block image and matching), reported apart.
    """
    n = len(f)
    validate_alg1_params(n, k, S)
    if G.n_left != n:
        raise ValueError(f"graph has {G.n_left} left vertices, expected n={n}")
    ctx = f.ctx
    ctx.declare_space("u_store", 2 * S + 2)
    ctx.declare_space("matching", 2 * k + 2)
    left_of = G.left_neighbors()
    out: dict[int, int] = {}
    span = k * S
    for ell in range(n // span):
        first = ell * span + 1
        for y in range(1, G.m_right + 1):
            u: list[int | None] = []
            for i in range(S):
                start = (ell * S + i) * k + 1
                image = f.read_many(range(start, start + k))
                u.append(expander_matching(image, y, G, k))
            targets = {v for v in u if v is not None}
            attached: dict[int, int] = {}
            for v in left_of[y - 1]:
                fv = f.read(v)
                if v in targets:
                    attached[v] = fv
            for x in range(first, first + span):
                fx = f.read(x)
                if fx in attached:
                    ctx.emit(x, attached[fx])
                    out[x] = attached[fx]
    return sorted(out.items())


def alg1_query_count(n: int, k: int, S: int, G: BipartiteGraph) -> int:
    """Exact read count of :func:`pc2_alg1`: ``n/(kS) * (2 m k S + |E|)``."""
    return (n // (k * S)) * (2 * G.m_right * k * S + G.num_edges)
