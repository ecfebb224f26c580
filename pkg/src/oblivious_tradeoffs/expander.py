"""Unbalanced bipartite (k, 1)-expanders and lexicographically smallest matchings.

Explicit constructions are not attempted; :func:`gen_candidate_expander`
samples left-regular random graphs and keeps the first one that passes the
exhaustive check of :func:`verify_expander`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .query_model import RandomStream


class NoMatchingError(ValueError):
    """The left set has no matching saturating it."""


class ExpanderGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class BipartiteGraph:
    n_left: int
    m_right: int
    adj: tuple[tuple[int, ...], ...]  # adj[v - 1]: sorted right neighbors of v

    @classmethod
    def from_edges(cls, n_left: int, m_right: int, edges: Iterable[tuple[int, int]]) -> BipartiteGraph:
        nb: list[set[int]] = [set() for _ in range(n_left)]
        for v, y in edges:
            if not (1 <= v <= n_left and 1 <= y <= m_right):
                raise ValueError(f"edge ({v}, {y}) out of range")
            if y in nb[v - 1]:
                raise ValueError(f"duplicate edge ({v}, {y})")
            nb[v - 1].add(y)
        return cls(n_left, m_right, tuple(tuple(sorted(s)) for s in nb))

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v - 1]

    def edges(self) -> list[tuple[int, int]]:
        return [(v, y) for v in range(1, self.n_left + 1) for y in self.adj[v - 1]]

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adj)

    def left_neighbors(self) -> list[tuple[int, ...]]:
        """``out[y - 1]``: sorted left vertices adjacent to right vertex ``y``."""
        out: list[list[int]] = [[] for _ in range(self.m_right)]
        for v in range(1, self.n_left + 1):
            for y in self.adj[v - 1]:
                out[y - 1].append(v)
        return [tuple(o) for o in out]


@dataclass(frozen=True)
class ExpansionCheck:
    ok: bool
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_expander(G: BipartiteGraph, k: int) -> ExpansionCheck:
    """Exhaustively check ``|N(L)| >= |L|`` for every ``L`` with ``|L| <= k``.

    Exponential in ``k`` by design; ``k`` is capped at 20.  Subsets are tried
    by size, then lexicographically, so the witness is the first violator in
    that order.
    """
    if k > 20:
        raise ValueError("exhaustive expansion check is limited to k <= 20")
    masks = [sum(1 << (y - 1) for y in nb) for nb in G.adj]
    for size in range(1, min(k, G.n_left) + 1):
        for L in combinations(range(G.n_left), size):
            u = 0
            for v in L:
                u |= masks[v]
            if u.bit_count() < size:
                return ExpansionCheck(False, tuple(v + 1 for v in L))
    return ExpansionCheck(True)


def default_right_size(n: int, k: int, alpha: float = 0.5) -> int:
    """``ceil(k^(1+alpha) * log2(n)^2)``."""
    return math.ceil(k ** (1 + alpha) * math.log2(max(n, 2)) ** 2)


def sample_distinct(stream: RandomStream, universe: int, count: int) -> list[int]:
    """Floyd's sampler: ``count`` distinct values of ``[1, universe]``, sorted."""
    chosen: set[int] = set()
    draws = stream.draw_below_many(list(range(universe - count + 1, universe + 1)))
    for t, j in zip(draws.tolist(), range(universe - count + 1, universe + 1)):
        v = t + 1
        chosen.add(j if v in chosen else v)
    return sorted(chosen)


def random_left_regular(n: int, m: int, degree: int, stream: RandomStream) -> BipartiteGraph:
    if not 1 <= degree <= m:
        raise ValueError(f"degree {degree} must lie in [1, m={m}]")
    adj = tuple(tuple(sample_distinct(stream, m, degree)) for _ in range(n))
    return BipartiteGraph(n, m, adj)


def gen_candidate_expander(
    n: int,
    k: int,
    degree: int,
    m: int,
    stream: RandomStream,
    retry_limit: int = 100,
) -> tuple[BipartiteGraph, int]:
    """First verified (k, 1)-expander among random left-regular graphs.

    Returns the graph and the number of rejected candidates before it.
    """
    if m < k:
        raise ValueError(f"m={m} < k={k}: no (k,1)-expander exists")
    for attempt in range(retry_limit):
        G = random_left_regular(n, m, degree, stream)
        if verify_expander(G, k):
            return G, attempt
    raise ExpanderGenerationError(
        f"no (k,1)-expander after {retry_limit} tries (n={n}, k={k}, degree={degree}, m={m})"
    )


def _saturates(G: BipartiteGraph, left: Sequence[int], banned: set[int]) -> bool:
    """Whether ``left`` has a matching avoiding ``banned`` right vertices (Kuhn)."""
    owner: dict[int, int] = {}

    def augment(v: int, seen: set[int]) -> bool:
        for y in G.adj[v - 1]:
            if y in banned or y in seen:
                continue
            seen.add(y)
            if y not in owner or augment(owner[y], seen):
                owner[y] = v
                return True
        return False

    return all(augment(v, set()) for v in left)


def lex_min_matching(G: BipartiteGraph, L: Iterable[int], k: int | None = None) -> dict[int, int]:
    """Matching of ``sorted(set(L))`` with lexicographically smallest image sequence.

    Greedy: each vertex in increasing order takes its smallest neighbor that
    still leaves the remaining vertices matchable.
    """
    left = sorted(set(L))
    if k is not None and len(left) > k:
        raise ValueError(f"|L|={len(left)} exceeds k={k}")
    used: set[int] = set()
    if not _saturates(G, left, used):
        raise NoMatchingError(f"no matching saturates L={left}")
    M: dict[int, int] = {}
    for idx, v in enumerate(left):
        rest = left[idx + 1:]
        for y in G.adj[v - 1]:
            if y in used:
                continue
            used.add(y)
            if _saturates(G, rest, used):
                M[v] = y
                break
            used.discard(y)
        else:  # pragma: no cover - unreachable once the initial check passed
            raise NoMatchingError(f"no matching saturates L={left}")
    return M


def expander_matching(L: Iterable[int], y: int, G: BipartiteGraph, k: int | None = None) -> int | None:
    """The vertex of ``L`` matched to ``y`` by :func:`lex_min_matching`, or None."""
    for v, z in lex_min_matching(G, L, k).items():
        if z == y:
            return v
    return None
