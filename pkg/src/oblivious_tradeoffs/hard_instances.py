"""Adversarial input distribution against deterministic oblivious NOE solvers.

The query sequence of a deterministic oblivious program is cut into stages
of ``n/2`` queries.  For every stage a few size-``p`` parts are reserved
outside everything that stage reads; leftover positions are grouped into
parts afterwards.  Filling each part with one uniform value gives inputs on
which every count is a multiple of ``p``, while each stage still has whole
parts it knows nothing about.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .query_model import RandomStream


class InfeasibleParameters(ValueError):
    pass


@dataclass(frozen=True)
class StageSchedule:
    n: int
    T: int
    stages: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        for k, q in enumerate(self.stages):
            bad = [i for i in q if not 1 <= i <= self.n]
            if bad:
                raise ValueError(f"stage {k} queries indices outside [1, {self.n}]: {bad[:5]}")

    @classmethod
    def from_queries(cls, n: int, indices: Sequence[int]) -> StageSchedule:
        """Split a query sequence into ``ceil(2T/n)`` stages of ``n // 2`` queries.

        The last stage may be short.
        """
        T = len(indices)
        size = max(1, n // 2)
        stages = tuple(frozenset(indices[s:s + size]) for s in range(0, T, size))
        return cls(n, T, stages)

    @classmethod
    def from_trace(cls, n: int, trace: Iterable[tuple[str, int]], tape_id: str = "X") -> StageSchedule:
        return cls.from_queries(n, [i for tid, i in trace if tid == tape_id])

    @property
    def num_stages(self) -> int:
        return len(self.stages)


@dataclass(frozen=True)
class PPartition:
    n: int
    p: int
    parts: tuple[tuple[int, ...], ...]
    # stage index each part was reserved against; None for leftover grouping
    provenance: tuple[int | None, ...] = field(default=())

    def validate(self) -> None:
        seen: set[int] = set()
        if len(self.parts) != self.n // self.p:
            raise AssertionError(f"{len(self.parts)} parts, expected {self.n // self.p}")
        for part in self.parts:
            if len(part) != self.p:
                raise AssertionError(f"part {part} has size {len(part)} != {self.p}")
            if seen.intersection(part):
                raise AssertionError(f"part {part} overlaps an earlier part")
            seen.update(part)
        if seen != set(range(1, self.n + 1)):
            raise AssertionError("parts do not cover [n]")

    def reserved_for(self, stage: int) -> list[tuple[int, ...]]:
        return [pt for pt, k in zip(self.parts, self.provenance) if k == stage]


def reservation_count(n: int, T: int, p: int) -> int:
    """``floor(n^2 / (4 T p))``."""
    return (n * n) // (4 * T * p)


def build_partition(schedule: StageSchedule, p: int) -> PPartition:
    n, T = schedule.n, schedule.T
    if p < 1 or n % p:
        raise InfeasibleParameters(f"p={p} must divide n={n}")
    if T < 1:
        raise InfeasibleParameters("T must be positive")
    r = reservation_count(n, T, p)
    if r < 1:
        raise InfeasibleParameters(
            f"r = floor(n^2/(4Tp)) = floor({n * n}/{4 * T * p}) = 0; need r >= 1"
        )
    ell = schedule.num_stages
    if 2 * r * ell * p > n:
        raise InfeasibleParameters(
            f"r*l*p = {r}*{ell}*{p} = {r * ell * p} exceeds n/2 = {n / 2}"
        )

    used: set[int] = set()
    parts: list[tuple[int, ...]] = []
    prov: list[int | None] = []
    for k, q in enumerate(schedule.stages):
        avail = (i for i in range(1, n + 1) if i not in used and i not in q)
        for _ in range(r):
            part = tuple(next(avail) for _ in range(p))
            used.update(part)
            parts.append(part)
            prov.append(k)
    rest = [i for i in range(1, n + 1) if i not in used]
    for s in range(0, len(rest), p):
        parts.append(tuple(rest[s:s + p]))
        prov.append(None)
    out = PPartition(n, p, tuple(parts), tuple(prov))
    out.validate()
    return out


def sample_D(partition: PPartition, stream: RandomStream) -> list[int]:
    """One uniform value of ``[n]`` per part, copied to all its positions."""
    X = [0] * partition.n
    for part in partition.parts:
        c = stream.draw_below(partition.n) + 1
        for i in part:
            X[i - 1] = c
    return X
