"""(n, p)-Non-Occurring-Elements.

Given ``X`` in ``[n]^n`` and a prime ``p | n``: if every value occurs a
multiple of ``p`` times, output the values of ``[n]`` that do not occur,
otherwise output nothing.

The randomized solver has two oblivious phases sharing one random stream:

* :func:`promise_check` -- a linear sketch over ``F_p`` of the occurrence
  counts.  Coefficients are monomials ``beta_1^d_1 ... beta_m^d_m`` in ``m``
  seed variables with every exponent below ``d``, so the seed is only ``m``
  field elements.  A count not divisible by ``p`` makes the sketch a non-zero
  polynomial of total degree at most ``m*d`` and it vanishes on at most a
  ``m*d/p`` fraction of seeds.
* :func:`noe_sampler` -- walks the occurring values in increasing order, one
  per round, by sampling ``r`` random positions per round.
"""

from __future__ import annotations

import math
import random
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .query_model import QueryContext, RandomStream, Tape, ceil_log2


class SketchBoundWarning(UserWarning):
    """``m*d >= p``: the soundness bound of the sketch is vacuous."""


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class NoeInstance:
    n: int
    p: int
    X: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.n % self.p:
            raise ValueError(f"p={self.p} does not divide n={self.n}")
        if len(self.X) != self.n:
            raise ValueError(f"expected {self.n} values, got {len(self.X)}")
        bad = [v for v in self.X if not 1 <= v <= self.n]
        if bad:
            raise ValueError(f"values outside [1, {self.n}]: {bad[:5]}")

    @classmethod
    def of(cls, n: int, p: int, values: Sequence[int]) -> NoeInstance:
        return cls(n, p, tuple(int(v) for v in values))

    def tape(self, ctx: QueryContext, tape_id: str = "X") -> Tape:
        return ctx.tape(self.X, tape_id)


@dataclass(frozen=True)
class SketchParams:
    """``d = ceil(sqrt p)``, ``m = ceil(2 log n / log p)``.

    ``m`` is computed exactly as the least integer with ``p**m >= n**2``.
    """

    n: int
    p: int
    d: int
    m: int

    @classmethod
    def for_problem(cls, n: int, p: int, warn: bool = True) -> SketchParams:
        d = math.isqrt(p)
        if d * d < p:
            d += 1
        m = 1
        while p**m < n * n:
            m += 1
        params = cls(n, p, d, m)
        assert d**m >= n, (n, p, d, m)
        if warn and not params.bound_nontrivial:
            warnings.warn(
                f"sketch over F_{p} with m={m}, d={d}: m*d={m * d} >= p, "
                "false-accept bound is vacuous",
                SketchBoundWarning,
                stacklevel=2,
            )
        return params

    @property
    def bound_nontrivial(self) -> bool:
        return self.m * self.d < self.p

    @property
    def false_accept_bound(self) -> float:
        return min(1.0, self.m * self.d / self.p)

    def digits(self, c: int) -> list[int]:
        """Base-``d`` digits of ``c - 1``, least significant first, length ``m``."""
        v = c - 1
        out = []
        for _ in range(self.m):
            v, r = divmod(v, self.d)
            out.append(r)
        return out


@dataclass(frozen=True)
class SketchSeed:
    betas: tuple[int, ...]

    @classmethod
    def draw(cls, params: SketchParams, stream: RandomStream) -> SketchSeed:
        return cls(tuple(stream.draw_below(params.p) for _ in range(params.m)))


def monomial_coeff(c: int, seed: SketchSeed, params: SketchParams) -> int:
    if not 1 <= c <= params.n:
        raise ValueError(f"c={c} outside [1, {params.n}]")
    p = params.p
    acc = 1
    # pow(0, 0, p) == 1, so zero digits contribute 1 even for beta == 0
    for beta, e in zip(seed.betas, params.digits(c)):
        acc = acc * pow(beta, e, p) % p
    return acc


def _multi_pass(X: Tape, seeds: Sequence[SketchSeed], params: SketchParams) -> list[int]:
    """One left-to-right pass feeding one accumulator per seed."""
    p = params.p
    acc = [0] * len(seeds)
    for i in range(1, len(X) + 1):
        c = X.read(i)
        for r, seed in enumerate(seeds):
            acc[r] = (acc[r] + monomial_coeff(c, seed, params)) % p
    return acc


def sketch_pass(X: Tape, seed: SketchSeed, params: SketchParams) -> bool:
    """Accept iff the sketch sum is zero mod ``p``.  Space: ``m + 2`` words."""
    X.ctx.declare_space("sketch", params.m + 2)
    return _multi_pass(X, [seed], params)[0] == 0


def promise_check_with_seeds(
    X: Tape,
    seeds: Sequence[SketchSeed],
    params: SketchParams,
    charge_repetitions: bool = True,
) -> bool:
    """Interleaved repetitions of :func:`sketch_pass` over a single pass.

    The pass is physical once; with ``charge_repetitions`` the context is
    charged ``len(seeds) * n`` queries as if each repetition re-read ``X``.
    Space: ``len(seeds) * (m + 1) + 1`` words.
    """
    reps = len(seeds)
    X.ctx.declare_space("sketch", reps * (params.m + 1) + 1)
    acc = _multi_pass(X, seeds, params)
    if charge_repetitions:
        X.ctx.charge((reps - 1) * len(X))
    return all(a == 0 for a in acc)


def promise_check(
    X: Tape,
    params: SketchParams,
    stream: RandomStream,
    reps: int,
    charge_repetitions: bool = True,
) -> bool:
    if reps < 1:
        raise ValueError("reps must be at least 1")
    seeds = [SketchSeed.draw(params, stream) for _ in range(reps)]
    return promise_check_with_seeds(X, seeds, params, charge_repetitions)


def sampler_sizes(n: int, p: int) -> tuple[int, int]:
    """``(rounds, r)`` with ``rounds = ceil(n/p)`` and ``r = ceil(3 (n/p) ln n)``."""
    return -(-n // p), math.ceil(3 * (n / p) * math.log(n))


@dataclass(frozen=True)
class SamplerResult:
    Y: frozenset[int]
    success: bool


def noe_sampler(X: Tape, n: int, p: int, stream: RandomStream, emit: bool = True) -> SamplerResult:
    """Round-based sampler for inputs where each value occurs 0 or >= p times.

    Each round samples ``r`` positions with replacement and moves ``j`` to the
    smallest sampled value above it, outputting everything in between.  After
    the last round the tail ``(j, n]`` is output; this needs no queries and
    covers the case of exactly ``n/p`` occurring values, where the last round
    ends on the largest of them.

    ``success`` compares every round's sample against the true occurring set
    through an untraced view of ``X``; the algorithm never uses it.
    Space: 4 words (``j``, ``j'``, round and sample counters).
    """
    ctx = X.ctx
    ctx.declare_space("sampler", 4)
    rounds, r = sampler_sizes(n, p)
    occurring = set(X.ground_truth())
    success = True
    out: set[int] = set()

    def put(lo: int, hi: int) -> None:
        for y in range(lo + 1, hi):
            out.add(y)
            if emit:
                ctx.emit(y)

    j = 0
    for _ in range(rounds):
        positions = stream.draw_below_many(n, r) + 1
        values = X.read_many(positions.tolist())
        nxt = n + 1
        for v in values:
            if j < v < nxt:
                nxt = v
        if not occurring.issubset(values):
            success = False
        put(j, nxt)
        j = nxt
    put(j, n + 1)
    return SamplerResult(frozenset(out), success)


def noe_solve(
    X: Tape,
    n: int,
    p: int,
    stream: RandomStream,
    reps: int | None = None,
    charge_repetitions: bool = True,
) -> frozenset[int]:
    """Promise check followed by the sampler.

    The sampler runs even after a rejection, with its outputs suppressed, so
    the query sequence never depends on the check's verdict.
    """
    params = SketchParams.for_problem(n, p, warn=False)
    if reps is None:
        reps = max(1, ceil_log2(n))
    accepted = promise_check(X, params, stream, reps, charge_repetitions)
    res = noe_sampler(X, n, p, stream, emit=accepted)
    return res.Y if accepted else frozenset()


def query_bound(n: int, p: int, reps: int | None = None) -> int:
    """``reps * n + ceil(n/p) * r``: the charged query count of :func:`noe_solve`."""
    if reps is None:
        reps = max(1, ceil_log2(n))
    rounds, r = sampler_sizes(n, p)
    return reps * n + rounds * r


def noe_bruteforce(inst: NoeInstance) -> frozenset[int]:
    counts = Counter(inst.X)
    if any(k % inst.p for k in counts.values()):
        return frozenset()
    return frozenset(c for c in range(1, inst.n + 1) if c not in counts)


def promise_holds(values: Sequence[int], p: int) -> bool:
    return all(k % p == 0 for k in Counter(values).values())


def random_promise_instance(n: int, p: int, rng: random.Random) -> NoeInstance:
    """Random positions grouped into ``n/p`` blocks, each filled with one value."""
    order = list(range(n))
    rng.shuffle(order)
    X = [0] * n
    for start in range(0, n, p):
        c = rng.randint(1, n)
        for pos in order[start:start + p]:
            X[pos] = c
    return NoeInstance.of(n, p, X)


def random_violating_instance(n: int, p: int, rng: random.Random) -> NoeInstance:
    """A promise-satisfying instance with one position changed to break it."""
    base = list(random_promise_instance(n, p, rng).X)
    i = rng.randrange(n)
    old = base[i]
    base[i] = rng.choice([c for c in range(1, n + 1) if c != old])
    return NoeInstance.of(n, p, base)
