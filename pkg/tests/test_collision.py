import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oblivious_tradeoffs.collision import (
    CollisionInstance,
    CollisionTriple,
    EDOracle,
    LDOracle,
    SearchStats,
    alg2_setcollision,
    alg3_parallel,
    bipartite_pieces,
    collision_bruteforce,
    ed_reference,
    initial_batches,
    initial_length,
    ld_reference,
    list_collisions,
    lockstep_run,
    n_collision,
    ncollision_bruteforce,
    next_pow2,
    pad_lists,
    run_oracle,
    set_collision,
)
from oblivious_tradeoffs.query_model import QueryContext


def _scan_distinct(a, b):
    v = list(a) + list(b)
    return all(v[i] != v[j] for i in range(len(v)) for j in range(i + 1, len(v)))


def _scan_cross(a, b):
    return int(any(x == y for x in a for y in b))


def _tapes(a, b):
    ctx = QueryContext()
    return ctx.tape(a, "A"), ctx.tape(b, "B"), ctx


def _dup_free_pair(n, rng, domain=None):
    domain = domain or 2 * n
    return rng.sample(range(1, domain + 1), n), rng.sample(range(1, domain + 1), n)


class TestOracles:
    def test_examples(self):
        assert ed_reference((1, 2), (3, 4))
        assert not ed_reference((1, 2), (2, 9))
        assert ld_reference((1, 1, 2), (3, 4, 5)) == 0
        assert ld_reference((1, 2, 3), (3, 3, 3)) == 1

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 64).flatmap(
        lambda l: st.tuples(st.lists(st.integers(1, 3 * l), min_size=l, max_size=l),
                            st.lists(st.integers(1, 3 * l), min_size=l, max_size=l))))
    def test_against_pairwise_scan(self, ab):
        a, b = ab
        assert ed_reference(a, b) == _scan_distinct(a, b)
        assert ld_reference(a, b) == _scan_cross(a, b)

    def test_schedule_depends_on_length_only(self):
        orc = EDOracle()
        sched = orc.schedule(3)
        assert sched == ((0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2))
        for a, b in [((1, 2, 3), (4, 5, 6)), ((9, 9, 9), (9, 9, 9))]:
            A, B, ctx = _tapes(a, b)
            run_oracle(orc, A, B, 1, 1, 3)
            assert ctx.trace == [("A", 1), ("A", 2), ("A", 3), ("B", 1), ("B", 2), ("B", 3)]
        assert orc.space(8) == 17 and LDOracle().space(8) == 9


class TestLockstep:
    def test_identical_pairs_fully_deduplicated(self):
        A, B, ctx = _tapes(list(range(1, 9)), list(range(9, 17)))
        res = lockstep_run([(1, 5)] * 4, A, B, EDOracle(), 4)
        assert res.physical_queries == 8 and res.logical_queries == 32
        rep = ctx.report()
        assert rep.total_queries == 8 and rep.charged_queries == 32

    def test_shared_b_interval(self):
        A, B, ctx = _tapes(list(range(1, 9)), list(range(9, 17)))
        lockstep_run([(1, 5), (5, 5)], A, B, EDOracle(), 4)
        assert ctx.counts == {"A": 8, "B": 4}

    def test_verdicts_match_independent_runs(self):
        rng = random.Random(0)
        for _ in range(100):
            n, length = 32, rng.choice([1, 2, 4, 8])
            a = [rng.randint(1, 40) for _ in range(n)]
            b = [rng.randint(1, 40) for _ in range(n)]
            pairs = [(rng.randrange(0, n - length + 1) + 1, rng.randrange(0, n - length + 1) + 1)
                     for _ in range(rng.randint(1, 16))]
            for orc, ref in ((EDOracle(), ed_reference), (LDOracle(), lambda x, y: not ld_reference(x, y))):
                A, B, _ = _tapes(a, b)
                got = lockstep_run(pairs, A, B, orc, length).verdicts
                want = [bool(ref(a[s - 1:s - 1 + length], b[t - 1:t - 1 + length])) for s, t in pairs]
                assert got == want


class TestAlg2:
    def test_examples(self):
        got, _ = set_collision((1, 2, 3), (3, 4, 5))
        assert got == {CollisionTriple(3, 1, 3)}
        assert collision_bruteforce((1, 2), (2, 1)) == {(1, 2, 1), (2, 1, 2)}
        assert collision_bruteforce((1, 2), (3, 4)) == frozenset()

    def test_disjoint_single_oracle_call(self):
        stats = SearchStats()
        A, B, _ = _tapes(list(range(1, 17)), list(range(17, 33)))
        assert alg2_setcollision(A, B, stats=stats) == frozenset()
        assert sum(stats.calls.values()) == 1

    def test_permutation_per_level_bound(self):
        rng = random.Random(1)
        n = 256
        a, b = rng.sample(range(1, n + 1), n), rng.sample(range(1, n + 1), n)
        stats = SearchStats()
        A, B, _ = _tapes(a, b)
        got = alg2_setcollision(A, B, stats=stats, debug=True)
        assert got == collision_bruteforce(a, b)
        assert all(c <= n for c in stats.actual.values())
        assert stats.actual[1] == n

    def test_rejects_unpadded(self):
        A, B, _ = _tapes([1, 2, 3], [4, 5, 6])
        with pytest.raises(ValueError):
            alg2_setcollision(A, B)

    def test_padding(self):
        pa, pb = pad_lists([1, 5, 2], [5, 7])
        assert len(pa) == len(pb) == 4
        assert pa[:3] == [1, 5, 2] and pb[:2] == [5, 7]
        sentinels = pa[3:] + pb[2:]
        assert len(set(sentinels)) == 3 and min(sentinels) > 7
        assert next_pow2(1) == 1 and next_pow2(5) == 8 and next_pow2(8) == 8


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 64), st.sampled_from([1, 2, 4, 9, 16]))
def test_alg2_alg3_bruteforce_agree(seed, n, S):
    rng = random.Random(seed)
    a, b = _dup_free_pair(n, rng, domain=rng.choice([n, 2 * n, 10 * n]))
    want = collision_bruteforce(a, b)
    s2 = SearchStats()
    s3 = SearchStats()
    got2, _ = set_collision(a, b, "alg2", stats=s2)
    got3, _ = set_collision(a, b, "alg3", S, stats=s3)
    assert got2 == got3 == want
    # every non-pruned call at a level holds a distinct collision
    for st_ in (s2, s3):
        assert all(c <= max(len(want), 1) for c in st_.actual.values())


def test_alg3_debug_prune_check():
    rng = random.Random(2)
    a, b = _dup_free_pair(64, rng)
    A, B, _ = _tapes(*pad_lists(a, b))
    assert alg3_parallel(A, B, 4, debug=True) == collision_bruteforce(*pad_lists(a, b))


def test_alg3_s1_from_root_mirrors_alg2():
    rng = random.Random(3)
    a, b = _dup_free_pair(64, rng)
    s2, s3 = SearchStats(call_log=[]), SearchStats(call_log=[])
    A, B, c2 = _tapes(a, b)
    out2 = alg2_setcollision(A, B, stats=s2)
    A, B, c3 = _tapes(a, b)
    out3 = alg3_parallel(A, B, 1, stats=s3, start_length=64)
    assert out2 == out3
    assert s2.call_log == s3.call_log
    assert c2.trace == c3.trace


def test_initial_batches():
    assert initial_length(1024) == 32 and initial_length(512) == 32 and initial_length(256) == 16
    batches = initial_batches(16, 4)
    # 4 starts, groups of 2 -> 4 batches of 4 pairs covering all 16 pairs
    assert len(batches) == 4 and all(len(b) == 4 for b in batches)
    assert sorted(p for b in batches for p in b) == [(s, t) for s in (1, 5, 9, 13) for t in (1, 5, 9, 13)]
    assert all(len(b) <= 5 for b in initial_batches(64, 5))


def test_alg3_bad_arguments():
    A, B, _ = _tapes(list(range(1, 9)), list(range(1, 9)))
    with pytest.raises(ValueError):
        alg3_parallel(A, B, 0)
    with pytest.raises(ValueError):
        alg3_parallel(A, B, 1, start_length=3)
    with pytest.raises(ValueError):
        set_collision([1], [1], algo="nope")


def test_alg3_dedup_saves_reads():
    rng = random.Random(4)
    n = 256
    a, b = rng.sample(range(1, n + 1), n), rng.sample(range(1, n + 1), n)
    _, r2 = set_collision(a, b, "alg2")
    _, r3 = set_collision(a, b, "alg3", 16)
    assert r3.total_queries < r2.total_queries
    assert r3.charged_queries >= r3.total_queries


def test_duplicate_free_flag():
    assert CollisionInstance((1, 2), (3, 3)).duplicate_free == (True, False)


class TestNCollision:
    def test_pieces_partition_pairs(self):
        for n in (1, 2, 8, 32):
            pairs = set()
            for length, s, s2 in bipartite_pieces(n):
                cell = {(i, j) for i in range(s, s + length) for j in range(s2, s2 + length)}
                assert not cell & pairs
                pairs |= cell
            assert pairs == {(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)}
        assert len(bipartite_pieces(8)) == 7

    def test_all_distinct(self):
        got, _ = list_collisions(list(range(1, 33)))
        assert got == frozenset()

    @pytest.mark.parametrize("S", [1, 4])
    def test_all_equal(self, S):
        got, _ = list_collisions([7] * 16, S)
        assert len(got) == 16
        truth = ncollision_bruteforce([7] * 16)
        assert got <= truth

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 100), st.sampled_from([1, 4]))
    def test_count_and_validity(self, seed, n, S):
        rng = random.Random(seed)
        values = [rng.randint(1, max(1, rng.choice([n // 4, n, 2 * n]))) for _ in range(n)]
        got, _ = list_collisions(values, S)
        truth = ncollision_bruteforce(values)
        assert got <= truth
        assert len(got) == min(n, len(truth))

    def test_requires_pow2(self):
        ctx = QueryContext()
        with pytest.raises(ValueError):
            n_collision(ctx.tape([1, 2, 3]))
        with pytest.raises(ValueError):
            n_collision(ctx.tape([1, 2], "B"), S=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([1, 4, 16]))
def test_trace_depends_only_on_collision_pattern(seed, S):
    """Relabelling values injectively keeps every oracle verdict, hence the trace."""
    from oblivious_tradeoffs.query_model import check_oblivious

    rng = random.Random(seed)
    a, b = _dup_free_pair(32, rng)
    perm = list(range(1, 65))
    rng.shuffle(perm)
    a2, b2 = [perm[v - 1] for v in a], [perm[v - 1] for v in b]

    def run(s, A, B):
        return alg3_parallel(A, B, S) if S > 1 else alg2_setcollision(A, B)

    assert check_oblivious(run, [(a, b), (a2, b2)], 0, ["A", "B"])
