import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oblivious_tradeoffs.expander import BipartiteGraph, gen_candidate_expander
from oblivious_tradeoffs.pointer_chasing import (
    PcInstance,
    alg1_query_count,
    compose,
    default_rounds,
    nearest_valid,
    pc2_adaptive,
    pc2_alg1,
    pc2_randomized_oblivious,
    validate_alg1_params,
)
from oblivious_tradeoffs.query_model import QueryContext, RandomStream, check_oblivious


def _f(values, record=False):
    ctx = QueryContext(record_trace=record)
    return ctx.tape(values, "f"), ctx


def _rand_f(n, rng):
    return [rng.randint(1, n) for _ in range(n)]


def test_compose():
    assert compose([2, 3, 1]) == [(1, 3), (2, 1), (3, 2)]


def test_instance_validation():
    PcInstance.of([1, 1])
    with pytest.raises(ValueError):
        PcInstance.of([1, 3])


def test_adaptive():
    f = [3, 1, 2, 2]
    tape, ctx = _f(f)
    assert pc2_adaptive(tape) == compose(f)
    rep = ctx.report()
    assert rep.total_queries == 8 and rep.space_words == 3


def test_adaptive_not_oblivious():
    res = check_oblivious(lambda s, f: pc2_adaptive(f), [([1, 1, 1, 1],), ([2, 1, 1, 1],)], 0, ["f"])
    assert not res.oblivious and res.divergence == 1


class TestRandomized:
    def test_answers_are_correct(self):
        rng = random.Random(1)
        for t in range(20):
            f = _rand_f(64, rng)
            truth = dict(compose(f))
            tape, _ = _f(f)
            res = pc2_randomized_oblivious(tape, 4, RandomStream(t))
            assert all(truth[x] == z for x, z in res.pairs.items())

    def test_full_coverage_at_default_rounds(self):
        f = _rand_f(256, random.Random(2))
        tape, ctx = _f(f)
        res = pc2_randomized_oblivious(tape, 8, RandomStream(0))
        assert res.coverage == 1.0
        size = math.isqrt(256 * 8 - 1) + 1
        assert ctx.report().total_queries == 2 * size * default_rounds(256, 8)

    def test_oblivious(self):
        rng = random.Random(3)
        inputs = [(_rand_f(32, rng),) for _ in range(5)] + [([1] * 32,)]

        def run(s, f):
            return pc2_randomized_oblivious(f, 2, s, rounds=10)

        assert check_oblivious(run, inputs, 7, ["f"])

    def test_bad_arguments(self):
        tape, _ = _f([1, 2])
        with pytest.raises(ValueError):
            pc2_randomized_oblivious(tape, 3, RandomStream(0))
        with pytest.raises(ValueError):
            pc2_randomized_oblivious(tape, 1, RandomStream(0), rounds=0)


@pytest.fixture(scope="module")
def graph():
    return gen_candidate_expander(32, 4, 3, 16, RandomStream(1))[0]


class TestAlg1:
    def test_correct_and_exact_count(self, graph):
        rng = random.Random(5)
        for _ in range(10):
            f = _rand_f(32, rng)
            tape, ctx = _f(f)
            assert pc2_alg1(tape, graph, 4, 2) == compose(f)
            assert ctx.report().total_queries == alg1_query_count(32, 4, 2, graph)

    def test_space_labels(self, graph):
        tape, ctx = _f(list(range(1, 33)))
        pc2_alg1(tape, graph, 4, 2)
        assert ctx.report().space_breakdown == {"u_store": 6, "matching": 10}

    def test_oblivious(self, graph):
        rng = random.Random(6)
        inputs = [(_rand_f(32, rng),) for _ in range(4)] + [([7] * 32,)]
        assert check_oblivious(lambda s, f: pc2_alg1(f, graph, 4, 2), inputs, 0, ["f"])

    def test_tiny_complete_graph(self):
        # K_{4,2} expands every set of size <= 2
        G = BipartiteGraph.from_edges(4, 2, [(v, y) for v in range(1, 5) for y in (1, 2)])
        for f in ([2, 3, 4, 1], [1, 1, 1, 1], [4, 4, 2, 2]):
            tape, _ = _f(f)
            assert pc2_alg1(tape, G, 2, 1) == compose(f)

    def test_wrong_graph_size(self, graph):
        tape, _ = _f([1] * 16)
        with pytest.raises(ValueError):
            pc2_alg1(tape, graph, 4, 2)


def test_param_validation_and_nearest():
    validate_alg1_params(32, 4, 2)
    with pytest.raises(ValueError):
        validate_alg1_params(30, 4, 1)
    with pytest.raises(ValueError):
        validate_alg1_params(32, 4, 3)
    assert nearest_valid(32, 4, 3) == (4, 2)
    assert nearest_valid(32, 4, 2) == (4, 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 64), st.integers(1, 70), st.integers(1, 70))
def test_nearest_valid_divides(n, k, S):
    kk, ss = nearest_valid(n, k, S)
    validate_alg1_params(n, kk, ss)
