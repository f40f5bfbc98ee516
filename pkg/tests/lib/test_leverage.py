from fractions import Fraction

import numpy as np
import pytest

from treespark.lib.graph import WeightedGraph, build_construction, parse_graph_source
from treespark.lib.leverage import (ContractionState, InvalidConditioningError, LeverageError,
                                    ProfileMismatchError, blockwise_leverage_scores,
                                    conditional_marginals, dense_leverage_scores,
                                    effective_resistance, leverage_scores)
from treespark.lib.treesample import enumerate_trees

CORPUS = ('k:6', 'k:30', 'ring:7', 'path:5', 'cliquestar:3,4', 'cliquestar:4,5',
          'er:12,0.4,2')


def triangle(weights=(1.0, 1.0, 1.0)):
    a, b, c = weights
    return WeightedGraph(3, [(0, 1, a), (1, 2, b), (0, 2, c)], name='triangle')


def test_effective_resistance():
    assert effective_resistance(WeightedGraph(2, [(0, 1, 4.0)]), 0, 1) == pytest.approx(0.25)
    assert effective_resistance(triangle(), 0, 1) == pytest.approx(2 / 3)
    assert effective_resistance(parse_graph_source('k:10'), 3, 7) == pytest.approx(0.2)
    assert effective_resistance(triangle(), 1, 1) == 0.0


def test_leverage_examples():
    assert leverage_scores(triangle()).scores == pytest.approx([2 / 3] * 3)
    assert leverage_scores(triangle((1.0, 1.0, 2.0))).scores == pytest.approx([0.6, 0.6, 0.8])
    assert leverage_scores(parse_graph_source('path:6')).scores == pytest.approx([1.0] * 5)
    assert leverage_scores(parse_graph_source('k:8')).scores == pytest.approx([0.25] * 28)


@pytest.mark.parametrize('source', CORPUS)
def test_foster_identity(source):
    g = parse_graph_source(source)
    lev = leverage_scores(g)
    assert abs(lev.total - (g.n - 1)) <= 1e-8
    assert np.all(lev.scores > 0) and np.all(lev.scores <= 1 + 1e-10)
    assert lev.graph_id == g.fingerprint


@pytest.mark.slow
@pytest.mark.parametrize('source', ('k:500', 'cliquestar:100,100'))
def test_foster_identity_large(source):
    g = parse_graph_source(source)
    lev = leverage_scores(g)
    assert abs(lev.total - (g.n - 1)) <= 1e-8
    assert np.all(lev.scores > 0) and np.all(lev.scores <= 1 + 1e-10)


def test_rank_tol_reaches_leverage():
    g = parse_graph_source('path:6')
    assert leverage_scores(g, rank_tol=1e-6).scores == pytest.approx([1.0] * 5)
    with pytest.raises(LeverageError):
        leverage_scores(g, rank_tol=0.5)
    with pytest.raises(LeverageError):
        leverage_scores(parse_graph_source('ring:6'), dense_limit=2, rank_tol=0.5)
    assert effective_resistance(g, 0, 5, rank_tol=0.5) < 5 - 1e-3


def test_blockwise_matches_dense():
    graphs = [
        parse_graph_source('cliquestar:3,5'),
        WeightedGraph(5, [(0, 1, 1.0), (0, 1, 2.0), (1, 2, 1.0), (2, 3, 1.0), (1, 3, 3.0),
                          (3, 4, 0.5)]),
    ]
    for g in graphs:
        assert blockwise_leverage_scores(g) == pytest.approx(dense_leverage_scores(g),
                                                             abs=1e-10)


def test_blockwise_dispatch():
    g = build_construction('clique_star', {'num_cliques': 4, 'clique_size': 6})
    lev = leverage_scores(g, dense_limit=2)
    assert lev.scores == pytest.approx([2 / 6] * g.m)


def test_require_graph():
    lev = leverage_scores(triangle())
    lev.require_graph(triangle())
    with pytest.raises(ProfileMismatchError):
        lev.require_graph(triangle((1.0, 1.0, 2.0)))


def test_conditional_marginals_examples():
    g = triangle()
    assert conditional_marginals(g, ContractionState.empty(g)) == pytest.approx(
        dict(enumerate(leverage_scores(g).scores)))
    state = ContractionState.empty(g).contract(0)
    assert conditional_marginals(g, state) == pytest.approx({1: 0.5, 2: 0.5})
    g = triangle((1.0, 1.0, 2.0))
    state = ContractionState.from_edges(g, [0])
    marginals = conditional_marginals(g, state)
    assert marginals[2] == pytest.approx(2 / 3)
    assert marginals[1] == pytest.approx(1 / 3)


def test_self_loops():
    g = triangle()
    state = ContractionState.from_edges(g, [0, 1])
    contracted, residual, loops = state.contracted_graph()
    assert contracted is None
    assert residual == [] and loops == [2]
    assert conditional_marginals(g, state) == {2: 0.0}


def test_invalid_conditioning():
    g = triangle()
    state = ContractionState.from_edges(g, [0, 1])
    with pytest.raises(InvalidConditioningError):
        state.contract(2)
    with pytest.raises(InvalidConditioningError):
        state.contract(0)
    with pytest.raises(InvalidConditioningError):
        conditional_marginals(triangle((1.0, 2.0, 1.0)), state)


def test_contraction_is_a_value():
    g = parse_graph_source('k:4')
    empty = ContractionState.empty(g)
    one = empty.contract(0)
    assert len(empty) == 0 and len(one) == 1
    assert one.classes() == [0, 0, 1, 2]


def exact_conditional(table, S, j):
    given = [(ids, p) for ids, p in table.entries if set(S) <= set(ids)]
    total = sum(p for _ids, p in given)
    return sum(p for ids, p in given if j in ids) / total


@pytest.mark.parametrize('S', ([], [0], [0, 5], [1, 3], [0, 1, 2]))
def test_conditional_marginals_match_enumeration(S):
    g = WeightedGraph(4, [(0, 1, 1.0), (0, 2, 2.0), (0, 3, 0.5), (1, 2, 1.0), (1, 3, 3.0),
                          (2, 3, 1.5)])
    table = enumerate_trees(g)
    marginals = conditional_marginals(g, ContractionState.from_edges(g, S))
    for j, p in marginals.items():
        assert p == pytest.approx(float(exact_conditional(table, S, j)), abs=1e-10)
    assert isinstance(exact_conditional(table, S, 4), Fraction)


def test_chained_contraction_matches_batch():
    g = parse_graph_source('er:8,0.6,4')
    S = list(range(0, g.m, 3))[:3]
    chained = ContractionState.empty(g)
    for e in S:
        try:
            chained = chained.contract(e)
        except InvalidConditioningError:
            pytest.skip('edges close a cycle')
    batch = ContractionState.from_edges(g, reversed(S))
    a, b = conditional_marginals(g, chained), conditional_marginals(g, batch)
    assert a.keys() == b.keys()
    for e in a:
        assert a[e] == pytest.approx(b[e], abs=1e-10)
