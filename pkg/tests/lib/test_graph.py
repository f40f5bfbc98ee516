import numpy as np
import pytest

from treespark.lib.graph import (DisconnectedGraphError, GraphFormatError,
                                 InvalidParameterError, WeightedGraph, build_construction,
                                 laplacian, parse_graph_source, quadratic_form, read_graph,
                                 write_graph)


def triangle(weights=(1.0, 1.0, 1.0)):
    a, b, c = weights
    return WeightedGraph(3, [(0, 1, a), (1, 2, b), (0, 2, c)], name='triangle')


def test_constructions():
    g = build_construction('complete', {'n': 5})
    assert (g.n, g.m) == (5, 10)
    g = build_construction('ring', {'n': 6})
    assert (g.n, g.m) == (6, 6)
    assert list(g.degrees()) == [2] * 6
    g = build_construction('path', {'n': 4})
    assert (g.n, g.m) == (4, 3)
    assert g.is_tree()
    g = build_construction('clique_star', {'num_cliques': 3, 'clique_size': 4})
    assert (g.n, g.m) == (10, 18)
    assert g.degrees()[0] == 9
    assert set(g.degrees()[1:]) == {3}
    assert g.is_unit_weighted()


def test_clique_star_single_clique_is_complete():
    g = build_construction('clique_star', {'num_cliques': 1, 'clique_size': 5})
    assert g.edges == build_construction('complete', {'n': 5}).edges


def test_erdos_renyi_connected():
    g1 = build_construction('erdos_renyi_connected', {'n': 12, 'p': 0.4, 'seed': 3})
    g2 = build_construction('erdos_renyi_connected', {'n': 12, 'p': 0.4, 'seed': 3})
    assert g1.component_count() == 1
    assert g1.fingerprint == g2.fingerprint


def test_bad_constructions():
    with pytest.raises(InvalidParameterError):
        build_construction('hypercube', {'n': 4})
    with pytest.raises(InvalidParameterError):
        build_construction('complete', {'n': 4, 'p': 0.5})
    with pytest.raises(InvalidParameterError):
        build_construction('ring', {'n': 2})
    with pytest.raises(InvalidParameterError):
        build_construction('clique_star', {'num_cliques': 0, 'clique_size': 4})


def test_invalid_graphs():
    with pytest.raises(InvalidParameterError):
        WeightedGraph(1, [])
    with pytest.raises(InvalidParameterError):
        WeightedGraph(3, [(0, 0, 1.0), (1, 2, 1.0)])
    with pytest.raises(InvalidParameterError):
        WeightedGraph(2, [(0, 1, -1.0)])
    with pytest.raises(InvalidParameterError):
        WeightedGraph(2, [(0, 1, float('nan'))])
    with pytest.raises(InvalidParameterError):
        WeightedGraph(2, [(0, 2, 1.0)])
    with pytest.raises(InvalidParameterError):
        WeightedGraph(2, [(0, 1)])
    with pytest.raises(DisconnectedGraphError):
        WeightedGraph(4, [(0, 1, 1.0), (2, 3, 1.0)])


def test_orientation_and_parallel_edges():
    g = WeightedGraph(3, [(2, 0, 1.5), (0, 1, 1.0), (1, 0, 2.0)])
    assert g.edges == [(0, 2, 1.5), (0, 1, 1.0), (0, 1, 2.0)]
    assert g.edge(2) == (0, 1, 2.0)
    assert list(g.incidence_row(0)) == [1.0, 0.0, -1.0]


def test_laplacian():
    g = triangle((1.0, 1.0, 2.0))
    L = laplacian(g)
    assert np.allclose(L @ np.ones(3), 0)
    assert np.allclose(L, L.T)
    B = g.incidence()
    assert np.allclose(L, B.T @ np.diag(g.weights) @ B)
    assert np.allclose(np.diag(L), g.weighted_degrees())


def test_quadratic_form():
    g = build_construction('ring', {'n': 5})
    x = np.array([1.0, -2.0, 0.5, 3.0, 0.0])
    assert quadratic_form(g, x) == pytest.approx(x @ laplacian(g) @ x)
    assert quadratic_form(g, x, np.full(5, 2.0)) == pytest.approx(2 * x @ laplacian(g) @ x)


def test_restrict():
    g = build_construction('clique_star', {'num_cliques': 2, 'clique_size': 3})
    # Second clique: vertices 0, 3, 4
    sub, vertices = g.restrict([3, 4, 5])
    assert list(vertices) == [0, 3, 4]
    assert (sub.n, sub.m) == (3, 3)


def test_fingerprint():
    assert triangle().fingerprint == triangle().fingerprint
    assert triangle().fingerprint != triangle((1.0, 1.0, 2.0)).fingerprint


@pytest.mark.parametrize('text, n, m', (
    ('k:5', 5, 10),
    ('ring:7', 7, 7),
    ('path:4', 4, 3),
    ('cliquestar:2,3', 5, 6),
    ('er:10,0.6,3', 10, None),
))
def test_parse_graph_source(text, n, m):
    g = parse_graph_source(text)
    assert g.n == n
    if m is not None:
        assert g.m == m


def test_parse_graph_source_errors(tmp_path):
    with pytest.raises(InvalidParameterError):
        parse_graph_source('k:x')
    with pytest.raises(InvalidParameterError):
        parse_graph_source('cliquestar:3')
    with pytest.raises(OSError):
        parse_graph_source(str(tmp_path / 'missing.txt'))


def test_write_read_graph(tmp_path):
    path = tmp_path / 'g.txt'
    g = WeightedGraph(4, [(0, 1, 1 / 3), (1, 2, 2.0), (2, 3, 0.1), (0, 1, 7.0)])
    write_graph(g, path)
    h = read_graph(path)
    assert h.edges == g.edges
    assert h.fingerprint == g.fingerprint
    assert parse_graph_source(str(path)).fingerprint == g.fingerprint


@pytest.mark.parametrize('content', (
    '',
    '3\n0 1 1\n',
    '3 2\n0 1 1\n',
    '3 2\n0 1 1\n1 2\n',
    '3 2\n0 1 1\n1 x 1\n',
))
def test_read_graph_malformed(tmp_path, content):
    path = tmp_path / 'bad.txt'
    path.write_text(content)
    with pytest.raises(GraphFormatError):
        read_graph(path)


def test_read_graph_disconnected(tmp_path):
    path = tmp_path / 'split.txt'
    path.write_text('4 2\n0 1 1\n2 3 1\n')
    with pytest.raises(DisconnectedGraphError):
        read_graph(path)
