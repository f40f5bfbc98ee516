# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Weighted undirected multigraphs, their Laplacians and the benchmark
constructions used by the experiments.'''

import itertools
import math
import re

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from treespark.lib.util import cachedproperty, digest, make_rng

ER_MAX_ATTEMPTS = 1000


class GraphError(Exception):
    '''Base class of graph errors.'''


class InvalidParameterError(GraphError):
    '''A construction or graph parameter is out of range.'''


class DisconnectedGraphError(GraphError):
    '''The edge list does not connect all vertices.'''


class GraphFormatError(GraphError):
    '''A graph file could not be parsed.'''


class WeightedGraph(object):
    '''A connected weighted undirected multigraph on vertices 0..n-1.

    Edges keep their input order and are indexed 0..m-1; that index set is
    the ground set of the spanning tree distribution.  Parallel edges stay
    distinct.  Each stored edge is oriented with head < tail so incidence
    signs are reproducible.  Instances are immutable.
    '''

    def __init__(self, n, edges, *, name=None):
        if not isinstance(n, (int, np.integer)) or n < 2:
            raise InvalidParameterError(f'vertex count must be an integer >= 2, got {n!r}')
        n = int(n)
        heads, tails, weights = [], [], []
        for e, edge in enumerate(edges):
            try:
                u, v, w = edge
                u, v, w = int(u), int(v), float(w)
            except (TypeError, ValueError):
                raise InvalidParameterError(f'edge {e} is not a (u, v, w) triple: {edge!r}') \
                    from None
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameterError(f'edge {e} ({u}, {v}) has a vertex outside 0..{n - 1}')
            if u == v:
                raise InvalidParameterError(f'edge {e} is a self-loop at vertex {u}')
            if not (w > 0 and math.isfinite(w)):
                raise InvalidParameterError(f'edge {e} has non-positive weight {w!r}')
            if u > v:
                u, v = v, u
            heads.append(u)
            tails.append(v)
            weights.append(w)

        self.n = n
        self.heads = _frozen(np.array(heads, dtype=np.int64))
        self.tails = _frozen(np.array(tails, dtype=np.int64))
        self.weights = _frozen(np.array(weights, dtype=np.float64))
        self.name = name or f'graph(n={n},m={len(weights)})'

        if self.component_count() != 1:
            raise DisconnectedGraphError(f'{self.name} is not connected')

    @property
    def m(self):
        return len(self.weights)

    @property
    def edges(self):
        return list(zip(self.heads.tolist(), self.tails.tolist(), self.weights.tolist()))

    def edge(self, e):
        return int(self.heads[e]), int(self.tails[e]), float(self.weights[e])

    def component_count(self):
        adjacency = coo_matrix((np.ones(self.m), (self.heads, self.tails)),
                               shape=(self.n, self.n))
        count, _labels = connected_components(adjacency, directed=False)
        return count

    def incidence_row(self, e):
        '''The signed incidence vector b_e: +1 at the head, -1 at the tail.'''
        row = np.zeros(self.n)
        row[self.heads[e]] = 1.0
        row[self.tails[e]] = -1.0
        return row

    def incidence(self, edge_ids=None):
        '''Dense signed incidence matrix, one row per edge.'''
        edge_ids = np.arange(self.m) if edge_ids is None else np.asarray(edge_ids)
        B = np.zeros((len(edge_ids), self.n))
        rows = np.arange(len(edge_ids))
        B[rows, self.heads[edge_ids]] = 1.0
        B[rows, self.tails[edge_ids]] = -1.0
        return B

    def degrees(self):
        return np.bincount(np.concatenate((self.heads, self.tails)), minlength=self.n)

    def weighted_degrees(self):
        return (np.bincount(self.heads, weights=self.weights, minlength=self.n)
                + np.bincount(self.tails, weights=self.weights, minlength=self.n))

    def is_tree(self):
        return self.m == self.n - 1

    def is_unit_weighted(self):
        return bool(np.all(self.weights == 1.0))

    def restrict(self, edge_ids):
        '''Return (subgraph, vertices) for the subgraph spanned by edge_ids.

        Vertices are relabelled in increasing order; vertices[i] is the
        original id of subgraph vertex i.  Edge order follows edge_ids.'''
        edge_ids = list(edge_ids)
        vertices = np.unique(np.concatenate((self.heads[edge_ids], self.tails[edge_ids])))
        relabel = {int(v): i for i, v in enumerate(vertices)}
        edges = [(relabel[int(self.heads[e])], relabel[int(self.tails[e])], self.weights[e])
                 for e in edge_ids]
        return WeightedGraph(len(vertices), edges, name=f'{self.name}|block'), vertices

    @cachedproperty
    def fingerprint(self):
        '''Stable identifier of (n, edge list); the parent graph id of
        derived objects.'''
        return digest(str(self.n).encode(), self.heads.tobytes(), self.tails.tobytes(),
                      self.weights.tobytes())

    def __repr__(self):
        return f'<WeightedGraph {self.name} n={self.n:,d} m={self.m:,d}>'


def _frozen(array):
    array.setflags(write=False)
    return array


def laplacian(g):
    '''Return the dense Laplacian L = sum_e w_e b_e b_e^T of g.'''
    L = np.zeros((g.n, g.n))
    np.add.at(L, (g.heads, g.heads), g.weights)
    np.add.at(L, (g.tails, g.tails), g.weights)
    np.add.at(L, (g.heads, g.tails), -g.weights)
    np.add.at(L, (g.tails, g.heads), -g.weights)
    return L


def quadratic_form(g, x, weights=None):
    '''x^T L x evaluated edge-wise, without forming L.'''
    weights = g.weights if weights is None else weights
    diff = x[g.heads] - x[g.tails]
    return float(np.dot(weights, diff * diff))


# Benchmark constructions.  All have unit weights.

def _require(condition, message):
    if not condition:
        raise InvalidParameterError(message)


def _complete(n):
    _require(isinstance(n, int) and n >= 2, f'complete graph needs n >= 2, got {n!r}')
    edges = [(u, v, 1.0) for u, v in itertools.combinations(range(n), 2)]
    return WeightedGraph(n, edges, name=f'complete(n={n})')


def _ring(n):
    _require(isinstance(n, int) and n >= 3, f'ring needs n >= 3, got {n!r}')
    edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
    return WeightedGraph(n, edges, name=f'ring(n={n})')


def _path(n):
    _require(isinstance(n, int) and n >= 2, f'path needs n >= 2, got {n!r}')
    edges = [(i, i + 1, 1.0) for i in range(n - 1)]
    return WeightedGraph(n, edges, name=f'path(n={n})')


def _clique_star(num_cliques, clique_size):
    '''num_cliques complete graphs on clique_size vertices sharing vertex 0.'''
    _require(isinstance(num_cliques, int) and num_cliques >= 1,
             f'clique star needs at least one clique, got {num_cliques!r}')
    _require(isinstance(clique_size, int) and clique_size >= 3,
             f'clique star needs clique size >= 3, got {clique_size!r}')
    span = clique_size - 1
    n = num_cliques * span + 1
    edges = []
    for c in range(num_cliques):
        members = [0] + list(range(1 + c * span, 1 + (c + 1) * span))
        edges.extend((u, v, 1.0) for u, v in itertools.combinations(members, 2))
    return WeightedGraph(n, edges, name=f'clique_star(L={num_cliques},s={clique_size})')


def _erdos_renyi_connected(n, p, seed=0):
    '''G(n, p) resampled whole until connected.'''
    _require(isinstance(n, int) and n >= 2, f'G(n, p) needs n >= 2, got {n!r}')
    _require(0 < p <= 1, f'G(n, p) needs 0 < p <= 1, got {p!r}')
    pairs = np.array(list(itertools.combinations(range(n), 2)), dtype=np.int64)
    rng = make_rng(seed)
    for _attempt in range(ER_MAX_ATTEMPTS):
        keep = pairs[rng.random(len(pairs)) < p]
        edges = [(u, v, 1.0) for u, v in keep.tolist()]
        try:
            return WeightedGraph(n, edges, name=f'erdos_renyi(n={n},p={p},seed={seed})')
        except DisconnectedGraphError:
            continue
    raise InvalidParameterError(f'G({n}, {p}) not connected after {ER_MAX_ATTEMPTS:,d} attempts')


CONSTRUCTIONS = {
    'complete': (_complete, ('n',)),
    'ring': (_ring, ('n',)),
    'path': (_path, ('n',)),
    'clique_star': (_clique_star, ('num_cliques', 'clique_size')),
    'erdos_renyi_connected': (_erdos_renyi_connected, ('n', 'p', 'seed')),
}


def build_construction(kind, params):
    '''Build a benchmark graph.  params maps parameter names to values.'''
    try:
        builder, names = CONSTRUCTIONS[kind]
    except KeyError:
        raise InvalidParameterError(f'unknown construction "{kind}"') from None
    unknown = set(params) - set(names)
    if unknown:
        raise InvalidParameterError(f'{kind} does not take {", ".join(sorted(unknown))}')
    try:
        return builder(**params)
    except TypeError as e:
        raise InvalidParameterError(f'bad parameters for {kind}: {e}') from None


SOURCE_REGEX = re.compile(r'^(k|ring|path|cliquestar|er):(.+)$')


def parse_graph_source(text):
    '''Return a graph from an inline construction spec such as "k:5",
    "ring:100", "cliquestar:10,10" or "er:20,0.3[,seed]", else read the
    text as a graph file path.'''
    match = SOURCE_REGEX.match(text.strip())
    if match is None:
        return read_graph(text)
    kind, args = match.group(1), match.group(2).split(',')
    try:
        if kind == 'k':
            return build_construction('complete', {'n': int(args[0])})
        if kind in ('ring', 'path'):
            return build_construction(kind, {'n': int(args[0])})
        if kind == 'cliquestar':
            num_cliques, clique_size = args
            return build_construction('clique_star', {'num_cliques': int(num_cliques),
                                                      'clique_size': int(clique_size)})
        params = {'n': int(args[0]), 'p': float(args[1])}
        if len(args) > 2:
            params['seed'] = int(args[2])
        return build_construction('erdos_renyi_connected', params)
    except (ValueError, IndexError):
        raise InvalidParameterError(f'cannot parse graph source "{text}"') from None


def write_graph(g, path):
    '''Write g as "n m" then one "u v w" line per edge; weights carry 17
    significant digits so a read returns identical floats.'''
    with open(path, 'w') as f:
        f.write(f'{g.n} {g.m}\n')
        for u, v, w in g.edges:
            f.write(f'{u} {v} {w:.17g}\n')


def read_graph(path):
    '''Read a graph written by write_graph.'''
    with open(path, 'r') as f:
        lines = [line.split() for line in f if line.strip()]
    if not lines or len(lines[0]) != 2:
        raise GraphFormatError(f'{path}: first line must be "n m"')
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
    except ValueError:
        raise GraphFormatError(f'{path}: bad header {lines[0]}') from None
    if len(lines) - 1 != m:
        raise GraphFormatError(f'{path}: header promises {m:,d} edges, found {len(lines) - 1:,d}')
    edges = []
    for lineno, parts in enumerate(lines[1:], start=2):
        if len(parts) != 3:
            raise GraphFormatError(f'{path}:{lineno}: expected "u v w"')
        try:
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError:
            raise GraphFormatError(f'{path}:{lineno}: cannot parse {parts}') from None
    return WeightedGraph(n, edges, name=str(path))
