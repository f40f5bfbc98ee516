# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Weighted uniform spanning trees: Wilson's sampler, exact enumeration for
tiny graphs, inverse-leverage reweighting and tree averaging.'''

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate

import numpy as np

from treespark.lib.graph import WeightedGraph, laplacian
from treespark.lib.util import make_rng

MAX_ENUMERATION_EDGES = 22
UNIFORM_BLOCK = 4096


class SamplingError(Exception):
    '''Base class of tree sampling errors.'''


class SizeGuardError(SamplingError):
    '''An exhaustive computation was asked of a graph that is too large.'''


class WeightModeError(SamplingError):
    '''Trees with the wrong or mixed weight modes.'''


class EnumerationMismatchError(SamplingError):
    '''Tree enumeration disagrees with the matrix-tree theorem.'''


def _check_acyclic(g, edge_ids):
    '''Raise SamplingError unless edge_ids are distinct edges of g with no
    cycle among them.'''
    parent = list(range(g.n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in edge_ids:
        if not 0 <= e < g.m:
            raise SamplingError(f'edge {e} is not an edge of {g.name}')
        ru, rv = find(int(g.heads[e])), find(int(g.tails[e]))
        if ru == rv:
            raise SamplingError(f'edge {e} closes a cycle')
        parent[ru] = rv


@dataclass(frozen=True)
class SpanningTree:
    '''A spanning tree of a parent graph, with per-edge weights.'''
    ORIGINAL = 'original'
    INVERSE_LEVERAGE = 'inverse_leverage'

    graph_id: str
    n: int
    edge_ids: tuple
    endpoints: tuple
    weights: tuple
    weight_mode: str = ORIGINAL

    @classmethod
    def from_edges(cls, g, edge_ids):
        edge_ids = tuple(sorted(int(e) for e in edge_ids))
        if len(edge_ids) != g.n - 1:
            raise SamplingError(f'{len(edge_ids)} edges cannot span {g.n} vertices')
        _check_acyclic(g, edge_ids)
        endpoints = tuple((int(g.heads[e]), int(g.tails[e])) for e in edge_ids)
        weights = tuple(float(g.weights[e]) for e in edge_ids)
        return cls(g.fingerprint, g.n, edge_ids, endpoints, weights)

    def laplacian(self):
        heads = np.array([u for u, _v in self.endpoints], dtype=np.int64)
        tails = np.array([v for _u, v in self.endpoints], dtype=np.int64)
        weights = np.array(self.weights)
        L = np.zeros((self.n, self.n))
        np.add.at(L, (heads, heads), weights)
        np.add.at(L, (tails, tails), weights)
        np.add.at(L, (heads, tails), -weights)
        np.add.at(L, (tails, heads), -weights)
        return L

    def degrees(self):
        return tree_degrees(self)

    def quadratic_form(self, x):
        '''x^T L_T x over the tree's own weights.'''
        ends = np.array(self.endpoints, dtype=np.int64)
        diff = x[ends[:, 0]] - x[ends[:, 1]]
        return float(np.dot(self.weights, diff * diff))

    def to_line(self):
        '''"n; edge ids; weights" with weights to 17 significant digits.'''
        edges = ' '.join(str(e) for e in self.edge_ids)
        weights = ' '.join(f'{w:.17g}' for w in self.weights)
        return f'{self.n}; {edges}; {weights}'

    @classmethod
    def from_line(cls, line, g, weight_mode=ORIGINAL):
        try:
            n_part, edge_part, weight_part = line.split(';')
            n = int(n_part)
            edge_ids = [int(e) for e in edge_part.split()]
            weights = [float(w) for w in weight_part.split()]
        except ValueError:
            raise SamplingError(f'cannot parse tree line "{line.strip()}"') from None
        if n != g.n or len(weights) != len(edge_ids):
            raise SamplingError('tree line does not match the graph')
        tree = cls.from_edges(g, edge_ids)
        order = sorted(range(len(edge_ids)), key=edge_ids.__getitem__)
        weights = tuple(weights[i] for i in order)
        return cls(tree.graph_id, n, tree.edge_ids, tree.endpoints, weights, weight_mode)


def tree_degrees(tree):
    '''Vertex degrees of a tree (unweighted).'''
    ends = np.array(tree.endpoints, dtype=np.int64).ravel()
    return np.bincount(ends, minlength=tree.n)


class _UniformStream(object):
    '''Uniform draws from a generator, fetched in blocks.'''

    def __init__(self, rng):
        self.rng = rng
        self.block = []
        self.pos = 0

    def next(self):
        if self.pos == len(self.block):
            self.block = self.rng.random(UNIFORM_BLOCK).tolist()
            self.pos = 0
        value = self.block[self.pos]
        self.pos += 1
        return value


class WilsonSampler(object):
    '''Wilson's loop-erased random walk sampler for one graph.

    The root is vertex 0; the tree law does not depend on it.  A walk at
    vertex u leaves along edge e with probability w_e / wdeg(u), drawn by
    inverse CDF over u's incident edges in edge-index order, so a seed
    fixes the tree.
    '''

    def __init__(self, g):
        self.graph = g
        incident = [[] for _ in range(g.n)]
        for e, (u, v) in enumerate(zip(g.heads.tolist(), g.tails.tolist())):
            incident[u].append(e)
            incident[v].append(e)
        weights = g.weights.tolist()
        self.incident = incident
        self.cumulative = [list(accumulate(weights[e] for e in edges)) for edges in incident]
        self.heads = g.heads.tolist()
        self.tails = g.tails.tolist()

    def _step(self, u, uniform):
        cumulative = self.cumulative[u]
        index = bisect_right(cumulative, uniform * cumulative[-1])
        return self.incident[u][min(index, len(cumulative) - 1)]

    def sample_edge_ids(self, rng):
        n = self.graph.n
        heads, tails = self.heads, self.tails
        stream = _UniformStream(rng)
        in_tree = [False] * n
        in_tree[0] = True
        next_edge = [-1] * n
        for start in range(1, n):
            u = start
            while not in_tree[u]:
                e = self._step(u, stream.next())
                next_edge[u] = e
                u = tails[e] if heads[e] == u else heads[e]
            u = start
            while not in_tree[u]:
                in_tree[u] = True
                e = next_edge[u]
                u = tails[e] if heads[e] == u else heads[e]
        return next_edge[1:]

    def sample(self, rng):
        return SpanningTree.from_edges(self.graph, self.sample_edge_ids(rng))


def sample_tree_wilson(g, rng_seed):
    '''One w-uniform spanning tree of g, determined by rng_seed.'''
    return WilsonSampler(g).sample(make_rng(rng_seed))


@dataclass(frozen=True)
class TreeDistributionTable:
    '''Every spanning tree of a graph with its exact probability.'''
    graph_id: str
    n: int
    m: int
    entries: tuple

    def __len__(self):
        return len(self.entries)

    def marginals(self):
        totals = [Fraction(0)] * self.m
        for edge_ids, probability in self.entries:
            for e in edge_ids:
                totals[e] += probability
        return np.array([float(total) for total in totals])

    def probability_of(self, edge_ids):
        key = tuple(sorted(edge_ids))
        for tree, probability in self.entries:
            if tree == key:
                return probability
        return Fraction(0)


def _spanning_edge_sets(g):
    '''Yield every spanning tree edge set, pruning cycles as edges are added.'''
    need = g.n - 1
    heads, tails = g.heads.tolist(), g.tails.tolist()

    def extend(start, chosen, component):
        if len(chosen) == need:
            yield tuple(chosen)
            return
        for e in range(start, g.m - (need - len(chosen)) + 1):
            cu, cv = component[heads[e]], component[tails[e]]
            if cu == cv:
                continue
            merged = [cu if c == cv else c for c in component]
            chosen.append(e)
            yield from extend(e + 1, chosen, merged)
            chosen.pop()

    yield from extend(0, [], list(range(g.n)))


def matrix_tree_count(g, weighted=True):
    '''Sum over spanning trees of the weight product (or the tree count),
    as the determinant of the Laplacian with vertex 0 removed.'''
    if weighted:
        L = laplacian(g)
    else:
        L = laplacian(WeightedGraph(g.n, [(u, v, 1.0) for u, v, _w in g.edges]))
    sign, logdet = np.linalg.slogdet(L[1:, 1:])
    return float(sign * math.exp(logdet))


def enumerate_trees(g):
    '''Exact w-uniform distribution of g by listing every spanning tree.'''
    if g.m > MAX_ENUMERATION_EDGES:
        raise SizeGuardError(f'{g.name} has {g.m} edges; enumeration allows at most '
                             f'{MAX_ENUMERATION_EDGES}')
    weights = [Fraction(w) for w in g.weights.tolist()]
    trees = []
    for edge_ids in _spanning_edge_sets(g):
        product = Fraction(1)
        for e in edge_ids:
            product *= weights[e]
        trees.append((edge_ids, product))
    count = round(matrix_tree_count(g, weighted=False))
    if len(trees) != count:
        raise EnumerationMismatchError(f'listed {len(trees):,d} trees, matrix-tree count '
                                       f'is {count:,d}')
    total = sum(product for _edge_ids, product in trees)
    determinant = matrix_tree_count(g)
    if abs(float(total) - determinant) > 1e-9 * max(abs(determinant), 1.0):
        raise EnumerationMismatchError(f'weight total {float(total)!r} != determinant '
                                       f'{determinant!r}')
    entries = tuple((edge_ids, product / total) for edge_ids, product in trees)
    return TreeDistributionTable(g.fingerprint, g.n, g.m, entries)


def reweight_tree(tree, lev):
    '''Give each tree edge weight w_e / l_e, so that E[L_T] = L_G.'''
    if tree.weight_mode != SpanningTree.ORIGINAL:
        raise WeightModeError('tree is already reweighted')
    if lev.graph_id != tree.graph_id:
        raise WeightModeError('leverage profile belongs to another graph')
    weights = tuple(w / lev[e] for e, w in zip(tree.edge_ids, tree.weights))
    return SpanningTree(tree.graph_id, tree.n, tree.edge_ids, tree.endpoints, weights,
                        SpanningTree.INVERSE_LEVERAGE)


def average_trees(trees, weights=None):
    '''L_H = sum_i c_i L_{T_i} with c_i = 1/t, or the given probabilities.'''
    trees = list(trees)
    if not trees:
        raise SamplingError('cannot average an empty list of trees')
    modes = {tree.weight_mode for tree in trees}
    if modes != {SpanningTree.INVERSE_LEVERAGE}:
        raise WeightModeError(f'average needs inverse-leverage trees, got {sorted(modes)}')
    if len({tree.graph_id for tree in trees}) != 1:
        raise WeightModeError('trees come from different graphs')
    if weights is None:
        weights = [1.0 / len(trees)] * len(trees)
    elif len(weights) != len(trees):
        raise SamplingError(f'{len(weights)} weights for {len(trees)} trees')
    L = np.zeros((trees[0].n, trees[0].n))
    for tree, c in zip(trees, weights):
        L += float(c) * tree.laplacian()
    return L
