# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Effective resistances, leverage scores and exact conditional tree
marginals.

Conditioning a spanning tree distribution on a set of edges being present
is the spanning tree distribution of the graph with those edges
contracted.  Contraction merges vertices and keeps parallel edges distinct,
so every ground-set element keeps its own marginal.
'''

import logging
from dataclasses import dataclass

import networkx as nx
import numpy as np

from treespark.lib.graph import WeightedGraph, laplacian
from treespark.lib.spectral import eig_sym, pinv

DENSE_VERTEX_LIMIT = 2000
SUM_TOL = 1e-8
UPPER_TOL = 1e-10

logger = logging.getLogger(__name__)


class LeverageError(Exception):
    '''Base class of leverage errors.'''


class InvalidConditioningError(LeverageError):
    '''Conditioning on a set containing a cycle: a probability-zero event.'''


class ProfileMismatchError(LeverageError):
    '''A leverage profile was used with a graph it was not computed for.'''


@dataclass(frozen=True)
class LeverageProfile:
    '''Per-edge leverage scores of one graph; the tree-marginal law.'''
    scores: np.ndarray
    graph_id: str
    n: int

    def __len__(self):
        return len(self.scores)

    def __getitem__(self, e):
        return float(self.scores[e])

    @property
    def total(self):
        return float(np.sum(self.scores))

    @property
    def max_score(self):
        return float(np.max(self.scores))

    def check(self):
        '''Raise LeverageError unless scores lie in (0, 1] and sum to n-1.'''
        if abs(self.total - (self.n - 1)) > SUM_TOL:
            raise LeverageError(f'leverage scores sum to {self.total!r}, expected {self.n - 1}')
        if np.any(self.scores <= 0) or np.any(self.scores > 1 + UPPER_TOL):
            raise LeverageError('a leverage score lies outside (0, 1]')
        return self

    def require_graph(self, g):
        if self.graph_id != g.fingerprint:
            raise ProfileMismatchError(f'profile {self.graph_id} does not belong to {g.name}')


def _resistances(g, Lp, heads, tails):
    return Lp[heads, heads] + Lp[tails, tails] - 2 * Lp[heads, tails]


def laplacian_pinv(g, rank_tol=None):
    return pinv(eig_sym(laplacian(g), rank_tol))


def effective_resistance(g, u, v, *, rank_tol=None):
    '''b_uv^T L^+ b_uv.  Zero when u == v by convention.'''
    if u == v:
        return 0.0
    Lp = laplacian_pinv(g, rank_tol)
    return float(Lp[u, u] + Lp[v, v] - 2 * Lp[u, v])


def dense_leverage_scores(g, rank_tol=None):
    '''w_e R_eff(e) for every edge from one dense pseudoinverse.'''
    Lp = laplacian_pinv(g, rank_tol)
    return g.weights * _resistances(g, Lp, g.heads, g.tails)


def blockwise_leverage_scores(g, rank_tol=None):
    '''Leverage scores computed one biconnected block at a time.

    Blocks meet only at cut vertices, so the effective resistance between
    two vertices of a block is the resistance within the block.  Parallel
    edges share the block of their vertex pair.'''
    simple = nx.Graph()
    simple.add_nodes_from(range(g.n))
    simple.add_edges_from(zip(g.heads.tolist(), g.tails.tolist()))
    block_of = {}
    for index, block in enumerate(nx.biconnected_component_edges(simple)):
        for u, v in block:
            block_of[(min(u, v), max(u, v))] = index
    members = {}
    for e, pair in enumerate(zip(g.heads.tolist(), g.tails.tolist())):
        members.setdefault(block_of[pair], []).append(e)
    scores = np.empty(g.m)
    for edge_ids in members.values():
        if len(edge_ids) == 1:
            scores[edge_ids[0]] = 1.0
            continue
        block, _vertices = g.restrict(edge_ids)
        scores[edge_ids] = dense_leverage_scores(block, rank_tol)
    logger.debug(f'{g.name}: leverage from {len(members):,d} blocks')
    return scores


def leverage_scores(g, *, dense_limit=DENSE_VERTEX_LIMIT, rank_tol=None):
    '''Return the checked LeverageProfile of g.  rank_tol is the relative
    eigenvalue cutoff of the pseudoinverse.'''
    if g.n <= dense_limit:
        scores = dense_leverage_scores(g, rank_tol)
    else:
        scores = blockwise_leverage_scores(g, rank_tol)
    return LeverageProfile(_frozen(np.clip(scores, 0.0, None)), g.fingerprint, g.n).check()


def _frozen(array):
    array.setflags(write=False)
    return array


class ContractionState(object):
    '''A forest of contracted edges of a parent graph, with the induced
    partition of its vertices.  A value: contract() returns a new state.'''

    def __init__(self, g, contracted=frozenset(), parent=None):
        self.graph = g
        self.contracted = frozenset(contracted)
        self.parent = tuple(range(g.n)) if parent is None else tuple(parent)

    @classmethod
    def empty(cls, g):
        return cls(g)

    @classmethod
    def from_edges(cls, g, edge_ids):
        state = cls(g)
        for e in edge_ids:
            state = state.contract(e)
        return state

    def find(self, v):
        parent = self.parent
        while parent[v] != v:
            v = parent[v]
        return v

    def contract(self, e):
        if e in self.contracted:
            raise InvalidConditioningError(f'edge {e} is already contracted')
        ru, rv = self.find(int(self.graph.heads[e])), self.find(int(self.graph.tails[e]))
        if ru == rv:
            raise InvalidConditioningError(f'contracting edge {e} would close a cycle')
        parent = list(self.parent)
        parent[max(ru, rv)] = min(ru, rv)
        return ContractionState(self.graph, self.contracted | {e}, parent)

    def classes(self):
        '''Vertex label of each original vertex in the contracted graph.'''
        roots = [self.find(v) for v in range(self.graph.n)]
        relabel = {root: i for i, root in enumerate(sorted(set(roots)))}
        return [relabel[root] for root in roots]

    def contracted_graph(self):
        '''Return (multigraph, residual edge ids, self-loop edge ids).  The
        multigraph is None once a single vertex remains.'''
        g = self.graph
        labels = self.classes()
        residual, loops = [], []
        for e in range(g.m):
            if e in self.contracted:
                continue
            if labels[g.heads[e]] == labels[g.tails[e]]:
                loops.append(e)
            else:
                residual.append(e)
        if max(labels) == 0:
            return None, residual, loops
        edges = [(labels[g.heads[e]], labels[g.tails[e]], g.weights[e]) for e in residual]
        name = f'{g.name}/{len(self.contracted)}'
        return WeightedGraph(max(labels) + 1, edges, name=name), residual, loops

    def __len__(self):
        return len(self.contracted)

    def __repr__(self):
        return f'<ContractionState {sorted(self.contracted)}>'


def conditional_marginals(g, state, *, rank_tol=None):
    '''Pr[e in T | S in T] for every edge outside the contracted set S.

    Edges that become self-loops under contraction report 0.'''
    if state.graph is not g and state.graph.fingerprint != g.fingerprint:
        raise InvalidConditioningError('contraction state belongs to another graph')
    contracted, residual, loops = state.contracted_graph()
    result = {e: 0.0 for e in loops}
    if contracted is not None:
        scores = dense_leverage_scores(contracted, rank_tol)
        result.update(zip(residual, np.clip(scores, 0.0, 1.0).tolist()))
    return result
