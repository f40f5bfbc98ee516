# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Exact and statistical checks of the concentration machinery for
spanning tree distributions.

Every conditional expectation here is exact: conditioning on revealed tree
edges is contraction, and the conditional marginals are leverage scores
of the contracted multigraph.  Martingale identities can therefore be
asserted to 1e-8 rather than tested statistically.
'''

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np
import pylru
from scipy.stats import binom, binomtest

from treespark.lib.graph import laplacian
from treespark.lib.leverage import (ContractionState, conditional_marginals,
                                    leverage_scores)
from treespark.lib.spectral import (DEFAULT_PSD_TOL, NormalizedFrame, psd_leq,
                                    symmetric_triangle_verdict)
from treespark.lib.treesample import (SizeGuardError, SpanningTree, WilsonSampler,
                                      enumerate_trees, reweight_tree)
from treespark.lib.util import make_rng

MAX_MARGINAL_EDGES = 10
MAX_TRACE_VERTICES = 12
MAX_EXHAUSTIVE_EDGES = 8
MARGINAL_TOL = 1e-10
FRAME_TOL = 1e-9
TRACE_TOL = 1e-8
QV_TOL = 1e-6
TRACE_CACHE_SIZE = 4096

DEFAULT_KS = (10, 20, 50, 100, 200, 300, 500, 750, 1000, 1500, 2000, 3000, 4000, 5000)
DEFAULT_PS = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
DEFAULT_EPSS = (0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)

logger = logging.getLogger(__name__)


class DiagnosticError(Exception):
    '''Base class of diagnostic errors.'''


class PreconditionError(DiagnosticError):
    '''Inputs violate the hypotheses of the statement being checked.  This
    is not a falsification.'''


class MartingaleInvariantError(DiagnosticError):
    '''An exact martingale identity failed beyond tolerance.'''


def _norm2(A):
    return float(np.max(np.abs(np.linalg.eigvalsh(A))))


def _lambda_max(A):
    return float(np.linalg.eigvalsh(A)[-1])


def _guard(condition, message):
    if not condition:
        raise SizeGuardError(message)


# Shrinking marginals

def forests(g):
    '''Yield every acyclic edge subset of g, the empty set included.'''
    heads, tails = g.heads.tolist(), g.tails.tolist()

    def extend(start, chosen, component):
        yield tuple(chosen)
        for e in range(start, g.m):
            cu, cv = component[heads[e]], component[tails[e]]
            if cu == cv:
                continue
            merged = [cu if c == cv else c for c in component]
            chosen.append(e)
            yield from extend(e + 1, chosen, merged)
            chosen.pop()

    yield from extend(0, [], list(range(g.n)))


@dataclass(frozen=True)
class MarginalComparison:
    forest: tuple
    edge: int
    conditional: float
    unconditional: float

    @property
    def margin(self):
        return self.unconditional - self.conditional


@dataclass
class ShrinkingMarginalsReport:
    graph: str
    rows: List[MarginalComparison]
    forest_count: int
    tol: float = MARGINAL_TOL

    @property
    def violations(self):
        return [row for row in self.rows if row.margin < -self.tol]

    @property
    def passed(self):
        return not self.violations

    def summary(self):
        return {
            'graph': self.graph,
            'forests': self.forest_count,
            'pairs': len(self.rows),
            'min_margin': min((row.margin for row in self.rows), default=0.0),
            'violations': [[list(row.forest), row.edge, row.conditional, row.unconditional]
                           for row in self.violations],
            'tol': self.tol,
            'passed': self.passed,
        }


def shrinking_marginals_suite(g, tol=MARGINAL_TOL, *, rank_tol=None):
    '''Compare Pr[j in T | S in T] with Pr[j in T] for every forest S and
    every edge j outside it.'''
    _guard(g.m <= MAX_MARGINAL_EDGES,
           f'{g.name} has {g.m} edges; the exhaustive suite allows {MAX_MARGINAL_EDGES}')
    unconditional = leverage_scores(g, rank_tol=rank_tol).scores
    rows = []
    forest_count = 0
    for forest in forests(g):
        forest_count += 1
        state = ContractionState.from_edges(g, forest)
        for j, p in sorted(conditional_marginals(g, state, rank_tol=rank_tol).items()):
            rows.append(MarginalComparison(forest, j, p, float(unconditional[j])))
    report = ShrinkingMarginalsReport(g.name, rows, forest_count, tol)
    logger.info(f'{g.name}: {forest_count:,d} forests, {len(rows):,d} pairs, '
                f'{len(report.violations):,d} violations')
    return report


# Doob martingale traces

class NormalizedEdges(object):
    '''Edge matrices A_e = (L_G^+)^{1/2} w'_e b_e b_e^T (L_G^+)^{1/2} with
    inverse-leverage weights w'_e = w_e / l_e, stored as vectors a_e with
    A_e = a_e a_e^T.'''

    def __init__(self, g, lev=None, rank_tol=None):
        self.graph = g
        self.rank_tol = rank_tol
        self.lev = lev or leverage_scores(g, rank_tol=rank_tol)
        self.frame = NormalizedFrame(laplacian(g), rank_tol)
        S = self.frame.whitener
        scale = np.sqrt(g.weights / self.lev.scores)
        self.vectors = (S[:, g.heads] - S[:, g.tails]).T * scale[:, None]
        self.projection = np.eye(g.n) - np.full((g.n, g.n), 1.0 / g.n)

    def matrix(self, e):
        a = self.vectors[e]
        return np.outer(a, a)

    def norms(self):
        '''||A_e|| for every edge; each equals 1.'''
        return np.sum(self.vectors * self.vectors, axis=1)

    def weighted_sum(self, coefficients):
        V = self.vectors
        S = V.T @ (np.asarray(coefficients)[:, None] * V)
        return (S + S.T) / 2


@dataclass
class MartingaleTrace:
    '''The Doob martingale M_i = E[sum_e xi_e A_e | gamma_1..gamma_i] along
    one tree revealed edge by edge.  Lists are indexed by step i-1.'''
    graph: str
    k: int
    ordering: tuple
    M: list
    X_norms: list
    W_norms: list
    W: list
    step_variance: list
    step_mean_norms: list
    zero_mean_residuals: list
    R: float
    mu: float
    seed: Optional[int] = None
    failures: list = field(default_factory=list)
    psd_tol: float = DEFAULT_PSD_TOL

    def variance_bound(self, i):
        return 4 * self.mu * self.R / (self.k + 1 - i)

    def mean_bound(self, i):
        return self.mu / (self.k + 1 - i)

    @property
    def quadratic_variation_bound(self):
        return 10 * self.mu * self.R * math.log(self.k)

    def summary(self):
        return {
            'graph': self.graph,
            'seed': self.seed,
            'k': self.k,
            'ordering': list(self.ordering),
            'R': self.R,
            'mu': self.mu,
            'max_X_norm': max(self.X_norms, default=0.0),
            'final_W_norm': self.W_norms[-1] if self.W_norms else 0.0,
            'quadratic_variation_bound': self.quadratic_variation_bound,
            'max_zero_mean_residual': max(self.zero_mean_residuals, default=0.0),
            'step_variance_ok': check_step_variance_bound(self),
            'quadratic_variation_ok': check_quadratic_variation(self),
            'bounded_differences_ok': check_bounded_differences(self),
        }


class _ConditionalExpectations(object):
    '''E[sum_e xi_e A_e | S in T] per contracted set S, cached per trace.'''

    def __init__(self, edges, cache_size=TRACE_CACHE_SIZE):
        self.edges = edges
        self.cache = pylru.lrucache(cache_size)

    def __call__(self, state):
        key = state.contracted
        try:
            return self.cache[key]
        except KeyError:
            pass
        g = self.edges.graph
        marginals = conditional_marginals(g, state, rank_tol=self.edges.rank_tol)
        coefficients = np.zeros(g.m)
        coefficients[list(key)] = 1.0
        for e, p in marginals.items():
            coefficients[e] = p
        value = (self.edges.weighted_sum(coefficients), marginals)
        self.cache[key] = value
        return value


def martingale_trace_for_ordering(g, ordering, *, edges=None, expectations=None, seed=None,
                                  rank_tol=None, psd_tol=DEFAULT_PSD_TOL):
    '''The exact martingale trace for the spanning tree whose edges are
    revealed in the given order.'''
    _guard(g.n <= MAX_TRACE_VERTICES,
           f'{g.name} has {g.n} vertices; exact traces allow {MAX_TRACE_VERTICES}')
    ordering = tuple(int(e) for e in ordering)
    k = g.n - 1
    if len(ordering) != k:
        raise PreconditionError(f'ordering has {len(ordering)} edges, a tree has {k}')
    ContractionState.from_edges(g, ordering)
    edges = edges or NormalizedEdges(g, rank_tol=rank_tol)
    expectations = expectations or _ConditionalExpectations(edges)

    state = ContractionState.empty(g)
    M_prev, marginals = expectations(state)
    M = [M_prev]
    W = [np.zeros((g.n, g.n))]
    X_norms, W_norms, variances, mean_norms, residuals = [], [], [], [], []
    for i in range(1, k + 1):
        remaining = k - i + 1
        mean = np.zeros((g.n, g.n))
        second = np.zeros((g.n, g.n))
        mean_A = np.zeros((g.n, g.n))
        for e, q in marginals.items():
            if q <= 0:
                continue
            p = q / remaining
            X_e = expectations(state.contract(e))[0] - M_prev
            mean += p * X_e
            second += p * (X_e @ X_e)
            mean_A += p * edges.matrix(e)
        second = (second + second.T) / 2
        state = state.contract(ordering[i - 1])
        M_i, marginals = expectations(state)
        W.append(W[-1] + second)
        M.append(M_i)
        X_norms.append(_norm2(M_i - M_prev))
        W_norms.append(_norm2(W[-1]))
        variances.append(_lambda_max(second))
        mean_norms.append(_norm2(mean_A))
        residuals.append(float(np.max(np.abs(mean))))
        M_prev = M_i

    norms = edges.norms()
    trace = MartingaleTrace(g.name, k, ordering, M, X_norms, W_norms, W, variances,
                            mean_norms, residuals, float(np.max(norms)), _norm2(M[0]), seed,
                            psd_tol=psd_tol)
    trace.failures = _trace_failures(g, trace, edges)
    if trace.failures:
        raise MartingaleInvariantError(f'{g.name} ordering {ordering}: '
                                       + '; '.join(trace.failures))
    return trace


def _trace_failures(g, trace, edges):
    failures = []
    start_error = float(np.max(np.abs(trace.M[0] - edges.projection)))
    if start_error > FRAME_TOL:
        failures.append(f'M_0 differs from the projection by {start_error:.2e}')
    S = edges.frame.whitener
    tree = reweight_tree(SpanningTree.from_edges(g, trace.ordering), edges.lev)
    end = S @ tree.laplacian() @ S
    end_error = float(np.max(np.abs(trace.M[-1] - end)))
    if end_error > FRAME_TOL:
        failures.append(f'M_k differs from the normalized tree by {end_error:.2e}')
    worst = max(trace.zero_mean_residuals, default=0.0)
    if worst > TRACE_TOL:
        failures.append(f'zero-mean residual {worst:.2e}')
    return failures


def martingale_trace(g, seed, *, edges=None, rank_tol=None, psd_tol=DEFAULT_PSD_TOL):
    '''Sample a tree with Wilson's algorithm, reveal its edges in a uniformly
    random order and return the exact trace.'''
    _guard(g.n <= MAX_TRACE_VERTICES,
           f'{g.name} has {g.n} vertices; exact traces allow {MAX_TRACE_VERTICES}')
    rng = make_rng(seed)
    tree = WilsonSampler(g).sample(rng)
    ordering = rng.permutation(np.array(tree.edge_ids)).tolist()
    return martingale_trace_for_ordering(g, ordering, edges=edges, seed=seed,
                                         rank_tol=rank_tol, psd_tol=psd_tol)


def exhaustive_traces(g, *, rank_tol=None):
    '''Yield (probability, trace) for every spanning tree and every order
    of revealing its edges.  The probability is that of the tree and the
    order together.'''
    _guard(g.m <= MAX_EXHAUSTIVE_EDGES,
           f'{g.name} has {g.m} edges; exhaustive traces allow {MAX_EXHAUSTIVE_EDGES}')
    table = enumerate_trees(g)
    edges = NormalizedEdges(g, rank_tol=rank_tol)
    expectations = _ConditionalExpectations(edges)
    orders = math.factorial(g.n - 1)
    for edge_ids, probability in table.entries:
        for ordering in itertools.permutations(edge_ids):
            trace = martingale_trace_for_ordering(g, ordering, edges=edges,
                                                  expectations=expectations)
            yield probability / orders, trace


def check_step_variance_bound(trace, tol=TRACE_TOL):
    '''lambda_max(E[X_i^2 | past]) <= 4 mu R / (k+1-i) and
    ||E[A_{gamma_i} | past]|| <= mu / (k+1-i) at every step.'''
    for i in range(1, trace.k + 1):
        if trace.step_variance[i - 1] > trace.variance_bound(i) + tol:
            return False
        if trace.step_mean_norms[i - 1] > trace.mean_bound(i) + tol:
            return False
    return True


def check_bounded_differences(trace, tol=TRACE_TOL):
    return all(norm <= trace.R + tol for norm in trace.X_norms)


def check_quadratic_variation(trace, tol=QV_TOL):
    '''||W_k|| <= 10 mu R log k, with W_i nondecreasing in PSD order.'''
    if trace.W_norms and trace.W_norms[-1] > trace.quadratic_variation_bound + tol:
        return False
    return all(psd_leq(before, after, trace.psd_tol).holds
               for before, after in zip(trace.W, trace.W[1:]))


# Binomial tails

@dataclass(frozen=True)
class BinomialTailQuery:
    k: int
    p: float
    threshold: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 0):
            raise PreconditionError(f'trial count {self.k!r} is not a non-negative integer')
        if not 0 < self.p <= 0.5:
            raise PreconditionError(f'success probability {self.p!r} not in (0, 1/2]')
        if not 0 <= self.threshold <= self.k:
            raise PreconditionError(f'threshold {self.threshold!r} not in [0, {self.k}]')


def _log_sum(logs):
    '''log(sum(exp(logs))) with compensated summation.'''
    logs = np.asarray(logs, dtype=np.float64)
    if logs.size == 0:
        return -math.inf
    top = float(np.max(logs))
    if top == -math.inf:
        return top
    return top + math.log(math.fsum(np.exp(logs - top).tolist()))


def log_binomial_tail(q):
    '''log Pr[Bin(k, p) >= threshold].'''
    if q.threshold == 0:
        return 0.0
    return _log_sum(binom.logpmf(np.arange(q.threshold, q.k + 1), q.k, q.p))


def binomial_tail(q):
    '''Pr[Bin(k, p) >= threshold].'''
    return math.exp(log_binomial_tail(q))


def log_binomial_lower_tail(k, p, threshold):
    '''log Pr[Bin(k, p) <= threshold].'''
    if threshold < 0:
        return -math.inf
    return _log_sum(binom.logpmf(np.arange(0, min(threshold, k) + 1), k, p))


def exact_binomial_tail(k, p, threshold):
    '''Pr[Bin(k, p) >= threshold] in rational arithmetic, p taken exactly.'''
    p = Fraction(p)
    return sum(math.comb(k, i) * p ** i * (1 - p) ** (k - i) for i in range(threshold, k + 1))


@dataclass(frozen=True)
class ReverseChernoffResult:
    k: int
    p: float
    eps: float
    log_floor: float
    log_upper_tail: float
    log_lower_tail: float

    @property
    def holds(self):
        return self.log_upper_tail >= self.log_floor and self.log_lower_tail >= self.log_floor


def _ceil(x):
    return math.ceil(round(x, 9))


def _floor(x):
    return math.floor(round(x, 9))


def reverse_chernoff(k, p, eps):
    '''Both tails of Bin(k, p) at (1 +- eps) p k against exp(-9 eps^2 p k).'''
    if not 0 < eps <= 0.5:
        raise PreconditionError(f'eps {eps!r} not in (0, 1/2]')
    if not 0 < p <= 0.5:
        raise PreconditionError(f'p {p!r} not in (0, 1/2]')
    if eps * eps * p * k < 3:
        raise PreconditionError(f'eps^2 p k = {eps * eps * p * k:.3f} is below 3')
    mean = p * k
    upper = log_binomial_tail(BinomialTailQuery(k, p, min(k, _ceil((1 + eps) * mean))))
    lower = log_binomial_lower_tail(k, p, _floor((1 - eps) * mean))
    return ReverseChernoffResult(k, p, eps, -9 * eps * eps * mean, upper, lower)


def reverse_chernoff_check(k, p, eps):
    return reverse_chernoff(k, p, eps).holds


def admissible(k, p, eps):
    return 0 < eps <= 0.5 and 0 < p <= 0.5 and eps * eps * p * k >= 3


@dataclass
class GridReport:
    name: str
    checked: int
    failures: list

    @property
    def passed(self):
        return self.checked > 0 and not self.failures

    def summary(self):
        return {'suite': self.name, 'checked': self.checked,
                'failures': self.failures, 'passed': self.passed}


def reverse_chernoff_grid(ks=DEFAULT_KS, ps=DEFAULT_PS, epss=DEFAULT_EPSS):
    '''Check every hypothesis-satisfying triple of the grid, both tails.'''
    checked, failures = 0, []
    for k, p, eps in itertools.product(ks, ps, epss):
        if not admissible(k, p, eps):
            continue
        checked += 1
        result = reverse_chernoff(k, p, eps)
        if not result.holds:
            failures.append([k, p, eps, result.log_upper_tail, result.log_lower_tail,
                             result.log_floor])
    return GridReport('reverse-chernoff', checked, failures)


# Stirling lower bound on binomial coefficients

def check_stirling_binom_lower(k, l):
    '''(k choose l) >= (k/l)^l (k/(k-l))^(k-l) / (e sqrt(2 pi l)), in logs.'''
    if not 1 <= l <= k - 1:
        raise PreconditionError(f'need 1 <= l <= k-1, got k={k}, l={l}')
    lhs = math.log(math.comb(k, l))
    rhs = (-1 - 0.5 * math.log(2 * math.pi * l) + l * math.log(k / l)
           + (k - l) * math.log(k / (k - l)))
    return lhs >= rhs - 1e-12 * max(1.0, abs(rhs))


def stirling_grid(k_max=60):
    checked, failures = 0, []
    for k in range(2, k_max + 1):
        for l in range(1, k):
            checked += 1
            if not check_stirling_binom_lower(k, l):
                failures.append([k, l])
    return GridReport('stirling', checked, failures)


# Symmetric matrix fact

def random_symmetric(rng, dim):
    '''Symmetric matrix whose upper triangle is uniform in [-1, 1].'''
    upper = np.triu(rng.uniform(-1.0, 1.0, size=(dim, dim)))
    return upper + np.triu(upper, 1).T


def matrix_fact_suite(pairs=1000, max_dim=16, seed=0, gap_tol=1e-9):
    '''(A - B)^2 <= 2A^2 + 2B^2 over random symmetric pairs.'''
    rng = make_rng(seed)
    checked, failures, worst = 0, [], math.inf
    for index in range(pairs):
        dim = int(rng.integers(1, max_dim + 1))
        verdict = symmetric_triangle_verdict(random_symmetric(rng, dim),
                                             random_symmetric(rng, dim))
        checked += 1
        worst = min(worst, verdict.witness_gap)
        if verdict.witness_gap < -gap_tol or not verdict.holds:
            failures.append([index, dim, verdict.witness_gap])
    report = GridReport('matrix-fact', checked, failures)
    logger.info(f'matrix fact: {checked:,d} pairs, worst witness gap {worst:.3e}')
    return report


# Concentration envelopes

def freedman_envelopes(n, k, eps, mu=1.0, R=1.0):
    '''Both displayed forms of the tail envelope, constants as printed.'''
    log_k = math.log(k) if k > 1 else 0.0
    return {
        'unit_constant': n * math.exp(-eps * eps * mu / (R * (log_k + eps))),
        'explicit': n * math.exp(-3 * eps * eps * mu / ((60 * log_k + 2 * eps) * R)),
    }


@dataclass
class TailProbeReport:
    graph: str
    eps: float
    samples: int
    exceedances: int
    envelopes: dict
    largest_constant: Optional[float]
    level: float

    @property
    def frequency(self):
        return self.exceedances / self.samples

    def summary(self):
        return {
            'graph': self.graph,
            'eps': self.eps,
            'samples': self.samples,
            'exceedances': self.exceedances,
            'frequency': self.frequency,
            'envelopes': self.envelopes,
            'largest_consistent_constant': self.largest_constant,
            'level': self.level,
        }


def tail_dominance_probe(g, eps, samples, seed, level=0.01, *, rank_tol=None):
    '''Frequency of lambda_max(M_k - Pi) >= eps over sampled trees.

    Records both envelopes and the largest c for which
    min(1, n exp(-c eps^2 / (log k + eps))) survives a one-sided binomial
    test at the given level.  Recorded, not asserted: the constant is
    unspecified.'''
    lev = leverage_scores(g, rank_tol=rank_tol)
    frame = NormalizedFrame(laplacian(g), rank_tol)
    sampler = WilsonSampler(g)
    exceedances = 0
    for index in range(samples):
        tree = reweight_tree(sampler.sample(make_rng(seed + index)), lev)
        if np.linalg.eigvalsh(frame.conjugate(tree.laplacian()))[-1] - 1 >= eps:
            exceedances += 1
    k = g.n - 1
    log_k = math.log(k) if k > 1 else 0.0
    exponent = eps * eps / (log_k + eps)

    def rejected(c):
        envelope = min(1.0, g.n * math.exp(-c * exponent))
        return binomtest(exceedances, samples, envelope, alternative='greater').pvalue < level

    largest = None
    if exceedances:
        lo, hi = 0.0, 1.0
        while not rejected(hi) and hi < 1e6:
            lo, hi = hi, hi * 2
        if hi < 1e6 and not rejected(lo):
            for _ in range(60):
                mid = (lo + hi) / 2
                if rejected(mid):
                    hi = mid
                else:
                    lo = mid
            largest = lo
    return TailProbeReport(g.name, eps, samples, exceedances,
                           freedman_envelopes(g.n, k, eps), largest, level)


def degree_tail_envelope(n, degree):
    '''(single, union) where single = Pr[deg(v) >= degree] for one vertex of
    a uniform tree of K_n, with deg(v) - 1 ~ Bin(n-2, 1/n), and union =
    min(1, n single) bounds the chance that some vertex reaches it.'''
    if degree <= 1:
        return 1.0, 1.0
    if degree - 1 > n - 2:
        return 0.0, 0.0
    single = binomial_tail(BinomialTailQuery(n - 2, 1.0 / n, degree - 1))
    return single, min(1.0, n * single)
