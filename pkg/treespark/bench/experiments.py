# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Desk-scale runs of the sparsifier upper and lower bounds and the
degree law of uniform trees.

Each experiment is a coroutine taking a TrialPool.  Trial functions are
module level so process workers can unpickle them, and trial i always uses
the generator keyed by base seed + i, so reports are bit-reproducible
whatever the worker count.
'''

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional

import numpy as np
from scipy.stats import binom, binomtest

from treespark.lib.graph import build_construction, laplacian, quadratic_form
from treespark.lib.leverage import DENSE_VERTEX_LIMIT, leverage_scores
from treespark.lib.spectral import NormalizedFrame
from treespark.lib.treesample import (MAX_ENUMERATION_EDGES, WilsonSampler, average_trees,
                                      enumerate_trees, reweight_tree)
from treespark.lib.trial_pool import TrialPool
from treespark.lib.util import chunk_counts, class_logger, logs_of, make_rng
from treespark.bench.srdiag import degree_tail_envelope

UPPER_CONSTANT = 100
SUM_TREES_GATE = 0.9
MULTI_LOWER_GATE = 0.95
MULTI_LOWER_RATE = 0.05
DEGREE_CHUNK = 2000
MAX_EXACT_DEGREE_N = 7
TAIL_TEST_LEVEL = 0.01
EXTREME_TOL = 1e-9


class ExperimentError(Exception):
    '''Base class of experiment errors.'''


class ParameterError(ExperimentError):
    '''Experiment parameters outside their admissible range.'''


logger = class_logger(__name__, 'experiments')


def graph_descriptor(g):
    ln_n, log2_n = logs_of(g.n)
    return {'name': g.name, 'n': g.n, 'm': g.m, 'fingerprint': g.fingerprint,
            'ln_n': ln_n, 'log2_n': log2_n}


def _pool(pool):
    return pool or TrialPool(jobs=1)


# Trial functions

def _tree_extremes(g, frame, lev, seed):
    '''(lambda_min_pos, lambda_max) of one sampled tree in the normalized
    frame, reweighted by inverse leverage unless lev is None.'''
    tree = WilsonSampler(g).sample(make_rng(seed))
    if lev is not None:
        tree = reweight_tree(tree, lev)
    return frame.extremes(tree.laplacian())


def _average_extremes(g, frame, lev, seeds):
    sampler = WilsonSampler(g)
    trees = [reweight_tree(sampler.sample(make_rng(seed)), lev) for seed in seeds]
    return frame.extremes(average_trees(trees))


def _degree_violation(g, scores, seeds, eps):
    '''(violated, violating vertex count, max relative deviation) of the
    inverse-leverage weighted degrees of the average of the given trees.'''
    sampler = WilsonSampler(g)
    wdeg_H = np.zeros(g.n)
    for seed in seeds:
        ids = np.array(sampler.sample_edge_ids(make_rng(seed)), dtype=np.int64)
        w = g.weights[ids] / scores[ids]
        wdeg_H += np.bincount(g.heads[ids], weights=w, minlength=g.n)
        wdeg_H += np.bincount(g.tails[ids], weights=w, minlength=g.n)
    wdeg_H /= len(seeds)
    return _violations(wdeg_H, g.weighted_degrees(), eps)


def _violations(wdeg_H, wdeg_G, eps):
    deviation = np.abs(wdeg_H / wdeg_G - 1.0)
    bad = deviation > eps + EXTREME_TOL
    return bool(np.any(bad)), int(np.count_nonzero(bad)), float(np.max(deviation))


def _degree_counts(g, vertex, first_seed, count):
    sampler = WilsonSampler(g)
    counts = np.zeros(g.n, dtype=np.int64)
    for seed in range(first_seed, first_seed + count):
        ids = np.array(sampler.sample_edge_ids(make_rng(seed)), dtype=np.int64)
        degree = np.count_nonzero((g.heads[ids] == vertex) | (g.tails[ids] == vertex))
        counts[degree] += 1
    return counts


def _star_certificate(g, lev, seed):
    '''Max tree degree d* over non-hub vertices and the ratio
    x^T L_T x / x^T L_G x for the star vector centred at the first vertex
    attaining it.'''
    tree = reweight_tree(WilsonSampler(g).sample(make_rng(seed)), lev)
    degrees = tree.degrees()
    centre = 1 + int(np.argmax(degrees[1:]))
    d = int(degrees[centre])
    x = np.zeros(g.n)
    x[centre] = d
    for u, v in tree.endpoints:
        if centre in (u, v):
            x[v if u == centre else u] = -1.0
    return d, tree.quadratic_form(x) / quadratic_form(g, x)


# Reports

@dataclass
class SingleTreeReport:
    '''lambda_max of single normalized trees against an O(log n) envelope.'''
    kind: str
    graph: dict
    trials: int
    seeds: List[int]
    extremes: List[tuple]
    envelope: float
    envelope_rule: str
    median_gate: Optional[float] = None
    max_leverage: Optional[float] = None

    @property
    def lambda_maxes(self):
        return [hi for _lo, hi in self.extremes]

    @property
    def passed(self):
        if max(self.lambda_maxes) > self.envelope:
            return False
        return self.median_gate is None or self.median <= self.median_gate

    @property
    def median(self):
        return statistics.median(self.lambda_maxes)

    def summary(self):
        ln_n = self.graph['ln_n']
        result = {
            'graph': self.graph,
            'trials': self.trials,
            'seeds': self.seeds,
            'lambda_max': self.lambda_maxes,
            'max_lambda_max': max(self.lambda_maxes),
            'median_lambda_max': self.median,
            'empirical_constant': max(self.lambda_maxes) / ln_n if ln_n else None,
            'envelope': self.envelope,
            'envelope_rule': self.envelope_rule,
            'median_gate': self.median_gate,
            'passed': self.passed,
        }
        if self.max_leverage is not None:
            result['max_leverage'] = self.max_leverage
        return result

    def rows(self):
        return [{'trial': i, 'seed': seed, 'lambda_min_pos': lo, 'lambda_max': hi}
                for i, (seed, (lo, hi)) in enumerate(zip(self.seeds, self.extremes))]


@dataclass
class SparsifierReport:
    graph: dict
    t: int
    eps_target: float
    trials: int
    seeds: List[int]
    extremes: List[tuple]
    gate: float = SUM_TREES_GATE
    c_mult: Optional[float] = None

    def __post_init__(self):
        for lo, hi in self.extremes:
            if lo > hi + EXTREME_TOL:
                raise ExperimentError(f'lambda_min_pos {lo} exceeds lambda_max {hi}')

    def trial_passed(self, extremes):
        lo, hi = extremes
        return (1 - self.eps_target - EXTREME_TOL <= lo
                and hi <= 1 + self.eps_target + EXTREME_TOL)

    @property
    def pass_fraction(self):
        return sum(map(self.trial_passed, self.extremes)) / self.trials

    @property
    def passed(self):
        return self.pass_fraction >= self.gate

    @property
    def mean_deviation(self):
        return statistics.fmean(max(abs(lo - 1), abs(hi - 1)) for lo, hi in self.extremes)

    def summary(self):
        return {
            'graph': self.graph,
            't': self.t,
            'c_mult': self.c_mult,
            'eps_target': self.eps_target,
            'trials': self.trials,
            'seeds': self.seeds,
            'extremes': [list(pair) for pair in self.extremes],
            'pass_fraction': self.pass_fraction,
            'mean_deviation': self.mean_deviation,
            'gate': self.gate,
            'passed': self.passed,
        }

    def rows(self):
        return [{'trial': i, 'seed': seed, 'lambda_min_pos': lo, 'lambda_max': hi,
                 'within_eps': self.trial_passed((lo, hi))}
                for i, (seed, (lo, hi)) in enumerate(zip(self.seeds, self.extremes))]


@dataclass
class TrendReport:
    graph: dict
    eps: float
    reports: List[SparsifierReport]

    @property
    def deviations(self):
        return [report.mean_deviation for report in self.reports]

    @property
    def passed(self):
        return self.deviations[-1] < self.deviations[0]

    def summary(self):
        return {
            'graph': self.graph,
            'eps': self.eps,
            'ts': [report.t for report in self.reports],
            'mean_deviation': self.deviations,
            'pass_fraction': [report.pass_fraction for report in self.reports],
            'passed': self.passed,
        }

    def rows(self):
        return [dict(row, t=report.t) for report in self.reports for row in report.rows()]


@dataclass
class MultiTreeLowerReport:
    graph: dict
    num_cliques: int
    clique_size: int
    eps: float
    t: int
    strict: bool
    seeds: List[int]
    outcomes: List[tuple]
    leverage_method: str
    gate: Optional[float] = MULTI_LOWER_GATE
    exact_violation_probability: Optional[float] = None

    @property
    def violation_fraction(self):
        return sum(1 for violated, _count, _dev in self.outcomes if violated) / len(self.outcomes)

    @property
    def passed(self):
        return self.gate is None or self.violation_fraction >= self.gate

    def summary(self):
        return {
            'graph': self.graph,
            'num_cliques': self.num_cliques,
            'clique_size': self.clique_size,
            'degree_role': 'clique_size',
            'eps': self.eps,
            'eps_window': [5 / self.clique_size, 0.5],
            'strict': self.strict,
            't': self.t,
            'trials': len(self.outcomes),
            'seeds': self.seeds,
            'violation_fraction': self.violation_fraction,
            'violating_vertices': [count for _v, count, _d in self.outcomes],
            'max_relative_deviation': [dev for _v, _c, dev in self.outcomes],
            'exact_violation_probability': self.exact_violation_probability,
            'leverage_method': self.leverage_method,
            'gate': self.gate,
            'passed': self.passed,
        }

    def rows(self):
        return [{'trial': i, 'violated': violated, 'violating_vertices': count,
                 'max_relative_deviation': dev}
                for i, (violated, count, dev) in enumerate(self.outcomes)]


@dataclass
class SingleTreeLowerReport:
    graph: dict
    num_cliques: int
    clique_size: int
    threshold: int
    seeds: List[int]
    certificates: List[tuple]
    tail_single: float
    tail_union: float
    level: float = TAIL_TEST_LEVEL

    @property
    def max_degrees(self):
        return [d for d, _ratio in self.certificates]

    @property
    def ratios(self):
        return [ratio for _d, ratio in self.certificates]

    @property
    def ratio_target(self):
        return math.log(self.clique_size) / 2

    @property
    def exceed_count(self):
        return sum(1 for d in self.max_degrees if d >= self.threshold)

    @property
    def union_envelope(self):
        return min(1.0, self.num_cliques * self.tail_union)

    @property
    def tail_pvalue(self):
        if self.union_envelope >= 1.0:
            return 1.0
        return binomtest(self.exceed_count, len(self.certificates), self.union_envelope,
                         alternative='greater').pvalue

    @property
    def passed(self):
        return self.tail_pvalue >= self.level

    def summary(self):
        trials = len(self.certificates)
        return {
            'graph': self.graph,
            'num_cliques': self.num_cliques,
            'clique_size': self.clique_size,
            'degree_role': 'clique_size',
            'trials': trials,
            'seeds': self.seeds,
            'max_degree': self.max_degrees,
            'half_max_degree': [d / 2 for d in self.max_degrees],
            'certified_ratio': self.ratios,
            'ratio_target': self.ratio_target,
            'ratio_target_frequency': sum(1 for r in self.ratios
                                          if r >= self.ratio_target) / trials,
            'degree_threshold': self.threshold,
            'degree_threshold_frequency': self.exceed_count / trials,
            'tail_single_vertex': self.tail_single,
            'tail_union_envelope': self.union_envelope,
            'tail_pvalue': self.tail_pvalue,
            'level': self.level,
            'passed': self.passed,
        }

    def rows(self):
        return [{'trial': i, 'seed': seed, 'max_degree': d, 'certified_ratio': ratio}
                for i, (seed, (d, ratio)) in enumerate(zip(self.seeds, self.certificates))]


def reference_degree_pmf(n):
    '''Pr[deg = d] for d = 0..n-1 under 1 + Bin(n-2, 1/n).'''
    pmf = np.zeros(n)
    pmf[1:] = binom.pmf(np.arange(n - 1), n - 2, 1.0 / n)
    return pmf


@dataclass
class DegreeHistogram:
    n: int
    samples: int
    counts: List[int]
    seed: int = 0
    vertex: int = 0

    def __post_init__(self):
        if sum(self.counts) != self.samples:
            raise ExperimentError(f'counts sum to {sum(self.counts):,d}, '
                                  f'not {self.samples:,d}')

    @property
    def reference(self):
        return reference_degree_pmf(self.n)

    @property
    def tv_distance(self):
        empirical = np.array(self.counts) / self.samples
        return 0.5 * float(np.sum(np.abs(empirical - self.reference)))

    @property
    def bins(self):
        return int(np.count_nonzero(self.reference >= 1 / self.samples))

    @property
    def gate(self):
        return 4 * math.sqrt(self.bins / self.samples)

    @property
    def passed(self):
        return self.tv_distance <= self.gate

    def summary(self):
        return {
            'n': self.n,
            'vertex': self.vertex,
            'samples': self.samples,
            'seed': self.seed,
            'counts': list(self.counts),
            'reference_pmf': self.reference.tolist(),
            'tv_distance': self.tv_distance,
            'bins': self.bins,
            'gate': self.gate,
            'passed': self.passed,
        }

    def rows(self):
        reference = self.reference
        return [{'degree': d, 'count': c, 'reference': reference[d]}
                for d, c in enumerate(self.counts)]


@dataclass
class ExactDegreeReport:
    n: int
    pmf: List[Fraction] = field(default_factory=list)
    reference: List[Fraction] = field(default_factory=list)

    @property
    def passed(self):
        return self.pmf == self.reference

    def summary(self):
        return {
            'n': self.n,
            'pmf': [str(p) for p in self.pmf],
            'reference_pmf': [str(p) for p in self.reference],
            'passed': self.passed,
        }

    def rows(self):
        return [{'degree': d, 'pmf': str(p), 'reference': str(q)}
                for d, (p, q) in enumerate(zip(self.pmf, self.reference))]


# Experiments

async def run_single_tree_upper(g, trials, seed, *, pool=None, median_gate=None,
                                dense_limit=DENSE_VERTEX_LIMIT, rank_tol=None):
    '''lambda_max of the normalized inverse-leverage tree per trial against
    the envelope 100 ln n.  median_gate, if given, is a multiple of ln n.'''
    lev = leverage_scores(g, dense_limit=dense_limit, rank_tol=rank_tol)
    frame = NormalizedFrame(laplacian(g), rank_tol)
    seeds = [seed + i for i in range(trials)]
    extremes = await _pool(pool).map(_tree_extremes,
                                     [(g, frame, lev, s) for s in seeds])
    ln_n = math.log(g.n)
    gate = None if median_gate is None else median_gate * ln_n
    report = SingleTreeReport('single_tree_upper', graph_descriptor(g), trials, seeds,
                              extremes, UPPER_CONSTANT * ln_n, '100 * ln(n)', gate)
    logger.info(f'{g.name}: max lambda_max {max(report.lambda_maxes):.3f} over '
                f'{trials:,d} trees, envelope {report.envelope:.1f}')
    return report


def tree_count(eps, n, c_mult):
    '''t = ceil(c_mult eps^-2 (ln n)^2).'''
    return max(1, math.ceil(c_mult * math.log(n) ** 2 / (eps * eps)))


async def run_sum_trees(g, eps, trials, seed, *, c_mult=None, t=None, pool=None,
                        gate=SUM_TREES_GATE, dense_limit=DENSE_VERTEX_LIMIT,
                        rank_tol=None):
    '''Extremes of the average of t inverse-leverage trees, per trial.

    Trial i consumes the tree seeds seed + i*t .. seed + i*t + t - 1.'''
    if not 0 < eps < 1:
        raise ParameterError(f'eps {eps} not in (0, 1)')
    if (c_mult is None) == (t is None):
        raise ParameterError('give exactly one of c_mult and t')
    if c_mult is not None:
        if not c_mult > 0:
            raise ParameterError(f'c_mult {c_mult} must be positive')
        t = tree_count(eps, g.n, c_mult)
    elif t < 1:
        raise ParameterError(f'tree count {t} must be positive')
    if trials < 1:
        raise ParameterError(f'trial count {trials} must be positive')
    lev = leverage_scores(g, dense_limit=dense_limit, rank_tol=rank_tol)
    frame = NormalizedFrame(laplacian(g), rank_tol)
    seeds = [seed + i * t for i in range(trials)]
    args = [(g, frame, lev, range(s, s + t)) for s in seeds]
    extremes = await _pool(pool).map(_average_extremes, args)
    report = SparsifierReport(graph_descriptor(g), t, eps, trials, seeds, extremes,
                              gate, c_mult)
    logger.info(f'{g.name}: t={t:,d} pass fraction {report.pass_fraction:.2f} '
                f'over {trials:,d} trials')
    return report


async def run_sum_trees_trend(g, eps, t0, trials, seed, *, pool=None,
                              dense_limit=DENSE_VERTEX_LIMIT, rank_tol=None):
    '''run_sum_trees at t0, 2 t0 and 4 t0 with the same seeds.'''
    reports = []
    for t in (t0, 2 * t0, 4 * t0):
        reports.append(await run_sum_trees(g, eps, trials, seed, t=t, pool=pool,
                                           dense_limit=dense_limit, rank_tol=rank_tol))
    return TrendReport(graph_descriptor(g), eps, reports)


def multi_tree_count(eps, n):
    '''t = max(1, floor(0.05 eps^-2 ln n)).'''
    return max(1, math.floor(MULTI_LOWER_RATE * math.log(n) / (eps * eps)))


def exact_violation_probability(g, lev, eps):
    '''Probability that one inverse-leverage tree violates some weighted
    degree by more than eps, by enumeration.'''
    table = enumerate_trees(g)
    wdeg_G = g.weighted_degrees()
    total = Fraction(0)
    for edge_ids, probability in table.entries:
        ids = np.array(edge_ids, dtype=np.int64)
        w = g.weights[ids] / lev.scores[ids]
        wdeg_H = (np.bincount(g.heads[ids], weights=w, minlength=g.n)
                  + np.bincount(g.tails[ids], weights=w, minlength=g.n))
        if _violations(wdeg_H, wdeg_G, eps)[0]:
            total += probability
    return float(total)


async def run_multi_tree_lower(num_cliques, clique_size, eps, trials, seed, *, t=None,
                               strict=True, pool=None, gate=MULTI_LOWER_GATE,
                               dense_limit=DENSE_VERTEX_LIMIT, rank_tol=None):
    '''Weighted-degree violations of the average of t trees of the clique
    star.  A violated degree cut certifies spectral failure.

    When strict, eps must lie in (5/s, 1/2) where s is the clique size.'''
    if strict and not 5 / clique_size < eps < 0.5:
        raise ParameterError(f'eps {eps} outside the window ({5 / clique_size:.4f}, 0.5); '
                             f'pass strict=False to run anyway')
    if not 0 < eps < 1:
        raise ParameterError(f'eps {eps} not in (0, 1)')
    g = build_construction('clique_star', {'num_cliques': num_cliques,
                                           'clique_size': clique_size})
    t = multi_tree_count(eps, g.n) if t is None else t
    if t < 1 or trials < 1:
        raise ParameterError('tree and trial counts must be positive')
    lev = leverage_scores(g, dense_limit=dense_limit, rank_tol=rank_tol)
    seeds = [seed + i * t for i in range(trials)]
    outcomes = await _pool(pool).map(_degree_violation,
                                     [(g, lev.scores, range(s, s + t), eps) for s in seeds])
    exact = None
    if t == 1 and g.m <= MAX_ENUMERATION_EDGES:
        exact = exact_violation_probability(g, lev, eps)
    method = 'dense' if g.n <= dense_limit else 'blockwise'
    report = MultiTreeLowerReport(graph_descriptor(g), num_cliques, clique_size, eps, t,
                                  strict, seeds, outcomes, method, gate, exact)
    logger.info(f'{g.name}: t={t:,d} violation fraction '
                f'{report.violation_fraction:.2f} over {trials:,d} trials')
    return report


def default_degree_threshold(clique_size):
    return 1 + int(math.floor(math.log2(clique_size)))


async def run_single_tree_lower(num_cliques, clique_size, trials, seed, *, threshold=None,
                                pool=None, dense_limit=DENSE_VERTEX_LIMIT, rank_tol=None):
    '''Star-vector certificates that one inverse-leverage tree of the clique
    star is not a (d*/2)-approximation, with the Pruefer degree tail as a
    one-sided envelope for high tree degrees.'''
    g = build_construction('clique_star', {'num_cliques': num_cliques,
                                           'clique_size': clique_size})
    threshold = default_degree_threshold(clique_size) if threshold is None else threshold
    lev = leverage_scores(g, dense_limit=dense_limit, rank_tol=rank_tol)
    seeds = [seed + i for i in range(trials)]
    certificates = await _pool(pool).map(_star_certificate,
                                         [(g, lev, s) for s in seeds])
    single, union = degree_tail_envelope(clique_size, threshold)
    report = SingleTreeLowerReport(graph_descriptor(g), num_cliques, clique_size, threshold,
                                   seeds, certificates, single, union)
    logger.info(f'{g.name}: degree >= {threshold} in {report.exceed_count:,d} of '
                f'{trials:,d} trials, union envelope {report.union_envelope:.3g}')
    return report


async def run_degree_dist(n, samples, seed, *, pool=None, vertex=0):
    '''Histogram of a fixed vertex's degree in uniform trees of K_n.'''
    if n < 3:
        raise ParameterError(f'degree law needs n >= 3, got {n}')
    if samples < 1:
        raise ParameterError(f'sample count {samples} must be positive')
    g = build_construction('complete', {'n': n})
    args, first = [], seed
    for count in chunk_counts(samples, DEGREE_CHUNK):
        args.append((g, vertex, first, count))
        first += count
    counts = sum(await _pool(pool).map(_degree_counts, args))
    histogram = DegreeHistogram(n, samples, counts.tolist(), seed, vertex)
    logger.info(f'K_{n}: TV distance {histogram.tv_distance:.4f} over {samples:,d} '
                f'samples, gate {histogram.gate:.4f}')
    return histogram


def exact_degree_distribution(n):
    '''The degree law of vertex 0 over all trees of K_n, exactly.'''
    if not 3 <= n <= MAX_EXACT_DEGREE_N:
        raise ParameterError(f'exact degree law needs 3 <= n <= {MAX_EXACT_DEGREE_N}')
    g = build_construction('complete', {'n': n})
    pmf = [Fraction(0)] * n
    for edge_ids, probability in enumerate_trees(g).entries:
        degree = sum(1 for e in edge_ids if g.heads[e] == 0 or g.tails[e] == 0)
        pmf[degree] += probability
    p = Fraction(1, n)
    reference = [Fraction(0)] + [math.comb(n - 2, d - 1) * p ** (d - 1) * (1 - p) ** (n - 1 - d)
                                 for d in range(1, n)]
    return ExactDegreeReport(n, pmf, reference)


async def run_unweighted_thin_tree(g, trials, seed, *, pool=None,
                                   dense_limit=DENSE_VERTEX_LIMIT, rank_tol=None):
    '''lambda_max of the normalized unweighted tree against
    100 (max leverage) ln n.'''
    if not g.is_unit_weighted():
        raise ParameterError(f'{g.name} is not unit weighted')
    lev = leverage_scores(g, dense_limit=dense_limit, rank_tol=rank_tol)
    frame = NormalizedFrame(laplacian(g), rank_tol)
    seeds = [seed + i for i in range(trials)]
    extremes = await _pool(pool).map(_tree_extremes, [(g, frame, None, s) for s in seeds])
    max_lev = lev.max_score
    envelope = UPPER_CONSTANT * max_lev * math.log(g.n)
    report = SingleTreeReport('unweighted_thin_tree', graph_descriptor(g), trials, seeds,
                              extremes, envelope, '100 * max_leverage * ln(n)',
                              max_leverage=max_lev)
    logger.info(f'{g.name}: max lambda_max {max(report.lambda_maxes):.3f}, '
                f'envelope {envelope:.2f}')
    return report
