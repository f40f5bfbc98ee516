import math
from fractions import Fraction

import numpy as np
import pytest

from treespark.bench import experiments
from treespark.bench.experiments import ParameterError
from treespark.lib.graph import WeightedGraph, laplacian, parse_graph_source
from treespark.lib.leverage import LeverageError, leverage_scores
from treespark.lib.treesample import WilsonSampler, reweight_tree
from treespark.lib.trial_pool import TrialPool
from treespark.lib.util import make_rng


def test_graph_descriptor():
    g = parse_graph_source('k:8')
    descriptor = experiments.graph_descriptor(g)
    assert descriptor['n'] == 8 and descriptor['m'] == 28
    assert descriptor['ln_n'] == pytest.approx(math.log(8))
    assert descriptor['log2_n'] == pytest.approx(3)
    assert descriptor['fingerprint'] == g.fingerprint


@pytest.mark.asyncio
async def test_single_tree_upper_tree_graph():
    g = parse_graph_source('path:6')
    report = await experiments.run_single_tree_upper(g, 4, 0)
    for lo, hi in report.extremes:
        assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)
    assert report.passed
    assert report.seeds == [0, 1, 2, 3]
    assert report.summary()['envelope'] == pytest.approx(100 * math.log(6))


@pytest.mark.asyncio
async def test_single_tree_upper_complete():
    g = parse_graph_source('k:30')
    report = await experiments.run_single_tree_upper(g, 6, 5, median_gate=3.0)
    assert report.passed
    assert all(hi >= 1.5 for hi in report.lambda_maxes)
    assert len(report.rows()) == 6


def test_tree_count():
    assert experiments.tree_count(0.5, math.e, 1.0) == 4
    assert experiments.tree_count(0.5, 100, 0.0001) == 1
    assert experiments.multi_tree_count(0.25, math.e ** 2) == 1
    assert experiments.multi_tree_count(0.1, math.exp(10.5)) == 52


@pytest.mark.asyncio
async def test_sum_trees_single_tree_fails():
    g = parse_graph_source('k:20')
    report = await experiments.run_sum_trees(g, 0.5, 5, 0, t=1)
    assert report.pass_fraction == 0
    assert not report.passed
    assert report.seeds == [0, 1, 2, 3, 4]
    for lo, hi in report.extremes:
        assert 0 < lo <= hi


@pytest.mark.asyncio
async def test_sum_trees_tree_graph():
    g = parse_graph_source('path:5')
    report = await experiments.run_sum_trees(g, 0.1, 3, 7, t=4)
    assert report.pass_fraction == 1
    assert report.mean_deviation == pytest.approx(0, abs=1e-9)
    assert report.seeds == [7, 11, 15]


@pytest.mark.asyncio
@pytest.mark.parametrize('kwargs', (
    {'eps': 0.0, 't': 2},
    {'eps': 1.0, 't': 2},
    {'eps': 0.5},
    {'eps': 0.5, 't': 2, 'c_mult': 1.0},
    {'eps': 0.5, 't': 0},
    {'eps': 0.5, 'c_mult': -1.0},
    {'eps': 0.5, 't': 2, 'trials': 0},
))
async def test_sum_trees_parameters(kwargs):
    kwargs = dict(kwargs)
    eps = kwargs.pop('eps')
    trials = kwargs.pop('trials', 2)
    with pytest.raises(ParameterError):
        await experiments.run_sum_trees(parse_graph_source('k:5'), eps, trials, 0, **kwargs)


@pytest.mark.asyncio
async def test_sum_trees_reproducible():
    g = parse_graph_source('er:12,0.5,3')
    first = await experiments.run_sum_trees(g, 0.5, 4, 9, t=3)
    again = await experiments.run_sum_trees(g, 0.5, 4, 9, t=3)
    pool = TrialPool(jobs=2, kind='thread')
    try:
        threaded = await experiments.run_sum_trees(g, 0.5, 4, 9, t=3, pool=pool)
    finally:
        pool.shutdown()
    assert first.extremes == again.extremes == threaded.extremes


@pytest.mark.asyncio
async def test_sum_trees_trend():
    g = parse_graph_source('k:12')
    report = await experiments.run_sum_trees_trend(g, 0.5, 2, 10, 0)
    assert report.summary()['ts'] == [2, 4, 8]
    assert report.passed
    assert len(report.rows()) == 30


@pytest.mark.asyncio
async def test_multi_lower_single_clique():
    report = await experiments.run_multi_tree_lower(1, 4, 0.3, 10, 0, t=1, strict=False)
    assert report.exact_violation_probability == 1.0
    assert report.violation_fraction == 1.0
    assert report.passed
    summary = report.summary()
    assert summary['degree_role'] == 'clique_size'
    assert summary['leverage_method'] == 'dense'


@pytest.mark.asyncio
async def test_multi_lower_strict_window():
    with pytest.raises(ParameterError):
        await experiments.run_multi_tree_lower(1, 4, 0.3, 10, 0, t=1)
    with pytest.raises(ParameterError):
        await experiments.run_multi_tree_lower(2, 10, 1.5, 10, 0, strict=False)


@pytest.mark.asyncio
async def test_multi_lower_many_trees():
    report = await experiments.run_multi_tree_lower(2, 10, 0.3, 5, 0, t=200, strict=False)
    assert report.violation_fraction < 0.5
    assert report.exact_violation_probability is None


def test_exact_violation_probability():
    g = parse_graph_source('path:4')
    from treespark.lib.leverage import leverage_scores
    assert experiments.exact_violation_probability(g, leverage_scores(g), 0.1) == 0.0


@pytest.mark.asyncio
async def test_single_lower_triangles():
    report = await experiments.run_single_tree_lower(4, 3, 20, 0)
    assert all(d <= 2 for d in report.max_degrees)
    assert report.threshold == 1 + math.floor(math.log2(3))
    summary = report.summary()
    assert max(summary['half_max_degree']) <= 1


@pytest.mark.asyncio
async def test_single_lower_certificate():
    report = await experiments.run_single_tree_lower(1, 8, 20, 3, threshold=4)
    for d, ratio in report.certificates:
        assert ratio >= d / 2 - 1e-9
    assert 0 <= report.tail_pvalue <= 1
    assert report.union_envelope == pytest.approx(min(1.0, report.tail_union))


def test_star_certificate():
    g = parse_graph_source('cliquestar:2,6')
    lev = leverage_scores(g)
    d, ratio = experiments._star_certificate(g, lev, 4)
    tree = reweight_tree(WilsonSampler(g).sample(make_rng(4)), lev)
    degrees = tree.degrees()
    centre = 1 + int(np.argmax(degrees[1:]))
    assert d == degrees[centre]
    x = np.zeros(g.n)
    x[centre] = d
    for u, v in tree.endpoints:
        if centre in (u, v):
            x[v if u == centre else u] = -1.0
    L_T, L_G = tree.laplacian(), laplacian(g)
    assert ratio == pytest.approx((x @ L_T @ x) / (x @ L_G @ x))


@pytest.mark.asyncio
async def test_rank_tol_reaches_experiments():
    g = parse_graph_source('path:6')
    report = await experiments.run_single_tree_upper(g, 2, 0, rank_tol=1e-6)
    assert report.passed
    with pytest.raises(LeverageError):
        await experiments.run_single_tree_upper(g, 2, 0, rank_tol=0.5)
    with pytest.raises(LeverageError):
        await experiments.run_sum_trees(g, 0.5, 2, 0, t=2, rank_tol=0.5)
    with pytest.raises(LeverageError):
        await experiments.run_unweighted_thin_tree(g, 2, 0, rank_tol=0.5)


def test_default_degree_threshold():
    assert experiments.default_degree_threshold(3) == 2
    assert experiments.default_degree_threshold(8) == 4
    assert experiments.default_degree_threshold(100) == 7


@pytest.mark.parametrize('n', (3, 5, 7))
def test_exact_degree(n):
    report = experiments.exact_degree_distribution(n)
    assert report.passed
    assert sum(report.pmf) == 1
    assert report.pmf[0] == 0


def test_exact_degree_three():
    report = experiments.exact_degree_distribution(3)
    assert report.pmf == [Fraction(0), Fraction(2, 3), Fraction(1, 3)]


@pytest.mark.parametrize('n', (2, 8))
def test_exact_degree_range(n):
    with pytest.raises(ParameterError):
        experiments.exact_degree_distribution(n)


def test_reference_degree_pmf():
    pmf = experiments.reference_degree_pmf(10)
    assert pmf.sum() == pytest.approx(1.0)
    assert pmf[0] == 0
    assert pmf[1] == pytest.approx((9 / 10) ** 8)


@pytest.mark.asyncio
async def test_degree_dist():
    histogram = await experiments.run_degree_dist(6, 5000, 0)
    assert sum(histogram.counts) == 5000
    assert histogram.counts[0] == 0
    assert histogram.passed
    again = await experiments.run_degree_dist(6, 5000, 0)
    assert again.counts == histogram.counts


@pytest.mark.asyncio
@pytest.mark.parametrize('n, samples', ((2, 100), (5, 0)))
async def test_degree_dist_parameters(n, samples):
    with pytest.raises(ParameterError):
        await experiments.run_degree_dist(n, samples, 0)


@pytest.mark.asyncio
async def test_thin_tree():
    report = await experiments.run_unweighted_thin_tree(parse_graph_source('path:5'), 3, 0)
    assert all(hi == pytest.approx(1.0) for hi in report.lambda_maxes)
    assert report.max_leverage == pytest.approx(1.0)
    report = await experiments.run_unweighted_thin_tree(parse_graph_source('k:40'), 5, 0)
    assert report.passed
    assert report.envelope == pytest.approx(100 * (2 / 40) * math.log(40))


@pytest.mark.asyncio
async def test_thin_tree_weighted():
    g = WeightedGraph(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 1.0)])
    with pytest.raises(ParameterError):
        await experiments.run_unweighted_thin_tree(g, 3, 0)


@pytest.mark.slow
@pytest.mark.asyncio
async def test_single_tree_upper_k500():
    g = parse_graph_source('k:500')
    report = await experiments.run_single_tree_upper(g, 50, 0, median_gate=3.0)
    assert report.trials == 50
    assert report.passed
    assert report.median <= 3 * math.log(500)


@pytest.mark.slow
@pytest.mark.asyncio
async def test_sum_trees_k200():
    g = parse_graph_source('k:200')
    report = await experiments.run_sum_trees(g, 0.5, 10, 0, c_mult=1.0)
    assert report.t == 113
    assert report.pass_fraction >= 0.9
    assert report.passed


@pytest.mark.slow
@pytest.mark.asyncio
async def test_multi_lower_clique_star():
    report = await experiments.run_multi_tree_lower(100, 100, 0.4, 20, 0)
    assert report.t == math.floor(0.05 * math.log(9901) / 0.16)
    assert report.violation_fraction >= 0.95
    assert report.passed
    assert report.summary()['leverage_method'] == 'blockwise'


@pytest.mark.slow
@pytest.mark.asyncio
async def test_degree_dist_k50():
    histogram = await experiments.run_degree_dist(50, 200000, 0)
    assert histogram.tv_distance <= 0.01
    assert histogram.passed
    assert np.argmax(histogram.counts) in (1, 2)
