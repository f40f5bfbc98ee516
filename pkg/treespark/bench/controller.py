# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Runs one command and maps its outcome onto the exit codes.'''

import sys

from treespark.bench import experiments, report, srdiag
from treespark.lib.env_base import EnvBase
from treespark.lib.graph import DisconnectedGraphError, GraphError, parse_graph_source
from treespark.lib.leverage import LeverageError, leverage_scores
from treespark.lib.runner_base import RunnerBase
from treespark.lib.spectral import DEFAULT_PSD_TOL, SpectralError
from treespark.lib.text import (leverage_lines, trace_lines, tree_lines, trial_lines,
                                write_csv)
from treespark.lib.treesample import (SamplingError, SizeGuardError, WilsonSampler,
                                      reweight_tree)
from treespark.lib.trial_pool import TrialPool
from treespark.lib.util import make_rng

EXIT_PASS = 0
EXIT_GATE = 1
EXIT_USAGE = 2
EXIT_GRAPH = 3
EXIT_SIZE = 4


def martingale_record(g, seed, rank_tol=None, psd_tol=DEFAULT_PSD_TOL):
    '''(summary, trace lines) of the exact trace for one seed.'''
    trace = srdiag.martingale_trace(g, seed, rank_tol=rank_tol, psd_tol=psd_tol)
    return trace.summary(), list(trace_lines(trace))


class Controller(RunnerBase):
    '''Runs the command named by a RunConfig.

    Every report goes to stdout, or to the --out path, as one JSON document.
    '''

    def __init__(self, env, config, args, stdout=None):
        super().__init__(env)
        self.config = config
        self.args = args
        self.stdout = stdout or sys.stdout
        self.json_only = bool(getattr(args, 'json', False))

    def trial_pool(self):
        return TrialPool(self.config.jobs, self.config.executor)

    async def execute(self):
        try:
            return await self.dispatch()
        except DisconnectedGraphError as e:
            self.logger.error(f'graph invalid: {e}')
            return EXIT_GRAPH
        except SizeGuardError as e:
            self.logger.error(f'size guard: {e}')
            return EXIT_SIZE
        except srdiag.MartingaleInvariantError as e:
            self.logger.error(f'martingale invariant failed: {e}')
            return EXIT_GATE
        except (GraphError, LeverageError, SamplingError, SpectralError,
                srdiag.DiagnosticError, experiments.ExperimentError, EnvBase.Error,
                OSError) as e:
            self.logger.error(f'{e}')
            return EXIT_USAGE

    async def dispatch(self):
        command = self.args.command
        if command == 'sample':
            return self.sample()
        if command == 'leverage':
            return self.leverage()
        if command == 'certify':
            return await self.run_experiment('sum-trees')
        if command == 'diag':
            return await self.diag(self.args.suite)
        return await self.run_experiment(self.args.experiment)

    def graph(self):
        g = parse_graph_source(self.config.graph)
        self.logger.info(f'{g.name}: {g.n:,d} vertices, {g.m:,d} edges')
        return g

    def output(self, lines):
        text = ''.join(line + '\n' for line in lines)
        if self.config.out:
            with open(self.config.out, 'w') as f:
                f.write(text)
        else:
            self.stdout.write(text)

    def emit(self, kind, result, passed, rows=None):
        '''Write the JSON report and the optional CSV; return the exit code.'''
        envelope = report.envelope(kind, result, self.config, self.start_time, passed)
        report.write_report(envelope, self.config.out, self.stdout)
        if rows is not None and self.config.csv:
            write_csv(rows, self.config.csv)
        if rows and not self.json_only:
            for line in trial_lines(rows):
                self.logger.info(line)
        self.logger.info(f'{kind}: {"pass" if passed else "FAIL"}')
        return EXIT_PASS if passed else EXIT_GATE

    # Commands

    def sample(self):
        g = self.graph()
        sampler = WilsonSampler(g)
        trees = [sampler.sample(make_rng(self.config.seed + i))
                 for i in range(self.args.count)]
        if self.args.reweight:
            lev = leverage_scores(g, dense_limit=self.config.dense_limit,
                              rank_tol=self.config.rank_tol)
            trees = [reweight_tree(tree, lev) for tree in trees]
        self.output(tree_lines(trees))
        return EXIT_PASS

    def leverage(self):
        g = self.graph()
        lev = leverage_scores(g, dense_limit=self.config.dense_limit,
                              rank_tol=self.config.rank_tol)
        self.logger.info(f'sum of leverage scores {lev.total:.12g}, n - 1 = {g.n - 1:,d}')
        self.output(leverage_lines(g, lev))
        return EXIT_PASS

    async def diag(self, suite):
        args = self.args
        if suite == 'marginals':
            result = srdiag.shrinking_marginals_suite(self.graph(),
                                                      rank_tol=self.config.rank_tol)
            return self.emit('diag.marginals', result.summary(), result.passed)
        if suite == 'martingale':
            return await self.martingale()
        if suite == 'reverse-chernoff':
            if None not in (args.k, args.p, args.eps):
                result = srdiag.reverse_chernoff(args.k, args.p, args.eps)
                summary = {'k': result.k, 'p': result.p, 'eps': result.eps,
                           'log_floor': result.log_floor,
                           'log_upper_tail': result.log_upper_tail,
                           'log_lower_tail': result.log_lower_tail, 'passed': result.holds}
                return self.emit('diag.reverse_chernoff', summary, result.holds)
            result = srdiag.reverse_chernoff_grid()
            return self.emit('diag.reverse_chernoff', result.summary(), result.passed)
        if suite == 'stirling':
            result = srdiag.stirling_grid(args.kmax)
            return self.emit('diag.stirling', result.summary(), result.passed)
        if suite == 'matrix-fact':
            result = srdiag.matrix_fact_suite(args.pairs, args.dim, self.config.seed,
                                              self.config.psd_tol)
            return self.emit('diag.matrix_fact', result.summary(), result.passed)
        if suite == 'tail':
            result = srdiag.tail_dominance_probe(self.graph(), args.eps, args.samples,
                                                 self.config.seed,
                                                 rank_tol=self.config.rank_tol)
            # Recorded only: the envelope constant is unspecified
            return self.emit('diag.tail', result.summary(), True)
        raise experiments.ParameterError(f'unknown diagnostic suite "{suite}"')

    async def martingale(self):
        g = self.graph()
        seeds = [self.config.seed + i for i in range(self.args.seeds)]
        tols = (self.config.rank_tol, self.config.psd_tol)
        records = await self.pool.map(martingale_record, [(g, seed, *tols) for seed in seeds])
        summaries = [summary for summary, _lines in records]
        if self.args.trace:
            with open(self.args.trace, 'w') as f:
                for summary, lines in records:
                    f.write(f'# seed {summary["seed"]}\n')
                    f.writelines(line + '\n' for line in lines)
        checks = ('step_variance_ok', 'quadratic_variation_ok', 'bounded_differences_ok')
        passed = all(summary[check] for summary in summaries for check in checks)
        result = {'graph': g.name, 'traces': len(summaries), 'summaries': summaries}
        rows = [{'seed': s['seed'], 'max_X_norm': s['max_X_norm'],
                 'final_W_norm': s['final_W_norm'],
                 'max_zero_mean_residual': s['max_zero_mean_residual']}
                for s in summaries]
        return self.emit('diag.martingale', result, passed, rows)

    async def run_experiment(self, name):
        args, config = self.args, self.config
        common = {'pool': self.pool}
        if name != 'degree':
            common['dense_limit'] = config.dense_limit
            common['rank_tol'] = config.rank_tol
        if name == 'single-upper':
            result = await experiments.run_single_tree_upper(
                self.graph(), config.trials, config.seed, median_gate=args.median_gate,
                **common)
        elif name == 'sum-trees':
            result = await experiments.run_sum_trees(
                self.graph(), args.eps, config.trials, config.seed, c_mult=args.cmult,
                t=args.t, **common)
        elif name == 'trend':
            result = await experiments.run_sum_trees_trend(
                self.graph(), args.eps, args.t0, config.trials, config.seed, **common)
        elif name == 'multi-lower':
            result = await experiments.run_multi_tree_lower(
                args.cliques, args.size, args.eps, config.trials, config.seed, t=args.t,
                strict=args.strict, **common)
        elif name == 'single-lower':
            result = await experiments.run_single_tree_lower(
                args.cliques, args.size, config.trials, config.seed,
                threshold=args.threshold, **common)
        elif name == 'degree':
            if args.exact:
                result = experiments.exact_degree_distribution(args.n)
            else:
                result = await experiments.run_degree_dist(args.n, args.samples,
                                                           config.seed, **common)
        elif name == 'thin-tree':
            result = await experiments.run_unweighted_thin_tree(
                self.graph(), config.trials, config.seed, **common)
        else:
            raise experiments.ParameterError(f'unknown experiment "{name}"')
        kind = 'run.' + name.replace('-', '_')
        return self.emit(kind, result.summary(), result.passed, result.rows())

