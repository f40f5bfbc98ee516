# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Command-line interface.

Exit codes: 0 pass, 1 gate failed, 2 usage, 3 graph invalid, 4 size guard,
130 interrupted.
'''

import argparse
import asyncio
import logging
import sys

import treespark
from treespark.bench.controller import EXIT_USAGE, Controller
from treespark.bench.env import Env, RunConfig
from treespark.lib.env_base import EnvBase
from treespark.lib.util import CompactFormatter, make_logger


def _common():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--seed', type=lambda s: int(s, 0), default=None,
                        help='base PRNG seed (default: TREESPARK_SEED or 0)')
    parser.add_argument('--json', action='store_true',
                        help='machine-readable output only')
    parser.add_argument('--out', metavar='PATH', default=None,
                        help='write output to PATH instead of stdout')
    parser.add_argument('--jobs', type=int, default=None,
                        help='worker count (default: TREESPARK_JOBS or cores)')
    return parser


def _graph(parser, required=True):
    parser.add_argument('--graph', required=required, metavar='SOURCE',
                        help='graph file, or k:n, ring:n, path:n, cliquestar:L,s, er:n,p[,seed]')


def _trials(parser, default):
    parser.add_argument('--trials', type=int, default=default,
                        help=f'trial count (default: {default})')
    parser.add_argument('--csv', metavar='PATH', default=None,
                        help='write per-trial rows to PATH')


def _sum_trees_args(parser):
    parser.add_argument('--eps', type=float, required=True)
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument('--cmult', type=float, help='t = ceil(cmult eps^-2 (ln n)^2)')
    group.add_argument('--t', type=int, help='tree count')


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        'treespark', description='Random spanning tree sparsifiers and their '
        'concentration diagnostics')
    parser.add_argument('--version', action='version', version=treespark.version)
    commands = parser.add_subparsers(dest='command', required=True)

    sub = commands.add_parser('sample', parents=[common], help='sample spanning trees')
    _graph(sub)
    sub.add_argument('--count', type=int, default=1)
    sub.add_argument('--reweight', action='store_true',
                     help='inverse-leverage edge weights')

    sub = commands.add_parser('certify', parents=[common],
                              help='check averaged trees against (1 +- eps) L_G')
    _graph(sub)
    _trials(sub, 10)
    _sum_trees_args(sub)

    sub = commands.add_parser('leverage', parents=[common], help='print leverage scores')
    _graph(sub)

    diag = commands.add_parser('diag', help='diagnostic suites')
    suites = diag.add_subparsers(dest='suite', required=True)
    sub = suites.add_parser('marginals', parents=[common])
    _graph(sub)
    sub = suites.add_parser('martingale', parents=[common])
    _graph(sub)
    sub.add_argument('--seeds', type=int, default=10, help='number of traces')
    sub.add_argument('--trace', metavar='PATH', default=None,
                     help='write per-step trace lines to PATH')
    sub.add_argument('--csv', metavar='PATH', default=None)
    sub = suites.add_parser('reverse-chernoff', parents=[common])
    sub.add_argument('--grid', choices=('default',), default='default')
    sub.add_argument('--k', type=int)
    sub.add_argument('--p', type=float)
    sub.add_argument('--eps', type=float)
    sub = suites.add_parser('stirling', parents=[common])
    sub.add_argument('--kmax', type=int, default=60)
    sub = suites.add_parser('matrix-fact', parents=[common])
    sub.add_argument('--pairs', type=int, default=1000)
    sub.add_argument('--dim', type=int, default=16)
    sub = suites.add_parser('tail', parents=[common])
    _graph(sub)
    sub.add_argument('--eps', type=float, default=0.5)
    sub.add_argument('--samples', type=int, default=2000)

    run = commands.add_parser('run', help='experiments')
    experiments = run.add_subparsers(dest='experiment', required=True)
    sub = experiments.add_parser('single-upper', parents=[common])
    _graph(sub)
    _trials(sub, 50)
    sub.add_argument('--median-gate', type=float, default=None,
                     help='also require median lambda_max <= GATE * ln n')
    sub = experiments.add_parser('sum-trees', parents=[common])
    _graph(sub)
    _trials(sub, 10)
    _sum_trees_args(sub)
    sub = experiments.add_parser('trend', parents=[common])
    _graph(sub)
    _trials(sub, 10)
    sub.add_argument('--eps', type=float, required=True)
    sub.add_argument('--t0', type=int, required=True)
    sub = experiments.add_parser('multi-lower', parents=[common])
    _trials(sub, 20)
    sub.add_argument('--cliques', type=int, required=True)
    sub.add_argument('--size', type=int, required=True)
    sub.add_argument('--eps', type=float, required=True)
    sub.add_argument('--t', type=int, default=None)
    sub.add_argument('--no-strict', dest='strict', action='store_false',
                     help='run outside the eps window (5/s, 1/2)')
    sub = experiments.add_parser('single-lower', parents=[common])
    _trials(sub, 200)
    sub.add_argument('--cliques', type=int, required=True)
    sub.add_argument('--size', type=int, required=True)
    sub.add_argument('--threshold', type=int, default=None)
    sub = experiments.add_parser('degree', parents=[common])
    _trials(sub, None)
    sub.add_argument('--n', type=int, required=True)
    sub.add_argument('--samples', type=int, default=200000)
    sub.add_argument('--exact', action='store_true', help='enumerate every tree (n <= 7)')
    sub = experiments.add_parser('thin-tree', parents=[common])
    _graph(sub)
    _trials(sub, 50)
    return parser


def main(argv=None):
    '''Parse arguments, set up logging and run the command.  Returns the
    exit code.'''
    args = build_parser().parse_args(argv)
    try:
        env = Env()
        config = RunConfig.from_args(env, args)
    except EnvBase.Error as e:
        print(f'treespark: {e}', file=sys.stderr)
        return EXIT_USAGE

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(CompactFormatter(env.log_format))
    make_logger('treespark', handler=handler,
                level='WARNING' if args.json else env.log_level)

    logger = logging.getLogger('treespark')
    logger.info(f'{treespark.version}: {config.command} seed {config.seed}')
    controller = Controller(env, config, args)
    return asyncio.run(controller.run())
