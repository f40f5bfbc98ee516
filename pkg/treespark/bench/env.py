# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Class for handling environment configuration and defaults.'''


import os
from dataclasses import asdict, dataclass, field
from typing import Optional

from treespark.lib.env_base import EnvBase
from treespark.lib.leverage import DENSE_VERTEX_LIMIT
from treespark.lib.spectral import DEFAULT_PSD_TOL
from treespark.lib.trial_pool import TrialPool


class Env(EnvBase):
    '''Wraps environment configuration.  Command-line flags override these
    through RunConfig.'''

    LOG_LEVELS = ('debug', 'info', 'warning', 'error', 'critical')

    def __init__(self):
        super().__init__()

        # Reproducibility

        self.seed = self.prng_seed('TREESPARK_SEED', 0)

        # Workers

        self.jobs = self.integer('TREESPARK_JOBS', os.cpu_count() or 1, minimum=1)
        self.executor = self.choice('TREESPARK_EXECUTOR', 'process', TrialPool.KINDS)

        # Logging

        self.log_level = self.choice('LOG_LEVEL', 'info', self.LOG_LEVELS).upper()
        self.log_format = self.default('LOG_FORMAT', '%(levelname)s:%(name)s:%(message)s')

        # Numerics

        self.psd_tol = self.floating('PSD_TOL', DEFAULT_PSD_TOL, positive=True)
        self.rank_tol = self.floating('RANK_TOL', None, positive=True)
        self.dense_limit = self.integer('DENSE_VERTEX_LIMIT', DENSE_VERTEX_LIMIT, minimum=2)


@dataclass(frozen=True)
class RunConfig:
    '''Everything that determines a run.  Embedded verbatim in its report.'''
    command: str
    seed: int
    graph: Optional[str] = None
    trials: Optional[int] = None
    params: dict = field(default_factory=dict)
    out: Optional[str] = None
    csv: Optional[str] = None
    jobs: int = 1
    executor: str = 'process'
    psd_tol: float = DEFAULT_PSD_TOL
    rank_tol: Optional[float] = None
    dense_limit: int = DENSE_VERTEX_LIMIT

    # Arguments that are not parameters of the run itself
    NON_PARAMS = frozenset(('command', 'suite', 'experiment', 'seed', 'graph', 'trials',
                            'out', 'csv', 'jobs', 'json', 'func'))

    @classmethod
    def from_args(cls, env, args):
        '''Env defaults overridden by parsed command-line arguments.'''
        command = ' '.join(part for part in (args.command, getattr(args, 'suite', None),
                                             getattr(args, 'experiment', None)) if part)
        params = {key: value for key, value in sorted(vars(args).items())
                  if key not in cls.NON_PARAMS and value is not None}
        seed = env.seed if args.seed is None else args.seed
        if seed < 0:
            raise EnvBase.Error(f'seed {seed} is negative')
        return cls(command=command, seed=seed, graph=getattr(args, 'graph', None),
                   trials=getattr(args, 'trials', None), params=params,
                   out=args.out, csv=getattr(args, 'csv', None),
                   jobs=args.jobs or env.jobs, executor=env.executor,
                   psd_tol=env.psd_tol, rank_tol=env.rank_tol,
                   dense_limit=env.dense_limit)

    def as_dict(self):
        return asdict(self)
