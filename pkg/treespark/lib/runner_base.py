# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Base class of command runners'''

import asyncio
import platform
import signal
import sys
import time
from functools import partial

from aiorpcx import spawn

from treespark.lib.trial_pool import TrialPool
from treespark.lib.util import class_logger, formatted_time

EXIT_INTERRUPTED = 130


class RunnerBase:
    '''Base class runner implementation.

    Derived classes are expected to implement the execute() coroutine,
    called from the run() method, which returns the process exit code.
    SIGINT and SIGTERM cancel execute(); the trial pool is always shut down.
    '''
    PYTHON_MIN_VERSION = (3, 9)

    def __init__(self, env):
        '''Save the environment, perform basic sanity checks, and set the
        event loop policy.
        '''
        # First asyncio operation must be to set the event loop policy
        # as this replaces the event loop
        asyncio.set_event_loop_policy(env.loop_policy)

        self.logger = class_logger(__name__, self.__class__.__name__)
        version_str = ' '.join(sys.version.splitlines())
        self.logger.debug(f'Python version: {version_str}')
        self.env = env
        self.start_time = 0
        self.pool = None

        if sys.version_info < self.PYTHON_MIN_VERSION:
            mvs = '.'.join(str(part) for part in self.PYTHON_MIN_VERSION)
            raise RuntimeError('Python version >= {} is required'.format(mvs))

    def trial_pool(self):
        return TrialPool(self.env.jobs, self.env.executor)

    async def execute(self):
        '''Override to provide the command.  Return an exit code.'''
        return 0

    async def run(self):
        '''Run the command:

        - record start time
        - create the trial pool
        - install SIGINT and SIGTERM handlers to cancel the command
        - await execute() and return its exit code
        '''
        def on_signal(signame):
            self.logger.warning(f'received {signame} signal, cancelling')
            task.cancel()

        self.start_time = time.time()
        loop = asyncio.get_running_loop()
        self.pool = self.trial_pool()

        task = await spawn(self.execute())
        if platform.system() != 'Windows':
            # No signals on Windows
            for signame in ('SIGINT', 'SIGTERM'):
                loop.add_signal_handler(getattr(signal, signame),
                                        partial(on_signal, signame))
        try:
            return await task
        except asyncio.CancelledError:
            self.logger.warning('command cancelled')
            return EXIT_INTERRUPTED
        finally:
            if platform.system() != 'Windows':
                for signame in ('SIGINT', 'SIGTERM'):
                    loop.remove_signal_handler(getattr(signal, signame))
            self.pool.shutdown()
            self.logger.info(f'finished in {formatted_time(time.time() - self.start_time)}')
