# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Worker pool for independent seeded trials.'''

import asyncio
import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from functools import partial

from aiorpcx import TaskGroup

from treespark.lib.util import class_logger


class TrialPool:
    '''Fans independent trials out to worker processes or threads.

    Results are returned in argument order whatever the completion order,
    so every reduction over trials is deterministic.  With one job the
    trials run inline on the event loop thread.
    '''
    KINDS = ('process', 'thread')

    def __init__(self, jobs=None, kind='process'):
        if kind not in self.KINDS:
            raise ValueError(f'unknown executor kind "{kind}"')
        self.jobs = max(1, jobs or os.cpu_count() or 1)
        self.kind = kind
        self.logger = class_logger(__name__, self.__class__.__name__)
        self._executor = None

    def executor(self):
        if self._executor is None:
            if self.kind == 'process':
                self._executor = ProcessPoolExecutor(max_workers=self.jobs)
            else:
                self._executor = ThreadPoolExecutor(max_workers=self.jobs,
                                                    thread_name_prefix='Trial')
            self.logger.info(f'{self.jobs:,d} {self.kind} workers')
        return self._executor

    async def map(self, func, args_list):
        '''Return [func(*args) for args in args_list], computed by the workers.'''
        args_list = [tuple(args) for args in args_list]
        if self.jobs == 1 or len(args_list) <= 1:
            return [func(*args) for args in args_list]

        loop = asyncio.get_running_loop()
        executor = self.executor()

        async def run_one(args):
            return await loop.run_in_executor(executor, partial(func, *args))

        tasks = []
        async with TaskGroup() as group:
            for args in args_list:
                tasks.append(await group.spawn(run_one(args)))
        return [task.result() for task in tasks]

    def shutdown(self):
        if self._executor is not None:
            self._executor.shutdown(wait=False, cancel_futures=True)
            self._executor = None
