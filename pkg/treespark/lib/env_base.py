# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Base class for environment configuration and defaults.'''


from os import environ

from treespark.lib.util import class_logger

SEED_MODULUS = 1 << 64


class EnvBase(object):
    '''Wraps environment configuration.'''

    class Error(Exception):
        pass

    def __init__(self):
        self.logger = class_logger(__name__, self.__class__.__name__)
        self.loop_policy = self.event_loop_policy()

    @classmethod
    def default(cls, envvar, default):
        return environ.get(envvar, default)

    @classmethod
    def custom(cls, envvar, default, parse):
        value = environ.get(envvar)
        if value is None:
            return default
        try:
            return parse(value)
        except Exception as e:
            raise cls.Error('cannot parse envvar {} value {}'
                            .format(envvar, value)) from e

    @classmethod
    def integer(cls, envvar, default, *, minimum=None):
        value = cls.custom(envvar, default, int)
        if value is not None and minimum is not None and value < minimum:
            raise cls.Error(f'envvar {envvar} value {value} is below {minimum}')
        return value

    @classmethod
    def floating(cls, envvar, default, *, positive=False):
        value = cls.custom(envvar, default, float)
        if value is not None and positive and not value > 0:
            raise cls.Error(f'envvar {envvar} value {value} must be positive')
        return value

    @classmethod
    def choice(cls, envvar, default, choices):
        value = cls.default(envvar, default).strip().lower()
        if value not in choices:
            raise cls.Error(f'envvar {envvar} value {value} not one of '
                            f'{", ".join(sorted(choices))}')
        return value

    @classmethod
    def prng_seed(cls, envvar, default):
        '''A PRNG base seed.  Decimal or 0x-prefixed hex, reduced mod 2^64.'''
        value = cls.custom(envvar, default, lambda s: int(s.strip(), 0))
        if value < 0:
            raise cls.Error(f'envvar {envvar} seed {value} is negative')
        return value % SEED_MODULUS

    def event_loop_policy(self):
        policy = self.default('EVENT_LOOP_POLICY', None)
        if policy is None:
            return None
        if policy == 'uvloop':
            import uvloop
            return uvloop.EventLoopPolicy()
        raise self.Error('unknown event loop policy "{}"'.format(policy))
