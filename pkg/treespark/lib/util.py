# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Miscellaneous utility classes and functions.'''

import hashlib
import logging
import math
from numbers import Integral, Real

import numpy as np

# Logging utilities


class CompactFormatter(logging.Formatter):
    '''Strips the module from the logger name to leave the class only.'''

    def format(self, record):
        record.name = record.name.rpartition('.')[-1]
        return super().format(record)


def make_logger(name, *, handler, level):
    '''Return the root treespark logger.'''
    logger = logging.getLogger(name)
    for old in list(logger.handlers):
        logger.removeHandler(old)
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger


def class_logger(path, classname):
    '''Return a hierarchical logger for a class.'''
    return logging.getLogger(path).getChild(classname)


# Method decorator.  To be used for calculations that will always
# deliver the same result.  The method cannot take any arguments
# and should be accessed as an attribute.
class cachedproperty(object):

    def __init__(self, f):
        self.f = f

    def __get__(self, obj, type_):
        obj = obj or type_
        value = self.f(obj)
        setattr(obj, self.f.__name__, value)
        return value


def formatted_time(t, sep=' '):
    '''Return a number of seconds as a string in days, hours, mins and
    maybe secs.'''
    t = int(t)
    fmts = (('{:d}d', 86400), ('{:02d}h', 3600), ('{:02d}m', 60))
    parts = []
    for fmt, n in fmts:
        val = t // n
        if parts or val:
            parts.append(fmt.format(val))
        t %= n
    if len(parts) < 3:
        parts.append('{:02d}s'.format(t))
    return sep.join(parts)


def chunk_counts(total, size):
    '''Split a count into consecutive chunk sizes, the last possibly short.'''
    if size <= 0:
        raise ValueError('chunk size must be positive')
    full, rest = divmod(total, size)
    return [size] * full + ([rest] if rest else [])


def logs_of(n):
    '''Return (ln n, log2 n).  Reports print both to avoid base confusion.'''
    return math.log(n), math.log2(n)


def digest(*parts):
    '''Short stable hex digest of the given byte strings.'''
    h = hashlib.sha256()
    for part in parts:
        h.update(part)
    return h.hexdigest()[:16]


def json_default(obj):
    '''json.dumps hook for numpy scalars and arrays.'''
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, Integral):
        return int(obj)
    if isinstance(obj, Real):
        return float(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f'{type(obj).__name__} is not JSON serializable')


def make_rng(seed):
    '''Return the Philox4x64 generator keyed by a non-negative integer seed.

    Philox is counter based, so a key fully determines the stream on every
    platform; trials use key = base_seed + trial_index.'''
    if seed < 0:
        raise ValueError(f'seed {seed} is negative')
    return np.random.Generator(np.random.Philox(key=int(seed) % (1 << 64)))
