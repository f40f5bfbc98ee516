# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Versioned JSON report envelopes.'''

import json
import time

import treespark
from treespark.lib.util import json_default

SCHEMA_VERSION = 1


def envelope(kind, result, config, started, passed):
    '''Wrap a result summary with its provenance.'''
    return {
        'schema_version': SCHEMA_VERSION,
        'kind': kind,
        'version': treespark.version,
        'config': config.as_dict(),
        'started': started,
        'wall_clock': time.time() - started,
        'passed': bool(passed),
        'result': result,
    }


def dumps(report):
    return json.dumps(report, default=json_default, indent=2, sort_keys=True)


def write_report(report, path=None, stream=None):
    '''Write the report as JSON to path, else to stream.'''
    text = dumps(report) + '\n'
    if path:
        with open(path, 'w') as f:
            f.write(text)
    else:
        stream.write(text)
