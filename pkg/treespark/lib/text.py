# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Text renderings of trees, traces and per-trial tables.'''

import csv


def tree_lines(trees):
    '''A generator returning the "n; edge ids; weights" line of each tree.'''
    for tree in trees:
        yield tree.to_line()


def trace_lines(trace):
    '''A generator returning "i ||X_i|| ||W_i|| bound_i" for each step of a
    martingale trace, bound_i being the step variance bound.'''
    for i in range(1, trace.k + 1):
        yield (f'{i} {trace.X_norms[i - 1]:.12g} {trace.W_norms[i - 1]:.12g} '
               f'{trace.variance_bound(i):.12g}')


def leverage_lines(g, lev):
    '''A generator returning "e u v w l_e" for each edge.'''
    for e, (u, v, w) in enumerate(g.edges):
        yield f'{e} {u} {v} {w:.17g} {lev[e]:.17g}'


def trial_lines(rows):
    '''A generator returning an aligned table of per-trial rows.

    rows is the return value of a report's rows() method.'''
    if not rows:
        return
    columns = list(rows[0])

    def cell(value):
        if isinstance(value, bool):
            return 'yes' if value else 'no'
        if isinstance(value, float):
            return f'{value:.6g}'
        if isinstance(value, int):
            return f'{value:,d}'
        return str(value)

    cells = [[cell(row[column]) for column in columns] for row in rows]
    widths = [max(len(column), *(len(line[i]) for line in cells))
              for i, column in enumerate(columns)]
    fmt = ' '.join(f'{{:>{width}}}' for width in widths)
    yield fmt.format(*columns)
    for line in cells:
        yield fmt.format(*line)


def write_csv(rows, path):
    '''Write per-trial rows to path as CSV with a header line.'''
    with open(path, 'w', newline='') as f:
        if not rows:
            return
        writer = csv.DictWriter(f, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
