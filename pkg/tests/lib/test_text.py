import csv

from treespark.lib.graph import WeightedGraph, parse_graph_source
from treespark.lib.leverage import leverage_scores
from treespark.lib.text import leverage_lines, tree_lines, trial_lines, write_csv
from treespark.lib.treesample import sample_tree_wilson


def test_tree_lines():
    g = parse_graph_source('path:3')
    trees = [sample_tree_wilson(g, seed) for seed in range(2)]
    assert list(tree_lines(trees)) == ['3; 0 1; 1 1'] * 2


def test_leverage_lines():
    g = WeightedGraph(3, [(0, 1, 2.0), (1, 2, 1.0)])
    lines = list(leverage_lines(g, leverage_scores(g)))
    assert [line.split()[:4] for line in lines] == [['0', '0', '1', '2'], ['1', '1', '2', '1']]
    assert all(abs(float(line.split()[4]) - 1) < 1e-12 for line in lines)


def test_trial_lines():
    rows = [{'trial': 0, 'seed': 1000, 'lambda_max': 1.5, 'passed': True},
            {'trial': 1, 'seed': 1001, 'lambda_max': 12.25, 'passed': False}]
    lines = list(trial_lines(rows))
    assert len(lines) == 3
    assert lines[0].split() == ['trial', 'seed', 'lambda_max', 'passed']
    assert lines[1].split() == ['0', '1,000', '1.5', 'yes']
    assert lines[2].split() == ['1', '1,001', '12.25', 'no']
    assert len({len(line) for line in lines}) == 1
    assert list(trial_lines([])) == []


def test_write_csv(tmpdir):
    rows = [{'trial': 0, 'value': 0.5}, {'trial': 1, 'value': 2.0}]
    path = str(tmpdir.join('trials.csv'))
    write_csv(rows, path)
    with open(path, newline='') as f:
        back = list(csv.DictReader(f))
    assert back == [{'trial': '0', 'value': '0.5'}, {'trial': '1', 'value': '2.0'}]
    empty = str(tmpdir.join('empty.csv'))
    write_csv([], empty)
    with open(empty) as f:
        assert f.read() == ''
