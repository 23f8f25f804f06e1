import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psode.bench import (
    FUNCTION_GROUP,
    FUNCTION_IDS,
    MissingData,
    RunRecord,
    ecdf,
    ert,
    ert_table,
    get_function,
    hitting_times,
    log_grid,
    rank_instances,
    rastrigin,
    schwefel,
    suite,
    targets,
)
from psode.core import make_rng


def rec(hits, total, instance="A", fid=1, run=0):
    hits = list(hits) + [None] * (10 - len(hits))
    return RunRecord(instance, fid, 2, run, 0, hits, total)


@pytest.mark.parametrize("dim", [2, 5, 20])
def test_suite_optimum_at_shift(dim):
    for fn in suite(dim):
        assert fn(fn.shift) == pytest.approx(0.0, abs=1e-9)
        assert np.all(np.abs(fn.shift) <= 4.0)
        # a nearby point is strictly worse
        assert fn(fn.shift + 0.1) > fn(fn.shift)


def test_suite_vectorised_matches_rows():
    X = make_rng(0).uniform(-5, 5, size=(7, 5))
    for fn in suite(5):
        assert np.allclose(fn(X), [fn(x) for x in X])


def test_rastrigin_hand_value():
    fn = get_function(7, 2)
    assert fn(fn.shift + np.array([1.0, 1.0])) == pytest.approx(2.0, abs=1e-9)
    assert rastrigin(np.zeros(3)) == 0.0


def test_schwefel_minimum():
    assert abs(schwefel(np.zeros(4))) < 1e-8
    assert schwefel(np.full(4, 0.5)) > 0


def test_groups_two_per_class():
    assert sorted(FUNCTION_GROUP.values()) == [1, 1, 2, 2, 3, 3, 4, 4, 5, 5]
    assert FUNCTION_IDS == tuple(range(1, 11))
    with pytest.raises(KeyError):
        get_function(11, 2)
    with pytest.raises(ValueError):
        suite(1)


def test_targets_strictly_decreasing():
    t = targets()
    assert t[0] == 10.0 and t[-1] == pytest.approx(1e-8)
    assert np.all(np.diff(t) < 0)
    assert targets(3.0)[0] == 13.0


@settings(max_examples=60)
@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=200))
def test_hitting_times_monotone(history):
    hits = hitting_times(history, targets())
    seen = [h for h in hits if h is not None]
    assert seen == sorted(seen)
    # once a target is missed, every harder one is missed too
    first_missing = next((k for k, h in enumerate(hits) if h is None), len(hits))
    assert all(h is None for h in hits[first_missing:])


def test_hitting_time_uses_inclusive_target():
    assert hitting_times([20.0, 10.0, 5.0], [10.0, 1.0]) == [2, None]


def test_ert_examples():
    assert ert([rec([100], 1000)] * 3, 0) == 100
    assert ert([rec([100], 1000), rec([], 1000)], 0) == 1100.0
    assert ert([rec([], 1000), rec([None], 500)], 0) == math.inf
    with pytest.raises(ValueError):
        ert([], 0)


def test_ert_table_keys():
    table = ert_table([rec([5, 9], 50), rec([7], 50, fid=2)])
    assert len(table) == 20
    assert table[("A", 1, 1)] == 9 and table[("A", 2, 1)] == math.inf


def _table(values):
    """``{instance: {(fid, t): ert}}`` to the flat table shape."""
    return {(i, f, t): v for i, cells in values.items() for (f, t), v in cells.items()}


def test_rank_dominance_and_ties():
    table = _table({"A": {(1, 0): 10.0, (1, 1): 20.0}, "B": {(1, 0): 30.0, (1, 1): 40.0}})
    assert rank_instances(table) == [("A", 1.0), ("B", 2.0)]
    tied = _table({"A": {(1, 0): 10.0}, "B": {(1, 0): 10.0}})
    assert rank_instances(tied) == [("A", 1.5), ("B", 1.5)]
    infs = _table({"A": {(1, 0): math.inf}, "B": {(1, 0): math.inf}, "C": {(1, 0): 3.0}})
    assert dict(rank_instances(infs)) == {"C": 1.0, "A": 2.5, "B": 2.5}


def brute_force_ranks(table):
    instances = sorted({k[0] for k in table})
    functions = sorted({k[1] for k in table})
    result = {}
    for inst in instances:
        per_f = []
        for f in functions:
            ts = sorted({k[2] for k in table if k[1] == f})
            ranks = []
            for t in ts:
                mine = table[(inst, f, t)]
                vals = [table[(o, f, t)] for o in instances]
                less = sum(v < mine for v in vals)
                equal = sum(v == mine for v in vals)
                ranks.append(less + (equal + 1) / 2)
            per_f.append(sum(ranks) / len(ranks))
        result[inst] = sum(per_f) / len(per_f)
    return result


values = st.sampled_from([1.0, 2.0, 5.0, 100.0, math.inf])


@settings(max_examples=100)
@given(st.lists(values, min_size=12, max_size=12))
def test_rank_matches_bruteforce(cells):
    it = iter(cells)
    table = {(i, f, t): next(it) for i in "ABC" for f in (1, 2) for t in (0, 1)}
    got = dict(rank_instances(table))
    want = brute_force_ranks(table)
    assert got.keys() == want.keys()
    for k in want:
        assert got[k] == pytest.approx(want[k])


@settings(max_examples=50)
@given(st.lists(st.floats(1, 1e6), min_size=8, max_size=8), st.sampled_from(["log", "sqrt", "affine"]))
def test_rank_invariant_under_monotone_transform(cells, kind):
    it = iter(cells)
    table = {(i, f, t): next(it) for i in "AB" for f in (1, 2) for t in (0, 1)}
    g = {"log": math.log, "sqrt": math.sqrt, "affine": lambda v: 3 * v + 7}[kind]
    transformed = {k: g(v) for k, v in table.items()}
    assert dict(rank_instances(table)) == pytest.approx(dict(rank_instances(transformed)))


def test_rank_missing_cell():
    table = _table({"A": {(1, 0): 1.0, (2, 0): 1.0}, "B": {(1, 0): 2.0}})
    with pytest.raises(MissingData):
        rank_instances(table)


def test_rank_single_instance():
    assert rank_instances(_table({"A": {(1, 0): 5.0, (2, 3): math.inf}})) == [("A", 1.0)]


def test_ecdf_examples():
    assert ecdf([rec([1] * 10, 100)], [0])[0][1] == 0.0
    assert ecdf([rec([1] * 10, 100)], [100])[0][1] == 1.0
    assert ecdf([rec([1, 2, 3, 4], 100)], [50])[0][1] == pytest.approx(0.4)
    with pytest.raises(ValueError):
        ecdf([], [1])


@settings(max_examples=60)
@given(st.lists(st.lists(st.one_of(st.none(), st.integers(1, 1000)), min_size=10, max_size=10),
                min_size=1, max_size=6))
def test_ecdf_bounded_and_monotone(all_hits):
    records = [rec(h, 1000, run=k) for k, h in enumerate(all_hits)]
    curve = ecdf(records, log_grid(1000, 30))
    fractions = [y for _, y in curve]
    assert all(0 <= y <= 1 for y in fractions)
    assert fractions == sorted(fractions)
    total = sum(h is not None for hits in all_hits for h in hits)
    assert fractions[-1] == pytest.approx(total / (10 * len(all_hits)))


def test_log_grid_spans_budget():
    grid = log_grid(5000, 20)
    assert grid[0] == 1.0 and grid[-1] == pytest.approx(5000)
    assert len(grid) == 20
