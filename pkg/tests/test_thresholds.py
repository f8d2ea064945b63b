import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import oracle_tune, random_instance
from polarkit.config import default_threshold_grid
from polarkit.thresholds import threshold_tie_key, tune_threshold, validate_grid

GRID = default_threshold_grid()


def test_default_grid():
    assert GRID == (0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7)


def test_perfect_separation_ties_to_half():
    choice = tune_threshold([0, 1], [0.1, 0.9])
    assert choice.threshold == 0.5
    assert choice.dev_f1 == 1.0
    assert set(choice.f1_by_threshold.values()) == {1.0}


def test_worked_example_picks_065():
    choice = tune_threshold([1, 1, 1, 0], [0.65, 0.72, 0.80, 0.60])
    assert choice.threshold == 0.65
    assert choice.dev_f1 == 1.0
    assert choice.f1_by_threshold[0.6] < 1.0
    assert choice.f1_by_threshold[0.7] < 1.0


def test_symmetric_tie_prefers_lower():
    # 0.3 and 0.7 are equally far from 0.5 even though the floats differ
    assert threshold_tie_key(0.3) < threshold_tie_key(0.7)
    assert threshold_tie_key(0.45) < threshold_tie_key(0.55)


def test_one_entry_per_grid_value():
    choice = tune_threshold([0, 1, 1], [0.2, 0.4, 0.9])
    assert list(choice.f1_by_threshold) == list(GRID)


@pytest.mark.parametrize("grid", [[], [0.5, 0.4], [0.5, 0.5], [-0.1, 0.5], [0.5, 1.2]])
def test_invalid_grid(grid):
    with pytest.raises(ValueError):
        validate_grid(grid)


def test_matches_exhaustive_scan():
    rng = random.Random(11)
    for _ in range(200):
        truth, probs, _ = random_instance(rng)
        t, f = oracle_tune(truth, probs, GRID)
        choice = tune_threshold(truth, probs)
        assert choice.threshold == t
        assert abs(choice.dev_f1 - float(f)) <= 1e-12


@given(st.lists(st.tuples(st.integers(0, 1), st.floats(0, 1)), min_size=1, max_size=40))
def test_optimality_and_range(rows):
    truth = [y for y, _ in rows]
    probs = [p for _, p in rows]
    choice = tune_threshold(truth, probs)
    assert 0.3 <= choice.threshold <= 0.7
    assert choice.dev_f1 == max(choice.f1_by_threshold.values())
    assert tune_threshold(truth, probs) == choice
