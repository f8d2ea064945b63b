import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import oracle_macro_f1
from polarkit.errors import DataValidationError
from polarkit.metrics import apply_threshold, macro_f1


def test_apply_threshold_inclusive():
    assert apply_threshold([0.2, 0.5, 0.7], 0.5) == [0, 1, 1]
    assert apply_threshold([0.2, 0.5, 0.7], 0.7) == [0, 0, 1]
    assert apply_threshold([0.0, 0.3, 1.0], 0.0) == [1, 1, 1]


def test_apply_threshold_rejects_out_of_range():
    with pytest.raises(ValueError):
        apply_threshold([0.5], 1.5)


def test_macro_f1_worked_example():
    # class 1: TP=1 FN=1 FP=0 -> 2/3; class 0: TP=2 FP=1 FN=0 -> 0.8
    r = macro_f1([1, 1, 0, 0], [1, 0, 0, 0])
    assert r.f1[1] == pytest.approx(2 / 3, abs=1e-12)
    assert r.f1[0] == pytest.approx(0.8, abs=1e-12)
    assert r.macro_f1 == pytest.approx(0.733333, abs=1e-6)


def test_macro_f1_perfect():
    assert macro_f1([0, 1, 1, 0], [0, 1, 1, 0]).macro_f1 == 1.0


def test_macro_f1_no_predicted_negatives():
    r = macro_f1([1, 0], [1, 1])
    assert r.f1 == pytest.approx((0.0, 2 / 3))
    assert r.macro_f1 == pytest.approx(1 / 3, abs=1e-12)


def test_macro_f1_single_class_truth_still_averages_both():
    r = macro_f1([1, 1, 1], [1, 1, 1])
    assert r.f1 == (0.0, 1.0)
    assert r.macro_f1 == 0.5


def test_macro_f1_errors():
    with pytest.raises(DataValidationError):
        macro_f1([1, 0], [1])
    with pytest.raises(DataValidationError):
        macro_f1([], [])


def test_matches_oracle_on_random_instances():
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(1, 50)
        truth = [rng.randint(0, 1) for _ in range(n)]
        pred = [rng.randint(0, 1) for _ in range(n)]
        expected, per_class = oracle_macro_f1(truth, pred)
        r = macro_f1(truth, pred)
        assert abs(r.macro_f1 - float(expected)) <= 1e-12
        assert abs(r.f1[0] - float(per_class[0])) <= 1e-12
        assert abs(r.f1[1] - float(per_class[1])) <= 1e-12


pairs = st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=50)


@given(pairs, st.randoms(use_true_random=False))
def test_permutation_invariance(data, rnd):
    shuffled = list(data)
    rnd.shuffle(shuffled)
    a = macro_f1([y for y, _ in data], [p for _, p in data]).macro_f1
    b = macro_f1([y for y, _ in shuffled], [p for _, p in shuffled]).macro_f1
    assert a == pytest.approx(b, abs=1e-12)


@given(pairs)
def test_range_and_perfect_iff(data):
    truth = [y for y, _ in data]
    pred = [p for _, p in data]
    m = macro_f1(truth, pred).macro_f1
    assert 0.0 <= m <= 1.0
    # both classes always count, so 1.0 needs both present in the truth
    if len(set(truth)) == 2:
        assert (m == 1.0) == (truth == pred)
    else:
        assert m <= 0.5


@given(pairs, st.integers(0, 49))
def test_breaking_a_correct_prediction_never_helps(data, k):
    truth = [y for y, _ in data]
    pred = list(truth)
    k %= len(truth)
    worse = list(pred)
    worse[k] = 1 - worse[k]
    assert macro_f1(truth, worse).macro_f1 <= macro_f1(truth, pred).macro_f1


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(0, 1), st.floats(0, 1))
def test_threshold_antitone(probs, t1, t2):
    lo, hi = sorted((t1, t2))
    a, b = apply_threshold(probs, lo), apply_threshold(probs, hi)
    assert all(x >= y for x, y in zip(a, b))
