import random
from collections import Counter

import pytest

from cases import check_mix_properties, check_split_properties
from conftest import make_dataset, make_pool
from polarkit.core import Dataset
from polarkit.errors import DataValidationError
from polarkit.split_mix import class_train_sizes, mix_synthetic, stratified_split, synth_target


def _counts(d):
    return Counter(d.labels)


def test_exact_proportions():
    d = make_dataset(100, pos_fraction=0.6)
    r = stratified_split(d, 0.8, seed=42)
    assert _counts(r.train) == {1: 48, 0: 32}
    assert _counts(r.validation) == {1: 12, 0: 8}


def test_remainder_rule():
    # floors 2 + 1; remainders 0.4 (class 1) vs 0.6 (class 0) -> class 0 gets the slot
    assert class_train_sizes({1: 3, 0: 2}, 0.8) == {1: 2, 0: 2}
    d = make_dataset(5, pos_fraction=0.6)
    r = stratified_split(d, 0.8)
    assert _counts(r.train) == {1: 2, 0: 2}


def test_equal_remainders_go_to_lower_label():
    assert class_train_sizes({0: 1, 1: 1}, 0.5) == {0: 1, 1: 0}


def test_split_is_deterministic_and_seed_sensitive():
    d = make_dataset(60)
    a = stratified_split(d, seed=42)
    b = stratified_split(d, seed=42)
    c = stratified_split(d, seed=43)
    assert a.train.ids == b.train.ids
    assert a.train.ids != c.train.ids


def test_split_keeps_input_order():
    d = make_dataset(30)
    r = stratified_split(d)
    pos = {i: k for k, i in enumerate(d.ids)}
    assert [pos[i] for i in r.train.ids] == sorted(pos[i] for i in r.train.ids)


def test_split_ignores_input_order():
    d = make_dataset(40)
    shuffled = Dataset(d.lang, tuple(reversed(d.samples)))
    assert set(stratified_split(d).train.ids) == set(stratified_split(shuffled).train.ids)


def test_split_rejects_synthetic_and_bad_ratio():
    d = make_dataset(10)
    mixed = Dataset("eng", d.samples + make_pool(2).samples)
    with pytest.raises(DataValidationError):
        stratified_split(mixed)
    for ratio in (0.0, 1.0, 1.5):
        with pytest.raises(DataValidationError):
            stratified_split(d, ratio)


def test_split_property_sweep():
    rng = random.Random(3)
    for k in range(100):
        n = rng.randint(2, 200)
        imbalance = rng.choice([1, 2, 4, 10])
        pos_fraction = 1 / (1 + imbalance) if k % 2 else imbalance / (1 + imbalance)
        d = make_dataset(n, pos_fraction=pos_fraction, seed=k)
        check_split_properties(d, rng.choice([0.5, 0.7, 0.8, 0.9]), seed=k)


@pytest.mark.parametrize("n_real, ratio, expected", [
    (700, 0.3, 300), (700, 0.0, 0), (500, 0.5, 500), (100, 0.1, 11), (100, 0.2, 25),
    (1, 0.5, 1), (0, 0.3, 0),
])
def test_synth_target(n_real, ratio, expected):
    assert synth_target(n_real, ratio) == expected


def test_mix_hits_target():
    train = make_dataset(700)
    pool = make_pool(1000)
    mixed, plan = mix_synthetic(train, pool, 0.3, seed=42)
    assert len(mixed) == 1000
    assert plan.n_synth_target == plan.n_synth_used == 300
    assert not plan.capped
    assert sum(s.is_synthetic for s in mixed) / len(mixed) == pytest.approx(0.3)
    assert mixed.samples[:700] == train.samples
    synth_ids = [s.id for s in mixed.samples[700:]]
    assert synth_ids == sorted(synth_ids)


def test_mix_zero_ratio_is_identity():
    train = make_dataset(50)
    mixed, plan = mix_synthetic(train, make_pool(20), 0.0)
    assert mixed == train
    assert plan.n_synth_used == 0


def test_mix_caps():
    mixed, plan = mix_synthetic(make_dataset(500), make_pool(400), 0.5)
    assert (plan.n_synth_target, plan.n_synth_used, plan.capped) == (500, 400, True)
    assert len(mixed) == 900


def test_mix_errors():
    train = make_dataset(10)
    with pytest.raises(DataValidationError):
        mix_synthetic(train, make_pool(5, lang="deu"), 0.3)
    with pytest.raises(DataValidationError):
        mix_synthetic(train, make_dataset(5, prefix="r"), 0.3)
    with pytest.raises(DataValidationError):
        mix_synthetic(train, make_pool(5), 1.0)


def test_mix_property_sweep():
    rng = random.Random(9)
    for k in range(100):
        train = make_dataset(rng.randint(0, 150), seed=k)
        pool = make_pool(rng.randint(0, 120), seed=k)
        check_mix_properties(train, pool, rng.choice([0.0, 0.1, 0.2, 0.3, 0.5]), seed=k)
