import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import oracle_select, random_instance
from polarkit.config import RunConfig
from polarkit.ensemble import (
    StrategyId,
    TunedDecision,
    candidate_strategies,
    combine_average,
    combine_weighted,
    read_decisions,
    select_strategy,
    write_decisions,
)
from polarkit.errors import DataValidationError
from polarkit.rng import SplitMix64

CFG = RunConfig()


def test_combine_examples():
    assert combine_average([0.8], [0.4]) == pytest.approx([0.6])
    assert combine_average([0.0], [1.0]) == [0.5]
    assert combine_average([0.3, 0.9], [0.3, 0.9]) == [0.3, 0.9]
    assert combine_weighted([0.8], [0.4], 0.3) == pytest.approx([0.52])
    assert combine_weighted([0.8, 0.1], [0.4, 0.6], 1.0) == [0.8, 0.1]
    assert combine_weighted([0.8, 0.1], [0.4, 0.6], 0.5) == combine_average([0.8, 0.1], [0.4, 0.6])


def test_combine_errors():
    with pytest.raises(DataValidationError):
        combine_average([0.1], [0.1, 0.2])
    with pytest.raises(ValueError):
        combine_weighted([0.1], [0.2], 1.5)


probs = st.lists(st.floats(0, 1), min_size=1, max_size=20)


@given(probs, st.data(), st.floats(0, 1))
def test_closure_and_symmetry(pa, data, w):
    pb = data.draw(st.lists(st.floats(0, 1), min_size=len(pa), max_size=len(pa)))
    avg = combine_average(pa, pb)
    assert avg == combine_average(pb, pa)
    assert all(0.0 <= p <= 1.0 for p in avg)
    ab = combine_weighted(pa, pb, w)
    ba = combine_weighted(pb, pa, 1 - w)
    assert all(0.0 <= p <= 1.0 for p in ab)
    assert ab == pytest.approx(ba, abs=1e-12)


def test_candidate_order():
    names = [str(s) for s in candidate_strategies(CFG.weight_grid)]
    assert names == ["model_a_tuned", "model_b_tuned", "average",
                     "weighted(0.4)", "weighted(0.6)", "weighted(0.3)", "weighted(0.7)"]


def test_strategy_id_validation():
    with pytest.raises(ValueError):
        StrategyId("weighted")
    with pytest.raises(ValueError):
        StrategyId("average", 0.4)
    with pytest.raises(ValueError):
        StrategyId("stacking")


def test_dominant_model_a():
    truth = [0, 1, 0, 1, 1, 0]
    pa = [0.1, 0.9, 0.2, 0.8, 0.95, 0.05]
    pb = [0.5] * 6
    d = select_strategy(truth, pa, pb, lang="eng")
    assert d.strategy == StrategyId("model_a_tuned")
    assert d.dev_f1 == 1.0
    assert len(d.candidate_table) == 7
    assert d.dev_f1 == max(c.dev_f1 for c in d.candidate_table)


def test_seed42_noise_fixture_matches_oracle():
    rng = SplitMix64.keyed(42, "ensemble-fixture")
    truth = [i % 2 for i in range(12)]
    pa = [min(1.0, max(0.0, 0.5 + (0.25 if y else -0.25) + (rng.random() - 0.5) * 0.6)) for y in truth]
    pb = [min(1.0, max(0.0, 0.5 + (0.25 if y else -0.25) + (rng.random() - 0.5) * 0.6)) for y in truth]
    kind, w, t, f = oracle_select(truth, pa, pb, CFG.threshold_grid, CFG.weight_grid)
    d = select_strategy(truth, pa, pb, CFG)
    assert (d.strategy.kind, d.strategy.weight, d.threshold) == (kind, w, t)
    assert abs(d.dev_f1 - float(f)) <= 1e-12


def test_matches_exhaustive_scan():
    rng = random.Random(5)
    for _ in range(60):
        truth, pa, pb = random_instance(rng, n_max=25)
        kind, w, t, f = oracle_select(truth, pa, pb, CFG.threshold_grid, CFG.weight_grid)
        d = select_strategy(truth, pa, pb, CFG)
        assert (d.strategy.kind, d.strategy.weight, d.threshold) == (kind, w, t)


def test_all_tied_prefers_model_a_at_half():
    truth = [0, 1]
    d = select_strategy(truth, [0.1, 0.9], [0.1, 0.9])
    assert d.strategy.kind == "model_a_tuned"
    assert d.threshold == 0.5


def test_decision_file_round_trip(tmp_path):
    decisions = [
        TunedDecision("amh", StrategyId("weighted", 0.4), 0.45, 0.8),
        TunedDecision("khm", StrategyId("model_b_tuned"), 0.7, None),
    ]
    p = tmp_path / "dec.jsonl"
    write_decisions(decisions, p)
    assert read_decisions(p) == decisions
    assert '"weight"' not in p.read_text().splitlines()[1]


def test_bad_decision_record(tmp_path):
    p = tmp_path / "dec.jsonl"
    p.write_text('{"lang": "amh", "strategy": "weighted", "threshold": 0.5}\n')
    with pytest.raises(DataValidationError):
        read_decisions(p)
