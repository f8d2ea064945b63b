"""Fixture tables shared by the unit suites and the acceptance suite."""

from collections import Counter

from polarkit.errors import ContrastiveFormatError
from polarkit.split_mix import mix_synthetic, stratified_split, synth_target

# (completion, expected pair or expected error substring)
CONTRASTIVE_CASES = [
    ("POLARIZED: They ruin everything here.\nNON_POLARIZED: Opinions on this differ.",
     ("They ruin everything here.", "Opinions on this differ.")),
    ("polarized: lower case works\nnon_polarized: also here",
     ("lower case works", "also here")),
    ("POLARIZED: first\nNON-POLARIZED: hyphen variant",
     ("first", "hyphen variant")),
    ("POLARIZED: line one\nline two\n  line three  \nNON_POLARIZED: calm text",
     ("line one line two line three", "calm text")),
    ("Here you go:\n\nPOLARIZED:   spaced out   \n\nNON_POLARIZED:\n  next line body\n",
     ("spaced out", "next line body")),
    ("**POLARIZED:** bold marker\n**NON_POLARIZED:** bold too",
     ("bold marker", "bold too")),
    ("POLARIZED: only one side here", "missing marker NON_POLARIZED:"),
    ("NON_POLARIZED: calm\nPOLARIZED: angry", "before"),
    ("POLARIZED:\nNON_POLARIZED: calm", "empty segment"),
    ("POLARIZED: a\nPOLARIZED: b\nNON_POLARIZED: c", "more than once"),
]


def check_contrastive_case(parse, completion, expected):
    if isinstance(expected, tuple):
        return parse(completion) == expected
    try:
        parse(completion)
    except ContrastiveFormatError as exc:
        return expected in str(exc)
    return False


def check_split_properties(d, ratio, seed):
    r = stratified_split(d, ratio, seed)
    train, val = set(r.train.ids), set(r.validation.ids)
    assert not train & val
    assert train | val == set(d.ids)
    assert len(train) == int(ratio * len(d) + 1e-9)
    for label, n in Counter(d.labels).items():
        assert abs(Counter(r.train.labels)[label] - ratio * n) <= 1
    assert all(not s.is_synthetic for s in r.validation)
    return r


def check_mix_properties(train, pool, ratio, seed):
    mixed, plan = mix_synthetic(train, pool, ratio, seed)
    target = synth_target(len(train), ratio)
    assert plan.n_synth_used == min(target, len(pool))
    assert plan.capped == (len(pool) < target)
    n_syn = sum(s.is_synthetic for s in mixed)
    assert n_syn == plan.n_synth_used
    assert mixed.samples[: len(train)] == train.samples
    if not plan.capped and len(mixed):
        # exact up to the integer rounding of the target
        assert abs(n_syn - ratio * len(mixed)) <= 1
    assert mix_synthetic(train, pool, ratio, seed) == (mixed, plan)
    return mixed, plan
