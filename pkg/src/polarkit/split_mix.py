"""Stratified train/validation splitting and synthetic-ratio mixing.

Shuffles use :class:`polarkit.rng.SplitMix64`. For the split, each label's
ids are sorted lexicographically and Fisher-Yates shuffled with a stream
keyed by ``(seed, lang, label)``; the first ``n_train`` shuffled ids of each
class go to train. Outputs keep the input file order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .core import Dataset
from .errors import DataValidationError
from .rng import SplitMix64


def _exact(x: float) -> Fraction:
    # decimal repr, so 0.29 means 29/100 rather than its binary neighbour
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class SplitResult:
    train: Dataset
    validation: Dataset
    seed: int
    ratio: float


@dataclass(frozen=True)
class MixPlan:
    synth_ratio: float
    n_real: int
    n_synth_target: int
    n_synth_used: int
    capped: bool
    pool_size: int
    seed: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "synth_ratio": self.synth_ratio,
            "n_real": self.n_real,
            "n_synth_target": self.n_synth_target,
            "n_synth_used": self.n_synth_used,
            "capped": self.capped,
            "pool_size": self.pool_size,
            "seed": self.seed,
        }


def class_train_sizes(class_sizes: dict[int, int], ratio: float) -> dict[int, int]:
    """Per-class train counts summing to ``floor(ratio * n)``.

    Each class starts from ``floor(ratio * n_class)``; leftover slots go to
    classes by descending fractional part, ties to the smaller label.
    """
    r = _exact(ratio)
    total = sum(class_sizes.values())
    target = math.floor(r * total)
    raw = {label: r * n for label, n in class_sizes.items()}
    sizes = {label: math.floor(v) for label, v in raw.items()}
    leftover = target - sum(sizes.values())
    order = sorted(raw, key=lambda label: (-(raw[label] - sizes[label]), label))
    for label in order[:leftover]:
        sizes[label] += 1
    return sizes


def stratified_split(dataset: Dataset, ratio: float = 0.8, seed: int = 42) -> SplitResult:
    if not 0.0 < ratio < 1.0:
        raise DataValidationError(f"split ratio must lie in (0, 1), got {ratio}")
    synthetic = [s.id for s in dataset if s.is_synthetic]
    if synthetic:
        raise DataValidationError(
            f"split input must be real data only; {len(synthetic)} synthetic sample(s) found"
        )
    by_label: dict[int, list[str]] = {}
    for s in dataset:
        by_label.setdefault(s.label, []).append(s.id)

    sizes = class_train_sizes({k: len(v) for k, v in by_label.items()}, ratio)
    train_ids: set[str] = set()
    for label, ids in by_label.items():
        ids = sorted(ids)
        SplitMix64.keyed(seed, dataset.lang, label).shuffle(ids)
        train_ids.update(ids[: sizes[label]])

    train = Dataset(dataset.lang, tuple(s for s in dataset if s.id in train_ids))
    val = Dataset(dataset.lang, tuple(s for s in dataset if s.id not in train_ids))
    return SplitResult(train, val, seed, ratio)


def synth_target(n_real: int, ratio: float) -> int:
    """Synthetic count making ``ratio`` the synthetic share of the final set.

    ``round(r * n_real / (1 - r))`` with halves rounded up.
    """
    r = _exact(ratio)
    return math.floor(r * n_real / (1 - r) + Fraction(1, 2))


def mix_synthetic(
    train: Dataset, pool: Dataset, ratio: float, seed: int = 42
) -> tuple[Dataset, MixPlan]:
    if not 0.0 <= ratio < 1.0:
        raise DataValidationError(f"synthetic ratio must lie in [0, 1), got {ratio}")
    real_in_pool = [s.id for s in pool if not s.is_synthetic]
    if real_in_pool:
        raise DataValidationError(f"synthetic pool contains {len(real_in_pool)} real sample(s)")
    if len(pool) and train.lang is not None and pool.lang != train.lang:
        raise DataValidationError(f"pool language {pool.lang!r} differs from train {train.lang!r}")
    n_real = len(train)
    target = synth_target(n_real, ratio)
    used = min(target, len(pool))

    chosen_ids = set(SplitMix64.keyed(seed, train.lang, "mix").sample(sorted(pool.ids), used))
    chosen = tuple(s for s in sorted(pool, key=lambda s: s.id) if s.id in chosen_ids)
    mixed = Dataset(train.lang, train.samples + chosen)
    plan = MixPlan(ratio, n_real, target, used, len(pool) < target, len(pool), seed)
    return mixed, plan
