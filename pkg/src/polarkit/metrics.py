"""Thresholding and macro-averaged F1 over the fixed class set {0, 1}.

Zero denominators give 0 for precision, recall and F1, and both classes
always enter the macro mean even when one is absent from the truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DataValidationError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class EvaluationResult:
    macro_f1: float
    f1: tuple[float, float]
    precision: tuple[float, float]
    recall: tuple[float, float]
    counts: ConfusionCounts
    threshold_used: float | None = None

    @property
    def per_class_f1(self) -> dict[int, float]:
        return {0: self.f1[0], 1: self.f1[1]}


def apply_threshold(probs: Sequence[float], t: float) -> list[int]:
    """1 where ``prob >= t`` (inclusive at the threshold), else 0."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold {t} outside [0, 1]")
    return [1 if p >= t else 0 for p in probs]


def confusion_counts(truth: Sequence[int], pred: Sequence[int]) -> ConfusionCounts:
    if len(truth) != len(pred):
        raise DataValidationError(f"length mismatch: {len(truth)} labels vs {len(pred)} predictions")
    tp = fp = fn = tn = 0
    for y, p in zip(truth, pred):
        if y == 1:
            if p == 1:
                tp += 1
            else:
                fn += 1
        elif p == 1:
            fp += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, fn, tn)


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def _f1_exact(tp: int, fp: int, fn: int) -> Fraction:
    # 2TP / (2TP + FP + FN), which equals the harmonic mean of P and R
    return Fraction(2 * tp, 2 * tp + fp + fn) if tp else Fraction(0)


def _f1(tp: int, fp: int, fn: int) -> tuple[float, float, Fraction]:
    return _ratio(tp, tp + fp), _ratio(tp, tp + fn), _f1_exact(tp, fp, fn)


def macro_f1(truth: Sequence[int], pred: Sequence[int], threshold: float | None = None) -> EvaluationResult:
    if len(truth) != len(pred):
        raise DataValidationError(f"length mismatch: {len(truth)} labels vs {len(pred)} predictions")
    if not truth:
        raise DataValidationError("cannot score an empty set")
    c = confusion_counts(truth, pred)
    # class 0 as positive swaps the roles: tp0 = tn, fp0 = fn, fn0 = fp
    p0, r0, f0 = _f1(c.tn, c.fn, c.fp)
    p1, r1, f1 = _f1(c.tp, c.fp, c.fn)
    # exact until the final rounding, so equal scores are equal floats and
    # threshold ties are never decided by accumulated rounding error
    return EvaluationResult(
        macro_f1=float((f0 + f1) / 2),
        f1=(float(f0), float(f1)),
        precision=(p0, p1),
        recall=(r0, r1),
        counts=c,
        threshold_used=threshold,
    )


def score_at(truth: Sequence[int], probs: Sequence[float], t: float) -> EvaluationResult:
    return macro_f1(truth, apply_threshold(probs, t), threshold=t)
