"""Probability calibration diagnostics.

A mean predicted probability far from 0.5 in either direction is the
symptom that makes the default 0.5 threshold a poor choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

from .errors import DataValidationError

N_BINS = 10


@dataclass(frozen=True)
class ReliabilityBin:
    lower: float
    upper: float
    count: int
    mean_prob: float | None
    positive_rate: float | None = None


@dataclass(frozen=True)
class CalibrationReport:
    lang: str
    n: int
    mean_prob: float
    verdict: str
    bins: tuple[ReliabilityBin, ...]
    ece: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "lang": self.lang,
            "n": self.n,
            "mean_prob": self.mean_prob,
            "verdict": self.verdict,
            "ece": self.ece,
            "bins": [
                {
                    "lower": b.lower,
                    "upper": b.upper,
                    "count": b.count,
                    "mean_prob": b.mean_prob,
                    "positive_rate": b.positive_rate,
                }
                for b in self.bins
            ],
        }


def bin_index(p: float, n_bins: int = N_BINS) -> int:
    """Equal-width bins, left-closed; the top bin also takes p == 1.0."""
    return min(int(p * n_bins), n_bins - 1)


def verdict_for(mean_prob: float, band: tuple[float, float] = (0.35, 0.65)) -> str:
    low, high = band
    if mean_prob < low:
        return "under_confident"
    if mean_prob > high:
        return "over_confident"
    return "calibrated"


def calibration_report(
    probs: Sequence[float],
    truth: Sequence[int] | None = None,
    lang: str = "",
    band: tuple[float, float] = (0.35, 0.65),
) -> CalibrationReport:
    if not probs:
        raise DataValidationError("cannot build a calibration report from no predictions")
    if truth is not None and len(truth) != len(probs):
        raise DataValidationError("truth and probs differ in length")

    members: list[list[int]] = [[] for _ in range(N_BINS)]
    for i, p in enumerate(probs):
        if not 0.0 <= p <= 1.0:
            raise DataValidationError(f"probability {p} outside [0, 1]")
        members[bin_index(p)].append(i)

    n = len(probs)
    bins = []
    ece = 0.0 if truth is not None else None
    for k, idx in enumerate(members):
        mean_p = math.fsum(probs[i] for i in idx) / len(idx) if idx else None
        rate = None
        if truth is not None and idx:
            rate = sum(truth[i] for i in idx) / len(idx)
            ece += len(idx) / n * abs(mean_p - rate)
        bins.append(ReliabilityBin(k / N_BINS, (k + 1) / N_BINS, len(idx), mean_p, rate))

    mean_prob = math.fsum(probs) / n
    return CalibrationReport(lang, n, mean_prob, verdict_for(mean_prob, band), tuple(bins), ece)
