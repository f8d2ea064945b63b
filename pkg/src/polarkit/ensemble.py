"""Two-model ensemble strategies and per-language strategy selection.

Candidates are model A alone, model B alone, their average, and a convex
blend ``w * a + (1 - w) * b`` for each configured weight. Each candidate gets
its own tuned threshold; the best dev macro-F1 wins.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .config import RunConfig
from .core import write_jsonl
from .errors import DataValidationError, ParseError
from .thresholds import F1_TIE_TOL, ThresholdChoice, tune_threshold

KINDS = ("model_a_tuned", "model_b_tuned", "average", "weighted")


@dataclass(frozen=True)
class StrategyId:
    kind: str
    weight: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if (self.kind == "weighted") != (self.weight is not None):
            raise ValueError("weight is required for, and only for, the weighted strategy")
        if self.weight is not None and not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight {self.weight} outside [0, 1]")

    def order_key(self) -> tuple[int, float, float]:
        w = self.weight if self.weight is not None else 0.5
        return (KINDS.index(self.kind), round(abs(w - 0.5), 9), w)

    def __str__(self) -> str:
        return f"weighted({self.weight:g})" if self.kind == "weighted" else self.kind


@dataclass(frozen=True)
class Candidate:
    strategy: StrategyId
    threshold: float
    dev_f1: float


@dataclass(frozen=True)
class TunedDecision:
    lang: str
    strategy: StrategyId
    threshold: float
    dev_f1: float | None
    candidate_table: tuple[Candidate, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"lang": self.lang, "strategy": self.strategy.kind}
        if self.strategy.weight is not None:
            out["weight"] = self.strategy.weight
        out["threshold"] = self.threshold
        out["dev_f1"] = self.dev_f1
        return out

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "TunedDecision":
        try:
            strategy = StrategyId(obj["strategy"], obj.get("weight"))
            dev_f1 = obj.get("dev_f1")
            return cls(obj["lang"], strategy, float(obj["threshold"]),
                       None if dev_f1 is None else float(dev_f1))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataValidationError(f"bad decision record {obj!r}: {exc}") from None


def _check_lengths(pa: Sequence[float], pb: Sequence[float]) -> None:
    if len(pa) != len(pb):
        raise DataValidationError(f"length mismatch: {len(pa)} vs {len(pb)} probabilities")


def _clip(p: float) -> float:
    # float rounding can push a convex blend of 1.0s a hair past 1
    return min(1.0, max(0.0, p))


def combine_average(pa: Sequence[float], pb: Sequence[float]) -> list[float]:
    _check_lengths(pa, pb)
    return [_clip((a + b) / 2) for a, b in zip(pa, pb)]


def combine_weighted(pa: Sequence[float], pb: Sequence[float], w: float) -> list[float]:
    _check_lengths(pa, pb)
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"weight {w} outside [0, 1]")
    return [_clip(w * a + (1 - w) * b) for a, b in zip(pa, pb)]


def combine(strategy: StrategyId, pa: Sequence[float], pb: Sequence[float]) -> list[float]:
    """Probability series a strategy produces from the two model series."""
    _check_lengths(pa, pb)
    if strategy.kind == "model_a_tuned":
        return list(pa)
    if strategy.kind == "model_b_tuned":
        return list(pb)
    if strategy.kind == "average":
        return combine_average(pa, pb)
    return combine_weighted(pa, pb, strategy.weight)


def candidate_strategies(weight_grid: Iterable[float]) -> list[StrategyId]:
    out = [StrategyId("model_a_tuned"), StrategyId("model_b_tuned"), StrategyId("average")]
    weighted = [StrategyId("weighted", float(w)) for w in weight_grid]
    out.extend(sorted(weighted, key=StrategyId.order_key))
    return out


def select_strategy(
    truth: Sequence[int],
    pa: Sequence[float],
    pb: Sequence[float],
    cfg: RunConfig | None = None,
    lang: str = "",
) -> TunedDecision:
    cfg = cfg or RunConfig()
    _check_lengths(pa, pb)
    choices: list[tuple[StrategyId, ThresholdChoice]] = []
    for strategy in candidate_strategies(cfg.weight_grid):
        probs = combine(strategy, pa, pb)
        choices.append((strategy, tune_threshold(truth, probs, cfg.threshold_grid)))

    top = max(c.dev_f1 for _, c in choices)
    tied = [(s, c) for s, c in choices if top - c.dev_f1 <= F1_TIE_TOL]
    strategy, choice = min(tied, key=lambda sc: sc[0].order_key())
    table = tuple(Candidate(s, c.threshold, c.dev_f1) for s, c in choices)
    return TunedDecision(lang, strategy, choice.threshold, choice.dev_f1, table)


def read_decisions(path: str | os.PathLike) -> list[TunedDecision]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", str(path), lineno) from None
            out.append(TunedDecision.from_dict(obj))
    return out


def write_decisions(decisions: Iterable[TunedDecision], path: str | os.PathLike) -> None:
    write_jsonl(path, (d.to_dict() for d in decisions))
