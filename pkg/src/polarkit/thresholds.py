"""Grid search for the decision threshold that maximizes dev macro-F1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .config import default_threshold_grid
from .metrics import score_at

# F1 values this close are treated as a tie. macro_f1 rounds once from exact
# counts, so equal scores are already equal floats; distinct rationals with
# n <= 1e5 differ by far more than this.
F1_TIE_TOL = 1e-12


def validate_grid(grid: Sequence[float]) -> tuple[float, ...]:
    grid = tuple(float(t) for t in grid)
    if not grid:
        raise ValueError("threshold grid is empty")
    if any(not 0.0 <= t <= 1.0 for t in grid):
        raise ValueError("threshold grid values must lie in [0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("threshold grid must be strictly ascending")
    return grid


def threshold_tie_key(t: float) -> tuple[float, float]:
    """Prefer the threshold nearest 0.5, then the smaller one."""
    return (round(abs(t - 0.5), 9), t)


def best_key(scores: Mapping[float, float]) -> float:
    top = max(scores.values())
    tied = [t for t, f in scores.items() if top - f <= F1_TIE_TOL]
    return min(tied, key=threshold_tie_key)


@dataclass(frozen=True)
class ThresholdChoice:
    threshold: float
    dev_f1: float
    f1_by_threshold: dict[float, float]


def tune_threshold(
    truth: Sequence[int],
    probs: Sequence[float],
    grid: Sequence[float] | None = None,
) -> ThresholdChoice:
    """Evaluate every grid threshold and return the macro-F1 argmax.

    Ties go to the threshold closest to 0.5, then to the lower threshold.
    """
    grid = validate_grid(default_threshold_grid() if grid is None else grid)
    scores = {t: score_at(truth, probs, t).macro_f1 for t in grid}
    t_best = best_key(scores)
    return ThresholdChoice(threshold=t_best, dev_f1=scores[t_best], f1_by_threshold=scores)
