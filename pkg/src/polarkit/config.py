"""Run configuration shared by every subcommand.

Loaded from a JSON file; unknown keys are rejected so typos fail loudly.
Secrets never live here: API keys come from ``POLAR_LLM_API_KEY`` and
``POLAR_MT_API_KEY`` in the environment.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .core import DEFAULT_LANGUAGES
from .errors import ConfigError

STRATEGY_ORDER = ("direct", "paraphrase", "contrastive")


def default_threshold_grid() -> tuple[float, ...]:
    return tuple(round(0.30 + 0.05 * i, 2) for i in range(9))


@dataclass(frozen=True)
class LengthBounds:
    min_chars: int = 10
    max_chars: int = 2000
    min_tokens: int = 3
    max_tokens: int = 300


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    threshold_grid: tuple[float, ...] = field(default_factory=default_threshold_grid)
    weight_grid: tuple[float, ...] = (0.3, 0.4, 0.6, 0.7)
    dedup_threshold: float = 0.90
    roundtrip_threshold: float = 0.70
    paraphrase_drift_floor: float = 0.60
    strategy_mix: dict[str, float] = field(
        default_factory=lambda: {"direct": 0.50, "paraphrase": 0.30, "contrastive": 0.20}
    )
    synth_ratio: float = 0.30
    split_ratio: float = 0.80
    synth_total: int = 1000
    direct_balance: str = "even"
    length_bounds: LengthBounds = field(default_factory=LengthBounds)
    leakage_patterns: tuple[str, ...] | None = None
    concurrency_limit: int = 4
    languages: tuple[str, ...] = tuple(DEFAULT_LANGUAGES)
    pivots: tuple[str, ...] = ("eng",)
    llm_base_url: str = "https://api.openai.com/v1"
    llm_model: str = "gpt-4o-mini"
    mt_base_url: str = "http://localhost:8081"
    embed_base_url: str = "http://localhost:8082"
    embed_batch_size: int = 64
    request_timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 1.0
    backoff_factor: float = 2.0
    calibration_band: tuple[float, float] = (0.35, 0.65)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for name in ("threshold_grid", "weight_grid"):
            grid = getattr(self, name)
            if not grid:
                raise ConfigError(f"{name} must be non-empty")
            if any(not 0.0 <= v <= 1.0 for v in grid):
                raise ConfigError(f"{name} values must lie in [0, 1]")
        if any(b <= a for a, b in zip(self.threshold_grid, self.threshold_grid[1:])):
            raise ConfigError("threshold_grid must be strictly ascending")
        if set(self.strategy_mix) != set(STRATEGY_ORDER):
            raise ConfigError(f"strategy_mix needs exactly the keys {STRATEGY_ORDER}")
        if any(v < 0 for v in self.strategy_mix.values()):
            raise ConfigError("strategy_mix fractions must be non-negative")
        if abs(math.fsum(self.strategy_mix.values()) - 1.0) > 1e-9:
            raise ConfigError("strategy_mix must sum to 1")
        if not 0.0 <= self.synth_ratio < 1.0:
            raise ConfigError("synth_ratio must lie in [0, 1)")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError("split_ratio must lie in (0, 1)")
        for name in ("dedup_threshold", "roundtrip_threshold", "paraphrase_drift_floor"):
            if not -1.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be a cosine value in [-1, 1]")
        if self.direct_balance not in ("even", "minority"):
            raise ConfigError("direct_balance must be 'even' or 'minority'")
        if self.concurrency_limit < 1:
            raise ConfigError("concurrency_limit must be >= 1")
        if self.synth_total < 0:
            raise ConfigError("synth_total must be >= 0")
        if not self.pivots:
            raise ConfigError("pivots must be non-empty")
        lo, hi = self.calibration_band
        if not 0.0 <= lo <= hi <= 1.0:
            raise ConfigError("calibration_band must satisfy 0 <= low <= high <= 1")
        b = self.length_bounds
        if b.min_chars > b.max_chars or b.min_tokens > b.max_tokens:
            raise ConfigError("length_bounds minimums exceed maximums")

    def with_overrides(self, **changes: Any) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes) if changes else self

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        values = dict(obj)
        try:
            if "length_bounds" in values:
                values["length_bounds"] = LengthBounds(**values["length_bounds"])
            for name in ("threshold_grid", "weight_grid", "languages", "pivots", "calibration_band"):
                if name in values:
                    values[name] = tuple(values[name])
            if values.get("leakage_patterns") is not None:
                values["leakage_patterns"] = tuple(values["leakage_patterns"])
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return RunConfig.from_dict(obj)
