"""Four-stage quality filter for synthetic samples.

Stages run in a fixed order, each seeing only the survivors of the last:

1. ``clean_length``: unicode normalization, control-character removal,
   whitespace collapsing, then character and token length bounds.
2. ``leakage``: regexes catching text that gives away its own label or
   leaks generation scaffolding.
3. ``dedup``: paraphrase distinctness against the parent, then near-duplicate
   removal against the real training data and, greedily, within the
   synthetic set.
4. ``roundtrip``: for pivot-translated samples, similarity between the
   original and the round-trip text.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..config import LengthBounds, RunConfig
from ..core import Dataset, Sample
from ..errors import ConfigError, EmbeddingError
from .embeddings import EmbeddingCache, EmbeddingProvider

STAGES = ("clean_length", "leakage", "dedup", "roundtrip")

DEFAULT_LEAKAGE_PATTERNS = (
    r"\bPOLARIZED\s*:",
    r"\bNON_POLARIZED\s*:",
    r"\bNON-POLARIZED\s*:",
    r"\bnon-polarized\b",
    r"\bpolarized\b",
    r"\blabel\s*:",
    r"\bas an AI\b",
    r"\bI cannot\b",
)


@dataclass(frozen=True)
class Drop:
    id: str
    stage: str
    reason: str


@dataclass(frozen=True)
class StageCount:
    stage: str
    input_n: int
    kept_n: int
    dropped_n: int


@dataclass
class FilterReport:
    stage_counts: list[StageCount] = field(default_factory=list)
    drop_log: list[Drop] = field(default_factory=list)

    def add(self, stage: str, input_n: int, kept_n: int, drops: Sequence[Drop]) -> None:
        self.stage_counts.append(StageCount(stage, input_n, kept_n, input_n - kept_n))
        self.drop_log.extend(drops)

    def to_dict(self) -> dict[str, Any]:
        return {
            "stages": [
                {"stage": c.stage, "input_n": c.input_n, "kept_n": c.kept_n, "dropped_n": c.dropped_n}
                for c in self.stage_counts
            ],
            "drops": [{"id": d.id, "stage": d.stage, "reason": d.reason} for d in self.drop_log],
        }


# --- stage 1 --------------------------------------------------------------

_SPACE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    text = unicodedata.normalize("NFC", text)
    # control characters go, but line breaks and tabs count as whitespace
    text = "".join(
        ch if not unicodedata.category(ch) == "Cc" else (" " if ch.isspace() else "")
        for ch in text
    )
    return _SPACE.sub(" ", text).strip()


def length_violation(text: str, bounds: LengthBounds) -> str | None:
    if len(text) < bounds.min_chars:
        return "too_short"
    if len(text) > bounds.max_chars:
        return "too_long"
    n_tokens = len(text.split())
    if n_tokens < bounds.min_tokens:
        return "too_few_tokens"
    if n_tokens > bounds.max_tokens:
        return "too_many_tokens"
    return None


def clean_and_length(dataset: Dataset, bounds: LengthBounds | None = None) -> tuple[Dataset, list[Drop]]:
    bounds = bounds or LengthBounds()
    kept, drops = [], []
    for s in dataset:
        text = normalize_text(s.text)
        reason = length_violation(text, bounds)
        if reason:
            drops.append(Drop(s.id, "clean_length", reason))
        else:
            kept.append(s if text == s.text else s.replace(text=text))
    return Dataset(dataset.lang, tuple(kept)), drops


# --- stage 2 --------------------------------------------------------------

def compile_patterns(patterns: Sequence[str] | None) -> list[re.Pattern[str]]:
    source = DEFAULT_LEAKAGE_PATTERNS if patterns is None else patterns
    compiled = []
    for p in source:
        try:
            compiled.append(re.compile(p, re.IGNORECASE))
        except re.error as exc:
            raise ConfigError(f"invalid leakage pattern {p!r}: {exc}") from None
    return compiled


def leakage_filter(dataset: Dataset, patterns: Sequence[str] | None = None) -> tuple[Dataset, list[Drop]]:
    """Drop samples matching any pattern (case-insensitive).

    A supplied pattern list replaces the defaults entirely.
    """
    compiled = compile_patterns(patterns)
    kept, drops = [], []
    for s in dataset:
        hit = next((p for p in compiled if p.search(s.text)), None)
        if hit is not None:
            drops.append(Drop(s.id, "leakage", f"leakage:{hit.pattern}"))
        else:
            kept.append(s)
    return Dataset(dataset.lang, tuple(kept)), drops


# --- similarity -----------------------------------------------------------

def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine is undefined for a zero vector")
    return float(np.dot(u, v) / (nu * nv))


def _unit_rows(m: np.ndarray) -> np.ndarray:
    if m.size == 0:
        return m
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0):
        raise EmbeddingError("provider returned a zero vector")
    return m / norms[:, None]


def _as_cache(provider: EmbeddingProvider | EmbeddingCache) -> EmbeddingCache:
    return provider if isinstance(provider, EmbeddingCache) else EmbeddingCache(provider)


# --- stage 3 --------------------------------------------------------------

def paraphrase_distinctness(
    child: Sample,
    parent: Sample,
    provider: EmbeddingProvider | EmbeddingCache,
    upper: float = 0.90,
    floor: float = 0.60,
) -> tuple[bool, str | None, float]:
    """Keep a paraphrase only if it is neither a near-copy nor off-topic.

    Returns ``(keep, reason, similarity)``. The ``drifted`` floor is an extra
    guard on top of the near-copy ceiling.
    """
    if child.parent_id != parent.id:
        raise ValueError(f"{child.id!r} is not a child of {parent.id!r}")
    cache = _as_cache(provider)
    sim = cosine(cache[child.text], cache[parent.text])
    if sim >= upper:
        return False, "too_similar", sim
    if sim < floor:
        return False, "drifted", sim
    return True, None, sim


def dedup(
    synthetic: Dataset,
    reference: Dataset,
    provider: EmbeddingProvider | EmbeddingCache,
    threshold: float = 0.90,
) -> tuple[Dataset, list[Drop]]:
    """Near-duplicate removal by exact pairwise cosine similarity.

    Pass A drops synthetic samples at or above ``threshold`` to any reference
    sample. Pass B walks the survivors in order and drops any sample at or
    above ``threshold`` to an earlier kept one.
    """
    cache = _as_cache(provider)
    cache.prefetch([s.text for s in synthetic] + [r.text for r in reference])
    syn = _unit_rows(cache.matrix([s.text for s in synthetic]))
    drops: list[Drop] = []
    survivors = list(range(len(synthetic)))

    if len(reference) and len(synthetic):
        ref = _unit_rows(cache.matrix([r.text for r in reference]))
        sims = syn @ ref.T
        survivors = []
        for i, row in enumerate(sims):
            j = int(np.argmax(row))
            if row[j] >= threshold:
                drops.append(Drop(synthetic.samples[i].id, "dedup", f"dup_of_real:{reference.samples[j].id}"))
            else:
                survivors.append(i)

    kept: list[int] = []
    for i in survivors:
        if kept:
            sims = syn[kept] @ syn[i]
            j = int(np.argmax(sims))
            if sims[j] >= threshold:
                drops.append(Drop(synthetic.samples[i].id, "dedup",
                                  f"dup_of_synthetic:{synthetic.samples[kept[j]].id}"))
                continue
        kept.append(i)
    return Dataset(synthetic.lang, tuple(synthetic.samples[i] for i in kept)), drops


# --- stage 4 --------------------------------------------------------------

def roundtrip_consistency(
    sample: Sample,
    original_text: str,
    provider: EmbeddingProvider | EmbeddingCache,
    threshold: float = 0.70,
) -> tuple[bool, float]:
    cache = _as_cache(provider)
    sim = cosine(cache[original_text], cache[sample.text])
    return sim >= threshold, sim


def _original_text(sample: Sample, parents: dict[str, Sample]) -> str | None:
    if sample.parent_id and sample.parent_id in parents:
        return parents[sample.parent_id].text
    text = sample.extra.get("source_text")
    return text if isinstance(text, str) and text.strip() else None


# --- pipeline -------------------------------------------------------------

def run_pipeline(
    synthetic: Dataset,
    reference: Dataset,
    cfg: RunConfig | None,
    provider: EmbeddingProvider,
) -> tuple[Dataset, FilterReport]:
    cfg = cfg or RunConfig()
    report = FilterReport()
    parents = reference.by_id()

    current, drops = clean_and_length(synthetic, cfg.length_bounds)
    report.add("clean_length", len(synthetic), len(current), drops)

    n_in = len(current)
    current, drops = leakage_filter(current, cfg.leakage_patterns)
    report.add("leakage", n_in, len(current), drops)

    cache = EmbeddingCache(provider)
    needed = [s.text for s in current] + [r.text for r in reference]
    needed += [t for s in current if (t := _original_text(s, parents))]
    cache.prefetch(needed)

    n_in = len(current)
    stage3: list[Drop] = []
    distinct = []
    for s in current:
        if s.strategy == "paraphrase" and s.parent_id in parents:
            keep, reason, _ = paraphrase_distinctness(
                s, parents[s.parent_id], cache, cfg.dedup_threshold, cfg.paraphrase_drift_floor
            )
            if not keep:
                stage3.append(Drop(s.id, "dedup", reason))
                continue
        distinct.append(s)
    current, drops = dedup(Dataset(current.lang, tuple(distinct)), reference, cache, cfg.dedup_threshold)
    stage3.extend(drops)
    report.add("dedup", n_in, len(current), stage3)

    n_in = len(current)
    kept, drops = [], []
    for s in current:
        if "pivots" not in s.extra:
            kept.append(s)
            continue
        original = _original_text(s, parents)
        if original is None:
            drops.append(Drop(s.id, "roundtrip", "missing_original"))
            continue
        ok, _ = roundtrip_consistency(s, original, cache, cfg.roundtrip_threshold)
        if ok:
            kept.append(s)
        else:
            drops.append(Drop(s.id, "roundtrip", "roundtrip_inconsistent"))
    current = Dataset(current.lang, tuple(kept))
    report.add("roundtrip", n_in, len(current), drops)
    return current, report
