"""Synthetic sample generation: direct, paraphrase, contrastive, backtranslation."""

from __future__ import annotations

import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

from ..config import STRATEGY_ORDER, RunConfig
from ..core import Dataset, Sample, language_name
from ..errors import (
    ConfigError,
    ContrastiveFormatError,
    EmptyCompletionError,
    ServiceError,
    TranslationError,
)
from ..rng import SplitMix64
from .client import ChatClient, TranslationClient, chat_request_body
from .prompts import LABEL_INSTRUCTIONS, PromptSpec, Topic, TopicCatalog, default_prompt_specs

logger = logging.getLogger(__name__)

MULTI_PIVOTS = ("eng", "deu", "fra", "spa")


# --- allocation ---------------------------------------------------------

def allocate_mix(total_n: int, mix: Mapping[str, float]) -> dict[str, int]:
    """Largest-remainder apportionment of ``total_n`` over the strategies.

    Remainder ties go in strategy order (direct, paraphrase, contrastive).
    Contrastive samples come in pairs, so an odd contrastive count is rounded
    down and the spare sample moves to direct.
    """
    if total_n < 0:
        raise ConfigError("total_n must be >= 0")
    if set(mix) != set(STRATEGY_ORDER) or any(v < 0 for v in mix.values()):
        raise ConfigError(f"mix needs non-negative fractions for {STRATEGY_ORDER}")
    shares = {k: Fraction(repr(float(mix[k]))) for k in STRATEGY_ORDER}
    if abs(float(sum(shares.values())) - 1.0) > 1e-9:
        raise ConfigError("mix must sum to 1")
    raw = {k: total_n * v for k, v in shares.items()}
    counts = {k: math.floor(v) for k, v in raw.items()}
    leftover = total_n - sum(counts.values())
    order = sorted(STRATEGY_ORDER, key=lambda k: (-(raw[k] - counts[k]), STRATEGY_ORDER.index(k)))
    for k in order[: max(leftover, 0)]:
        counts[k] += 1
    if counts["contrastive"] % 2:
        counts["contrastive"] -= 1
        counts["direct"] += 1
    return counts


def direct_label_targets(n: int, mode: str = "even", real_counts: Mapping[int, int] | None = None) -> dict[int, int]:
    """Split the direct-generation budget between the two labels.

    ``even`` halves it (odd spare to label 1). ``minority`` first closes the
    gap between the real class counts, then halves what is left.
    """
    if mode == "even" or not real_counts:
        return {1: n - n // 2, 0: n // 2}
    if mode != "minority":
        raise ConfigError(f"unknown balance mode {mode!r}")
    n1, n0 = real_counts.get(1, 0), real_counts.get(0, 0)
    minority = 1 if n1 < n0 else 0
    gap = min(n, abs(n1 - n0))
    rest = n - gap
    out = {minority: gap + rest - rest // 2, 1 - minority: rest // 2}
    return out


# --- single-sample operations -------------------------------------------

_QUOTES = "\"'“”‘’«»„「」『』"


def clean_completion(text: str | None) -> str:
    text = (text or "").strip()
    while len(text) >= 2 and text[0] in _QUOTES and text[-1] in _QUOTES:
        text = text[1:-1].strip()
    return text


def _complete(client: ChatClient, spec: PromptSpec, prompt: str) -> str:
    text = clean_completion(client.complete(prompt, spec.temperature, spec.max_tokens))
    if not text:
        raise EmptyCompletionError(f"{spec.strategy}: empty completion")
    return text


def _topic(topic: Topic | str) -> Topic:
    return topic if isinstance(topic, Topic) else Topic("", topic)


def _topic_extra(topic: Topic) -> dict[str, Any]:
    return {"topic_category": topic.category} if topic.category else {}


def generate_direct(
    lang: str,
    target_label: int,
    topic: Topic | str,
    client: ChatClient,
    *,
    sample_id: str | None = None,
    spec: PromptSpec | None = None,
) -> Sample:
    spec = spec or default_prompt_specs()["direct"]
    topic = _topic(topic)
    prompt = spec.render(
        language=language_name(lang), topic=topic.name, target_label=LABEL_INSTRUCTIONS[target_label]
    )
    text = _complete(client, spec, prompt)
    return Sample(
        id=sample_id or f"{lang}-syn-direct",
        lang=lang,
        text=text,
        label=target_label,
        source="synthetic",
        strategy="direct",
        topic=topic.name,
        extra=_topic_extra(topic),
    )


def generate_paraphrase(
    original: Sample,
    client: ChatClient,
    *,
    sample_id: str | None = None,
    spec: PromptSpec | None = None,
) -> Sample:
    if original.is_synthetic:
        raise ValueError("paraphrase source must be a real sample")
    spec = spec or default_prompt_specs()["paraphrase"]
    prompt = spec.render(language=language_name(original.lang), original_text=original.text)
    text = _complete(client, spec, prompt)
    # the +-20% word-count bound is recorded for downstream review, not enforced here
    ratio = len(text.split()) / max(len(original.text.split()), 1)
    return Sample(
        id=sample_id or f"{original.id}-para",
        lang=original.lang,
        text=text,
        label=original.label,
        source="synthetic",
        strategy="paraphrase",
        topic=original.topic,
        parent_id=original.id,
        extra={"word_ratio": round(ratio, 4)},
    )


_MARKER = re.compile(
    r"^[ \t]*(?:\*\*|#+[ \t]*)?(?P<marker>NON[_-]POLARIZED|POLARIZED)[ \t]*:(?:\*\*)?",
    re.IGNORECASE | re.MULTILINE,
)


def _segment(raw: str) -> str:
    lines = [ln.strip() for ln in raw.splitlines()]
    return clean_completion(" ".join(ln for ln in lines if ln))


def parse_contrastive(completion: str) -> tuple[str, str]:
    """Split a ``POLARIZED: ... / NON_POLARIZED: ...`` completion into two texts.

    Markers are matched case-insensitively at line starts (``NON-POLARIZED``
    is accepted too). A segment runs until the next marker or the end, with
    its lines joined by single spaces.
    """
    found = list(_MARKER.finditer(completion or ""))
    kinds = ["non" if m.group("marker").lower().startswith("non") else "pol" for m in found]
    for kind, name in (("pol", "POLARIZED:"), ("non", "NON_POLARIZED:")):
        if kinds.count(kind) == 0:
            raise ContrastiveFormatError(f"missing marker {name}")
        if kinds.count(kind) > 1:
            raise ContrastiveFormatError(f"marker {name} appears more than once")
    if kinds.index("non") < kinds.index("pol"):
        raise ContrastiveFormatError("NON_POLARIZED: appears before POLARIZED:")
    segments = {}
    for i, m in enumerate(found):
        end = found[i + 1].start() if i + 1 < len(found) else len(completion)
        segments[kinds[i]] = _segment(completion[m.end():end])
    for kind, name in (("pol", "POLARIZED:"), ("non", "NON_POLARIZED:")):
        if not segments[kind]:
            raise ContrastiveFormatError(f"empty segment after {name}")
    return segments["pol"], segments["non"]


def generate_contrastive(
    lang: str,
    topic: Topic | str,
    client: ChatClient,
    *,
    pair_id: str | None = None,
    spec: PromptSpec | None = None,
) -> tuple[Sample, Sample]:
    spec = spec or default_prompt_specs()["contrastive"]
    topic = _topic(topic)
    prompt = spec.render(language=language_name(lang), topic=topic.name)
    completion = client.complete(prompt, spec.temperature, spec.max_tokens)
    if not (completion or "").strip():
        raise EmptyCompletionError("contrastive: empty completion")
    pol_text, non_text = parse_contrastive(completion)
    base = pair_id or f"{lang}-syn-contrastive"
    extra = {**_topic_extra(topic), "pair_id": base}
    common = dict(lang=lang, source="synthetic", strategy="contrastive", topic=topic.name)
    return (
        Sample(id=f"{base}a", text=pol_text, label=1, extra=dict(extra), **common),
        Sample(id=f"{base}b", text=non_text, label=0, extra=dict(extra), **common),
    )


def backtranslate(
    text: str,
    lang: str,
    pivots: Sequence[str],
    client: TranslationClient,
) -> str:
    """Translate ``text`` through each pivot in turn and back to ``lang``.

    ``k`` pivots cost ``k + 1`` translate calls. A failing hop raises
    :class:`TranslationError` carrying its 1-based hop index.
    """
    if not pivots:
        raise ValueError("at least one pivot language is required")
    chain = [lang, *pivots, lang]
    current = text
    for hop, (src, tgt) in enumerate(zip(chain, chain[1:]), start=1):
        try:
            current = client.translate(current, src, tgt)
        except ServiceError as exc:
            raise TranslationError(str(exc), hop) from exc
        if not current.strip():
            raise TranslationError("empty translation", hop)
    return current


def backtranslate_sample(
    original: Sample,
    pivots: Sequence[str],
    client: TranslationClient,
    *,
    sample_id: str | None = None,
) -> Sample:
    text = backtranslate(original.text, original.lang, pivots, client)
    return Sample(
        id=sample_id or f"{original.id}-bt",
        lang=original.lang,
        text=text,
        label=original.label,
        source="synthetic",
        strategy="backtranslation",
        topic=original.topic,
        parent_id=original.id,
        extra={"pivots": list(pivots), "source_text": original.text},
    )


def crosslingual_transfer(
    original: Sample,
    target_lang: str,
    client: TranslationClient,
    *,
    sample_id: str | None = None,
) -> Sample:
    """Translate a sample from a related language into ``target_lang``."""
    try:
        text = client.translate(original.text, original.lang, target_lang)
    except ServiceError as exc:
        raise TranslationError(str(exc), 1) from exc
    if not text.strip():
        raise TranslationError("empty translation", 1)
    return Sample(
        id=sample_id or f"{target_lang}-xl-{original.id}",
        lang=target_lang,
        text=text,
        label=original.label,
        source="synthetic",
        strategy="crosslingual",
        topic=original.topic,
        extra={"source_lang": original.lang, "source_id": original.id},
    )


# --- batch planning and execution ---------------------------------------

@dataclass(frozen=True)
class GenerationTask:
    kind: str
    task_id: str
    label: int | None = None
    topic: Topic | None = None
    parent: Sample | None = None


@dataclass
class GenerationBatchPlan:
    lang: str
    total_n: int
    counts: dict[str, int]
    direct_labels: dict[int, int]
    tasks: list[GenerationTask]
    n_backtranslation: int = 0

    def summary(self) -> dict[str, Any]:
        return {
            "lang": self.lang,
            "total_n": self.total_n,
            "counts": self.counts,
            "direct_labels": {str(k): v for k, v in sorted(self.direct_labels.items())},
            "n_backtranslation": self.n_backtranslation,
            "n_requests": len(self.tasks),
        }


@dataclass
class GenerationReport:
    plan: dict[str, Any]
    produced: int = 0
    failures: list[dict[str, str]] = field(default_factory=list)
    requests: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {"plan": self.plan, "produced": self.produced, "requests": self.requests,
                "failures": self.failures}


def _cycle_parents(train: Dataset | None, n: int, seed: int, lang: str, key: str) -> list[Sample]:
    if n == 0:
        return []
    real = sorted((s for s in (train or ()) if not s.is_synthetic), key=lambda s: s.id)
    if not real:
        raise ConfigError(f"{key} needs real training samples as sources")
    SplitMix64.keyed(seed, lang, key).shuffle(real)
    return [real[i % len(real)] for i in range(n)]


def plan_batch(
    lang: str,
    cfg: RunConfig,
    train: Dataset | None = None,
    catalog: TopicCatalog | None = None,
    total_n: int | None = None,
    n_backtranslation: int = 0,
) -> GenerationBatchPlan:
    catalog = catalog or TopicCatalog.default()
    total_n = cfg.synth_total if total_n is None else total_n
    counts = allocate_mix(total_n, cfg.strategy_mix)
    real_counts = None
    if train is not None:
        real_counts = {0: sum(1 for s in train if s.label == 0), 1: sum(1 for s in train if s.label == 1)}
    labels = direct_label_targets(counts["direct"], cfg.direct_balance, real_counts)

    topic_rng = SplitMix64.keyed(cfg.seed, lang, "topics")

    def draw_topic() -> Topic:
        category = topic_rng.choice(sorted(catalog.categories))
        return Topic(category, topic_rng.choice(catalog.categories[category]))

    tasks: list[GenerationTask] = []
    i = 0
    for label in (1, 0):
        for _ in range(labels.get(label, 0)):
            tasks.append(GenerationTask("direct", f"{lang}-syn-d{i:05d}", label=label, topic=draw_topic()))
            i += 1
    for i, parent in enumerate(_cycle_parents(train, counts["paraphrase"], cfg.seed, lang, "paraphrase")):
        tasks.append(GenerationTask("paraphrase", f"{lang}-syn-p{i:05d}", parent=parent))
    for i in range(counts["contrastive"] // 2):
        tasks.append(GenerationTask("contrastive", f"{lang}-syn-c{i:05d}", topic=draw_topic()))
    bt_parents = _cycle_parents(train, n_backtranslation, cfg.seed, lang, "backtranslation")
    for i, parent in enumerate(bt_parents):
        tasks.append(GenerationTask("backtranslation", f"{lang}-syn-b{i:05d}", parent=parent))
    return GenerationBatchPlan(lang, total_n, counts, labels, tasks, n_backtranslation)


def describe_requests(
    plan: GenerationBatchPlan,
    cfg: RunConfig,
    specs: Mapping[str, PromptSpec] | None = None,
) -> list[dict[str, Any]]:
    """Request bodies the batch would send, without touching the network."""
    specs = specs or default_prompt_specs()
    out = []
    for task in plan.tasks:
        if task.kind == "backtranslation":
            chain = [plan.lang, *cfg.pivots, plan.lang]
            out.append({"task_id": task.task_id, "endpoint": "translate",
                        "hops": [[a, b] for a, b in zip(chain, chain[1:])]})
            continue
        spec = specs[task.kind]
        if task.kind == "direct":
            prompt = spec.render(language=language_name(plan.lang), topic=task.topic.name,
                                 target_label=LABEL_INSTRUCTIONS[task.label])
        elif task.kind == "paraphrase":
            prompt = spec.render(language=language_name(plan.lang), original_text=task.parent.text)
        else:
            prompt = spec.render(language=language_name(plan.lang), topic=task.topic.name)
        out.append({"task_id": task.task_id, "endpoint": "chat/completions",
                    "body": chat_request_body(cfg.llm_model, prompt, spec.temperature,
                                                   spec.max_tokens)})
    return out


def run_batch(
    plan: GenerationBatchPlan,
    chat: ChatClient | None,
    cfg: RunConfig,
    translator: TranslationClient | None = None,
    specs: Mapping[str, PromptSpec] | None = None,
) -> tuple[Dataset, GenerationReport]:
    """Execute a plan with up to ``cfg.concurrency_limit`` requests in flight.

    Results are assembled in plan order whatever order they complete in.
    Unusable completions (empty, unparseable pair) are logged as failures and
    skipped; transport failures abort the batch.
    """
    specs = specs or default_prompt_specs()

    def run(task: GenerationTask) -> list[Sample]:
        if task.kind == "direct":
            return [generate_direct(plan.lang, task.label, task.topic, chat,
                                    sample_id=task.task_id, spec=specs["direct"])]
        if task.kind == "paraphrase":
            return [generate_paraphrase(task.parent, chat, sample_id=task.task_id,
                                        spec=specs["paraphrase"])]
        if task.kind == "contrastive":
            return list(generate_contrastive(plan.lang, task.topic, chat, pair_id=task.task_id,
                                             spec=specs["contrastive"]))
        if translator is None:
            raise ConfigError("backtranslation tasks need a translation client")
        return [backtranslate_sample(task.parent, cfg.pivots, translator, sample_id=task.task_id)]

    def guarded(task: GenerationTask) -> list[Sample] | Exception:
        try:
            return run(task)
        except (EmptyCompletionError, ContrastiveFormatError) as exc:
            return exc

    if any(t.kind != "backtranslation" for t in plan.tasks) and chat is None:
        raise ConfigError("generation tasks need a chat client")
    with ThreadPoolExecutor(max_workers=cfg.concurrency_limit) as pool:
        results = list(pool.map(guarded, plan.tasks))

    report = GenerationReport(plan.summary())
    samples: list[Sample] = []
    for task, result in zip(plan.tasks, results):
        if isinstance(result, Exception):
            report.failures.append({"task_id": task.task_id, "error": str(result)})
            logger.warning("task %s failed: %s", task.task_id, result)
            continue
        samples.extend(result)
    report.produced = len(samples)
    report.requests = sum(c.request_count for c in (chat, translator) if c is not None)
    return Dataset(plan.lang, tuple(samples)), report


def generate(
    lang: str,
    cfg: RunConfig,
    chat: ChatClient | None,
    train: Dataset | None = None,
    *,
    translator: TranslationClient | None = None,
    n_backtranslation: int = 0,
    total_n: int | None = None,
    catalog: TopicCatalog | None = None,
    on_plan: Callable[[GenerationBatchPlan], None] | None = None,
) -> tuple[Dataset, GenerationReport]:
    plan = plan_batch(lang, cfg, train, catalog, total_n, n_backtranslation)
    if on_plan is not None:
        on_plan(plan)
    return run_batch(plan, chat, cfg, translator)
