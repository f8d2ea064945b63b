"""Shared data model and line-delimited JSON IO.

Dataset files hold one sample object per line. Prediction files start with a
header line ``{"lang": ..., "model": ...}`` followed by ``{"id", "prob"}``
records. ``prob`` is always the probability of class 1 (polarized).
"""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .errors import (
    DataValidationError,
    DuplicateIdError,
    MissingPredictionError,
    ParseError,
    UnknownLanguageError,
)

logger = logging.getLogger(__name__)

DEFAULT_LANGUAGES: dict[str, str] = {
    "amh": "Amharic",
    "arb": "Arabic",
    "ben": "Bengali",
    "mya": "Burmese",
    "zho": "Chinese",
    "eng": "English",
    "deu": "German",
    "hau": "Hausa",
    "hin": "Hindi",
    "ita": "Italian",
    "khm": "Khmer",
    "nep": "Nepali",
    "ori": "Odia",
    "fas": "Persian",
    "pol": "Polish",
    "pan": "Punjabi",
    "rus": "Russian",
    "spa": "Spanish",
    "swa": "Swahili",
    "tel": "Telugu",
    "tur": "Turkish",
    "urd": "Urdu",
}

SOURCES = ("real", "synthetic")
STRATEGIES = ("direct", "paraphrase", "contrastive", "backtranslation", "crosslingual")

_CODE_RE = re.compile(r"^[a-z]{3}$")
_SAMPLE_FIELDS = ("id", "lang", "label", "text", "source", "strategy", "topic", "parent_id")


def validate_lang(code: str, registry: Iterable[str] | None = None) -> str:
    if not isinstance(code, str) or not _CODE_RE.match(code):
        raise UnknownLanguageError(str(code))
    allowed = DEFAULT_LANGUAGES if registry is None else registry
    if code not in allowed:
        raise UnknownLanguageError(code)
    return code


def language_name(code: str) -> str:
    return DEFAULT_LANGUAGES.get(code, code)


@dataclass(frozen=True)
class Sample:
    id: str
    lang: str
    text: str
    label: int
    source: str = "real"
    strategy: str | None = None
    topic: str | None = None
    parent_id: str | None = None
    # unknown JSON fields, kept so files round-trip
    extra: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise DataValidationError("sample id must be a non-empty string")
        if type(self.label) is not int or self.label not in (0, 1):
            raise DataValidationError(f"sample {self.id!r}: label must be 0 or 1, got {self.label!r}")
        if self.source not in SOURCES:
            raise DataValidationError(f"sample {self.id!r}: unknown source {self.source!r}")
        if self.source == "synthetic":
            if self.strategy not in STRATEGIES:
                raise DataValidationError(
                    f"sample {self.id!r}: synthetic samples need a strategy in {STRATEGIES}"
                )
        elif self.strategy is not None:
            raise DataValidationError(f"sample {self.id!r}: real samples cannot carry a strategy")
        if not isinstance(self.text, str) or not self.text.strip():
            raise DataValidationError(f"sample {self.id!r}: text is empty")

    @property
    def is_synthetic(self) -> bool:
        return self.source == "synthetic"

    def replace(self, **changes: Any) -> "Sample":
        values = {name: getattr(self, name) for name in _SAMPLE_FIELDS}
        values["extra"] = dict(self.extra)
        values.update(changes)
        return Sample(**values)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.id,
            "lang": self.lang,
            "label": self.label,
            "text": self.text,
            "source": self.source,
        }
        for name in ("strategy", "topic", "parent_id"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        for key, value in self.extra.items():
            if key not in out:
                out[key] = value
        return out

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any], registry: Iterable[str] | None = None) -> "Sample":
        missing = [k for k in ("id", "lang", "label", "text") if k not in obj]
        if missing:
            raise DataValidationError(f"missing field(s): {', '.join(missing)}")
        validate_lang(obj["lang"], registry)
        extra = {k: v for k, v in obj.items() if k not in _SAMPLE_FIELDS}
        return cls(
            id=obj["id"],
            lang=obj["lang"],
            text=obj["text"],
            label=obj["label"],
            source=obj.get("source", "real"),
            strategy=obj.get("strategy"),
            topic=obj.get("topic"),
            parent_id=obj.get("parent_id"),
            extra=extra,
        )


@dataclass(frozen=True)
class Dataset:
    lang: str | None
    samples: tuple[Sample, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        seen: set[str] = set()
        for s in self.samples:
            if self.lang is not None and s.lang != self.lang:
                raise DataValidationError(
                    f"sample {s.id!r} has lang {s.lang!r}, dataset is {self.lang!r}"
                )
            if s.id in seen:
                raise DuplicateIdError(s.id)
            seen.add(s.id)

    @classmethod
    def of(cls, samples: Iterable[Sample], lang: str | None = None) -> "Dataset":
        samples = tuple(samples)
        if lang is None and samples:
            lang = samples[0].lang
        return cls(lang, samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    @property
    def labels(self) -> list[int]:
        return [s.label for s in self.samples]

    def by_id(self) -> dict[str, Sample]:
        return {s.id: s for s in self.samples}


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    prob: float

    def __post_init__(self) -> None:
        if isinstance(self.prob, bool) or not isinstance(self.prob, (int, float)):
            raise DataValidationError(f"prediction {self.id!r}: prob must be a number")
        object.__setattr__(self, "prob", float(self.prob))
        if not 0.0 <= self.prob <= 1.0:
            raise DataValidationError(f"prediction {self.id!r}: prob {self.prob} outside [0, 1]")


@dataclass(frozen=True)
class PredictionSet:
    lang: str
    model: str
    records: tuple[PredictionRecord, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        seen: set[str] = set()
        for r in self.records:
            if r.id in seen:
                raise DuplicateIdError(r.id)
            seen.add(r.id)

    def __len__(self) -> int:
        return len(self.records)

    def as_dict(self) -> dict[str, float]:
        return {r.id: r.prob for r in self.records}


@dataclass(frozen=True)
class Alignment:
    labels: tuple[int, ...]
    probs: tuple[float, ...]
    orphans: tuple[str, ...] = ()

    @property
    def pairs(self) -> list[tuple[int, float]]:
        return list(zip(self.labels, self.probs))


def align(dataset: Dataset, predictions: PredictionSet) -> Alignment:
    """Join labels and probabilities by id, in dataset order.

    Every dataset id needs a prediction. Predictions for ids the dataset does
    not contain are tolerated and reported as ``orphans``.
    """
    if dataset.lang is not None and predictions.lang != dataset.lang:
        raise DataValidationError(
            f"predictions are for {predictions.lang!r}, dataset is {dataset.lang!r}"
        )
    probs = predictions.as_dict()
    missing = [s.id for s in dataset.samples if s.id not in probs]
    if missing:
        raise MissingPredictionError(missing)
    dataset_ids = set(dataset.ids)
    orphans = tuple(r.id for r in predictions.records if r.id not in dataset_ids)
    if orphans:
        logger.warning("%d orphan prediction(s) ignored for %s/%s", len(orphans),
                       predictions.lang, predictions.model)
    return Alignment(
        labels=tuple(s.label for s in dataset.samples),
        probs=tuple(probs[s.id] for s in dataset.samples),
        orphans=orphans,
    )


# --- IO -------------------------------------------------------------------

def _dumps(obj: Mapping[str, Any]) -> str:
    return json.dumps(obj, ensure_ascii=False)


def write_text_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_jsonl(path: str | os.PathLike, rows: Iterable[Mapping[str, Any]]) -> None:
    write_text_atomic(path, "".join(_dumps(r) + "\n" for r in rows))


def _iter_json_lines(path: str | os.PathLike) -> Iterator[tuple[int, Any]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", str(path), lineno) from None


def read_dataset(
    path: str | os.PathLike,
    lang: str | None = None,
    registry: Iterable[str] | None = None,
) -> Dataset:
    samples: list[Sample] = []
    seen: set[str] = set()
    for lineno, obj in _iter_json_lines(path):
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object", str(path), lineno)
        try:
            sample = Sample.from_dict(obj, registry)
        except UnknownLanguageError:
            raise
        except DataValidationError as exc:
            raise ParseError(str(exc), str(path), lineno) from None
        if sample.id in seen:
            raise DuplicateIdError(sample.id, lineno)
        if lang is None:
            lang = sample.lang
        elif sample.lang != lang:
            raise ParseError(f"language {sample.lang!r} differs from {lang!r}", str(path), lineno)
        seen.add(sample.id)
        samples.append(sample)
    return Dataset(lang, tuple(samples))


def write_dataset(dataset: Dataset, path: str | os.PathLike) -> None:
    write_jsonl(path, (s.to_dict() for s in dataset.samples))


def read_predictions(path: str | os.PathLike, registry: Iterable[str] | None = None) -> PredictionSet:
    header: dict[str, Any] | None = None
    records: list[PredictionRecord] = []
    seen: set[str] = set()
    for lineno, obj in _iter_json_lines(path):
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object", str(path), lineno)
        if header is None:
            if "lang" not in obj or "model" not in obj:
                raise ParseError('first line must be a {"lang", "model"} header', str(path), lineno)
            validate_lang(obj["lang"], registry)
            header = obj
            continue
        if "id" not in obj or "prob" not in obj:
            raise ParseError('prediction lines need "id" and "prob"', str(path), lineno)
        try:
            record = PredictionRecord(str(obj["id"]), obj["prob"])
        except DataValidationError as exc:
            raise ParseError(str(exc), str(path), lineno) from None
        if record.id in seen:
            raise DuplicateIdError(record.id, lineno)
        seen.add(record.id)
        records.append(record)
    if header is None:
        raise ParseError("missing header line", str(path))
    return PredictionSet(header["lang"], str(header["model"]), tuple(records))


def write_predictions(predictions: PredictionSet, path: str | os.PathLike) -> None:
    rows: list[dict[str, Any]] = [{"lang": predictions.lang, "model": predictions.model}]
    rows.extend({"id": r.id, "prob": r.prob} for r in predictions.records)
    write_jsonl(path, rows)


def predictions_from(lang: str, model: str, ids: Sequence[str], probs: Sequence[float]) -> PredictionSet:
    if len(ids) != len(probs):
        raise DataValidationError("ids and probs differ in length")
    return PredictionSet(lang, model, tuple(PredictionRecord(i, p) for i, p in zip(ids, probs)))
