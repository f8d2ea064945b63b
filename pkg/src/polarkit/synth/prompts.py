"""Prompt templates, per-strategy sampling parameters and the topic catalog."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

REQUIRED_PLACEHOLDERS = {
    "direct": ("language", "topic", "target_label"),
    "paraphrase": ("language", "original_text"),
    "contrastive": ("language", "topic"),
}

# Substituted for {target_label} in the direct-generation template.
LABEL_INSTRUCTIONS = {
    1: (
        "The post must be polarizing: target a specific group with vilifying, stereotyping "
        "or dehumanizing language and show an us-versus-them mentality."
    ),
    0: (
        "The post must not be polarizing: discuss the topic in a neutral or balanced way "
        "without vilifying or stereotyping anyone."
    ),
}

_PLACEHOLDER = re.compile(r"\{(language|topic|original_text|target_label)\}")


@dataclass(frozen=True)
class PromptSpec:
    strategy: str
    temperature: float
    max_tokens: int
    template: str

    def __post_init__(self) -> None:
        if self.strategy not in REQUIRED_PLACEHOLDERS:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0.0 < self.temperature <= 2.0:
            raise ValueError("temperature must lie in (0, 2]")
        missing = [p for p in REQUIRED_PLACEHOLDERS[self.strategy] if "{" + p + "}" not in self.template]
        if missing:
            raise ValueError(f"{self.strategy} template lacks placeholder(s): {missing}")

    def render(self, **values: str) -> str:
        # only known placeholders are replaced, so braces in user text are safe
        return _PLACEHOLDER.sub(lambda m: values.get(m.group(1), m.group(0)), self.template)


def _template(name: str) -> str:
    return resources.files(__package__).joinpath("templates", f"{name}.txt").read_text("utf-8")


def default_prompt_specs(template_dir: str | Path | None = None) -> dict[str, PromptSpec]:
    def load(name: str) -> str:
        if template_dir is not None:
            return (Path(template_dir) / f"{name}.txt").read_text("utf-8")
        return _template(name)

    return {
        "direct": PromptSpec("direct", 0.9, 250, load("direct")),
        "paraphrase": PromptSpec("paraphrase", 0.7, 250, load("paraphrase")),
        "contrastive": PromptSpec("contrastive", 0.8, 500, load("contrastive")),
    }


@dataclass(frozen=True)
class Topic:
    category: str
    name: str


class TopicCatalog:
    def __init__(self, categories: Mapping[str, list[str]]):
        cats = {k: list(v) for k, v in categories.items() if not k.startswith("_")}
        if not cats or any(not v for v in cats.values()):
            raise ValueError("topic catalog needs at least one non-empty category")
        self.categories = cats

    @classmethod
    def default(cls) -> "TopicCatalog":
        text = resources.files(__package__).joinpath("topics.json").read_text("utf-8")
        return cls(json.loads(text))

    @classmethod
    def from_file(cls, path: str | Path) -> "TopicCatalog":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def topics(self) -> list[Topic]:
        return [Topic(c, t) for c, names in self.categories.items() for t in names]

    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.categories.values())
