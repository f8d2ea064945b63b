"""Sentence-embedding providers used by deduplication and consistency checks.

Three interchangeable backends:

* ``HashEmbeddingProvider`` (``test_deterministic``): a hashed bag of words.
  Texts sharing words get correlated vectors, so similarity behaves sensibly
  in offline tests and the output is stable across runs and machines.
* ``FileBackedProvider`` (``file_backed``): vectors precomputed elsewhere and
  stored in a sidecar JSON file keyed by the SHA-256 hex digest of the text.
* ``HttpEmbeddingProvider`` (``http``): ``POST {base_url}/embed`` with
  ``{"texts": [...]}`` returning ``{"vectors": [[...], ...]}``.
"""

from __future__ import annotations

import hashlib
import json
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ..errors import EmbeddingError, ServiceError
from ..rng import SplitMix64, derive_seed
from ..synth.client import JsonEndpoint


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class EmbeddingProvider:
    name: str = "provider"
    mode: str = ""
    dimension: int = 0

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        raise NotImplementedError

    def _check(self, vectors: np.ndarray, n: int) -> np.ndarray:
        if vectors.shape != (n, self.dimension):
            raise EmbeddingError(
                f"{self.name}: expected {n}x{self.dimension} vectors, got {vectors.shape}"
            )
        return vectors


_TOKEN = re.compile(r"\w+", re.UNICODE)


class HashEmbeddingProvider(EmbeddingProvider):
    mode = "test_deterministic"

    def __init__(self, dimension: int = 64, name: str = "hash-bow"):
        self.dimension = dimension
        self.name = name
        self._cache: dict[str, np.ndarray] = {}

    def _unit(self, key: str) -> np.ndarray:
        vec = self._cache.get(key)
        if vec is None:
            rng = SplitMix64(derive_seed("embed", key))
            vec = np.array([2.0 * rng.random() - 1.0 for _ in range(self.dimension)])
            self._cache[key] = vec
        return vec

    def embed_one(self, text: str) -> np.ndarray:
        tokens = _TOKEN.findall(text.lower())
        vec = np.zeros(self.dimension)
        for tok in tokens:
            vec += self._unit("tok:" + tok)
        # a small whole-text term keeps punctuation-only texts non-zero
        return vec + 0.05 * self._unit("txt:" + text)

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension))
        return self._check(np.stack([self.embed_one(t) for t in texts]), len(texts))


class FileBackedProvider(EmbeddingProvider):
    mode = "file_backed"

    def __init__(self, table: Mapping[str, Sequence[float]], name: str = "file"):
        if not table:
            raise EmbeddingError("embedding table is empty")
        self._table = {k: np.asarray(v, dtype=float) for k, v in table.items()}
        dims = {v.shape for v in self._table.values()}
        if len(dims) != 1 or len(next(iter(dims))) != 1:
            raise EmbeddingError("embedding table mixes vector dimensions")
        self.dimension = next(iter(dims))[0]
        self.name = name

    @classmethod
    def from_file(cls, path: str | Path) -> "FileBackedProvider":
        try:
            with open(path, encoding="utf-8") as fh:
                table = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise EmbeddingError(f"cannot load embeddings from {path}: {exc}") from None
        return cls(table, name=str(path))

    @classmethod
    def from_texts(cls, vectors: Mapping[str, Sequence[float]], name: str = "memory") -> "FileBackedProvider":
        return cls({text_digest(t): v for t, v in vectors.items()}, name=name)

    @staticmethod
    def write(path: str | Path, vectors: Mapping[str, Sequence[float]]) -> None:
        table = {text_digest(t): [float(x) for x in v] for t, v in vectors.items()}
        Path(path).write_text(json.dumps(table, sort_keys=True), encoding="utf-8")

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension))
        rows = []
        for t in texts:
            vec = self._table.get(text_digest(t))
            if vec is None:
                raise EmbeddingError(f"{self.name}: no vector for text {t[:40]!r}")
            rows.append(vec)
        return self._check(np.stack(rows), len(texts))


class HttpEmbeddingProvider(EmbeddingProvider):
    mode = "http"

    def __init__(
        self,
        base_url: str,
        dimension: int | None = None,
        *,
        batch_size: int = 64,
        concurrency: int = 4,
        **client_kwargs: Any,
    ):
        self._client = JsonEndpoint(base_url, **client_kwargs)
        self.name = base_url
        self.dimension = dimension or 0
        self.batch_size = batch_size
        self.concurrency = concurrency

    def _batch(self, texts: Sequence[str]) -> np.ndarray:
        try:
            data = self._client.post("embed", {"texts": list(texts)})
        except ServiceError as exc:
            raise EmbeddingError(str(exc)) from exc
        try:
            vectors = np.asarray(data["vectors"], dtype=float)
        except (KeyError, TypeError, ValueError):
            raise EmbeddingError(f"{self.name}: malformed /embed response") from None
        if vectors.ndim != 2 or len(vectors) != len(texts):
            raise EmbeddingError(f"{self.name}: expected {len(texts)} vectors")
        return vectors

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        chunks = [texts[i:i + self.batch_size] for i in range(0, len(texts), self.batch_size)]
        if not chunks:
            return np.zeros((0, self.dimension))
        with ThreadPoolExecutor(max_workers=self.concurrency) as pool:
            parts = list(pool.map(self._batch, chunks))
        vectors = np.concatenate(parts)
        if not self.dimension:
            self.dimension = vectors.shape[1]
        return self._check(vectors, len(texts))


class EmbeddingCache:
    """Embeds each distinct text once and hands out vectors by text."""

    def __init__(self, provider: EmbeddingProvider):
        self.provider = provider
        self._vectors: dict[str, np.ndarray] = {}

    def prefetch(self, texts: Sequence[str]) -> None:
        todo = list(dict.fromkeys(t for t in texts if t not in self._vectors))
        if todo:
            for t, v in zip(todo, self.provider.embed(todo)):
                self._vectors[t] = v

    def __getitem__(self, text: str) -> np.ndarray:
        if text not in self._vectors:
            self.prefetch([text])
        return self._vectors[text]

    def matrix(self, texts: Sequence[str]) -> np.ndarray:
        self.prefetch(texts)
        if not texts:
            return np.zeros((0, self.provider.dimension))
        return np.stack([self._vectors[t] for t in texts])
