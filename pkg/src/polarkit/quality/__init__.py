from .embeddings import (
    EmbeddingCache,
    EmbeddingProvider,
    FileBackedProvider,
    HashEmbeddingProvider,
    HttpEmbeddingProvider,
    text_digest,
)
from .filters import (
    DEFAULT_LEAKAGE_PATTERNS,
    STAGES,
    Drop,
    FilterReport,
    clean_and_length,
    cosine,
    dedup,
    leakage_filter,
    normalize_text,
    paraphrase_distinctness,
    roundtrip_consistency,
    run_pipeline,
)

__all__ = [
    "DEFAULT_LEAKAGE_PATTERNS",
    "STAGES",
    "Drop",
    "EmbeddingCache",
    "EmbeddingProvider",
    "FileBackedProvider",
    "FilterReport",
    "HashEmbeddingProvider",
    "HttpEmbeddingProvider",
    "clean_and_length",
    "cosine",
    "dedup",
    "leakage_filter",
    "normalize_text",
    "paraphrase_distinctness",
    "roundtrip_consistency",
    "run_pipeline",
    "text_digest",
]
