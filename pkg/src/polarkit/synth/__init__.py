from .client import ChatClient, TranslationClient
from .generate import (
    allocate_mix,
    backtranslate,
    backtranslate_sample,
    crosslingual_transfer,
    describe_requests,
    direct_label_targets,
    generate,
    generate_contrastive,
    generate_direct,
    generate_paraphrase,
    parse_contrastive,
    plan_batch,
    run_batch,
)
from .prompts import PromptSpec, Topic, TopicCatalog, default_prompt_specs

__all__ = [
    "ChatClient",
    "PromptSpec",
    "Topic",
    "TopicCatalog",
    "TranslationClient",
    "allocate_mix",
    "backtranslate",
    "backtranslate_sample",
    "crosslingual_transfer",
    "default_prompt_specs",
    "describe_requests",
    "direct_label_targets",
    "generate",
    "generate_contrastive",
    "generate_direct",
    "generate_paraphrase",
    "parse_contrastive",
    "plan_batch",
    "run_batch",
]
