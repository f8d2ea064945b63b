"""Decision-layer and data-layer tooling for multilingual polarization detection."""

from .config import RunConfig, load_config
from .core import (
    Dataset,
    PredictionRecord,
    PredictionSet,
    Sample,
    align,
    read_dataset,
    read_predictions,
    write_dataset,
    write_predictions,
)
from .ensemble import TunedDecision, combine_average, combine_weighted, select_strategy
from .metrics import apply_threshold, macro_f1
from .thresholds import tune_threshold

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "PredictionRecord",
    "PredictionSet",
    "RunConfig",
    "Sample",
    "TunedDecision",
    "align",
    "apply_threshold",
    "combine_average",
    "combine_weighted",
    "load_config",
    "macro_f1",
    "read_dataset",
    "read_predictions",
    "select_strategy",
    "tune_threshold",
    "write_dataset",
    "write_predictions",
]
