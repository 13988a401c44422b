"""Featurisation, splits, loss, training, metrics and synthetic benchmarks.

``nolgat.pipeline.experiment`` is imported on demand; it depends on the report writers.
"""

from .featurize import featurize, hashed_tf, load_dataset, load_text_corpus
from .loss import masked_bce_loss
from .metrics import MetricsReport, MetricsSummary, compute_metrics, summarize
from .splits import SplitSpec, make_split
from .synth import synth_corpus, synth_longrange
from .train import TrainResult, train

__all__ = [
    "MetricsReport",
    "MetricsSummary",
    "SplitSpec",
    "TrainResult",
    "compute_metrics",
    "featurize",
    "hashed_tf",
    "load_dataset",
    "load_text_corpus",
    "make_split",
    "masked_bce_loss",
    "summarize",
    "synth_corpus",
    "synth_longrange",
    "train",
]
