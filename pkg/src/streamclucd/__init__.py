"""Bounded-memory one-pass clustering of categorical data streams."""
from .baselines import Squeezer, chunked_kmodes_stream, kmodes_fit, squeezer_run
from .clusterer import (AssignmentOutcome, ClusterModel, ClustererConfig, ConfigError,
                        MissingPolicy, ModelSnapshot, feed, process_record, run_stream, snapshot)
from .datagen import GenSpec, generate
from .evaluation import EvalReport, accuracy, memory_report, sweep
from .lossy import ClusterHistogram, LossyEntry, LossyParams

__all__ = [
    "AssignmentOutcome", "ClusterHistogram", "ClusterModel", "ClustererConfig", "ConfigError",
    "EvalReport", "GenSpec", "LossyEntry", "LossyParams", "MissingPolicy", "ModelSnapshot",
    "Squeezer", "accuracy", "chunked_kmodes_stream", "feed", "generate", "kmodes_fit",
    "memory_report", "process_record", "run_stream", "snapshot", "squeezer_run", "sweep",
]
__version__ = "0.1.0"
