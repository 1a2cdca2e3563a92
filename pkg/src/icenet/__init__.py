"""Interlaced encoder networks for antonym vs synonym distinction."""

from .config import TrainConfig
from .dataset import RelationPair, SplitDataset, load_dataset, sample_negatives
from .embeddings import EmbeddingTable, load_embeddings
from .metrics import EvalReport, aggregate, evaluate
from .synthetic import generate_synthetic
from .trainer import RunRecord, run_suite, train_full

__all__ = [
    "EmbeddingTable", "EvalReport", "RelationPair", "RunRecord", "SplitDataset", "TrainConfig",
    "aggregate", "evaluate", "generate_synthetic", "load_dataset", "load_embeddings",
    "run_suite", "sample_negatives", "train_full",
]

__version__ = "0.1.0"
