"""Reproduction harness for the full-scale benchmark (user-supplied data only).

Nothing here downloads anything. Point it at a directory laid out as
``<dir>/<word_class>/{train,dev,test}.tsv`` (or any layout the dataset loader
accepts) and at a 300-d embedding text file, and it trains the full model per
word class and compares F1 with the reference figures below.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .config import TrainConfig
from .dataset import load_dataset
from .embeddings import load_embeddings
from .trainer import run_suite

# Reference (P, R, F1) per embedding family and word class, random split.
REFERENCE_SCORES = {
    "fasttext": {
        "adjective": (0.896, 0.919, 0.908),
        "verb": (0.899, 0.932, 0.915),
        "noun": (0.895, 0.871, 0.883),
    },
    "dlce": {
        "adjective": (0.936, 0.945, 0.940),
        "verb": (0.913, 0.953, 0.933),
        "noun": (0.925, 0.953, 0.939),
    },
}
BENCHMARK_CLASSES = ("adjective", "verb", "noun")
F1_TOLERANCE = 0.03

ENV_DATA = "ICENET_BENCHMARK_DIR"
ENV_EMBEDDINGS = "ICENET_EMBEDDINGS"
ENV_FAMILY = "ICENET_EMBEDDING_FAMILY"


@dataclass
class ClassResult:
    word_class: str
    f1: float
    reference_f1: float

    @property
    def gap(self) -> float:
        return self.f1 - self.reference_f1

    @property
    def within_tolerance(self) -> bool:
        return abs(self.gap) <= F1_TOLERANCE


def configured() -> dict | None:
    """Paths from the environment, or None when the benchmark is not supplied."""
    data, emb = os.environ.get(ENV_DATA), os.environ.get(ENV_EMBEDDINGS)
    if not data or not emb:
        return None
    return {"data": data, "embeddings": emb,
            "family": os.environ.get(ENV_FAMILY, "fasttext").lower()}


def reproduce(data_dir, embeddings_path, family: str = "fasttext",
              word_classes=BENCHMARK_CLASSES, cfg: TrainConfig | None = None,
              n_runs: int = 5) -> list[ClassResult]:
    if family not in REFERENCE_SCORES:
        raise ValueError(f"unknown embedding family {family!r}; use one of {sorted(REFERENCE_SCORES)}")
    cfg = cfg or TrainConfig()
    table = load_embeddings(embeddings_path, cfg.d, oov_seed=cfg.oov_seed)
    out = []
    for wc in word_classes:
        ds = load_dataset(data_dir, word_class=wc)
        suite = run_suite(ds, table, cfg.replace(word_class=wc), n_runs=n_runs)
        out.append(ClassResult(wc, suite.test.f1, REFERENCE_SCORES[family][wc][2]))
    return out
