"""Versioned ``.npz`` checkpoints.

Layout (all keys are plain numpy arrays, so ``np.load`` is enough to inspect one):

``__format__``           the string ``icenet-checkpoint``
``__version__``          integer format version (currently 1)
``__config__``           TrainConfig in its ``key = value`` text form
``__meta__``             JSON object with free-form run metadata
``enc/<name>``           encoder tensors W11, b11, ..., b22
``gcn/<name>``           GCN tensors W_hh1 ... W_tt2, w, b
``vocab``                node/vocabulary order (unicode array)
``X``                    input embedding rows in vocabulary order
``adj_h/{data,indices,indptr,shape}`` and ``adj_t/...``
                         normalized CSR adjacencies (absent for the no-graph variant)
``pairs/<split>``        optional (n, 3) head/tail/label array so ``eval`` needs no data dir
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .autodiff import Tensor
from .config import TrainConfig
from .dataset import SPLITS, RelationPair, SplitDataset
from .encoders import EncoderParams
from .gcn import GcnParams

FORMAT = "icenet-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


class Checkpoint(NamedTuple):
    model: object
    config: TrainConfig
    meta: dict
    dataset: SplitDataset | None


def save_checkpoint(path, model, config: TrainConfig, meta: dict | None = None,
                    dataset: SplitDataset | None = None) -> Path:
    path = Path(path)
    arrays: dict[str, np.ndarray] = {
        "__format__": np.array(FORMAT),
        "__version__": np.array(VERSION),
        "__config__": np.array(config.dumps()),
        "__meta__": np.array(json.dumps(meta or {}, sort_keys=True)),
        "vocab": np.array(model.vocabulary, dtype=str),
        "X": model.X,
    }
    for k, t in model.encoders.tensors().items():
        arrays[f"enc/{k}"] = t.data
    for k, t in model.gcn.tensors().items():
        arrays[f"gcn/{k}"] = t.data
    for name in ("adj_h", "adj_t"):
        adj = getattr(model, name)
        if adj is not None:
            adj = sp.csr_matrix(adj)
            arrays[f"{name}/data"] = adj.data
            arrays[f"{name}/indices"] = adj.indices
            arrays[f"{name}/indptr"] = adj.indptr
            arrays[f"{name}/shape"] = np.array(adj.shape)
    if dataset is not None:
        arrays["__word_class__"] = np.array(dataset.word_class)
        for split in SPLITS:
            rows = [(p.head, p.tail, p.label) for p in dataset.split(split)]
            arrays[f"pairs/{split}"] = np.array(rows, dtype=str).reshape(-1, 3)
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **arrays)
    return path


def load_checkpoint(path) -> Checkpoint:
    from .trainer import Model

    with np.load(path, allow_pickle=False) as z:
        if "__format__" not in z.files or str(z["__format__"]) != FORMAT:
            raise CheckpointError(f"{path}: not an {FORMAT} file")
        version = int(z["__version__"])
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        config = TrainConfig.parse(str(z["__config__"]))
        meta = json.loads(str(z["__meta__"]))
        enc = {k: Tensor(z[f"enc/{k}"], requires_grad=True, name=k) for k in EncoderParams.NAMES}
        gcn = {k: Tensor(z[f"gcn/{k}"], requires_grad=True, name=k) for k in GcnParams.NAMES}
        adj = {}
        for name in ("adj_h", "adj_t"):
            if f"{name}/data" in z.files:
                adj[name] = sp.csr_matrix(
                    (z[f"{name}/data"], z[f"{name}/indices"], z[f"{name}/indptr"]),
                    shape=tuple(z[f"{name}/shape"]))
            else:
                adj[name] = None
        vocab = [str(w) for w in z["vocab"]]
        X = z["X"].copy()
        dataset = None
        if "pairs/train" in z.files:
            splits = {s: [RelationPair(str(h), str(t), str(lab), s) for h, t, lab in z[f"pairs/{s}"]]
                      for s in SPLITS}
            dataset = SplitDataset(str(z["__word_class__"]), splits["train"], splits["dev"],
                                   splits["test"])
    encoders = EncoderParams(**enc, gamma1=config.gamma1, gamma2=config.gamma2,
                             activation=config.activation)
    model = Model(encoders, GcnParams(**gcn), vocab, X, adj["adj_h"], adj["adj_t"])
    return Checkpoint(model, config, meta, dataset)
