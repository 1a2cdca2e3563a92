"""Two-layer attentive graph convolution, cosine pair features, softmax classifier."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import autodiff as ad
from .autodiff import ContractError, DimensionError, Tensor
from .encoders import glorot

log = logging.getLogger(__name__)

BRANCHES = ("hh", "ht", "th", "tt")


@dataclass
class GcnParams:
    W_hh1: Tensor
    W_hh2: Tensor
    W_ht1: Tensor
    W_ht2: Tensor
    W_th1: Tensor
    W_th2: Tensor
    W_tt1: Tensor
    W_tt2: Tensor
    w: Tensor  # (2, 4) classifier weights
    b: Tensor  # (2,)

    NAMES = ("W_hh1", "W_hh2", "W_ht1", "W_ht2", "W_th1", "W_th2", "W_tt1", "W_tt2", "w", "b")

    @classmethod
    def init(cls, p: int = 80, q: int = 60, hidden: int = 70, seed: int = 0) -> "GcnParams":
        rng = np.random.default_rng(seed)
        t = {}
        for br in BRANCHES:
            # stored (in, out): layers compute F @ W
            t[f"W_{br}1"] = glorot(rng, p, hidden)
            t[f"W_{br}2"] = glorot(rng, hidden, q)
        t["w"] = glorot(rng, 2, 4)
        t["b"] = np.zeros(2)
        return cls(**{k: Tensor(v, requires_grad=True, name=k) for k, v in t.items()})

    @classmethod
    def zeros(cls, p: int, q: int, hidden: int) -> "GcnParams":
        t = {}
        for br in BRANCHES:
            t[f"W_{br}1"] = np.zeros((p, hidden))
            t[f"W_{br}2"] = np.zeros((hidden, q))
        t["w"] = np.zeros((2, 4))
        t["b"] = np.zeros(2)
        return cls(**{k: Tensor(v, requires_grad=True, name=k) for k, v in t.items()})

    def tensors(self) -> dict[str, Tensor]:
        return {k: getattr(self, k) for k in self.NAMES}

    def parameters(self) -> list[Tensor]:
        return list(self.tensors().values())

    def copy(self) -> "GcnParams":
        return GcnParams(**{k: Tensor(v.data.copy(), requires_grad=True, name=k)
                            for k, v in self.tensors().items()})


class NodeReps(NamedTuple):
    X_hh: Tensor
    X_ht: Tensor
    X_th: Tensor
    X_tt: Tensor


def conv2(adj, F: Tensor, W1: Tensor, W2: Tensor) -> Tensor:
    """adj @ relu(adj @ F @ W1) @ W2."""
    h = ad.relu(ad.matmul(ad.spmm_fixed(adj, F), W1))
    return ad.spmm_fixed(adj, ad.matmul(h, W2))


def gcn_forward(f1_h: Tensor, f1_t: Tensor, f2_h: Tensor, f2_t: Tensor, graphs,
                params: GcnParams) -> NodeReps:
    """Four node representations.

    ``f*_h`` rows follow the head graph's node order, ``f*_t`` the tail
    graph's. ``graphs`` is ``(adj_h, adj_t)``, both already normalized.
    """
    adj_h, adj_t = graphs
    for name, F, adj in (("f1_h", f1_h, adj_h), ("f2_h", f2_h, adj_h),
                         ("f1_t", f1_t, adj_t), ("f2_t", f2_t, adj_t)):
        if F.shape[0] != adj.shape[0]:
            raise DimensionError(f"{name} has {F.shape[0]} rows but its graph has {adj.shape[0]} nodes")
    return NodeReps(
        X_hh=conv2(adj_h, f1_h, params.W_hh1, params.W_hh2),
        X_ht=conv2(adj_t, f1_t, params.W_ht1, params.W_ht2),
        X_th=conv2(adj_h, f2_h, params.W_th1, params.W_th2),
        X_tt=conv2(adj_t, f2_t, params.W_tt1, params.W_tt2),
    )


def score_features(head_rows, tail_rows, reps: NodeReps) -> Tensor:
    """(n, 4) matrix of [x1, x2, x3, x4] per pair.

    Head-role vectors come from ``head_rows`` of the head-graph outputs
    (X_hh, X_th), tail-role vectors from ``tail_rows`` of the tail-graph
    outputs (X_ht, X_tt).
    """
    hh = ad.take_rows(reps.X_hh, head_rows)
    th = ad.take_rows(reps.X_th, head_rows)
    ht = ad.take_rows(reps.X_ht, tail_rows)
    tt = ad.take_rows(reps.X_tt, tail_rows)
    # x1, x2 read as synonymy cues, x3, x4 as antonymy cues
    cols, degenerate = zip(
        ad.rowcos(th, tt),
        ad.rowcos(hh, ht),
        ad.rowcos(hh, tt),
        ad.rowcos(ht, th),
    )
    if sum(degenerate):
        log.warning("%d zero-norm representation(s) in cosine features; set to 0", sum(degenerate))
    return ad.stack_columns(cols)


def encoder_reps(F1: Tensor, F2: Tensor) -> NodeReps:
    """Representations for the no-graph variant: the raw encoder outputs."""
    return NodeReps(X_hh=F1, X_ht=F1, X_th=F2, X_tt=F2)


def logits(features: Tensor, params: GcnParams) -> Tensor:
    if features.data.ndim != 2 or features.shape[1] != 4:
        raise DimensionError(f"classifier expects (n, 4) features, got {features.shape}")
    return ad.linear(features, params.w, params.b)


def classify(features: Tensor, params: GcnParams) -> tuple[np.ndarray, np.ndarray]:
    """Class probabilities (n, 2) and argmax labels; ties go to synonym (0)."""
    probs = ad.softmax(logits(ad.as_tensor(features), params).data)
    return probs, np.argmax(probs, axis=1)


def loss_L3(features: Tensor, labels, params: GcnParams) -> Tensor:
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ContractError("cross-entropy loss needs a nonempty batch")
    return ad.softmax_cross_entropy(logits(features, params), labels)
