"""The two feed-forward projections and their margin losses.

``f1`` is trained on synonym pairs. ``f2`` is trained on antonym pairs and is
always paired with ``f1`` on the tail side (the interlacing), so the antonym
loss sends gradients into both encoders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import ContractError, DimensionError, Tensor
from .embeddings import OOV_RANDOM, EmbeddingTable


def glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


@dataclass
class EncoderParams:
    W11: Tensor
    b11: Tensor
    W12: Tensor
    b12: Tensor
    W21: Tensor
    b21: Tensor
    W22: Tensor
    b22: Tensor
    gamma1: float = 0.9
    gamma2: float = 0.9
    activation: str = "tanh"

    NAMES = ("W11", "b11", "W12", "b12", "W21", "b21", "W22", "b22")

    def __post_init__(self):
        for g in (self.gamma1, self.gamma2):
            if not 0.0 < g <= 1.0:
                raise ValueError(f"margins must lie in (0, 1], got {g}")
        if self.activation not in ("sigmoid", "tanh"):
            raise ValueError(f"encoder activation must be sigmoid or tanh, got {self.activation!r}")

    @classmethod
    def init(cls, d: int = 300, p: int = 80, hidden: int = 150, seed: int = 0,
             **kwargs) -> "EncoderParams":
        rng = np.random.default_rng(seed)
        t = {}
        for enc in ("1", "2"):
            t[f"W{enc}1"] = glorot(rng, hidden, d)
            t[f"b{enc}1"] = np.zeros(hidden)
            t[f"W{enc}2"] = glorot(rng, p, hidden)
            t[f"b{enc}2"] = np.zeros(p)
        return cls(**{k: Tensor(v, requires_grad=True, name=k) for k, v in t.items()}, **kwargs)

    @classmethod
    def zeros(cls, d: int, p: int, hidden: int, **kwargs) -> "EncoderParams":
        shapes = {"W11": (hidden, d), "b11": (hidden,), "W12": (p, hidden), "b12": (p,)}
        shapes.update({k.replace("1", "2", 1): v for k, v in shapes.items()})
        return cls(**{k: Tensor(np.zeros(s), requires_grad=True, name=k) for k, s in shapes.items()},
                   **kwargs)

    @property
    def d(self) -> int:
        return self.W11.shape[1]

    @property
    def p(self) -> int:
        return self.W12.shape[0]

    @property
    def hidden(self) -> int:
        return self.W11.shape[0]

    def tensors(self) -> dict[str, Tensor]:
        return {k: getattr(self, k) for k in self.NAMES}

    def parameters(self) -> list[Tensor]:
        return list(self.tensors().values())

    def copy(self) -> "EncoderParams":
        ts = {k: Tensor(v.data.copy(), requires_grad=True, name=k) for k, v in self.tensors().items()}
        return EncoderParams(**ts, gamma1=self.gamma1, gamma2=self.gamma2, activation=self.activation)


def _project(x, W1: Tensor, b1: Tensor, W2: Tensor, b2: Tensor, act: str) -> Tensor:
    x = ad.as_tensor(x)
    vector = x.data.ndim == 1
    if vector:
        x = ad.reshape(x, (1, -1))
    if x.shape[1] != W1.shape[1]:
        raise DimensionError(f"input has {x.shape[1]} features, encoder expects {W1.shape[1]}")
    h = ad.activation(ad.linear(x, W1, b1), act)
    out = ad.activation(ad.linear(h, W2, b2), act)
    return ad.reshape(out, (out.shape[1],)) if vector else out


def f1(x, params: EncoderParams) -> Tensor:
    """act(W12 act(W11 x + b11) + b12) on a vector (d,) or row batch (n, d)."""
    return _project(x, params.W11, params.b11, params.W12, params.b12, params.activation)


def f2(x, params: EncoderParams) -> Tensor:
    return _project(x, params.W21, params.b21, params.W22, params.b22, params.activation)


def margin_loss(pos_scores: Tensor, neg_scores: Tensor | None, margin: float) -> Tensor:
    """sum max(0, margin - s_pos) + sum max(0, margin + s_neg)."""
    if pos_scores.data.size == 0:
        raise ContractError("margin loss needs at least one positive pair")
    loss = ad.total(ad.hinge(margin - pos_scores))
    if neg_scores is not None and neg_scores.data.size:
        loss = loss + ad.total(ad.hinge(margin + neg_scores))
    return loss


def synonym_scores(F1: Tensor, head_idx, tail_idx) -> Tensor:
    """tanh(<f1(x_h), f1(x_t)>) for rows of a precomputed f1 output matrix."""
    return ad.inner_tanh_score(ad.take_rows(F1, head_idx), ad.take_rows(F1, tail_idx))


def antonym_scores(F1: Tensor, F2: Tensor, head_idx, tail_idx) -> Tensor:
    """tanh(<f2(x_h), f1(x_t)>): head through ENC-2, tail through ENC-1."""
    return ad.inner_tanh_score(ad.take_rows(F2, head_idx), ad.take_rows(F1, tail_idx))


def _ends(pair) -> tuple[str, str]:
    return (pair.head, pair.tail) if hasattr(pair, "head") else (pair[0], pair[1])


def _pairs_matrix(pairs: Sequence, table: EmbeddingTable, mode: str):
    ends = [_ends(p) for p in pairs]
    words: dict[str, int] = {}
    for h, t in ends:
        words.setdefault(h, len(words))
        words.setdefault(t, len(words))
    heads = np.array([words[h] for h, _ in ends], dtype=np.intp)
    tails = np.array([words[t] for _, t in ends], dtype=np.intp)
    return Tensor(table.matrix(words, mode)), heads, tails


def _pair_loss(positives, negatives, params, table, margin, score_fn, mode) -> Tensor:
    positives = list(positives)
    negatives = list(negatives or [])
    if not positives:
        raise ContractError("loss needs at least one positive pair")
    X, heads, tails = _pairs_matrix(positives + negatives, table, mode)
    F1 = f1(X, params)
    F2 = f2(X, params) if score_fn is antonym_scores else None
    n = len(positives)

    def scores(sl):
        if F2 is None:
            return synonym_scores(F1, heads[sl], tails[sl])
        return antonym_scores(F1, F2, heads[sl], tails[sl])

    neg = scores(slice(n, None)) if negatives else None
    return margin_loss(scores(slice(0, n)), neg, margin)


def loss_L1(positives, negatives, params: EncoderParams, table: EmbeddingTable,
            mode: str = OOV_RANDOM) -> Tensor:
    """Synonym margin loss. Pairs are anything with ``.head``/``.tail`` or 2-tuples."""
    return _pair_loss(positives, negatives, params, table, params.gamma1, synonym_scores, mode)


def loss_L2(positives, negatives, params: EncoderParams, table: EmbeddingTable,
            mode: str = OOV_RANDOM) -> Tensor:
    """Antonym margin loss with the f2(head)/f1(tail) pairing."""
    return _pair_loss(positives, negatives, params, table, params.gamma2, antonym_scores, mode)
