"""End-to-end training: M_init, graph freeze, then joint L1 + L2 + L3."""

from __future__ import annotations

import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .autodiff import Tensor
from .config import ConfigError, TrainConfig
from .dataset import ANTONYM, SYNONYM, SplitDataset, labels_of, pair_arrays
from .embeddings import EmbeddingTable
from .encoders import EncoderParams, f1, f2
from .gcn import GcnParams, encoder_reps, gcn_forward, logits, loss_L3, score_features
from .graph import (GraphBundle, _negatives_for, _paired_batches, construct, encoder_losses,
                    negative_arrays, train_m_init)
from .metrics import EvalReport, aggregate, evaluate_arrays
from .optim import Adam
from .synthetic import generate_synthetic

log = logging.getLogger(__name__)

__all__ = ["Model", "RunRecord", "SuiteResult", "TrainConfig", "train_full", "run_suite",
           "ablate", "generate_synthetic", "adjacency_checksum"]


def adjacency_checksum(adj: sp.spmatrix | None) -> str:
    if adj is None:
        return ""
    a = sp.csr_matrix(adj)
    h = hashlib.sha256()
    for arr in (a.indptr, a.indices, a.data):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


@dataclass
class Model:
    """Trained parameters plus everything needed to score pairs of the corpus."""

    encoders: EncoderParams
    gcn: GcnParams
    vocabulary: list[str]
    X: np.ndarray
    adj_h: sp.csr_matrix | None = None
    adj_t: sp.csr_matrix | None = None

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.vocabulary)}

    @property
    def uses_graph(self) -> bool:
        return self.adj_h is not None

    def reps(self, F1: Tensor, F2: Tensor):
        if not self.uses_graph:
            return encoder_reps(F1, F2)
        return gcn_forward(F1, F1, F2, F2, (self.adj_h, self.adj_t), self.gcn)

    def features(self, pairs) -> Tensor:
        Xt = Tensor(self.X)
        F1, F2 = f1(Xt, self.encoders), f2(Xt, self.encoders)
        h, t = pair_arrays(pairs, self.index)
        return score_features(h, t, self.reps(F1, F2))

    def predict_proba(self, pairs) -> np.ndarray:
        return ad.softmax(logits(self.features(pairs), self.gcn).data)

    def predict(self, pairs) -> np.ndarray:
        # argmax picks index 0 (synonym) on ties
        return np.argmax(self.predict_proba(pairs), axis=1)

    def evaluate(self, pairs, warn: bool = True) -> EvalReport:
        pairs = list(pairs)
        return evaluate_arrays(self.predict(pairs), labels_of(pairs), warn)

    def snapshot(self) -> "Model":
        return Model(self.encoders.copy(), self.gcn.copy(), self.vocabulary, self.X,
                     self.adj_h, self.adj_t)


@dataclass
class RunRecord:
    config: TrainConfig
    losses: list[dict] = field(default_factory=list)
    init_losses: list[tuple[float, float]] = field(default_factory=list)
    dev_f1: list[float] = field(default_factory=list)
    metrics: dict[str, EvalReport] = field(default_factory=dict)
    best_epoch: int = -1
    wall_clock: float = 0.0
    checkpoint_path: str | None = None
    adjacency_before: tuple[str, str] = ("", "")
    adjacency_after: tuple[str, str] = ("", "")
    graph_stats: dict = field(default_factory=dict)
    model: Model | None = field(default=None, repr=False)
    graphs: GraphBundle | None = field(default=None, repr=False)

    def summary(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "losses": self.losses,
            "dev_f1": self.dev_f1,
            "metrics": {k: v.as_dict() for k, v in self.metrics.items()},
            "best_epoch": self.best_epoch,
            "wall_clock": self.wall_clock,
            "checkpoint_path": self.checkpoint_path,
            "graph_stats": self.graph_stats,
        }


def _input_table(table: EmbeddingTable, cfg: TrainConfig) -> EmbeddingTable:
    if cfg.variant == "baseline1-random-vectors":
        return EmbeddingTable.random(table.dim, oov_seed=cfg.oov_seed + cfg.seed)
    return table


def train_full(ds: SplitDataset, table: EmbeddingTable, cfg: TrainConfig,
               m_init: EncoderParams | None = None) -> RunRecord:
    """Run all three phases and evaluate on dev and test.

    ``m_init`` lets several runs (e.g. an ablation over attention schemes)
    share one preliminary model; it is copied, never mutated.
    """
    start = time.perf_counter()
    if table.dim != cfg.d:
        raise ConfigError(f"embedding dim {table.dim} differs from config d={cfg.d}")
    if not ds.train:
        raise ConfigError("training split is empty")
    table = _input_table(table, cfg)
    table.prepopulate(ds.vocabulary)
    record = RunRecord(config=cfg)

    if m_init is None:
        m_init = train_m_init(ds, table, cfg, history=record.init_losses)
    X = table.matrix(ds.vocabulary)

    adj_h = adj_t = None
    if cfg.variant != "baseline2-no-gcn":
        bundle = construct(ds, m_init, X, cfg)
        adj_h, adj_t = bundle.adj_h, bundle.adj_t
        record.graphs = bundle
        record.graph_stats = {"G_h": bundle.g_h.stats(), "G_t": bundle.g_t.stats()}
        record.adjacency_before = (adjacency_checksum(adj_h), adjacency_checksum(adj_t))

    if cfg.cold_start:
        encoders = EncoderParams.init(cfg.d, cfg.p, cfg.enc_hidden, seed=cfg.seed + 1,
                                      gamma1=cfg.gamma1, gamma2=cfg.gamma2, activation=cfg.activation)
    else:
        encoders = m_init.copy()
    gcn = GcnParams.init(cfg.p, cfg.q, cfg.gcn_hidden, seed=cfg.seed + 2)
    model = Model(encoders, gcn, ds.vocabulary, X, adj_h, adj_t)
    _joint_training(ds, model, cfg, record)

    if adj_h is not None:
        record.adjacency_after = (adjacency_checksum(model.adj_h), adjacency_checksum(model.adj_t))
    record.metrics = {"dev": model.evaluate(ds.dev), "test": model.evaluate(ds.test)}
    record.model = model
    record.wall_clock = time.perf_counter() - start
    return record


def _joint_training(ds: SplitDataset, model: Model, cfg: TrainConfig, record: RunRecord) -> None:
    index = model.index
    Xt = Tensor(model.X)
    syn_pairs = [p for p in ds.train if p.label == SYNONYM]
    ant_pairs = [p for p in ds.train if p.label == ANTONYM]
    syn_pos, ant_pos = pair_arrays(syn_pairs, index), pair_arrays(ant_pairs, index)
    syn_y, ant_y = labels_of(syn_pairs), labels_of(ant_pairs)
    opt = Adam(model.encoders.parameters() + model.gcn.parameters(), lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed + 15_485_863)

    best = model.snapshot()
    best_f1 = model.evaluate(ds.dev, warn=False).f1 if cfg.epochs == 0 else -1.0
    stale = 0
    for epoch in range(cfg.epochs):
        syn_neg, ant_neg = negative_arrays(ds, index, cfg.negatives,
                                           seed=cfg.seed * 100_003 + 2 * epoch + 1_000_000)
        sums = np.zeros(3)
        for s_idx, a_idx in _paired_batches(len(syn_pairs), len(ant_pairs), cfg.batch_size, rng):
            opt.zero_grad()
            L1, L2, F1, F2 = encoder_losses(
                model.encoders, Xt,
                (syn_pos[0][s_idx], syn_pos[1][s_idx]), _negatives_for(s_idx, syn_neg, cfg.negatives),
                (ant_pos[0][a_idx], ant_pos[1][a_idx]), _negatives_for(a_idx, ant_neg, cfg.negatives))
            heads = np.concatenate([syn_pos[0][s_idx], ant_pos[0][a_idx]])
            tails = np.concatenate([syn_pos[1][s_idx], ant_pos[1][a_idx]])
            y = np.concatenate([syn_y[s_idx], ant_y[a_idx]])
            L3 = loss_L3(score_features(heads, tails, model.reps(F1, F2)), y, model.gcn)
            loss = L1 + L2 + L3
            ad.backward(loss)
            opt.step()
            sums += (float(L1.data), float(L2.data), float(L3.data))
        record.losses.append({"epoch": epoch, "L1": sums[0], "L2": sums[1], "L3": sums[2],
                              "total": float(sums.sum())})
        dev = model.evaluate(ds.dev, warn=False).f1
        record.dev_f1.append(dev)
        if dev > best_f1:
            best_f1, best, stale = dev, model.snapshot(), 0
            record.best_epoch = epoch
        else:
            stale += 1
            if cfg.patience and stale >= cfg.patience:
                break
    model.encoders, model.gcn = best.encoders, best.gcn


# ------------------------------------------------------------ multi-run


@dataclass
class SuiteResult:
    records: list[RunRecord]
    test: EvalReport
    dev: EvalReport

    def summary(self) -> dict:
        return {"test": self.test.as_dict(), "dev": self.dev.as_dict(),
                "runs": [r.summary() for r in self.records]}


def _run_one(args):
    ds, table, cfg = args
    rec = train_full(ds, table, cfg)
    rec.model = None
    rec.graphs = None
    return rec


def run_suite(ds: SplitDataset, table: EmbeddingTable, cfg: TrainConfig, n_runs: int = 5,
              workers: int = 1) -> SuiteResult:
    """Repeat training over seeds ``cfg.seed .. cfg.seed + n_runs - 1``."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    jobs = [(ds, table, cfg.replace(seed=cfg.seed + i)) for i in range(n_runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [train_full(*job) for job in jobs]
    return SuiteResult(records,
                       aggregate([r.metrics["test"] for r in records]),
                       aggregate([r.metrics["dev"] for r in records]))


def ablate(ds: SplitDataset, table: EmbeddingTable, cfg: TrainConfig,
           schemes=("A1", "A2", "A3", "A4", "A5"), n_runs: int = 5) -> dict[str, SuiteResult]:
    """Train every attention scheme on graphs from one shared M_init per seed."""
    out: dict[str, list[RunRecord]] = {s: [] for s in schemes}
    for i in range(n_runs):
        seed_cfg = cfg.replace(seed=cfg.seed + i)
        m_table = _input_table(table, seed_cfg)
        m_table.prepopulate(ds.vocabulary)
        m_init = train_m_init(ds, m_table, seed_cfg)
        for s in schemes:
            rec = train_full(ds, table, seed_cfg.replace(scheme=s), m_init=m_init)
            rec.model = rec.graphs = None
            out[s].append(rec)
    return {s: SuiteResult(recs, aggregate([r.metrics["test"] for r in recs]),
                           aggregate([r.metrics["dev"] for r in recs]))
            for s, recs in out.items()}
