"""Transductive construction of the head-word and tail-word graphs.

Pipeline: train a preliminary encoder-only model, score every pair in
train+dev+test with it, bucket confident pairs into per-word synonym/antonym
dictionaries, and connect words that share a neighbour. Edges carry fixed
attention weights; :func:`normalize` produces the renormalized adjacency used
by the convolution layers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .autodiff import Tensor
from .config import SCHEMES, TrainConfig
from .dataset import ANTONYM, SYNONYM, SplitDataset, pair_arrays, sample_negatives
from .embeddings import EmbeddingTable
from .encoders import EncoderParams, antonym_scores, f1, f2, margin_loss, synonym_scores
from .optim import Adam

log = logging.getLogger(__name__)

PROBABLE_ANTONYM = "probable-antonym"
PROBABLE_SYNONYM = "probable-synonym"
UNASSIGNED = "unassigned"


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class PairScore:
    pair: object  # anything with .head and .tail
    score: float
    kind: str = UNASSIGNED

    @property
    def head(self) -> str:
        return self.pair.head

    @property
    def tail(self) -> str:
        return self.pair.tail


def classify_score(y: float, ant_thr: float = 0.10, syn_thr: float = 0.15) -> str:
    # antonym test first: inside the overlap of the two bands antonym wins
    if y >= ant_thr:
        return PROBABLE_ANTONYM
    if y <= syn_thr:
        return PROBABLE_SYNONYM
    return UNASSIGNED


@dataclass
class NeighborDicts:
    syn_h: dict[str, list[PairScore]] = field(default_factory=dict)
    ant_h: dict[str, list[PairScore]] = field(default_factory=dict)
    syn_t: dict[str, list[PairScore]] = field(default_factory=dict)
    ant_t: dict[str, list[PairScore]] = field(default_factory=dict)

    def antonyms(self) -> list[PairScore]:
        return [ps for v in self.ant_h.values() for ps in v]

    def synonyms(self) -> list[PairScore]:
        return [ps for v in self.syn_h.values() for ps in v]


def build_dicts(scores: Iterable[PairScore], ant_thr: float = 0.10,
                syn_thr: float = 0.15) -> NeighborDicts:
    dicts = NeighborDicts()
    for ps in scores:
        kind = classify_score(ps.score, ant_thr, syn_thr)
        if kind == UNASSIGNED:
            continue
        ps = PairScore(ps.pair, ps.score, kind)
        by_head, by_tail = ((dicts.ant_h, dicts.ant_t) if kind == PROBABLE_ANTONYM
                            else (dicts.syn_h, dicts.syn_t))
        by_head.setdefault(ps.head, []).append(ps)
        by_tail.setdefault(ps.tail, []).append(ps)
    return dicts


@dataclass
class AttentiveGraph:
    """Undirected weighted graph over an ordered node list.

    ``edges`` maps ``(i, j)`` with ``i < j`` to a weight in [0, 1]; ``sources``
    keeps, per edge, the pairs of dictionary entries that generated it.
    """

    nodes: list[str]
    edges: dict[tuple[int, int], float] = field(default_factory=dict)
    sources: dict[tuple[int, int], list[tuple[PairScore, PairScore]]] = field(default_factory=dict)
    scheme: str | None = None

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.nodes)}
        if len(self.index) != len(self.nodes):
            raise ValueError("graph node list contains duplicates")

    def __len__(self) -> int:
        return len(self.nodes)

    def add_edge(self, u: str, v: str, weight: float = 1.0,
                 source: tuple[PairScore, PairScore] | None = None) -> None:
        i, j = self.index[u], self.index[v]
        if i == j:
            return
        key = (i, j) if i < j else (j, i)
        self.edges[key] = max(weight, self.edges.get(key, weight))
        if source is not None:
            self.sources.setdefault(key, []).append(source)

    def has_edge(self, u: str, v: str) -> bool:
        i, j = self.index[u], self.index[v]
        return ((i, j) if i < j else (j, i)) in self.edges

    def edge_words(self) -> set[frozenset[str]]:
        return {frozenset((self.nodes[i], self.nodes[j])) for i, j in self.edges}

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency with an empty diagonal."""
        n = len(self.nodes)
        if not self.edges:
            return sp.csr_matrix((n, n))
        ij = np.array(list(self.edges), dtype=np.intp)
        w = np.array(list(self.edges.values()), dtype=np.float64)
        rows = np.concatenate([ij[:, 0], ij[:, 1]])
        cols = np.concatenate([ij[:, 1], ij[:, 0]])
        a = sp.csr_matrix((np.concatenate([w, w]), (rows, cols)), shape=(n, n))
        a.eliminate_zeros()
        return a

    def normalized(self) -> sp.csr_matrix:
        return normalize(self)

    def with_weights(self, weights: Mapping[tuple[int, int], float], scheme: str) -> "AttentiveGraph":
        g = AttentiveGraph(list(self.nodes), dict(weights), dict(self.sources), scheme)
        return g

    def degree_histogram(self) -> dict[int, int]:
        deg = np.zeros(len(self.nodes), dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        values, counts = np.unique(deg, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def stats(self) -> dict:
        w = np.array(list(self.edges.values())) if self.edges else np.zeros(0)
        return {
            "nodes": len(self.nodes),
            "edges": len(self.edges),
            "scheme": self.scheme,
            "degree_histogram": self.degree_histogram(),
            "weight_min": float(w.min()) if w.size else 0.0,
            "weight_mean": float(w.mean()) if w.size else 0.0,
            "weight_max": float(w.max()) if w.size else 0.0,
        }


def _clique_edges(graph: AttentiveGraph, groups: Mapping[str, list[PairScore]], role: str) -> None:
    for entries in groups.values():
        # one entry per distinct neighbour word, first occurrence kept
        seen: dict[str, PairScore] = {}
        for ps in entries:
            seen.setdefault(getattr(ps, role), ps)
        for (u, pu), (v, pv) in combinations(seen.items(), 2):
            graph.add_edge(u, v, 1.0, (pu, pv))


def build_graphs(dicts: NeighborDicts, nodes_h: Sequence[str] | None = None,
                 nodes_t: Sequence[str] | None = None) -> tuple[AttentiveGraph, AttentiveGraph]:
    """Connect heads sharing a tail (G_h) and tails sharing a head (G_t).

    Heads grouped by the same tail in the synonym dictionary give the
    transitivity edges; heads grouped in the antonym dictionary give the
    trans-transitivity edges. Node lists default to the heads (resp. tails)
    present in the dictionaries, in order of first appearance; pass a full
    vocabulary to keep every word as a (possibly isolated) node.
    """
    if nodes_h is None:
        nodes_h = list(dict.fromkeys(ps.head for d in (dicts.syn_t, dicts.ant_t)
                                     for v in d.values() for ps in v))
    if nodes_t is None:
        nodes_t = list(dict.fromkeys(ps.tail for d in (dicts.syn_h, dicts.ant_h)
                                     for v in d.values() for ps in v))
    g_h = AttentiveGraph(list(nodes_h))
    g_t = AttentiveGraph(list(nodes_t))
    _clique_edges(g_h, dicts.syn_t, "head")
    _clique_edges(g_h, dicts.ant_t, "head")
    _clique_edges(g_t, dicts.syn_h, "tail")
    _clique_edges(g_t, dicts.ant_h, "tail")
    return g_h, g_t


def normalize(graph: AttentiveGraph) -> sp.csr_matrix:
    """D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I."""
    n = len(graph.nodes)
    a = (graph.adjacency() + sp.identity(n, format="csr")).tocoo()
    deg = np.asarray(a.sum(axis=1)).ravel()
    # w / sqrt(d_i * d_j) is bitwise symmetric, unlike two diagonal products
    vals = a.data / np.sqrt(deg[a.row] * deg[a.col])
    out = sp.csr_matrix((vals, (a.row, a.col)), shape=(n, n))
    out.sort_indices()
    return out


# ------------------------------------------------------------ attention


@dataclass
class AttentionContext:
    raw_vectors: Mapping[str, np.ndarray] | Callable[[str], np.ndarray] | None = None
    enc1_vectors: Mapping[str, np.ndarray] | Callable[[str], np.ndarray] | None = None
    ant_thr: float = 0.10
    syn_thr: float = 0.15
    band: float = 0.05
    seed: int = 0


def _getter(source) -> Callable[[str], np.ndarray]:
    return source if callable(source) else source.__getitem__


def _cos(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def low_confidence(score: float, ctx: AttentionContext) -> bool:
    return min(abs(score - ctx.ant_thr), abs(score - ctx.syn_thr)) < ctx.band


def attach_attention(graph: AttentiveGraph, scheme: str,
                     context: AttentionContext | None = None) -> AttentiveGraph:
    """Return a copy of ``graph`` with fixed per-edge weights for ``scheme``.

    A1 seeded uniform(0.1, 0.9); A2 all zero (identity after normalization);
    A3 cosine of raw embeddings; A4 cosine of ENC-1 outputs; A5 as A4 but
    halved for edges generated only by pairs scored within ``band`` of a
    threshold. Cosines are clamped to [0, 1].
    """
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown attention scheme {scheme!r}")
    ctx = context or AttentionContext()
    keys = sorted(graph.edges)
    if scheme == "A1":
        rng = np.random.default_rng(ctx.seed)
        w = dict(zip(keys, rng.uniform(0.1, 0.9, size=len(keys)).tolist()))
    elif scheme == "A2":
        w = dict.fromkeys(keys, 0.0)
    else:
        source = ctx.raw_vectors if scheme == "A3" else ctx.enc1_vectors
        if source is None:
            need = "raw embeddings" if scheme == "A3" else "ENC-1 outputs of M_init"
            raise ConfigurationError(f"scheme {scheme} needs {need} in the attention context")
        vec = _getter(source)
        w = {}
        for i, j in keys:
            base = min(max(_cos(vec(graph.nodes[i]), vec(graph.nodes[j])), 0.0), 1.0)
            if scheme == "A5":
                srcs = graph.sources.get((i, j))
                if srcs:
                    base = max(base / 2 if any(low_confidence(ps.score, ctx) for ps in src) else base
                               for src in srcs)
            w[(i, j)] = base
    return graph.with_weights(w, scheme)


# ------------------------------------------------------------ M_init


def encoder_losses(params: EncoderParams, X: Tensor, syn_pos, syn_neg, ant_pos, ant_neg):
    """L1 and L2 over index arrays into the rows of ``X``; also returns f1/f2 outputs."""
    F1 = f1(X, params)
    F2 = f2(X, params)
    L1 = margin_loss(synonym_scores(F1, *syn_pos),
                     synonym_scores(F1, *syn_neg) if len(syn_neg[0]) else None, params.gamma1)
    L2 = margin_loss(antonym_scores(F1, F2, *ant_pos),
                     antonym_scores(F1, F2, *ant_neg) if len(ant_neg[0]) else None, params.gamma2)
    return L1, L2, F1, F2


def negative_arrays(ds: SplitDataset, index: dict[str, int], k: int, seed: int):
    syn = sample_negatives(ds, SYNONYM, k, seed)
    ant = sample_negatives(ds, ANTONYM, k, seed + 1)
    return pair_arrays(syn, index), pair_arrays(ant, index)


def _subset(arrs, idx):
    return arrs[0][idx], arrs[1][idx]


def train_m_init(ds: SplitDataset, table: EmbeddingTable, config: TrainConfig,
                 params: EncoderParams | None = None, history: list | None = None) -> EncoderParams:
    """Fit both encoders on the training split with L1 + L2 only."""
    train = ds.train
    if not train:
        raise ConfigurationError("training split is empty")
    index = ds.word_index()
    X = Tensor(table.matrix(ds.vocabulary))
    if X.shape[1] != config.d:
        raise ConfigurationError(f"embedding dim {X.shape[1]} differs from config d={config.d}")
    if params is None:
        params = EncoderParams.init(config.d, config.p, config.enc_hidden, seed=config.seed,
                                    gamma1=config.gamma1, gamma2=config.gamma2,
                                    activation=config.activation)
    syn_pairs = [p for p in train if p.label == SYNONYM]
    ant_pairs = [p for p in train if p.label == ANTONYM]
    syn_pos, ant_pos = pair_arrays(syn_pairs, index), pair_arrays(ant_pairs, index)
    opt = Adam(params.parameters(), lr=config.lr)
    rng = np.random.default_rng(config.seed + 7919)
    for epoch in range(config.init_epochs):
        syn_neg, ant_neg = negative_arrays(ds, index, config.negatives,
                                           seed=config.seed * 100_003 + 2 * epoch)
        for s_idx, a_idx in _paired_batches(len(syn_pairs), len(ant_pairs), config.batch_size, rng):
            sn = _negatives_for(s_idx, syn_neg, config.negatives)
            an = _negatives_for(a_idx, ant_neg, config.negatives)
            opt.zero_grad()
            L1, L2, _, _ = encoder_losses(params, X, _subset(syn_pos, s_idx), sn,
                                          _subset(ant_pos, a_idx), an)
            loss = L1 + L2
            ad.backward(loss)
            opt.step()
        if history is not None:
            history.append((float(L1.data), float(L2.data)))
    return params


def _negatives_for(pos_idx: np.ndarray, neg: tuple[np.ndarray, np.ndarray], k: int):
    # negatives are emitted k per positive, in positive order
    idx = (pos_idx[:, None] * k + np.arange(k)[None, :]).ravel()
    return neg[0][idx], neg[1][idx]


def _paired_batches(n_syn: int, n_ant: int, batch_size: int | None, rng: np.random.Generator):
    if not batch_size or batch_size >= n_syn + n_ant:
        yield np.arange(n_syn), np.arange(n_ant)
        return
    n_batches = int(np.ceil((n_syn + n_ant) / batch_size))
    syn_parts = np.array_split(rng.permutation(n_syn), n_batches)
    ant_parts = np.array_split(rng.permutation(n_ant), n_batches)
    for s, a in zip(syn_parts, ant_parts):
        if len(s) or len(a):
            yield s, a


def score_pairs(params: EncoderParams, X: np.ndarray, heads: np.ndarray, tails: np.ndarray) -> np.ndarray:
    """y* = tanh(<f2(x_h), f1(x_t)>) for row-index arrays into ``X``."""
    Xt = Tensor(X)
    F1 = f1(Xt, params)
    F2 = f2(Xt, params)
    return antonym_scores(F1, F2, heads, tails).data.copy()


def score_pair(params: EncoderParams, pair, table: EmbeddingTable, mode: str = "oov-random") -> float:
    xh = table.resolve(pair.head, mode)
    xt = table.resolve(pair.tail, mode)
    return float(ad.inner_tanh_score(f2(xh, params), f1(xt, params)).data)


def inject_score_noise(scores: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    """Shuffle the scores of a random ``fraction`` of pairs among themselves."""
    out = scores.copy()
    n = int(round(fraction * len(scores)))
    if n < 2:
        return out
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(scores), size=n, replace=False)
    out[idx] = scores[rng.permutation(idx)]
    return out


@dataclass
class GraphBundle:
    g_h: AttentiveGraph
    g_t: AttentiveGraph
    dicts: NeighborDicts
    scores: list[PairScore]

    @property
    def adj_h(self) -> sp.csr_matrix:
        return normalize(self.g_h)

    @property
    def adj_t(self) -> sp.csr_matrix:
        return normalize(self.g_t)


def construct(ds: SplitDataset, params: EncoderParams, X: np.ndarray, config: TrainConfig,
              scheme: str | None = None) -> GraphBundle:
    """Score all of train+dev+test with M_init and build the attentive graphs.

    Labels of the pairs are never read here; only their words and scores.
    """
    index = ds.word_index()
    pairs = ds.all_pairs()
    heads, tails = pair_arrays(pairs, index)
    y = score_pairs(params, X, heads, tails)
    if config.score_noise:
        y = inject_score_noise(y, config.score_noise, config.seed + 104_729)
    scores = [PairScore(p, float(s)) for p, s in zip(pairs, y)]
    dicts = build_dicts(scores, config.ant_thr, config.syn_thr)
    g_h, g_t = build_graphs(dicts, ds.vocabulary, ds.vocabulary)
    F1 = f1(Tensor(X), params).data
    ctx = AttentionContext(
        raw_vectors=lambda w: X[index[w]],
        enc1_vectors=lambda w: F1[index[w]],
        ant_thr=config.ant_thr, syn_thr=config.syn_thr, band=config.confidence_band,
        seed=config.seed)
    scheme = scheme or config.scheme
    return GraphBundle(attach_attention(g_h, scheme, ctx), attach_attention(g_t, scheme, ctx),
                       dicts, scores)


# ------------------------------------------------------------ serialization

GRAPH_FORMAT = "icenet-graph v1"


def write_graph(path, graph: AttentiveGraph) -> None:
    """Text format: header, one ``index<TAB>word`` line per node, then
    ``u<TAB>v<TAB>weight`` edge lines keyed by word."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {GRAPH_FORMAT}\n")
        fh.write(f"# scheme\t{graph.scheme or ''}\n")
        fh.write(f"# nodes\t{len(graph.nodes)}\n")
        for i, w in enumerate(graph.nodes):
            fh.write(f"{i}\t{w}\n")
        fh.write(f"# edges\t{len(graph.edges)}\n")
        for (i, j), wt in sorted(graph.edges.items()):
            fh.write(f"{graph.nodes[i]}\t{graph.nodes[j]}\t{float(wt)!r}\n")


def read_graph(path) -> AttentiveGraph:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != f"# {GRAPH_FORMAT}":
        raise ValueError(f"{path}: not an {GRAPH_FORMAT} file")
    scheme = lines[1].split("\t", 1)[1] or None
    n_nodes = int(lines[2].split("\t")[1])
    nodes = [ln.split("\t", 1)[1] for ln in lines[3:3 + n_nodes]]
    n_edges = int(lines[3 + n_nodes].split("\t")[1])
    g = AttentiveGraph(nodes, scheme=scheme)
    for ln in lines[4 + n_nodes:4 + n_nodes + n_edges]:
        u, v, w = ln.split("\t")
        i, j = g.index[u], g.index[v]
        g.edges[(min(i, j), max(i, j))] = float(w)
    return g
