"""Clustered toy corpora whose labels obey symmetry and (trans-)transitivity.

Words are noisy copies of cluster centroids. Every pair inside a cluster is a
synonym; every pair across a designated opposed cluster pair is an antonym.
Opposed centroids share a component (``antonym_similarity``), as antonyms do
in distributional embeddings.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .config import ConfigError
from .dataset import ANTONYM, SPLITS, SYNONYM, RelationPair, SplitDataset
from .embeddings import EmbeddingTable


def _opposed_pairs(n_clusters: int, k: int) -> list[tuple[int, int]]:
    disjoint = [(i, i + 1) for i in range(0, n_clusters - 1, 2)]
    rest = [c for c in combinations(range(n_clusters), 2) if c not in disjoint]
    candidates = disjoint + rest
    if k > len(candidates):
        raise ConfigError(f"{n_clusters} clusters allow at most {len(candidates)} antonym cluster pairs")
    return candidates[:k]


def _split_counts(n: int, fractions) -> list[int]:
    a = int(round(fractions[0] * n))
    b = int(round(fractions[1] * n))
    return [a, b, n - a - b]


def generate_synthetic(n_clusters: int = 4, words_per_cluster: int = 25,
                       antonym_cluster_pairs: int = 2, d: int = 32, noise: float = 0.1,
                       seed: int = 0, pairs_per_class: int | None = None,
                       antonym_similarity: float = 0.5, lexical: bool = False,
                       fractions=(0.7, 0.1, 0.2)) -> tuple[SplitDataset, EmbeddingTable]:
    """Return a labelled corpus and a matching embedding table.

    ``pairs_per_class`` defaults to the smaller of the two available pools so
    the classes are balanced. With ``lexical=True`` words (not pairs) are
    partitioned 70/10/20 and only pairs inside one partition are kept, giving
    disjoint split vocabularies.
    """
    if n_clusters < 2:
        raise ConfigError("need at least two clusters")
    if words_per_cluster < 2:
        raise ConfigError("need at least two words per cluster")
    if antonym_cluster_pairs < 1:
        raise ConfigError("need at least one antonym cluster pair")
    if noise < 0 or not 0 <= antonym_similarity < 1:
        raise ConfigError("noise must be >= 0 and antonym_similarity in [0, 1)")
    rng = np.random.default_rng(seed)
    opposed = _opposed_pairs(n_clusters, antonym_cluster_pairs)

    centroids = rng.normal(0.0, 1.0 / np.sqrt(d), size=(n_clusters, d))
    a = antonym_similarity
    for i, j in opposed:
        if i % 2 == 0 and j == i + 1:
            centroids[j] = a * centroids[i] + np.sqrt(1 - a * a) * centroids[j]

    words = [[f"c{c}w{k:02d}" for k in range(words_per_cluster)] for c in range(n_clusters)]
    vectors = {}
    for c in range(n_clusters):
        # per-word offset with expected norm ``noise`` against unit-scale centroids
        eps = rng.normal(0.0, noise / np.sqrt(d), size=(words_per_cluster, d))
        for k, w in enumerate(words[c]):
            vectors[w] = centroids[c] + eps[k]

    if lexical:
        part = {}
        for c in range(n_clusters):
            order = rng.permutation(words_per_cluster)
            n_tr, n_dev, _ = _split_counts(words_per_cluster, fractions)
            for rank, k in enumerate(order):
                part[words[c][k]] = "train" if rank < n_tr else "dev" if rank < n_tr + n_dev else "test"

    def orient(h, t):
        return (h, t) if rng.random() < 0.5 else (t, h)

    syn = [orient(h, t) for c in range(n_clusters) for h, t in combinations(words[c], 2)]
    ant = [orient(h, t) for i, j in opposed for h in words[i] for t in words[j]]
    if lexical:
        syn = [p for p in syn if part[p[0]] == part[p[1]]]
        ant = [p for p in ant if part[p[0]] == part[p[1]]]
    n = min(len(syn), len(ant)) if pairs_per_class is None else pairs_per_class
    if n > min(len(syn), len(ant)) or n < 3:
        raise ConfigError(f"cannot draw {n} pairs per class from {len(syn)} synonym / "
                          f"{len(ant)} antonym candidates")
    syn = [syn[i] for i in sorted(rng.choice(len(syn), n, replace=False))]
    ant = [ant[i] for i in sorted(rng.choice(len(ant), n, replace=False))]

    splits: dict[str, list[RelationPair]] = {s: [] for s in SPLITS}
    for label, pool in ((SYNONYM, syn), (ANTONYM, ant)):
        if lexical:
            for h, t in pool:
                splits[part[h]].append(RelationPair(h, t, label, part[h]))
            continue
        order = rng.permutation(len(pool))
        counts = _split_counts(len(pool), fractions)
        start = 0
        for s, cnt in zip(SPLITS, counts):
            for i in order[start:start + cnt]:
                h, t = pool[i]
                splits[s].append(RelationPair(h, t, label, s))
            start += cnt
    for s in SPLITS:
        perm = rng.permutation(len(splits[s]))
        splits[s] = [splits[s][i] for i in perm]
        if not splits[s]:
            raise ConfigError(f"split {s!r} came out empty; enlarge the corpus")

    ds = SplitDataset("synthetic", splits["train"], splits["dev"], splits["test"], lexical_split=lexical)
    table = EmbeddingTable.from_dict({w: vectors[w] for w in ds.vocabulary})
    return ds, table


def cluster_of(word: str) -> int:
    return int(word[1:word.index("w")])
