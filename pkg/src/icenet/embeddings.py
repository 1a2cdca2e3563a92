"""Pretrained word vectors in the word2vec/fastText text format."""

from __future__ import annotations

import gzip
import hashlib
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

log = logging.getLogger(__name__)

STRICT = "strict"
OOV_RANDOM = "oov-random"


class EmbeddingFormatError(ValueError):
    pass


class MissingWordError(KeyError):
    def __init__(self, word: str):
        super().__init__(word)
        self.word = word

    def __str__(self) -> str:
        return f"word not in embedding table: {self.word!r}"


def _open_text(path):
    path = os.fspath(path)
    if path.endswith((".gz", ".gzip")):
        return gzip.open(path, "rt", encoding="utf-8", errors="replace")
    return open(path, "r", encoding="utf-8", errors="replace")


def oov_vector(word: str, dim: int, seed: int) -> np.ndarray:
    """Uniform draw in [-0.5/d, 0.5/d] from a stream keyed by (seed, word)."""
    digest = hashlib.sha256(word.encode("utf-8")).digest()
    key = [int(seed) & 0xFFFFFFFF, *np.frombuffer(digest, dtype=np.uint32).tolist()]
    rng = np.random.default_rng(np.random.SeedSequence(key))
    bound = 0.5 / dim
    return rng.uniform(-bound, bound, size=dim)


@dataclass
class EmbeddingTable:
    dim: int
    index: dict[str, int]
    vectors: np.ndarray
    oov_seed: int = 0
    random_vectors: bool = False
    malformed: int = 0
    _oov: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64).reshape(-1, self.dim)
        if self.vectors.shape[0] != len(self.index):
            raise EmbeddingFormatError(
                f"{len(self.index)} words but {self.vectors.shape[0]} vectors")

    @classmethod
    def from_dict(cls, vectors: dict[str, Iterable[float]], **kwargs) -> "EmbeddingTable":
        words = list(vectors)
        mat = np.array([np.asarray(vectors[w], dtype=np.float64) for w in words])
        if mat.ndim != 2:
            raise EmbeddingFormatError("from_dict needs at least one vector of equal length")
        return cls(dim=mat.shape[1], index={w: i for i, w in enumerate(words)}, vectors=mat,
                   **kwargs)

    @classmethod
    def random(cls, dim: int, oov_seed: int = 0) -> "EmbeddingTable":
        """Baseline-1 table: every word is drawn from the OOV stream."""
        return cls(dim=dim, index={}, vectors=np.zeros((0, dim)), oov_seed=oov_seed,
                   random_vectors=True)

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def lookup(self, word: str) -> np.ndarray:
        return self.resolve(word, STRICT)

    def resolve(self, word: str, mode: str = OOV_RANDOM) -> np.ndarray:
        if not self.random_vectors:
            i = self.index.get(word)
            if i is not None:
                return self.vectors[i]
        if mode == STRICT and not self.random_vectors:
            raise MissingWordError(word)
        if mode not in (STRICT, OOV_RANDOM):
            raise ValueError(f"unknown resolve mode {mode!r}")
        vec = self._oov.get(word)
        if vec is None:
            vec = oov_vector(word, self.dim, self.oov_seed)
            vec.setflags(write=False)
            self._oov[word] = vec
        return vec

    def prepopulate(self, words: Iterable[str], mode: str = OOV_RANDOM) -> int:
        """Resolve every word up front so later lookups never write. Returns #OOV."""
        before = len(self._oov)
        for w in words:
            self.resolve(w, mode)
        return len(self._oov) - before

    def matrix(self, words: Iterable[str], mode: str = OOV_RANDOM) -> np.ndarray:
        return np.stack([self.resolve(w, mode) for w in words])

    def with_random_vectors(self) -> "EmbeddingTable":
        return EmbeddingTable.random(self.dim, self.oov_seed)


def load_embeddings(path, expected_dim: int, oov_seed: int = 0) -> EmbeddingTable:
    """Parse a text embedding file (``.gz`` accepted).

    An optional ``count dim`` header line is recognised. Rows with the wrong
    number of fields or non-numeric values are skipped and counted in
    ``table.malformed``; a header whose dim disagrees with ``expected_dim`` is
    a format error, as is a file with no usable rows.
    """
    index: dict[str, int] = {}
    rows: list[np.ndarray] = []
    malformed = 0
    widths: set[int] = set()
    with _open_text(path) as fh:
        first = True
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").rstrip().split()
            if not parts:
                continue
            if first:
                first = False
                if len(parts) == 2 and parts[0].isdigit() and parts[1].isdigit():
                    if int(parts[1]) != expected_dim:
                        raise EmbeddingFormatError(
                            f"{path}: header declares dim {parts[1]}, expected {expected_dim}")
                    continue
            if len(parts) != expected_dim + 1:
                malformed += 1
                widths.add(len(parts) - 1)
                log.warning("%s:%d: expected %d values, found %d; skipped",
                            path, lineno, expected_dim, len(parts) - 1)
                continue
            try:
                vec = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                malformed += 1
                log.warning("%s:%d: non-numeric value; skipped", path, lineno)
                continue
            if parts[0] in index:
                # first occurrence wins, like gensim
                continue
            index[parts[0]] = len(rows)
            rows.append(vec)
    if not rows:
        if widths:
            raise EmbeddingFormatError(
                f"{path}: rows have {sorted(widths)} values, expected dim {expected_dim}")
        raise EmbeddingFormatError(f"{path}: no embedding rows found")
    return EmbeddingTable(dim=expected_dim, index=index, vectors=np.vstack(rows),
                          oov_seed=oov_seed, malformed=malformed)


def save_embeddings(path, table: EmbeddingTable, words: Iterable[str] | None = None) -> None:
    """Write the text format with a header line. ``words`` defaults to the table's own."""
    words = list(table.index) if words is None else list(words)
    opener = gzip.open if os.fspath(path).endswith((".gz", ".gzip")) else open
    with opener(path, "wt", encoding="utf-8") as fh:
        fh.write(f"{len(words)} {table.dim}\n")
        for w in words:
            vec = table.resolve(w)
            fh.write(w + " " + " ".join(repr(float(v)) for v in vec) + "\n")
