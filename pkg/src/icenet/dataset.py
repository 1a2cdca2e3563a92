"""Antonym/synonym pair files, splits, and negative sampling."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

log = logging.getLogger(__name__)

SYNONYM = "synonym"
ANTONYM = "antonym"
LABELS = (SYNONYM, ANTONYM)
# integer class ids; antonym is the positive class for P/R/F1
LABEL_ID = {SYNONYM: 0, ANTONYM: 1}
SPLITS = ("train", "dev", "test")
WORD_CLASSES = ("adjective", "noun", "verb", "other")

_LABEL_TOKENS = {
    "0": SYNONYM, "synonym": SYNONYM, "syn": SYNONYM,
    "1": ANTONYM, "antonym": ANTONYM, "ant": ANTONYM,
}

# pair counts per split for the random and lexical benchmark splits
BENCHMARK_SPLIT_SIZES = {
    "random": {
        "adjective": (5562, 398, 1986),
        "noun": (2836, 206, 1020),
        "verb": (2534, 182, 908),
    },
    "lexical": {
        "adjective": (4227, 303, 1498),
        "noun": (2667, 191, 954),
        "verb": (2034, 146, 712),
    },
}


class DatasetFormatError(ValueError):
    pass


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RelationPair:
    head: str
    tail: str
    label: str
    split: str = "train"

    def __post_init__(self):
        if self.head == self.tail:
            raise ValueError(f"pair has identical head and tail: {self.head!r}")
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")

    @property
    def y(self) -> int:
        return LABEL_ID[self.label]


@dataclass(frozen=True)
class NegativeSample:
    original: RelationPair
    head: str
    tail: str
    kind: str  # "random-word" | "cross-relation"


@dataclass
class SplitDataset:
    word_class: str
    train: list[RelationPair]
    dev: list[RelationPair]
    test: list[RelationPair]
    lexical_split: bool = False
    duplicates: int = 0
    vocabulary: list[str] = field(init=False)

    def __post_init__(self):
        words = {w for p in self.all_pairs() for w in (p.head, p.tail)}
        self.vocabulary = sorted(words)

    def split(self, name: str) -> list[RelationPair]:
        if name not in SPLITS:
            raise ValueError(f"unknown split {name!r}")
        return getattr(self, name)

    def all_pairs(self) -> list[RelationPair]:
        return [*self.train, *self.dev, *self.test]

    def word_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.vocabulary)}

    def split_vocabulary(self, name: str) -> set[str]:
        return {w for p in self.split(name) for w in (p.head, p.tail)}

    def balance(self, name: str) -> float:
        """antonym:synonym ratio within one split (inf when no synonyms)."""
        c = Counter(p.label for p in self.split(name))
        return c[ANTONYM] / c[SYNONYM] if c[SYNONYM] else float("inf")

    def lexical_overlap(self) -> dict[tuple[str, str], set[str]]:
        vocab = {s: self.split_vocabulary(s) for s in SPLITS}
        return {(a, b): vocab[a] & vocab[b]
                for a, b in (("train", "dev"), ("train", "test"), ("dev", "test"))}

    def check_lexical_split(self) -> bool:
        """True when no word is shared between any two splits."""
        return not any(self.lexical_overlap().values())

    def summary(self) -> dict:
        return {
            "word_class": self.word_class,
            "sizes": {s: len(self.split(s)) for s in SPLITS},
            "vocabulary": len(self.vocabulary),
            "antonym_synonym_ratio": {s: self.balance(s) for s in SPLITS},
            "duplicates": self.duplicates,
        }


def _split_file(root: Path, word_class: str, split: str) -> Path:
    candidates = [
        root / f"{split}.tsv",
        root / word_class / f"{split}.tsv",
        root / f"{word_class}.{split}.tsv",
        root / f"{word_class}_{split}.tsv",
    ]
    for c in candidates:
        if c.is_file():
            return c
    raise FileNotFoundError(
        f"no {split} file for word class {word_class!r} under {root} "
        f"(looked for {', '.join(str(c.relative_to(root)) for c in candidates)})")


def read_pairs(path, split: str) -> list[RelationPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise DatasetFormatError(f"{path}:{lineno}: expected 3 tab-separated fields")
            head, tail, tok = (f.strip() for f in fields)
            label = _LABEL_TOKENS.get(tok.lower())
            if label is None:
                raise DatasetFormatError(f"{path}:{lineno}: unknown label {tok!r}")
            if head == tail:
                raise DatasetFormatError(f"{path}:{lineno}: head equals tail ({head!r})")
            pairs.append(RelationPair(head, tail, label, split))
    if not pairs:
        raise DatasetFormatError(f"{path}: split file is empty")
    return pairs


def load_dataset(directory, word_class: str = "adjective", lexical_split: bool = False) -> SplitDataset:
    """Read ``train``/``dev``/``test`` TSV files (``head<TAB>tail<TAB>label``)."""
    root = Path(directory)
    splits = {s: read_pairs(_split_file(root, word_class, s), s) for s in SPLITS}
    dupes = 0
    for s, pairs in splits.items():
        counts = Counter((p.head, p.tail, p.label) for p in pairs)
        n = sum(c - 1 for c in counts.values())
        if n:
            log.warning("%s split has %d duplicated line(s); kept", s, n)
        dupes += n
    ds = SplitDataset(word_class, splits["train"], splits["dev"], splits["test"],
                      lexical_split=lexical_split, duplicates=dupes)
    if lexical_split and not ds.check_lexical_split():
        log.warning("lexical split requested but splits share vocabulary")
    return ds


def save_dataset(ds: SplitDataset, directory) -> None:
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    for s in SPLITS:
        with open(root / f"{s}.tsv", "w", encoding="utf-8") as fh:
            for p in ds.split(s):
                fh.write(f"{p.head}\t{p.tail}\t{p.label}\n")


def _as_key(h: str, t: str) -> tuple[str, str]:
    # relations are symmetric, so (h, t) and (t, h) are the same positive
    return (h, t) if h <= t else (t, h)


def sample_negatives(ds: SplitDataset, relation: str, k_per_positive: int = 1,
                     seed: int = 0, max_tries: int = 100) -> list[NegativeSample]:
    """Corrupt each training positive of ``relation`` ``k_per_positive`` times.

    Each draw is a fair coin between replacing the head or tail with a uniform
    vocabulary word, and reusing a training pair of the opposite relation
    verbatim. Results never coincide (in either orientation) with a training
    positive of ``relation``.
    """
    if relation not in LABELS:
        raise ValueError(f"unknown relation {relation!r}")
    if k_per_positive < 1:
        raise ValueError("k_per_positive must be >= 1")
    vocab = ds.vocabulary
    if len(vocab) <= 2:
        raise SamplingError(f"vocabulary of {len(vocab)} words is too small to corrupt")
    positives = [p for p in ds.train if p.label == relation]
    pos_keys = {_as_key(p.head, p.tail) for p in positives}
    other = [p for p in ds.train if p.label != relation and _as_key(p.head, p.tail) not in pos_keys]
    rng = np.random.default_rng(seed)
    out: list[NegativeSample] = []
    for p in positives:
        for _ in range(k_per_positive):
            # the kind is decided once; only random-word draws are retried
            if other and rng.random() < 0.5:
                q = other[rng.integers(len(other))]
                out.append(NegativeSample(p, q.head, q.tail, "cross-relation"))
                continue
            for _ in range(max_tries):
                w = vocab[rng.integers(len(vocab))]
                h, t = (w, p.tail) if rng.random() < 0.5 else (p.head, w)
                if h != t and _as_key(h, t) not in pos_keys:
                    out.append(NegativeSample(p, h, t, "random-word"))
                    break
            else:
                raise SamplingError(f"could not corrupt {p} in {max_tries} tries")
    return out


def iter_batches(n: int, batch_size: int | None, rng: np.random.Generator | None = None
                 ) -> Iterable[np.ndarray]:
    """Index batches over ``range(n)``; ``batch_size=None`` is one full batch."""
    order = np.arange(n) if rng is None else rng.permutation(n)
    if not batch_size or batch_size >= n:
        yield order
        return
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def write_benchmark_fixture(directory, word_class: str = "adjective", split_kind: str = "random",
                         seed: int = 0) -> Path:
    """Write a placeholder corpus with the benchmark's per-split pair counts.

    Words are synthetic tokens; only the sizes and ~1:1 class balance mirror
    the real data.
    """
    sizes = BENCHMARK_SPLIT_SIZES[split_kind][word_class]
    rng = np.random.default_rng(seed)
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    n_words = max(64, int(np.sqrt(sum(sizes))) * 4)
    for split, n in zip(SPLITS, sizes):
        with open(root / f"{split}.tsv", "w", encoding="utf-8") as fh:
            for i in range(n):
                h, t = rng.choice(n_words, size=2, replace=False)
                fh.write(f"w{h}\tw{t}\t{LABELS[i % 2]}\n")
    return root


def pair_arrays(pairs: Iterable, index: dict[str, int]) -> tuple[np.ndarray, np.ndarray]:
    """Head and tail row indices for anything with ``.head``/``.tail``."""
    pairs = list(pairs)
    h = np.fromiter((index[p.head] for p in pairs), dtype=np.intp, count=len(pairs))
    t = np.fromiter((index[p.tail] for p in pairs), dtype=np.intp, count=len(pairs))
    return h, t


def labels_of(pairs: Iterable[RelationPair]) -> np.ndarray:
    return np.array([p.y for p in pairs], dtype=np.intp)

