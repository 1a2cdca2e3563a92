"""Independent reference computations used as test oracles.

Nothing here imports the package's differentiation code: gradients come from
central finite differences over plain numpy, cosines and softmaxes from
scalar loops.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

STEP = 1e-5


def rel_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """max |a - n| scaled by the largest numeric magnitude (floored at 1e-8)."""
    a, n = np.asarray(analytic, float).ravel(), np.asarray(numeric, float).ravel()
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - n)) / max(np.max(np.abs(n)), 1e-8))


def numeric_grad(fn, array: np.ndarray, coords=None, step: float = STEP) -> np.ndarray:
    """Central differences of scalar ``fn()`` w.r.t. ``array`` (perturbed in place).

    ``coords`` restricts the check to a list of flat indices; the result then
    holds one entry per listed coordinate.
    """
    flat = array.reshape(-1)
    coords = range(flat.size) if coords is None else coords
    out = []
    for i in coords:
        old = flat[i]
        flat[i] = old + step
        up = float(fn())
        flat[i] = old - step
        down = float(fn())
        flat[i] = old
        out.append((up - down) / (2 * step))
    return np.array(out)


def sample_coords(rng: np.random.Generator, size: int, k: int) -> list[int]:
    return sorted(rng.choice(size, size=min(k, size), replace=False).tolist())


def cosine(u, v) -> float:
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0 or nv == 0:
        return 0.0
    return sum(a * b for a, b in zip(u, v)) / (nu * nv)


def softmax_row(z) -> list[float]:
    m = max(z)
    e = [math.exp(x - m) for x in z]
    s = sum(e)
    return [x / s for x in e]


def renormalized_dense(weights: np.ndarray) -> np.ndarray:
    """D^-1/2 (A + I) D^-1/2 computed densely."""
    a = weights + np.eye(len(weights))
    d = a.sum(axis=1)
    return a / np.sqrt(np.outer(d, d))


def brute_force_construction(scored, ant_thr: float, syn_thr: float):
    """Reference for dictionary assignment and clique edges.

    ``scored`` is a list of ``(head, tail, score)``. Returns
    ``(antonym_set, synonym_set, head_edges, tail_edges)`` where the sets hold
    ``(head, tail, score)`` triples and edges are frozensets of two words.
    """
    ant, syn = [], []
    for h, t, y in scored:
        if y >= ant_thr:
            ant.append((h, t, y))
        elif y <= syn_thr:
            syn.append((h, t, y))
    head_edges, tail_edges = set(), set()
    for group in (ant, syn):
        for (h1, t1, _), (h2, t2, _) in combinations(group, 2):
            if t1 == t2 and h1 != h2:
                head_edges.add(frozenset((h1, h2)))
            if h1 == h2 and t1 != t2:
                tail_edges.add(frozenset((t1, t2)))
    return set(ant), set(syn), head_edges, tail_edges


def best_threshold_f1(scores: np.ndarray, labels: np.ndarray) -> float:
    """Best F1 over every cut point, predicting antonym for score <= cut."""
    best = 0.0
    for cut in np.unique(scores):
        pred = scores <= cut
        tp = int(np.sum(pred & (labels == 1)))
        fp = int(np.sum(pred & (labels == 0)))
        fn = int(np.sum(~pred & (labels == 1)))
        if tp:
            p, r = tp / (tp + fp), tp / (tp + fn)
            best = max(best, 2 * p * r / (p + r))
    return best
