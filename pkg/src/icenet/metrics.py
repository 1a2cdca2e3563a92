"""Precision / recall / F1 with antonym as the positive class."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

POSITIVE = 1  # antonym


@dataclass
class EvalReport:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    runs: list["EvalReport"] = field(default_factory=list)
    std: dict[str, float] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n if self.n else 0.0

    def confusion(self) -> np.ndarray:
        """Rows are true class (synonym, antonym), columns predicted."""
        return np.array([[self.tn, self.fp], [self.fn, self.tp]])

    def as_dict(self) -> dict:
        d = {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
             "precision": self.precision, "recall": self.recall, "f1": self.f1}
        if self.runs:
            d["std"] = dict(self.std)
            d["n_runs"] = len(self.runs)
        return d


def f1_score(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


def from_counts(tp: int, fp: int, fn: int, tn: int = 0, warn: bool = True) -> EvalReport:
    if warn and tp + fp == 0:
        log.warning("no positive predictions; precision defined as 0")
    if warn and tp + fn == 0:
        log.warning("no positive labels; recall defined as 0")
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return EvalReport(tp, fp, fn, tn, p, r, f1_score(p, r))


def evaluate(predictions: Iterable[tuple[int, int]], warn: bool = True) -> EvalReport:
    """Score ``(predicted, true)`` label pairs."""
    pred = np.array(list(predictions), dtype=int).reshape(-1, 2)
    if pred.shape[0] == 0:
        raise ValueError("evaluate needs at least one prediction")
    yhat, y = pred[:, 0] == POSITIVE, pred[:, 1] == POSITIVE
    return from_counts(int(np.sum(yhat & y)), int(np.sum(yhat & ~y)),
                       int(np.sum(~yhat & y)), int(np.sum(~yhat & ~y)), warn)


def evaluate_arrays(yhat: Sequence[int], y: Sequence[int], warn: bool = True) -> EvalReport:
    return evaluate(zip(np.asarray(yhat).tolist(), np.asarray(y).tolist()), warn)


def aggregate(reports: Sequence[EvalReport]) -> EvalReport:
    """Mean of each metric with sample standard deviation (0 for one run)."""
    reports = list(reports)
    if not reports:
        raise ValueError("aggregate needs at least one report")
    out = EvalReport(runs=reports)
    for key in ("precision", "recall", "f1"):
        vals = np.array([getattr(r, key) for r in reports])
        setattr(out, key, float(vals.mean()))
        out.std[key] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
    for key in ("tp", "fp", "fn", "tn"):
        setattr(out, key, int(sum(getattr(r, key) for r in reports)))
    return out


def format_table(rows: dict[str, EvalReport]) -> str:
    """Tab-separated P, R, F1 per row label, with ``mean±std`` for aggregates."""
    lines = ["name\tP\tR\tF1"]
    for name, rep in rows.items():
        cells = []
        for key in ("precision", "recall", "f1"):
            v = getattr(rep, key)
            cells.append(f"{v:.3f}±{rep.std[key]:.4f}" if rep.runs else f"{v:.3f}")
        lines.append("\t".join([name, *cells]))
    return "\n".join(lines)
