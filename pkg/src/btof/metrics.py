"""Saliency evaluation: PR/ROC curves, F-measure, AUC, MAE and overlap ratio."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch

BETA2 = 0.3
N_THRESHOLDS = 256
CSV_HEADER = ("image", "precision", "recall", "fmeasure", "auc", "mae", "or")


@dataclass
class MetricReport:
    """Scores of one map (or the mean over a dataset).

    ``pr_curve`` rows are ``(precision, recall)`` and ``roc_curve`` rows are
    ``(fpr, tpr)``, one per integer threshold 0..255.
    """

    precision: float
    recall: float
    f_measure: float
    auc: float
    mae: float
    or_score: float
    pr_curve: np.ndarray = field(repr=False)
    roc_curve: np.ndarray = field(repr=False)

    def row(self) -> tuple[float, ...]:
        return (self.precision, self.recall, self.f_measure, self.auc, self.mae, self.or_score)


def _check(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")


def binarize_adaptive(s) -> np.ndarray:
    """Mask of pixels at or above ``min(2 * mean, max)``; an all-zero map gives an empty mask."""
    s = np.asarray(s, dtype=np.float64)
    hi = s.max()
    if hi <= 0:
        return np.zeros(s.shape, dtype=bool)
    return s >= min(2.0 * s.mean(), hi)


def precision_recall(s, g) -> tuple[float, float]:
    s = np.asarray(s, dtype=bool)
    g = np.asarray(g, dtype=bool)
    _check(s, g)
    tp = np.count_nonzero(s & g)
    predicted = np.count_nonzero(s)
    actual = np.count_nonzero(g)
    p = tp / predicted if predicted else 1.0
    r = tp / actual if actual else 1.0
    return p, r


def f_measure(p: float, r: float, beta2: float = BETA2) -> float:
    den = beta2 * p + r
    return (1.0 + beta2) * p * r / den if den > 0 else 0.0


def mae(s, g) -> float:
    s = np.asarray(s, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    _check(s, g)
    return float(np.abs(s - g).mean())


def overlap_ratio(s_mask, g) -> float:
    """Intersection over union; two empty masks overlap perfectly."""
    s_mask = np.asarray(s_mask, dtype=bool)
    g = np.asarray(g, dtype=bool)
    _check(s_mask, g)
    union = np.count_nonzero(s_mask | g)
    if union == 0:
        return 1.0
    return np.count_nonzero(s_mask & g) / union


def quantize(s) -> np.ndarray:
    return np.clip(np.rint(np.asarray(s, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def curves_and_auc(s, g) -> tuple[np.ndarray, np.ndarray, float]:
    """Sweep thresholds 0..255 over the 8-bit map.

    Returns ``(pr_curve, roc_curve, auc)``; the AUC integrates the ROC points
    with the trapezoid rule after anchoring them at (0, 0) and (1, 1).
    """
    s = np.asarray(s)
    g = np.asarray(g, dtype=bool)
    _check(s, g)
    q = quantize(s) if s.dtype != np.uint8 else s

    # Pixels predicted positive at threshold t are those with q >= t.
    pos_hist = np.bincount(q[g], minlength=N_THRESHOLDS)
    neg_hist = np.bincount(q[~g], minlength=N_THRESHOLDS)
    tp = np.cumsum(pos_hist[::-1])[::-1].astype(np.float64)
    fp = np.cumsum(neg_hist[::-1])[::-1].astype(np.float64)
    n_pos, n_neg = g.sum(), (~g).sum()

    predicted = tp + fp
    precision = np.divide(tp, predicted, out=np.ones_like(tp), where=predicted > 0)
    recall = tp / n_pos if n_pos else np.ones_like(tp)
    tpr = recall
    fpr = fp / n_neg if n_neg else np.zeros_like(fp)

    x = np.concatenate([[1.0], fpr, [0.0]])[::-1]
    y = np.concatenate([[1.0], tpr, [0.0]])[::-1]
    auc = float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))
    return np.column_stack([precision, recall]), np.column_stack([fpr, tpr]), auc


def evaluate(s, g) -> MetricReport:
    """Full report for a continuous map ``s`` in [0, 1] against mask ``g``."""
    s = np.asarray(s, dtype=np.float64)
    g = np.asarray(g, dtype=bool)
    _check(s, g)
    mask = binarize_adaptive(s)
    p, r = precision_recall(mask, g)
    pr, roc, auc = curves_and_auc(s, g)
    return MetricReport(p, r, f_measure(p, r), auc, mae(s, g), overlap_ratio(mask, g), pr, roc)


def mean_report(reports: list[MetricReport]) -> MetricReport:
    if not reports:
        raise ValueError("no reports to aggregate")
    rows = np.array([r.row() for r in reports])
    means = rows.mean(axis=0)
    return MetricReport(
        *map(float, means),
        pr_curve=np.mean([r.pr_curve for r in reports], axis=0),
        roc_curve=np.mean([r.roc_curve for r in reports], axis=0),
    )


def write_metrics_csv(path, named_reports: list[tuple[str, MetricReport]], aggregate: MetricReport | None) -> None:
    """One row per image, then a ``mean`` row when ``aggregate`` is given."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for name, rep in named_reports:
            writer.writerow([name, *(f"{v:.10f}" for v in rep.row())])
        if aggregate is not None:
            writer.writerow(["mean", *(f"{v:.10f}" for v in aggregate.row())])


def write_curves_csv(path, report: MetricReport) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("threshold", "precision", "recall", "fpr", "tpr"))
        for t in range(N_THRESHOLDS):
            p, r = report.pr_curve[t]
            fpr, tpr = report.roc_curve[t]
            writer.writerow([t, f"{p:.10f}", f"{r:.10f}", f"{fpr:.10f}", f"{tpr:.10f}"])


def read_metrics_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
