"""Binary-classification evaluation: confusion ratios, ROC, AUC, partial
AUC with McClish standardization, and TPR at an FPR cap.

The AUC is the Mann-Whitney statistic (ties get half credit), computed
from exact integer pair counts so it agrees with a brute-force oracle to
the last bit.  Threshold convention throughout: a score >= t predicts
positive.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfusionCounts",
    "RocCurve",
    "MetricsReport",
    "InvalidCeiling",
    "confusion",
    "roc",
    "trapezoid_area",
    "auc",
    "partial_auc_std",
    "tpr_at_fpr",
    "compute_report",
    "REPORT_COLUMNS",
    "write_report_csv",
    "write_roc_csv",
]


class InvalidCeiling(ValueError):
    pass


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def tpr(self) -> float:
        pos = self.tp + self.fn
        return self.tp / pos if pos else 0.0

    recall = tpr

    @property
    def fpr(self) -> float:
        neg = self.fp + self.tn
        return self.fp / neg if neg else 0.0

    @property
    def precision(self) -> float:
        pred = self.tp + self.fp
        return self.tp / pred if pred else 0.0

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)


@dataclass(frozen=True)
class RocCurve:
    """Operating points from sweeping thresholds high to low.

    Starts at (0, 0) and ends at (1, 1); tied scores move together.
    ``thresholds[i]`` is the score cutoff realizing point i (inf for the
    all-negative corner).
    """

    fpr: tuple[float, ...]
    tpr: tuple[float, ...]
    thresholds: tuple[float, ...]

    def points(self):
        return list(zip(self.fpr, self.tpr))


def _as_arrays(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be equal-length 1-d sequences")
    return scores, labels


def _require_both_classes(labels) -> tuple[int, int]:
    pos = int(np.sum(labels == 1))
    neg = int(np.sum(labels == 0))
    if pos == 0 or neg == 0:
        raise ValueError("need at least one positive and one negative")
    return pos, neg


def confusion(scores, labels, threshold: float) -> ConfusionCounts:
    """Counts under the score >= threshold decision rule."""
    scores, labels = _as_arrays(scores, labels)
    pred = scores >= threshold
    pos = labels == 1
    return ConfusionCounts(
        tp=int(np.sum(pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        tn=int(np.sum(~pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
    )


def roc(scores, labels) -> RocCurve:
    scores, labels = _as_arrays(scores, labels)
    pos_total, neg_total = _require_both_classes(labels)
    order = np.argsort(-scores, kind="stable")
    scores = scores[order]
    labels = labels[order]
    fprs = [0.0]
    tprs = [0.0]
    thresholds = [np.inf]
    tp = fp = 0
    i = 0
    n = len(scores)
    while i < n:
        j = i
        while j < n and scores[j] == scores[i]:  # tie group moves together
            j += 1
        tp += int(np.sum(labels[i:j] == 1))
        fp += j - i - int(np.sum(labels[i:j] == 1))
        fprs.append(fp / neg_total)
        tprs.append(tp / pos_total)
        thresholds.append(float(scores[i]))
        i = j
    return RocCurve(fpr=tuple(fprs), tpr=tuple(tprs), thresholds=tuple(thresholds))


def trapezoid_area(curve: RocCurve, lo: float = 0.0, hi: float = 1.0) -> float:
    """Area under the ROC polyline for fpr in [lo, hi], interpolating
    linearly at the cut points."""
    xs = np.asarray(curve.fpr)
    ys = np.asarray(curve.tpr)
    area = 0.0
    for k in range(1, len(xs)):
        x0, x1 = xs[k - 1], xs[k]
        y0, y1 = ys[k - 1], ys[k]
        a = max(x0, lo)
        b = min(x1, hi)
        if b <= a:
            continue
        if x1 == x0:  # vertical segment: no width
            continue
        ya = y0 + (y1 - y0) * (a - x0) / (x1 - x0)
        yb = y0 + (y1 - y0) * (b - x0) / (x1 - x0)
        area += 0.5 * (ya + yb) * (b - a)
    return float(area)


def auc(scores, labels) -> float:
    """Probability a random positive outranks a random negative.

    Computed as an exact integer count of (2*wins + ties) over ordered
    positive/negative pairs, divided once at the end, so results match
    exhaustive pair enumeration exactly.
    """
    scores, labels = _as_arrays(scores, labels)
    pos_total, neg_total = _require_both_classes(labels)
    order = np.argsort(scores, kind="stable")
    scores = scores[order]
    labels = labels[order]
    numer = 0  # 2 * (#pos>neg pairs) + (#tied pairs)
    neg_below = 0
    i = 0
    n = len(scores)
    while i < n:
        j = i
        while j < n and scores[j] == scores[i]:
            j += 1
        p_here = int(np.sum(labels[i:j] == 1))
        n_here = (j - i) - p_here
        numer += 2 * p_here * neg_below + p_here * n_here
        neg_below += n_here
        i = j
    return numer / (2 * pos_total * neg_total)


def partial_auc_std(scores, labels, ceiling: float = 0.01) -> float:
    """McClish-standardized partial AUC for fpr in [0, ceiling].

    Raw area comes from the ROC polyline clipped at the ceiling; the
    standardization maps chance to 0.5 and a perfect classifier to 1.0:
    0.5 * (1 + (pauc - c^2/2) / (c - c^2/2)).  Clipped into [0, 1].
    """
    if not 0.0 < ceiling <= 1.0:
        raise InvalidCeiling(f"ceiling must be in (0, 1], got {ceiling}")
    raw = trapezoid_area(roc(scores, labels), 0.0, ceiling)
    chance = ceiling * ceiling / 2.0
    best = ceiling
    value = 0.5 * (1.0 + (raw - chance) / (best - chance))
    return float(min(1.0, max(0.0, value)))


def tpr_at_fpr(scores, labels, fpr_cap: float) -> float:
    """Best achievable TPR with FPR <= cap; step semantics, no
    interpolation between operating points."""
    curve = roc(scores, labels)
    best = 0.0
    for f, t in zip(curve.fpr, curve.tpr):
        if f <= fpr_cap and t > best:
            best = t
    return best


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    auc: float
    partial_auc_std: float
    tpr_at_fpr_01: float
    tpr_at_fpr_001: float
    counts: ConfusionCounts


def compute_report(scores, labels, threshold: float = 0.5) -> MetricsReport:
    counts = confusion(scores, labels, threshold)
    return MetricsReport(
        precision=counts.precision,
        recall=counts.recall,
        f1=counts.f1,
        auc=auc(scores, labels),
        partial_auc_std=partial_auc_std(scores, labels, 0.01),
        tpr_at_fpr_01=tpr_at_fpr(scores, labels, 0.01),
        tpr_at_fpr_001=tpr_at_fpr(scores, labels, 0.001),
        counts=counts,
    )


REPORT_COLUMNS = [
    "dga",
    "observations",
    "training",
    "validation",
    "precision",
    "recall",
    "f1_score",
    "partial_auc",
    "auc",
    "tpr_fpr_lt_0.01",
    "tpr_fpr_lt_0.001",
]


def report_row(name: str, observations: int, training: int, validation: int,
               report: MetricsReport) -> list:
    return [
        name,
        observations,
        training,
        validation,
        f"{report.precision:.4f}",
        f"{report.recall:.4f}",
        f"{report.f1:.4f}",
        f"{report.partial_auc_std:.4f}",
        f"{report.auc:.4f}",
        f"{report.tpr_at_fpr_01:.4f}",
        f"{report.tpr_at_fpr_001:.4f}",
    ]


def write_report_csv(rows: list[list], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(rows)


def write_roc_csv(curve: RocCurve, path, include_thresholds: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if include_thresholds:
            writer.writerow(["fpr", "tpr", "threshold"])
            for f, t, th in zip(curve.fpr, curve.tpr, curve.thresholds):
                writer.writerow([f"{f:.10g}", f"{t:.10g}", f"{th:.10g}"])
        else:
            writer.writerow(["fpr", "tpr"])
            for f, t in zip(curve.fpr, curve.tpr):
                writer.writerow([f"{f:.10g}", f"{t:.10g}"])
