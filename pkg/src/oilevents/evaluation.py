"""Imbalance-aware evaluation: confusion matrices, macro-F1, Matthews
correlation, stratified folds and serializable reports."""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Hashable, Iterable, Optional, Sequence

import numpy as np

from .errors import ClassTooSmall, EmptyInput, LengthMismatch, UnknownLabel


@dataclass(frozen=True)
class ConfusionMatrix:
    """``counts[i, j]`` = number of gold-class-i items predicted as class j."""

    counts: np.ndarray
    classes: tuple

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] != len(self.classes):
            raise ValueError(f"confusion counts {c.shape} do not match {len(self.classes)} classes")
        if (c < 0).any():
            raise ValueError("negative counts")
        object.__setattr__(self, "counts", c)

    @property
    def K(self) -> int:
        return len(self.classes)

    def _ints(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self.counts]

    @property
    def true_counts(self) -> list[int]:      # t_k
        return [sum(row) for row in self._ints()]

    @property
    def pred_counts(self) -> list[int]:      # p_k
        rows = self._ints()
        return [sum(r[k] for r in rows) for k in range(self.K)]

    @property
    def correct(self) -> int:                # c
        rows = self._ints()
        return sum(rows[k][k] for k in range(self.K))

    @property
    def total(self) -> int:                  # s
        return sum(self.true_counts)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if tuple(self.classes) != tuple(other.classes):
            raise ValueError("class sets differ")
        return ConfusionMatrix(self.counts + other.counts, self.classes)

    def transpose(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts.T.copy(), self.classes)


def confusion(gold: Sequence, pred: Sequence, classes: int | Sequence) -> ConfusionMatrix:
    """Build a confusion matrix.

    ``classes`` is either a class count K (labels are then integers < K) or
    the ordered class names the labels are drawn from.
    """
    if len(gold) != len(pred):
        raise LengthMismatch(f"{len(gold)} gold vs {len(pred)} predicted labels")
    if isinstance(classes, (int, np.integer)):
        names = tuple(range(int(classes)))
    else:
        names = tuple(classes)
    index = {c: i for i, c in enumerate(names)}
    counts = np.zeros((len(names), len(names)), dtype=np.int64)
    for g, p in zip(gold, pred):
        g = g.item() if isinstance(g, np.generic) else g
        p = p.item() if isinstance(p, np.generic) else p
        if g not in index:
            raise UnknownLabel(g)
        if p not in index:
            raise UnknownLabel(p)
        counts[index[g], index[p]] += 1
    return ConfusionMatrix(counts, names)


def _as_matrix(cm) -> list[list[int]]:
    if isinstance(cm, ConfusionMatrix):
        return cm._ints()
    return [[int(v) for v in row] for row in np.asarray(cm)]


def mcc_binary(cm) -> float:
    """Two-class Matthews correlation; class index 1 is taken as positive
    (the value is symmetric in that choice). 0.0 when any marginal is empty."""
    m = _as_matrix(cm)
    if len(m) != 2 or any(len(r) != 2 for r in m):
        raise ValueError("binary MCC needs a 2x2 matrix")
    tn, fp = m[0]
    fn, tp = m[1]
    return mcc_from_counts(tp, fp, tn, fn)


def mcc_from_counts(tp: int, fp: int, tn: int, fn: int) -> float:
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


def mcc_multiclass(cm) -> float:
    """K-class Matthews correlation from the confusion matrix marginals."""
    m = _as_matrix(cm)
    K = len(m)
    if K < 2:
        raise ValueError("MCC needs at least two classes")
    t = [sum(row) for row in m]
    p = [sum(m[i][k] for i in range(K)) for k in range(K)]
    c = sum(m[k][k] for k in range(K))
    s = sum(t)
    num = c * s - sum(pk * tk for pk, tk in zip(p, t))
    left = s * s - sum(pk * pk for pk in p)
    right = s * s - sum(tk * tk for tk in t)
    if left == 0 or right == 0:
        return 0.0
    return num / (math.sqrt(left) * math.sqrt(right))


def mcc(cm) -> float:
    return mcc_multiclass(cm)


def per_class_prf(cm: ConfusionMatrix) -> dict:
    out = {}
    m = cm._ints()
    t, p = cm.true_counts, cm.pred_counts
    for k, name in enumerate(cm.classes):
        tp = m[k][k]
        prec = tp / p[k] if p[k] else 0.0
        rec = tp / t[k] if t[k] else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        out[name] = {"precision": prec, "recall": rec, "f1": f1, "support": t[k]}
    return out


def macro_f1(cm: ConfusionMatrix, ignore: Sequence = ()) -> float:
    """Unweighted mean of per-class F1; classes in ``ignore`` (e.g. NONE) are
    left out of the average."""
    scores = {k: v for k, v in per_class_prf(cm).items() if k not in ignore}
    return sum(v["f1"] for v in scores.values()) / len(scores) if scores else 0.0


def f1_avg(per_fold_f1: Sequence[float]) -> float:
    """Mean of per-fold F1 scores."""
    values = list(per_fold_f1)
    if not values:
        raise EmptyInput("no fold scores")
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"F1 outside [0, 1]: {v}")
    return math.fsum(values) / len(values)


# ----------------------------------------------------------------- folds


@dataclass(frozen=True)
class FoldSplit:
    folds: tuple            # k tuples of instance ids (test sets)
    keys: tuple = ()        # stratification key per instance

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_test(self, i: int) -> tuple[list[int], list[int]]:
        test = list(self.folds[i])
        train = sorted(x for j, f in enumerate(self.folds) if j != i for x in f)
        return train, test

    def __iter__(self):
        for i in range(self.k):
            yield self.train_test(i)


def stratified_kfold(labels: Sequence[Hashable], k: int, seed: int = 0) -> FoldSplit:
    """Deal each class round-robin over the folds after a seeded shuffle, so
    every fold holds floor or ceil of its share of each class."""
    if k < 2:
        raise ValueError("k must be at least 2")
    counts = Counter(labels)
    for label, n in sorted(counts.items(), key=lambda kv: str(kv[0])):
        if n < k:
            raise ClassTooSmall(label, n)
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    offset = 0
    for label in sorted(counts, key=str):
        members = [i for i, lab in enumerate(labels) if lab == label]
        members = [members[j] for j in rng.permutation(len(members))]
        for j, idx in enumerate(members):
            folds[(offset + j) % k].append(idx)
        offset += len(members)
    return FoldSplit(tuple(tuple(sorted(f)) for f in folds), tuple(labels))


def kfold(n: int, k: int, seed: int = 0) -> FoldSplit:
    if not 2 <= k <= n:
        raise ValueError(f"cannot split {n} items into {k} folds")
    order = np.random.default_rng(seed).permutation(n)
    folds = [sorted(int(x) for x in order[i::k]) for i in range(k)]
    return FoldSplit(tuple(tuple(f) for f in folds))


# ----------------------------------------------------------------- spans


def span_confusion_counts(gold: Iterable[Iterable], pred: Iterable[Iterable]):
    """Exact-match span counts per label over aligned sentences. Spans are
    (start, end, label) triples."""
    tp, fp, fn = Counter(), Counter(), Counter()
    for g, p in zip(gold, pred):
        g, p = set(map(tuple, g)), set(map(tuple, p))
        for s in g & p:
            tp[s[2]] += 1
        for s in p - g:
            fp[s[2]] += 1
        for s in g - p:
            fn[s[2]] += 1
    return tp, fp, fn


# ----------------------------------------------------------------- reports


@dataclass
class MetricsReport:
    task: str
    classes: list
    per_class: dict
    macro_precision: float
    macro_recall: float
    macro_f1: float
    mcc: Optional[float] = None
    confusion: Optional[list] = None
    per_fold_f1: list = field(default_factory=list)
    per_fold_mcc: list = field(default_factory=list)
    f1_avg: Optional[float] = None
    mcc_avg: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(**d)

    @classmethod
    def from_json(cls, s: str) -> "MetricsReport":
        return cls.from_dict(json.loads(s))

    @property
    def f1(self) -> float:
        return self.f1_avg if self.f1_avg is not None else self.macro_f1

    @property
    def mcc_value(self) -> Optional[float]:
        return self.mcc_avg if self.mcc_avg is not None else self.mcc


def _macro(per_class: dict, ignore: Sequence = ()) -> tuple[float, float, float]:
    per_class = {k: v for k, v in per_class.items() if k not in ignore}
    n = len(per_class) or 1
    return (sum(v["precision"] for v in per_class.values()) / n,
            sum(v["recall"] for v in per_class.values()) / n,
            sum(v["f1"] for v in per_class.values()) / n)


def build_report(cm: ConfusionMatrix, per_fold: Optional[Sequence[ConfusionMatrix]] = None,
                 task: str = "", ignore: Sequence = ()) -> MetricsReport:
    """Report for a classification task; ``cm`` is the pooled matrix and
    ``per_fold`` the fold matrices whose macro-F1 values are averaged.
    Classes in ``ignore`` are excluded from the macro averages but not from MCC."""
    per_class = per_class_prf(cm)
    mp, mr, mf = _macro(per_class, ignore)
    folds = list(per_fold) if per_fold else [cm]
    fold_f1 = [macro_f1(f, ignore) for f in folds]
    fold_mcc = [mcc_multiclass(f) for f in folds]
    return MetricsReport(
        task=task,
        classes=[str(c) for c in cm.classes],
        per_class={str(k): v for k, v in per_class.items()},
        macro_precision=mp, macro_recall=mr, macro_f1=mf,
        mcc=mcc_multiclass(cm),
        confusion=cm.counts.tolist(),
        per_fold_f1=fold_f1, per_fold_mcc=fold_mcc,
        f1_avg=f1_avg(fold_f1), mcc_avg=math.fsum(fold_mcc) / len(fold_mcc),
    )


def span_report(gold, pred, labels: Optional[Sequence[str]] = None, task: str = "",
                per_fold: Optional[Sequence[tuple]] = None) -> MetricsReport:
    """Exact-match span report. Classes are ``labels`` or every label seen in
    gold or predictions. ``per_fold`` holds (gold, pred) pairs per fold."""

    def score(g, p):
        tp, fp, fn = span_confusion_counts(g, p)
        names = list(labels) if labels is not None else sorted(set(tp) | set(fp) | set(fn))
        per = {}
        for lab in names:
            prec = tp[lab] / (tp[lab] + fp[lab]) if tp[lab] + fp[lab] else 0.0
            rec = tp[lab] / (tp[lab] + fn[lab]) if tp[lab] + fn[lab] else 0.0
            f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
            per[lab] = {"precision": prec, "recall": rec, "f1": f1, "support": tp[lab] + fn[lab]}
        return names, per

    names, per_class = score(gold, pred)
    mp, mr, mf = _macro(per_class)
    folds = per_fold or [(gold, pred)]
    fold_f1 = [_macro(score(g, p)[1])[2] for g, p in folds]
    return MetricsReport(task=task, classes=names, per_class=per_class,
                         macro_precision=mp, macro_recall=mr, macro_f1=mf,
                         per_fold_f1=fold_f1, f1_avg=f1_avg(fold_f1))


def summary_table(rows: dict) -> str:
    """Plain-text table: one row per task setup with EMD/ED P/R/F1, ARP F1/MCC
    and, when present, F1/MCC per event property.

    ``rows`` maps setup name -> {task name: MetricsReport}.
    """
    props = [p for p in ("polarity", "modality", "intensity")
             if any(p in r for r in rows.values())]
    head = ["Task setup", "EMD P", "EMD R", "EMD F1", "ED P", "ED R", "ED F1", "ARP F1", "ARP MCC"]
    for p in props:
        head += [f"{p[:3].upper()} F1", f"{p[:3].upper()} MCC"]
    lines = [head]

    def fmt(x):
        return "-" if x is None else f"{x:.3f}"

    for name, reps in rows.items():
        line = [name]
        for t in ("EMD", "ED"):
            r = reps.get(t)
            line += [fmt(r.macro_precision), fmt(r.macro_recall), fmt(r.f1)] if r else ["-"] * 3
        r = reps.get("ARP")
        line += [fmt(r.f1), fmt(r.mcc_value)] if r else ["-"] * 2
        for p in props:
            r = reps.get(p)
            line += [fmt(r.f1), fmt(r.mcc_value)] if r else ["-"] * 2
        lines.append(line)
    widths = [max(len(row[i]) for row in lines) for i in range(len(head))]
    out = []
    for j, row in enumerate(lines):
        out.append(" | ".join(cell.ljust(w) for cell, w in zip(row, widths)))
        if j == 0:
            out.append("-+-".join("-" * w for w in widths))
    return "\n".join(out)


def aggregate_reports(reports: Sequence[MetricsReport], task: str = "") -> MetricsReport:
    """Cross-fold summary: every scalar is the mean over folds, and the F1
    average is taken over the per-fold macro-F1 values."""
    if not reports:
        raise EmptyInput("no reports to aggregate")
    classes = sorted({c for r in reports for c in r.classes})
    per_class = {}
    for c in classes:
        rows = [r.per_class[c] for r in reports if c in r.per_class]
        per_class[c] = {key: math.fsum(row[key] for row in rows) / len(rows)
                        for key in ("precision", "recall", "f1")}
        per_class[c]["support"] = sum(row["support"] for row in rows)
    mean = lambda xs: math.fsum(xs) / len(xs)
    mccs = [r.mcc for r in reports if r.mcc is not None]
    fold_f1 = [r.macro_f1 for r in reports]
    return MetricsReport(
        task=task or reports[0].task, classes=classes, per_class=per_class,
        macro_precision=mean([r.macro_precision for r in reports]),
        macro_recall=mean([r.macro_recall for r in reports]),
        macro_f1=mean(fold_f1), mcc=mean(mccs) if mccs else None,
        per_fold_f1=fold_f1, per_fold_mcc=mccs,
        f1_avg=f1_avg(fold_f1), mcc_avg=mean(mccs) if mccs else None)
