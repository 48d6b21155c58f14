"""Evaluation measures: forecast accuracy, similarity, classification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BandTooNarrow,
    EmptySeries,
    LengthMismatch,
    MissingTraining,
    NonBinaryLabels,
    UnsupportedOperation,
    ZeroActual,
    ZeroDenominator,
)


@dataclass(frozen=True)
class MeasureValue:
    measure: str  # term curie
    value: float
    n: int


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int


def _as_arrays(actual, predicted):
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if len(a) != len(p):
        raise LengthMismatch(f"actual has {len(a)} points, predicted {len(p)}")
    if len(a) == 0:
        raise EmptySeries("no pairs to evaluate")
    return a, p


def forecast_accuracy(actual, predicted, measures, training=None) -> list[MeasureValue]:
    """Evaluate the named accuracy measures over actual/predicted pairs.

    measures are term curies; MASE additionally needs the training series the
    forecast was produced from.
    """
    a, p = _as_arrays(actual, predicted)
    e = a - p
    n = len(a)
    out = []
    for curie in measures:
        name = curie.split(":", 1)[-1]
        if name == "ME":
            v = float(e.mean())
        elif name == "MSE":
            v = float((e**2).mean())
        elif name == "RMSE":
            v = float(np.sqrt((e**2).mean()))
        elif name == "MAE":
            v = float(np.abs(e).mean())
        elif name == "MdAE":
            v = float(np.median(np.abs(e)))
        elif name in ("MPE", "MAPE"):
            if (a == 0).any():
                raise ZeroActual(f"{name} undefined: zero actual value")
            v = float((100.0 * e / a).mean()) if name == "MPE" \
                else float((100.0 * np.abs(e) / np.abs(a)).mean())
        elif name == "sMAPE":
            denom = np.abs(a) + np.abs(p)
            if (denom == 0).any():
                raise ZeroDenominator("sMAPE undefined: |y| + |yhat| = 0 at some point")
            v = float((200.0 * np.abs(e) / denom).mean())
        elif name == "MASE":
            if training is None or len(training) < 2:
                raise MissingTraining("MASE needs a training series with >= 2 points")
            t = np.asarray(training, dtype=float)
            scale = float(np.abs(np.diff(t)).mean())
            if scale == 0:
                raise ZeroDenominator("MASE undefined: constant training series")
            v = float(np.abs(e).mean() / scale)
        else:
            raise UnsupportedOperation(f"measure {curie} is not executable")
        out.append(MeasureValue(measure=curie, value=v, n=n))
    return out


def dtw(x, y, band: int | None = None) -> float:
    """Dynamic time warping distance with |.| pointwise cost.

    band, when given, is the Sakoe-Chiba half-width restricting |i - j|.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = len(x), len(y)
    if n == 0 or m == 0:
        raise EmptySeries("dtw needs two non-empty series")
    if band is not None and band < abs(n - m):
        raise BandTooNarrow(f"band {band} < length difference {abs(n - m)}")
    inf = np.inf
    prev = np.full(m + 1, inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur = np.full(m + 1, inf)
        lo = 1 if band is None else max(1, i - band)
        hi = m if band is None else min(m, i + band)
        for j in range(lo, hi + 1):
            cost = abs(x[i - 1] - y[j - 1])
            cur[j] = cost + min(prev[j], cur[j - 1], prev[j - 1])
        prev = cur
    return float(prev[m])


def euclidean(x, y) -> float:
    a, b = _as_arrays(x, y)
    return float(np.sqrt(((a - b) ** 2).sum()))


def classification_scores(actual_labels, predicted_labels) -> dict:
    """Binary confusion counts plus precision/recall/F1 (0/0 defined as 0)."""
    a = list(actual_labels)
    p = list(predicted_labels)
    if len(a) != len(p):
        raise LengthMismatch(f"{len(a)} actual labels vs {len(p)} predicted")
    if len(a) == 0:
        raise EmptySeries("no labels to score")
    labels = set(a) | set(p)
    if not labels <= {0, 1} and not labels <= {False, True}:
        raise NonBinaryLabels(f"labels must be binary, got {sorted(labels)}")
    tp = sum(1 for ai, pi in zip(a, p) if ai and pi)
    fp = sum(1 for ai, pi in zip(a, p) if not ai and pi)
    tn = sum(1 for ai, pi in zip(a, p) if not ai and not pi)
    fn = sum(1 for ai, pi in zip(a, p) if ai and not pi)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {
        "confusion": ConfusionMatrix(tp, fp, tn, fn),
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }
