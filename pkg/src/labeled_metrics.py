import math
import logging
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np
from sklearn.metrics import auc

from src.denoisers import ScoredStream
from src.errors import ConsistencyError, DegenerateClassError, MissingLabelError
from src.models import EventStream, Label


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["tp", "tn", "fp", "fn", "nerr", "verr", "snr_db", "acc", "tpr", "fpr"]


# ----------------------------
# :: Confusion Counts Class
# ----------------------------

"""
Signal kept (tp), noise removed (tn), noise kept (fp) and signal removed (fn).
"""

@dataclass(frozen=True, slots=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be int, got {type(value).__name__}")
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def scaled(self, k: int) -> "ConfusionCounts":
        return ConfusionCounts(self.tp * k, self.tn * k, self.fp * k, self.fn * k)


#-----------------------------
# :: Confusion Functions
#-----------------------------

"""
Matches `kept` against `input` as an ordered subsequence with one linear two-pointer
scan. Events match on (t, x, y, p), and on the label too when `kept` carries labels.
"""

def confusion(input: EventStream, kept: EventStream) -> ConfusionCounts:
    if not input.labeled:
        raise MissingLabelError("confusion needs a labeled input stream")
    fields = ["t", "x", "y", "p", "label"] if kept.labeled else ["t", "x", "y", "p"]
    source = input.events[fields].tolist()
    targets = kept.events[fields].tolist()

    keep = np.zeros(len(input), dtype=bool)
    i = 0
    for j, target in enumerate(targets):
        while i < len(source) and source[i] != target:
            i += 1
        if i == len(source):
            raise ConsistencyError(f"kept event {j} {target} is not part of the input sequence")
        keep[i] = True
        i += 1
    return confusion_from_mask(input.labels, keep)


def confusion_from_mask(labels: np.ndarray, keep: np.ndarray) -> ConfusionCounts:
    """Counts from the input labels and a boolean keep mask over the same events."""
    labels = np.asarray(labels)
    keep = np.asarray(keep, dtype=bool)
    if labels.shape != keep.shape:
        raise ConsistencyError(f"{labels.shape[0]} labels but {keep.shape[0]} keep flags")
    signal = labels == Label.SIGNAL
    noise = labels == Label.NOISE
    if not np.all(signal | noise):
        raise MissingLabelError("every event needs a signal or noise label")
    return ConfusionCounts(
        tp=int(np.count_nonzero(keep & signal)),
        tn=int(np.count_nonzero(~keep & noise)),
        fp=int(np.count_nonzero(keep & noise)),
        fn=int(np.count_nonzero(~keep & signal)),
    )


# ----------------------------
# :: Metrics Report Class
# ----------------------------

@dataclass(frozen=True, slots=True)
class MetricsReport:
    counts: ConfusionCounts
    nerr: float
    verr: float
    snr_db: float
    acc: float
    tpr: float
    fpr: float

    def to_row(self) -> dict:
        return {**asdict(self.counts), "nerr": self.nerr, "verr": self.verr, "snr_db": self.snr_db,
                "acc": self.acc, "tpr": self.tpr, "fpr": self.fpr}


def _ratio(num: int, den: int) -> float:
    return num / den if den else math.nan


def _snr_db(tp: int, fp: int) -> float:
    if tp and fp:
        return 10.0 * math.log10(tp / fp)
    if tp:
        return math.inf
    if fp:
        return -math.inf
    return math.nan


#-----------------------------
# :: Report Function
#-----------------------------

"""
Rate metrics from one confusion table. TPR and FPR are computed as complements of the
removal rates, not from the counts, so the identities hold as computed. Zero
denominators give nan; SNR is +inf without kept noise and -inf without kept signal.
"""

def report(counts: ConfusionCounts) -> MetricsReport:
    nerr = _ratio(counts.tn, counts.tn + counts.fp)
    verr = _ratio(counts.fn, counts.fn + counts.tp)
    return MetricsReport(
        counts=counts,
        nerr=nerr,
        verr=verr,
        snr_db=_snr_db(counts.tp, counts.fp),
        acc=_ratio(counts.tp + counts.tn, counts.total),
        tpr=1.0 - verr,
        fpr=1.0 - nerr,
    )


# ----------------------------
# :: ROC Curve Class
# ----------------------------

"""
(fpr, tpr, threshold) points sorted by fpr then tpr, anchors included. The (0, 0)
anchor has threshold +inf and (1, 1) has threshold 0.
"""

@dataclass(frozen=True, slots=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), self.thresholds.tolist()))


def auc_from_points(fpr: Sequence[float], tpr: Sequence[float]) -> float:
    """Trapezoidal area of an ROC polyline; points are sorted by (fpr, tpr) first."""
    fpr = np.asarray(fpr, dtype=np.float64)
    tpr = np.asarray(tpr, dtype=np.float64)
    order = np.lexsort((tpr, fpr))
    return float(auc(fpr[order], tpr[order]))


#-----------------------------
# :: ROC Function
#-----------------------------

def roc(scored: ScoredStream, thresholds: Sequence[float]) -> RocCurve:
    stream = scored.stream
    if not stream.labeled:
        raise MissingLabelError("ROC needs a labeled stream")
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if thresholds.size == 0:
        raise ValueError("ROC needs at least one threshold")

    signal_scores = np.sort(scored.scores[stream.labels == Label.SIGNAL])
    noise_scores = np.sort(scored.scores[stream.labels == Label.NOISE])
    if signal_scores.size == 0 or noise_scores.size == 0:
        raise DegenerateClassError(
            f"ROC undefined with {signal_scores.size} signal and {noise_scores.size} noise events")

    # events kept at threshold tau are those with score >= tau
    tpr = 1.0 - np.searchsorted(signal_scores, thresholds, side="left") / signal_scores.size
    fpr = 1.0 - np.searchsorted(noise_scores, thresholds, side="left") / noise_scores.size

    fpr = np.concatenate([[0.0], fpr, [1.0]])
    tpr = np.concatenate([[0.0], tpr, [1.0]])
    taus = np.concatenate([[math.inf], thresholds, [0.0]])
    order = np.lexsort((tpr, fpr))
    fpr, tpr, taus = fpr[order], tpr[order], taus[order]
    area = float(auc(fpr, tpr))
    logger.debug(f"ROC over {thresholds.size} thresholds: AUC={area:.6f}")
    return RocCurve(fpr, tpr, taus, area)
