import logging
from enum import Enum
from dataclasses import dataclass

import numpy as np

from src.errors import MissingLabelError
from src.models import EventStream, Label, SensorGeometry


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)


#-----------------------------
# :: Threshold Grid
#-----------------------------

"""
Score thresholds 0.02 to 0.98 in steps of 0.02, rounded so values print cleanly.
"""

DEFAULT_THRESHOLDS = tuple(round(0.02 * k, 2) for k in range(1, 50))


class DenoiserVariant(str, Enum):
    DWF = "dwf"
    SCORE_THRESHOLD = "threshold"
    PASSTHROUGH = "passthrough"


class Norm(str, Enum):
    CHEBYSHEV = "chebyshev"
    L1 = "l1"


# ----------------------------
# :: Denoiser Config Class
# ----------------------------

"""
One denoiser configuration. DWF fields are ignored by the other variants and vice versa.
"""

@dataclass(frozen=True, slots=True)
class DenoiserConfig:
    variant: DenoiserVariant = DenoiserVariant.DWF
    dwf_search_radius: int = 4
    dwf_buffer_size: int = 200
    dwf_support_count: int = 1
    dwf_norm: Norm = Norm.CHEBYSHEV
    threshold: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "variant", DenoiserVariant(self.variant))
        object.__setattr__(self, "dwf_norm", Norm(self.dwf_norm))
        for name in ("dwf_search_radius", "dwf_buffer_size", "dwf_support_count"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be int, got {type(value).__name__}")
            if value < 1:
                raise ValueError(f"{name} must be positive, got {value}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")

    def check_geometry(self, geometry: SensorGeometry) -> None:
        limit = max(geometry.width, geometry.height)
        if self.variant is DenoiserVariant.DWF and self.dwf_search_radius > limit:
            raise ValueError(f"search radius {self.dwf_search_radius} exceeds sensor dimension {limit}")


# ----------------------------
# :: Scored Stream Class
# ----------------------------

"""
A stream plus one classifier score in [0, 1] per event; higher means more likely signal.
"""

@dataclass(frozen=True, slots=True, eq=False)
class ScoredStream:
    stream: EventStream
    scores: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.shape != (len(self.stream),):
            raise ValueError(f"expected {len(self.stream)} scores, got shape {scores.shape}")
        if scores.size and (np.isnan(scores).any() or scores.min() < 0.0 or scores.max() > 1.0):
            raise ValueError("scores must lie in [0, 1]")
        scores.flags.writeable = False
        object.__setattr__(self, "scores", scores)


#-----------------------------
# :: DWF Mask Function
#-----------------------------

"""
Double window filter, one pass in time order. Two FIFO windows of `dwf_buffer_size`
coordinates hold the most recent accepted and rejected events. An event is accepted when
at least `dwf_support_count` entries of the union of both windows lie within the search
radius; it is then pushed into the accepted window, otherwise into the rejected one.

Both rings live in one array (accepted in the first half) so each event costs a single
vectorised distance test. Empty slots hold a coordinate no pixel can reach.
"""

def dwf_mask(stream: EventStream, cfg: DenoiserConfig) -> np.ndarray:
    cfg.check_geometry(stream.geometry)
    size = cfg.dwf_buffer_size
    radius = cfg.dwf_search_radius
    support = cfg.dwf_support_count
    chebyshev = cfg.dwf_norm is Norm.CHEBYSHEV

    unreachable = -4 * (max(stream.geometry.width, stream.geometry.height) + radius + 1)
    win_x = np.full(2 * size, unreachable, dtype=np.int64)
    win_y = np.full(2 * size, unreachable, dtype=np.int64)
    dx = np.empty(2 * size, dtype=np.int64)
    dy = np.empty(2 * size, dtype=np.int64)
    head_accepted, head_rejected = 0, 0

    keep = np.zeros(len(stream), dtype=bool)
    for i, (x, y) in enumerate(zip(stream.x.tolist(), stream.y.tolist())):
        np.abs(np.subtract(win_x, x, out=dx), out=dx)
        np.abs(np.subtract(win_y, y, out=dy), out=dy)
        if chebyshev:
            np.maximum(dx, dy, out=dx)
        else:
            np.add(dx, dy, out=dx)
        if np.count_nonzero(dx <= radius) >= support:
            keep[i] = True
            slot = head_accepted
            head_accepted = (head_accepted + 1) % size
        else:
            slot = size + head_rejected
            head_rejected = (head_rejected + 1) % size
        win_x[slot] = x
        win_y[slot] = y

    logger.debug(f"DWF r={radius} B={size}: kept {int(keep.sum())}/{len(stream)}")
    return keep


def dwf_denoise(stream: EventStream, cfg: DenoiserConfig) -> EventStream:
    """Kept events of a DWF pass, in their original order."""
    if cfg.variant is not DenoiserVariant.DWF:
        raise ValueError(f"dwf_denoise needs a DWF config, got {cfg.variant.value}")
    return stream.take(dwf_mask(stream, cfg))


#-----------------------------
# :: Threshold Denoise Function
#-----------------------------

"""
Score thresholding with an inclusive bound: an event survives when its score is at least
`threshold`, so 0 keeps everything and 1 keeps only events scored exactly 1.
"""

def threshold_mask(scored: ScoredStream, threshold: float) -> np.ndarray:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    return scored.scores >= threshold


def threshold_denoise(scored: ScoredStream, threshold: float) -> EventStream:
    """Keeps exactly the events whose score is >= threshold, in order."""
    return scored.stream.take(threshold_mask(scored, threshold))


#-----------------------------
# :: Oracle Scores Function
#-----------------------------

"""
Synthetic classifier for threshold sweeps without a trained network: the true label
(1 signal, 0 noise) plus Gaussian noise, clamped to [0, 1]. Deterministic per seed.
"""

def oracle_scores(stream: EventStream, noise_sigma: float, seed: int) -> ScoredStream:
    if not stream.labeled:
        raise MissingLabelError("oracle scores need a labeled stream")
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be >= 0, got {noise_sigma}")
    rng = np.random.default_rng(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)
    truth = (stream.labels == Label.SIGNAL).astype(np.float64)
    scores = np.clip(truth + rng.normal(0.0, noise_sigma, size=len(stream)), 0.0, 1.0)
    return ScoredStream(stream, scores)


#-----------------------------
# :: Denoise Dispatch
#-----------------------------

"""
Single entry point over all variants. Returns the keep mask so callers that score the
result against labels do not need to re-match events.
"""

def denoise_mask(stream: EventStream, cfg: DenoiserConfig, scores: np.ndarray | None = None) -> np.ndarray:
    if cfg.variant is DenoiserVariant.DWF:
        return dwf_mask(stream, cfg)
    if cfg.variant is DenoiserVariant.SCORE_THRESHOLD:
        if scores is None:
            raise ValueError("threshold denoising needs per-event scores")
        return threshold_mask(ScoredStream(stream, scores), cfg.threshold)
    return np.ones(len(stream), dtype=bool)


def denoise(stream: EventStream, cfg: DenoiserConfig, scores: np.ndarray | None = None) -> EventStream:
    """Applies `cfg` and returns the kept events; see `denoise_mask`."""
    return stream.take(denoise_mask(stream, cfg, scores))
