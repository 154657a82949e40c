import logging
from dataclasses import dataclass

import numpy as np

from src.errors import StreamRangeError
from src.models import EVENT_DTYPE, EventStream, Label, merge


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)

US_PER_S = 1_000_000
NOISE_LEVELS_HZ = (1.0, 3.0, 5.0)


# ----------------------------
# :: Noise Config Class
# ----------------------------

"""
Background-activity noise settings: per-pixel rate in Hz, RNG seed, the probability that
a noise event has polarity +1, and whether labels already on the input survive.
"""

@dataclass(frozen=True, slots=True)
class NoiseConfig:
    rate: float
    seed: int = 0
    polarity_split: float = 0.5
    keep_labels: bool = False

    def __post_init__(self):
        if isinstance(self.rate, bool) or not isinstance(self.rate, (int, float, np.number)):
            raise TypeError(f"rate must be a number, got {type(self.rate).__name__}")
        if not np.isfinite(self.rate) or self.rate < 0:
            raise ValueError(f"rate must be a finite value >= 0, got {self.rate}")
        if not isinstance(self.seed, (int, np.integer)):
            raise TypeError(f"seed must be int, got {type(self.seed).__name__}")
        if not 0.0 <= self.polarity_split <= 1.0:
            raise ValueError(f"polarity_split must lie in [0, 1], got {self.polarity_split}")


#-----------------------------
# :: Inject Function
#-----------------------------

"""
Adds homogeneous Poisson background activity. A single total count is drawn for the
whole sensor and window, then every noise event gets a uniform pixel, a uniform
timestamp in [t_start, t_end) and a Bernoulli polarity; this has the same distribution
as independent per-pixel processes.

Input events are labeled Signal. With `keep_labels` a labeled input keeps its labels,
so noise can be layered onto an already injected stream. Their fields are never modified.
"""

def inject(stream: EventStream, cfg: NoiseConfig) -> EventStream:
    geometry = stream.geometry
    duration = stream.duration
    if cfg.rate > 0 and duration <= 0:
        raise StreamRangeError(f"noise injection needs a positive duration, got {duration} us")

    if cfg.keep_labels and stream.labeled:
        signal = stream
    else:
        signal = stream.with_labels(np.full(len(stream), Label.SIGNAL, dtype=np.int8))

    rng = np.random.default_rng(int(cfg.seed) & 0xFFFF_FFFF_FFFF_FFFF)
    expected = cfg.rate * duration / US_PER_S * geometry.n_pixels
    count = int(rng.poisson(expected)) if expected > 0 else 0

    noise = np.zeros(count, dtype=EVENT_DTYPE)
    if count:
        noise["t"] = rng.integers(stream.t_start, stream.t_end, size=count)
        noise["x"] = rng.integers(0, geometry.width, size=count)
        noise["y"] = rng.integers(0, geometry.height, size=count)
        noise["p"] = np.where(rng.random(count) < cfg.polarity_split, 1, -1)
        noise = noise[np.argsort(noise["t"], kind="stable")]
    noise["label"] = Label.NOISE

    noise_stream = EventStream(geometry, noise, stream.t_start, stream.t_end, labeled=True)
    logger.info(f"Injected {count} noise events (rate {cfg.rate} Hz/pixel, expected {expected:.1f})")
    return merge(signal, noise_stream)
