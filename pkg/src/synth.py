import math
import logging
from dataclasses import dataclass

import numpy as np

from src.models import EVENT_DTYPE, EventStream, SensorGeometry


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)

US_PER_S = 1_000_000
SCENES = ("grating", "bar", "rotating_edge", "flashing")


# ----------------------------
# :: Scene Config Class
# ----------------------------

"""
Shared knobs of the synthetic scenes. Each time an edge crosses a pixel the pixel emits
`burst` events spaced `burst_spacing_us` apart, starting after a per-row random delay of
up to `jitter_us` (None: half the time an edge needs to cross one pixel).
"""

@dataclass(frozen=True, slots=True)
class SceneConfig:
    geometry: SensorGeometry = SensorGeometry(64, 64)
    duration_us: int = 2_000_000
    seed: int = 0
    burst: int = 2
    burst_spacing_us: int = 50
    jitter_us: int | None = None

    def __post_init__(self):
        if self.duration_us <= 0:
            raise ValueError(f"duration must be positive, got {self.duration_us} us")
        if self.burst < 1:
            raise ValueError(f"burst must be at least 1, got {self.burst}")
        if self.burst_spacing_us < 0 or (self.jitter_us is not None and self.jitter_us < 0):
            raise ValueError("burst spacing and jitter must be non-negative")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(int(self.seed) & 0xFFFF_FFFF_FFFF_FFFF)


#-----------------------------
# :: Stream Builder
#-----------------------------

"""
Expands crossing times into bursts and returns a sorted, unlabeled stream on [0, duration].
`t_cross` (microseconds, float) has one entry per (pixel, crossing).
"""

def _burst_stream(cfg: SceneConfig, t_cross, x, y, p, jitter_us: int) -> EventStream:
    rng = cfg.rng()
    t_cross = np.asarray(t_cross, dtype=np.float64)
    if jitter_us > 0:
        t_cross = t_cross + rng.integers(0, jitter_us, size=t_cross.size)
    offsets = np.arange(cfg.burst, dtype=np.float64) * cfg.burst_spacing_us

    t = (t_cross[:, None] + offsets[None, :]).astype(np.int64).ravel()
    keep = (t >= 0) & (t < cfg.duration_us)
    events = np.zeros(int(keep.sum()), dtype=EVENT_DTYPE)
    events["t"] = t[keep]
    events["x"] = np.repeat(x, cfg.burst)[keep]
    events["y"] = np.repeat(y, cfg.burst)[keep]
    events["p"] = np.repeat(p, cfg.burst)[keep]
    events["label"] = -1
    events = events[np.argsort(events["t"], kind="stable")]
    logger.debug(f"Synthesized {events.size} events on {cfg.geometry.width}x{cfg.geometry.height}")
    return EventStream(cfg.geometry, events, 0, cfg.duration_us)


#-----------------------------
# :: Moving Grating Function
#-----------------------------

"""
Vertical stripes of width period/2 drifting right at `speed_px_s`. Edge n sits at
x = speed*t - n*period/2; even edges are leading (ON), odd edges trailing (OFF). With
`bars` set only the first `bars` stripes exist, entering from the left border.
"""

def moving_grating(cfg: SceneConfig = SceneConfig(), speed_px_s: float = 80.0, period_px: int = 16,
                   bars: int | None = None) -> EventStream:
    if speed_px_s <= 0 or period_px < 2:
        raise ValueError("speed must be positive and the period at least 2 px")
    width, height = cfg.geometry.width, cfg.geometry.height
    half = period_px / 2
    travel = speed_px_s * cfg.duration_us / US_PER_S
    if bars is None:
        edges = np.arange(-math.ceil(width / half) - 1, math.ceil(travel / half) + 1)
    else:
        edges = np.arange(2 * bars)

    columns = np.arange(width)
    n, c = np.meshgrid(edges, columns, indexing="ij")
    t = (c + n * half) / speed_px_s * US_PER_S
    inside = (t >= 0) & (t < cfg.duration_us)
    t, c, n = t[inside], c[inside], n[inside]

    rows = np.arange(height)
    t_cross = np.repeat(t, height)
    xs = np.repeat(c, height)
    ys = np.tile(rows, t.size)
    ps = np.where(np.repeat(n, height) % 2 == 0, 1, -1)
    jitter = cfg.jitter_us if cfg.jitter_us is not None else int(US_PER_S / speed_px_s / 2)
    return _burst_stream(cfg, t_cross, xs, ys, ps, jitter)


def moving_bar(cfg: SceneConfig = SceneConfig(), speed_px_s: float = 80.0, bar_width_px: int = 8) -> EventStream:
    """A single bright bar: the grating with one bar and a period of twice its width."""
    return moving_grating(cfg, speed_px_s, 2 * bar_width_px, bars=1)


#-----------------------------
# :: Rotating Edge Function
#-----------------------------

"""
A straight edge through the sensor centre rotating at `turns_per_s`. A pixel at angle
theta is crossed whenever the edge angle equals theta modulo pi; polarity alternates
between successive crossings.
"""

def rotating_edge(cfg: SceneConfig = SceneConfig(), turns_per_s: float = 1.0) -> EventStream:
    if turns_per_s <= 0:
        raise ValueError(f"turns_per_s must be positive, got {turns_per_s}")
    width, height = cfg.geometry.width, cfg.geometry.height
    omega = 2 * math.pi * turns_per_s / US_PER_S
    yy, xx = np.mgrid[0:height, 0:width]
    theta = np.mod(np.arctan2(yy - (height - 1) / 2, xx - (width - 1) / 2), math.pi).ravel()

    crossings = math.ceil(omega * cfg.duration_us / math.pi) + 1
    k = np.arange(crossings)
    t = (theta[None, :] + k[:, None] * math.pi) / omega
    xs = np.broadcast_to(xx.ravel(), t.shape).ravel()
    ys = np.broadcast_to(yy.ravel(), t.shape).ravel()
    ps = np.broadcast_to(np.where(k % 2 == 0, 1, -1)[:, None], t.shape).ravel()
    # one pixel's worth of rotation at the sensor edge
    jitter = cfg.jitter_us if cfg.jitter_us is not None else int(1 / (omega * max(width, height) / 2) / 2)
    return _burst_stream(cfg, t.ravel(), xs, ys, ps, jitter)


#-----------------------------
# :: Flashing Sensor Function
#-----------------------------

"""
Every pixel fires once in each period at an independent random phase, alternating ON and
OFF. Any frame window that is a multiple of the period starting at 0 sees every pixel
on, so its contrast is exactly zero.
"""

def flashing_sensor(cfg: SceneConfig = SceneConfig(), period_us: int = 2_000) -> EventStream:
    if period_us <= 0:
        raise ValueError(f"period must be positive, got {period_us} us")
    rng = cfg.rng()
    n_pixels = cfg.geometry.n_pixels
    periods = math.ceil(cfg.duration_us / period_us)
    k = np.repeat(np.arange(periods), n_pixels)
    pixel = np.tile(np.arange(n_pixels), periods)
    t = k * period_us + rng.integers(0, period_us, size=k.size)
    keep = t < cfg.duration_us

    events = np.zeros(int(keep.sum()), dtype=EVENT_DTYPE)
    events["t"] = t[keep]
    events["x"] = (pixel % cfg.geometry.width)[keep]
    events["y"] = (pixel // cfg.geometry.width)[keep]
    events["p"] = np.where(k % 2 == 0, 1, -1)[keep]
    events["label"] = -1
    events = events[np.argsort(events["t"], kind="stable")]
    return EventStream(cfg.geometry, events, 0, cfg.duration_us)


def synthesize(scene: str, cfg: SceneConfig, speed_px_s: float = 80.0, period_px: int = 16) -> EventStream:
    """Scene by name, as used by the `synth` command; the bar is half a period wide."""
    if scene == "grating":
        return moving_grating(cfg, speed_px_s, period_px)
    if scene == "bar":
        return moving_bar(cfg, speed_px_s, period_px // 2)
    if scene == "rotating_edge":
        return rotating_edge(cfg)
    if scene == "flashing":
        return flashing_sensor(cfg)
    raise ValueError(f"unknown scene {scene!r}; expected one of {', '.join(SCENES)}")
