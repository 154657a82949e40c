import logging
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.metrics import auc

from src import config
from src.concurrency import run_bounded, worker_limit
from src.errors import StreamRangeError
from src.frame_contrast import ON, stack_contrast
from src.models import EventStream


#-----------------------------
# ::  Logger Variable
#-----------------------------

"""
This line creates a logger named after the current module for logging messages and errors.
"""

logger = logging.getLogger(__name__)

US_PER_MS = 1_000


# ----------------------------
# :: Interval Grid Class
# ----------------------------

"""
Strictly increasing accumulation intervals in microseconds.
"""

@dataclass(frozen=True, slots=True)
class IntervalGrid:
    intervals: tuple[int, ...]

    def __post_init__(self):
        intervals = tuple(int(v) for v in self.intervals)
        if any(v <= 0 for v in intervals):
            raise ValueError("every interval must be positive")
        if any(b <= a for a, b in zip(intervals, intervals[1:])):
            raise ValueError("intervals must be strictly increasing")
        object.__setattr__(self, "intervals", intervals)

    @classmethod
    def from_range(cls, start_us: int, stop_us: int, step_us: int) -> "IntervalGrid":
        """Inclusive range start, start+step, ..., up to stop."""
        if step_us <= 0:
            raise ValueError(f"step must be positive, got {step_us}")
        return cls(tuple(range(start_us, stop_us + 1, step_us)))

    @classmethod
    def from_range_ms(cls, start_ms: float, stop_ms: float, step_ms: float) -> "IntervalGrid":
        return cls.from_range(round(start_ms * US_PER_MS), round(stop_ms * US_PER_MS), round(step_ms * US_PER_MS))

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def check_duration(self, duration: int) -> None:
        too_long = [dt for dt in self.intervals if dt > duration]
        if too_long:
            raise StreamRangeError(
                f"{len(too_long)} interval(s) exceed the stream duration {duration} us (first {too_long[0]} us)")

    def clipped(self, duration: int) -> "IntervalGrid":
        return IntervalGrid(tuple(dt for dt in self.intervals if dt <= duration))


DEFAULT_GRID = IntervalGrid.from_range_ms(2, 400, 2)
FINE_GRID = IntervalGrid(
    IntervalGrid.from_range_ms(1, 60, 1).intervals + IntervalGrid.from_range_ms(65, 85, 5).intervals)
GRID_PRESETS = {"default": DEFAULT_GRID, "fine": FINE_GRID}


# ----------------------------
# :: Result Classes
# ----------------------------

@dataclass(frozen=True, slots=True, eq=False)
class ContrastCurve:
    dt_us: np.ndarray
    c_avg: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dt_us", np.asarray(self.dt_us, dtype=np.int64))
        object.__setattr__(self, "c_avg", np.asarray(self.c_avg, dtype=np.float64))
        if self.dt_us.shape != self.c_avg.shape:
            raise ValueError("dt_us and c_avg must have the same length")

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.dt_us.tolist(), self.c_avg.tolist()))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"dt_us": self.dt_us, "c_avg": self.c_avg})


"""
Both areas under the contrast curve. `aocc_sum` is the plain sum of curve values (the
reported metric); `aocc_trapezoid` integrates over dt in microseconds starting from (0, 0).
"""

@dataclass(frozen=True, slots=True, eq=False)
class AoccResult:
    aocc_sum: float
    aocc_trapezoid: float
    curve: ContrastCurve
    grid: IntervalGrid


#-----------------------------
# :: Average Contrast Function
#-----------------------------

"""
Mean contrast over the m = floor(duration / dt) half-open windows tiling
[t_start, t_start + m*dt); events in the remainder are ignored. Frames are built as a
uint8 stack and filtered in batches; `workers` concurrent callers share the
FRAME_CHUNK_PIXELS budget, so each batch holds at most budget / workers pixels.
"""

def average_contrast(stream: EventStream, dt: int, workers: int = 1) -> float:
    duration = stream.duration
    if not 0 < dt <= duration:
        raise StreamRangeError(f"interval {dt} us outside (0, {duration}]")
    m = duration // dt
    if len(stream) == 0:
        return 0.0

    height, width = stream.geometry.shape
    window = (stream.t - stream.t_start) // dt
    inside = window < m
    window, xs, ys = window[inside], stream.x[inside], stream.y[inside]

    chunk = max(1, config.FRAME_CHUNK_PIXELS // (max(1, workers) * height * width))
    bounds = np.searchsorted(window, np.arange(0, m + chunk, chunk).clip(max=m))
    contrasts = np.empty(m, dtype=np.float64)
    for start, (lo, hi) in zip(range(0, m, chunk), zip(bounds[:-1], bounds[1:])):
        count = min(chunk, m - start)
        stack = np.zeros((count, height, width), dtype=np.uint8)
        stack[window[lo:hi] - start, ys[lo:hi], xs[lo:hi]] = ON
        contrasts[start:start + count] = stack_contrast(stack)
    return float(contrasts.mean())


#-----------------------------
# :: CCC Function
#-----------------------------

"""
One average-contrast point per grid interval. Points are independent and computed on a
thread pool; each point is a fixed reduction, so results do not depend on scheduling.
"""

def ccc(stream: EventStream, grid: IntervalGrid = DEFAULT_GRID, n_jobs: int | None = None) -> ContrastCurve:
    grid.check_duration(stream.duration)
    jobs = worker_limit(n_jobs)
    if jobs == 1:
        values = [average_contrast(stream, dt) for dt in grid]
    else:
        values = Parallel(n_jobs=jobs, prefer="threads")(
            delayed(average_contrast)(stream, dt, jobs) for dt in grid
        )
    logger.debug(f"CCC over {len(grid)} intervals for {len(stream)} events")
    return ContrastCurve(np.array(grid.intervals, dtype=np.int64), np.array(values, dtype=np.float64))


#-----------------------------
# :: AOCC Function
#-----------------------------

def aocc(curve: ContrastCurve) -> AoccResult:
    grid = IntervalGrid(tuple(curve.dt_us.tolist()))
    if curve.c_avg.size == 0:
        return AoccResult(0.0, 0.0, curve, grid)
    x = np.concatenate([[0.0], curve.dt_us.astype(np.float64)])
    y = np.concatenate([[0.0], curve.c_avg])
    return AoccResult(float(curve.c_avg.sum()), float(auc(x, y)), curve, grid)


def stream_aocc(stream: EventStream, grid: IntervalGrid = DEFAULT_GRID, n_jobs: int | None = None) -> AoccResult:
    """CCC over `grid` followed by both AOCC forms."""
    return aocc(ccc(stream, grid, n_jobs))


# ----------------------------
# :: Sweep Classes
# ----------------------------

@dataclass(frozen=True, slots=True)
class SweepResult:
    entries: tuple[tuple[Hashable, AoccResult], ...]
    best_index: int

    @property
    def best_param(self) -> Hashable:
        return self.entries[self.best_index][0]

    @property
    def aocc_sums(self) -> np.ndarray:
        return np.array([result.aocc_sum for _, result in self.entries])


#-----------------------------
# :: Sweep Function
#-----------------------------

"""
AOCC for each (parameter, stream) pair, fanned out over workers; the argmax is the first
parameter with the largest aocc_sum.
"""

def sweep(streams: Sequence[tuple[Hashable, EventStream]], grid: IntervalGrid = DEFAULT_GRID,
          n_jobs: int | None = None) -> SweepResult:
    if not streams:
        raise ValueError("sweep needs at least one (parameter, stream) pair")
    results = run_bounded(lambda item: stream_aocc(item[1], grid, n_jobs=1), streams, n_jobs)
    entries = tuple((param, result) for (param, _), result in zip(streams, results))
    best = int(np.argmax([result.aocc_sum for result in results]))
    logger.info(f"Sweep over {len(entries)} parameters: best {entries[best][0]} "
                f"(aocc_sum={results[best].aocc_sum:.6g})")
    return SweepResult(entries, best)
