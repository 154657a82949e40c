import math
import logging
from dataclasses import dataclass

import numpy as np

from src.errors import DegenerateInputError
from src.models import EventStream, slice_stream


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)


# ----------------------------
# :: Event Count Image Class
# ----------------------------

"""
Per-pixel event counts at native coordinates (identity warp), shape (H, W). `m_ref` is
the reference event count; None means "use N".
"""

@dataclass(frozen=True, slots=True, eq=False)
class EventCountImage:
    counts: np.ndarray
    m_ref: int | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.size and counts.min() < 0:
            raise ValueError("event counts must be non-negative")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        if self.m_ref is not None and (isinstance(self.m_ref, bool) or int(self.m_ref) < 1):
            raise ValueError(f"m_ref must be a positive integer, got {self.m_ref}")

    @property
    def K(self) -> int:
        return int(self.counts.size)

    @property
    def N(self) -> int:
        return int(self.counts.sum())

    @property
    def M(self) -> int:
        return self.N if self.m_ref is None else int(self.m_ref)


@dataclass(frozen=True, slots=True)
class EsrResult:
    ntss: float
    ln: float
    esr: float
    n_events: int
    m_ref: int | None

    def to_row(self) -> dict:
        return {"ntss": self.ntss, "ln": self.ln, "esr": self.esr}


#-----------------------------
# :: Count Image Function
#-----------------------------

def count_image(stream: EventStream, window: tuple[int, int] | None = None, m_ref: int | None = None) -> EventCountImage:
    """Polarity-agnostic counts of the events in the closed window (whole stream by default)."""
    if window is not None:
        stream = slice_stream(stream, *window)
    counts = np.zeros(stream.geometry.n_pixels, dtype=np.int64)
    np.add.at(counts, stream.y.astype(np.int64) * stream.geometry.width + stream.x, 1)
    return EventCountImage(counts.reshape(stream.geometry.shape), m_ref)


#-----------------------------
# :: ESR Function
#-----------------------------

"""
Normalized total sum of squares, penalty coefficient and their geometric mean:

    NTSS = sum n(n-1) / (N(N-1))
    LN   = K - sum (1 - M/N)^n      (empty pixels contribute 1)
    ESR  = sqrt(NTSS * LN)

With M = N the penalty reduces to the number of active pixels.
"""

def esr(image: EventCountImage, m_ref: int | None = None) -> EsrResult:
    n_total = image.N
    if n_total < 2:
        raise DegenerateInputError(f"ESR needs at least 2 events, got {n_total}")
    if m_ref is None:
        m_ref = image.m_ref
    m = n_total if m_ref is None else int(m_ref)
    if m < 1:
        raise ValueError(f"m_ref must be a positive integer, got {m}")
    if m > n_total:
        raise ValueError(f"m_ref {m} exceeds the event count {n_total}")

    n = image.counts.ravel().astype(np.float64)
    ntss = float(np.sum(n * (n - 1.0)) / (n_total * (n_total - 1.0)))
    ln = float(image.K - np.sum(np.power(1.0 - m / n_total, n)))
    value = math.sqrt(ntss * ln)
    return EsrResult(ntss, ln, value, n_total, m_ref)


def stream_esr(stream: EventStream, m_ref: int | None = None) -> EsrResult:
    """ESR of the whole stream at native coordinates."""
    return esr(count_image(stream), m_ref)


#-----------------------------
# :: Windowed ESR Function
#-----------------------------

"""
Averages NTSS, LN and ESR over the half-open windows of length `window_us` tiling the
stream from t_start, like the CCC windows. Windows with fewer than 2 events are skipped.
"""

def esr_windowed(stream: EventStream, window_us: int, m_ref: int | None = None) -> EsrResult:
    if window_us <= 0:
        raise ValueError(f"window must be positive, got {window_us} us")
    m = max(1, stream.duration // window_us)
    results = []
    for k in range(m):
        t0 = stream.t_start + k * window_us
        part = stream.window(t0, t0 + window_us)
        if len(part) < 2:
            continue
        image = count_image(part)
        # a fixed M larger than a sparse window's count cannot be applied to it
        results.append(esr(image, None if m_ref is None else min(m_ref, image.N)))
    if not results:
        raise DegenerateInputError(f"no {window_us} us window holds at least 2 events")
    logger.debug(f"Windowed ESR over {len(results)}/{m} windows")
    return EsrResult(
        ntss=float(np.mean([r.ntss for r in results])),
        ln=float(np.mean([r.ln for r in results])),
        esr=float(np.mean([r.esr for r in results])),
        n_events=len(stream),
        m_ref=m_ref,
    )
