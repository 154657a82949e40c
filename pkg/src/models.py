import logging
from enum import IntEnum
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from src.errors import IncompatibleStreamError, StreamRangeError


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)


#-----------------------------
# :: Record Layout
#-----------------------------

"""
In-memory layout of one event. Timestamps are signed so window arithmetic never wraps;
`label` is -1 for unlabeled events, otherwise a Label value.
"""

EVENT_DTYPE = np.dtype([("t", "<i8"), ("x", "<u2"), ("y", "<u2"), ("p", "i1"), ("label", "i1")])
UNLABELED = -1


class Label(IntEnum):
    NOISE = 0
    SIGNAL = 1


# ----------------------------
# :: Sensor Geometry Class
# ----------------------------

"""
Pixel array size. Defaults to the DAVIS346 (346x260).
"""

@dataclass(frozen=True, slots=True)
class SensorGeometry:
    width: int = 346
    height: int = 260

    def __post_init__(self):
        for name in ("width", "height"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be int, got {type(value).__name__}")
            if value < 1:
                raise ValueError(f"{name} must be positive, got {value}")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height


# ----------------------------
# :: Event Classes
# ----------------------------

"""
Single-event views. Streams store events column-wise; these exist for construction
from Python literals and for iteration.
"""

@dataclass(frozen=True, slots=True)
class Event:
    t: int = field(metadata={"units": "us"})
    x: int
    y: int
    p: int

    def __post_init__(self):
        for name in ("t", "x", "y", "p"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be int, got {type(value).__name__}")
        if self.t < 0:
            raise ValueError(f"t must be non-negative, got {self.t}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"x and y must be non-negative, got ({self.x}, {self.y})")
        if self.p not in (-1, 1):
            raise ValueError(f"p must be -1 or +1, got {self.p}")


@dataclass(frozen=True, slots=True)
class LabeledEvent:
    event: Event
    label: Label

    def __post_init__(self):
        if not isinstance(self.event, Event):
            raise TypeError(f"event must be Event, got {type(self.event).__name__}")
        object.__setattr__(self, "label", Label(self.label))


#-----------------------------
# :: Violation Class
#-----------------------------

@dataclass(frozen=True, slots=True)
class Violation:
    kind: str
    message: str
    index: int | None = None


# ----------------------------
# :: Event Stream Class
# ----------------------------

"""
A bounded recording: events sorted by timestamp inside [t_start, t_end] on one sensor.
The event array is made read-only on construction so streams can be shared between
workers without copies. Invariants are not enforced here; `validate` reports them.
"""

@dataclass(frozen=True, slots=True, eq=False)
class EventStream:
    geometry: SensorGeometry
    events: np.ndarray
    t_start: int = 0
    t_end: int = 0
    labeled: bool = False

    def __post_init__(self):
        if not isinstance(self.geometry, SensorGeometry):
            raise TypeError(f"geometry must be SensorGeometry, got {type(self.geometry).__name__}")
        if not isinstance(self.events, np.ndarray) or self.events.dtype != EVENT_DTYPE:
            raise TypeError("events must be a numpy array with EVENT_DTYPE")
        if self.events.ndim != 1:
            raise ValueError(f"events must be one-dimensional, got shape {self.events.shape}")
        object.__setattr__(self, "t_start", int(self.t_start))
        object.__setattr__(self, "t_end", int(self.t_end))
        object.__setattr__(self, "labeled", bool(self.labeled))
        self.events.flags.writeable = False

    #-----------------------------
    # :: Constructors
    #-----------------------------

    @classmethod
    def from_arrays(cls, geometry, t, x, y, p, label=None, t_start=None, t_end=None) -> "EventStream":
        t = np.asarray(t, dtype=np.int64)
        events = np.zeros(t.shape[0], dtype=EVENT_DTYPE)
        events["t"] = t
        events["x"] = np.asarray(x)
        events["y"] = np.asarray(y)
        events["p"] = np.asarray(p)
        events["label"] = UNLABELED if label is None else np.asarray(label)
        if t_start is None:
            t_start = int(t.min()) if t.size else 0
        if t_end is None:
            t_end = int(t.max()) if t.size else t_start
        return cls(geometry, events, t_start, t_end, labeled=label is not None)

    @classmethod
    def from_events(cls, geometry, items: Iterable[Event | LabeledEvent], t_start=None, t_end=None) -> "EventStream":
        items = list(items)
        labeled = [isinstance(item, LabeledEvent) for item in items]
        if any(labeled) and not all(labeled):
            raise TypeError("cannot mix Event and LabeledEvent in one stream")
        plain = [item.event if isinstance(item, LabeledEvent) else item for item in items]
        labels = [int(item.label) for item in items] if items and all(labeled) else None
        return cls.from_arrays(
            geometry,
            [e.t for e in plain], [e.x for e in plain], [e.y for e in plain], [e.p for e in plain],
            label=labels, t_start=t_start, t_end=t_end,
        )

    @classmethod
    def empty(cls, geometry, t_start: int = 0, t_end: int = 0, labeled: bool = False) -> "EventStream":
        return cls(geometry, np.zeros(0, dtype=EVENT_DTYPE), t_start, t_end, labeled)

    #-----------------------------
    # :: Accessors
    #-----------------------------

    @property
    def t(self) -> np.ndarray:
        return self.events["t"]

    @property
    def x(self) -> np.ndarray:
        return self.events["x"]

    @property
    def y(self) -> np.ndarray:
        return self.events["y"]

    @property
    def p(self) -> np.ndarray:
        return self.events["p"]

    @property
    def labels(self) -> np.ndarray:
        return self.events["label"]

    @property
    def duration(self) -> int:
        return self.t_end - self.t_start

    def __len__(self) -> int:
        return int(self.events.shape[0])

    def __iter__(self) -> Iterator[Event | LabeledEvent]:
        for t, x, y, p, label in self.events.tolist():
            event = Event(t, x, y, p)
            yield LabeledEvent(event, Label(label)) if self.labeled else event

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and self.t_start == other.t_start
            and self.t_end == other.t_end
            and self.labeled == other.labeled
            and np.array_equal(self.events, other.events)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (f"EventStream({self.geometry.width}x{self.geometry.height}, n={len(self)}, "
                f"t=[{self.t_start}, {self.t_end}], labeled={self.labeled})")

    #-----------------------------
    # :: Derived Streams
    #-----------------------------

    def take(self, selector) -> "EventStream":
        """Subsequence by boolean mask or sorted index array; bounds and geometry are kept."""
        return EventStream(self.geometry, self.events[selector], self.t_start, self.t_end, self.labeled)

    def with_labels(self, labels) -> "EventStream":
        events = self.events.copy()
        events["label"] = labels
        return EventStream(self.geometry, events, self.t_start, self.t_end, labeled=True)

    def slice(self, t0: int, t1: int) -> "EventStream":
        return slice_stream(self, t0, t1)

    def window(self, t0: int, t1: int) -> "EventStream":
        """Half-open [t0, t1) selection used to tile a stream into frames. No bounds check."""
        lo = np.searchsorted(self.t, t0, side="left")
        hi = np.searchsorted(self.t, t1, side="left")
        return EventStream(self.geometry, self.events[lo:hi], t0, t1, self.labeled)


#-----------------------------
# :: Validate Function
#-----------------------------

"""
Checks every stream invariant and returns the violations as data. An empty list
means the stream is well formed.
"""

def validate(stream: EventStream) -> list[Violation]:
    violations: list[Violation] = []
    geometry = stream.geometry
    t = stream.t

    if stream.t_end < stream.t_start:
        violations.append(Violation("window", f"t_end {stream.t_end} < t_start {stream.t_start}"))
    if stream.t_start < 0:
        violations.append(Violation("window", f"t_start {stream.t_start} is negative"))

    for i in np.flatnonzero(np.diff(t) < 0):
        violations.append(Violation("ordering", f"event {i + 1} at t={t[i + 1]} precedes event {i} at t={t[i]}", int(i + 1)))

    if len(stream):
        if t[0] < stream.t_start:
            violations.append(Violation("window", f"first event t={t[0]} before t_start {stream.t_start}", 0))
        if t[-1] > stream.t_end:
            violations.append(Violation("window", f"last event t={t[-1]} after t_end {stream.t_end}", len(stream) - 1))

    out_of_bounds = (stream.x >= geometry.width) | (stream.y >= geometry.height)
    for i in np.flatnonzero(out_of_bounds):
        violations.append(Violation(
            "bounds", f"event {i} at ({stream.x[i]}, {stream.y[i]}) outside {geometry.width}x{geometry.height}", int(i)))

    for i in np.flatnonzero((stream.p != 1) & (stream.p != -1)):
        violations.append(Violation("polarity", f"event {i} has polarity {stream.p[i]}", int(i)))

    labels = stream.labels
    bad_labels = ~np.isin(labels, (Label.NOISE, Label.SIGNAL)) if stream.labeled else labels != UNLABELED
    for i in np.flatnonzero(bad_labels):
        violations.append(Violation("label", f"event {i} has label {labels[i]} (labeled={stream.labeled})", int(i)))

    if violations:
        logger.debug(f"Stream {stream!r} has {len(violations)} violation(s)")
    return violations


#-----------------------------
# :: Slice Function
#-----------------------------

"""
Closed-interval selection t0 <= t <= t1. The returned stream's bounds are (t0, t1).
"""

def slice_stream(stream: EventStream, t0: int, t1: int) -> EventStream:
    if not stream.t_start <= t0 <= t1 <= stream.t_end:
        raise StreamRangeError(
            f"slice [{t0}, {t1}] outside stream bounds [{stream.t_start}, {stream.t_end}]")
    lo = np.searchsorted(stream.t, t0, side="left")
    hi = np.searchsorted(stream.t, t1, side="right")
    return EventStream(stream.geometry, stream.events[lo:hi], t0, t1, stream.labeled)


#-----------------------------
# :: Merge Function
#-----------------------------

"""
Stable time-ordered merge; on equal timestamps events of `a` come before events of `b`.
An input with no events and a zero-length window is an identity element: it affects
neither the bounds nor the labeled flag of the result.
"""

def merge(a: EventStream, b: EventStream) -> EventStream:
    if a.geometry != b.geometry:
        raise IncompatibleStreamError(
            f"geometry mismatch: {a.geometry.width}x{a.geometry.height} vs {b.geometry.width}x{b.geometry.height}")
    parts = [s for s in (a, b) if len(s) or s.duration > 0] or [a]
    labeled = all(s.labeled for s in parts)
    combined = np.concatenate([a.events, b.events])
    combined = combined[np.argsort(combined["t"], kind="stable")]
    if not labeled:
        combined["label"] = UNLABELED
    t_start = min(s.t_start for s in parts)
    t_end = max(s.t_end for s in parts)
    return EventStream(a.geometry, combined, t_start, t_end, labeled)
