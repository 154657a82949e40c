import numpy as np
import pytest

from src.models import EventStream, SensorGeometry


def _random_stream(rng: np.random.Generator, n: int, geometry: SensorGeometry = SensorGeometry(32, 24),
                   duration: int = 100_000, labeled: bool = False) -> EventStream:
    """Sorted uniform random events on [0, duration]."""
    t = np.sort(rng.integers(0, duration + 1, size=n))
    x = rng.integers(0, geometry.width, size=n)
    y = rng.integers(0, geometry.height, size=n)
    p = rng.choice([-1, 1], size=n)
    label = rng.integers(0, 2, size=n) if labeled else None
    return EventStream.from_arrays(geometry, t, x, y, p, label=label, t_start=0, t_end=duration)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_stream():
    return _random_stream


@pytest.fixture
def small_geometry():
    return SensorGeometry(32, 24)


@pytest.fixture
def tiny_stream():
    """Five hand-written events on a 4x3 sensor."""
    return EventStream.from_arrays(
        SensorGeometry(4, 3),
        t=[0, 10, 10, 25, 40],
        x=[0, 1, 3, 2, 0],
        y=[0, 2, 1, 1, 2],
        p=[1, -1, 1, 1, -1],
        t_start=0,
        t_end=50,
    )


@pytest.fixture
def labeled_stream(rng):
    return _random_stream(rng, 2_000, labeled=True)
