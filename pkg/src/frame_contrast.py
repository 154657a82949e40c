import math
import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from src.errors import DegenerateInputError, StreamRangeError
from src.models import EventStream, SensorGeometry


#-----------------------------
# ::  Logger Variable
#-----------------------------

logger = logging.getLogger(__name__)


#-----------------------------
# :: Sobel Kernels
#-----------------------------

"""
Horizontal kernel and its transpose. Applied by correlation with replicate padding, so a
constant frame has zero gradient everywhere, borders included.
"""

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T.copy()
ON = 255

# Largest possible magnitude is 1020*sqrt(2) (both components saturated), which also caps the
# sample standard deviation of any frame's magnitudes.
CONTRAST_CAP = 4 * ON * math.sqrt(2)


# ----------------------------
# :: Event Frame Class
# ----------------------------

"""
Binary occupancy image of one half-open window [t0, t1): 255 where a pixel fired, else 0.
"""

@dataclass(frozen=True, slots=True, eq=False)
class EventFrame:
    geometry: SensorGeometry
    occupancy: np.ndarray
    window: tuple[int, int]

    def __post_init__(self):
        if self.occupancy.shape != self.geometry.shape or self.occupancy.dtype != np.uint8:
            raise ValueError(f"occupancy must be uint8 with shape {self.geometry.shape}")
        self.occupancy.flags.writeable = False

    @property
    def on_pixel_count(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    def to_pgm(self) -> bytes:
        header = f"P5\n{self.geometry.width} {self.geometry.height}\n255\n".encode("ascii")
        return header + self.occupancy.tobytes()


@dataclass(frozen=True, slots=True, eq=False)
class GradientField:
    magnitude: np.ndarray


#-----------------------------
# :: Accumulate Frame Function
#-----------------------------

"""
Marks every pixel with at least one event in [t0, t1), polarity ignored.
"""

def accumulate_frame(stream: EventStream, t0: int, t1: int) -> EventFrame:
    if not stream.t_start <= t0 <= t1 <= stream.t_end:
        raise StreamRangeError(f"frame window [{t0}, {t1}) outside stream bounds [{stream.t_start}, {stream.t_end}]")
    events = stream.window(t0, t1)
    occupancy = np.zeros(stream.geometry.shape, dtype=np.uint8)
    occupancy[events.y, events.x] = ON
    return EventFrame(stream.geometry, occupancy, (t0, t1))


#-----------------------------
# :: Sobel Gradient Function
#-----------------------------

def gradient_magnitude(images: np.ndarray) -> np.ndarray:
    """Sobel magnitude of one image (H, W) or a stack (n, H, W); each image is filtered independently."""
    images = np.asarray(images, dtype=np.float64)
    kx, ky = (SOBEL_X, SOBEL_Y) if images.ndim == 2 else (SOBEL_X[None], SOBEL_Y[None])
    gx = ndimage.correlate(images, kx, mode="nearest")
    gy = ndimage.correlate(images, ky, mode="nearest")
    return np.hypot(gx, gy)


def sobel_gradient(frame: EventFrame) -> GradientField:
    return GradientField(gradient_magnitude(frame.occupancy))


#-----------------------------
# :: Contrast Function
#-----------------------------

"""
Contrast of a frame: sample standard deviation (divisor N-1) of its N gradient magnitudes.
"""

def contrast(frame: EventFrame) -> float:
    if frame.geometry.n_pixels < 2:
        raise DegenerateInputError(f"contrast needs at least 2 pixels, got {frame.geometry.n_pixels}")
    magnitude = sobel_gradient(frame).magnitude
    return float(np.std(magnitude.reshape(1, -1), axis=1, ddof=1)[0])


def stack_contrast(stack: np.ndarray) -> np.ndarray:
    """Per-frame contrast of an (n, H, W) occupancy stack; same arithmetic as `contrast`."""
    n = stack.shape[0]
    if stack.shape[1] * stack.shape[2] < 2:
        raise DegenerateInputError("contrast needs at least 2 pixels")
    magnitude = gradient_magnitude(stack).reshape(n, -1)
    return np.std(magnitude, axis=1, ddof=1)
