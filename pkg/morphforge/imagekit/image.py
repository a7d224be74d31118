# morphforge/imagekit/image.py

"""Core value types: planar images, landmark sets and correlation kernels.

Coordinates follow one convention everywhere: pixel centers sit at integer
coordinates, origin top-left, x to the right and y downwards.
"""

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Iterable, Mapping

import numpy as np

from morphforge.core.arrays import FloatArray
from morphforge.core.exceptions import LandmarkError, ShapeMismatchError

REQUIRED_EYES = ("eye_left", "eye_right")


@dataclass(frozen=True, eq=False)
class Image:
    """Channel-planar raster, ``data`` has shape (channels, height, width)."""

    data: FloatArray

    def __post_init__(self) -> None:
        array = np.array(self.data, dtype=np.float64)
        if array.ndim == 2:
            array = array[np.newaxis]
        if array.ndim != 3 or array.shape[0] not in (1, 3):
            raise ShapeMismatchError(
                detail=f"Image data must be (1|3, H, W), got shape {array.shape}"
            )
        if array.shape[1] < 1 or array.shape[2] < 1:
            raise ShapeMismatchError(detail="Image must be at least 1x1")
        if not np.all(np.isfinite(array)):
            raise ShapeMismatchError(detail="Image samples must be finite")
        array.setflags(write=False)
        object.__setattr__(self, "data", array)

    @classmethod
    def from_hwc(cls, array: FloatArray) -> "Image":
        """Build from an interleaved (H, W) or (H, W, C) array."""
        array = np.asarray(array, dtype=np.float64)
        if array.ndim == 2:
            return cls(array)
        return cls(np.moveaxis(array, -1, 0))

    @classmethod
    def constant(cls, width: int, height: int, value: float, channels: int = 1) -> "Image":
        """Image with every sample equal to ``value``."""
        return cls(np.full((channels, height, width), value, dtype=np.float64))

    @property
    def channels(self) -> int:
        return int(self.data.shape[0])

    @property
    def height(self) -> int:
        return int(self.data.shape[1])

    @property
    def width(self) -> int:
        return int(self.data.shape[2])

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.channels, self.height, self.width)

    def to_hwc(self) -> FloatArray:
        """Interleaved copy, (H, W) for gray and (H, W, 3) for color."""
        if self.channels == 1:
            return self.data[0].copy()
        return np.moveaxis(self.data, 0, -1).copy()

    def clipped(self) -> "Image":
        """Copy with every sample clamped into [0, 1]."""
        return Image(np.clip(self.data, 0.0, 1.0))

    def same_shape(self, other: "Image") -> bool:
        return self.shape == other.shape

    def require_same_shape(self, other: "Image", what: str = "images") -> None:
        if not self.same_shape(other):
            raise ShapeMismatchError(
                detail=f"{what} differ in shape: {self.shape} vs {other.shape}"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self) -> str:
        return f"Image(width={self.width}, height={self.height}, channels={self.channels})"


@dataclass(frozen=True)
class LandmarkSet:
    """Named 2-D points in image coordinates."""

    points: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        cleaned: dict[str, tuple[float, float]] = {}
        for name, point in self.points.items():
            x, y = (float(point[0]), float(point[1]))
            if not (np.isfinite(x) and np.isfinite(y)):
                raise LandmarkError(detail=f"Landmark '{name}' is not finite: {point}")
            cleaned[str(name)] = (x, y)
        object.__setattr__(self, "points", MappingProxyType(cleaned))

    @classmethod
    def from_arrays(cls, names: Iterable[str], coords: FloatArray) -> "LandmarkSet":
        coords = np.asarray(coords, dtype=np.float64).reshape(-1, 2)
        names = list(names)
        if len(names) != len(coords):
            raise LandmarkError(detail="Names and coordinates differ in length")
        return cls({name: (x, y) for name, (x, y) in zip(names, coords)})

    @property
    def names(self) -> list[str]:
        return list(self.points.keys())

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, name: object) -> bool:
        return name in self.points

    def __getitem__(self, name: str) -> tuple[float, float]:
        try:
            return self.points[name]
        except KeyError:
            raise LandmarkError(detail=f"Missing landmark '{name}'")

    def as_array(self, names: Iterable[str] | None = None) -> FloatArray:
        """(n, 2) array of x, y in the given (or insertion) order."""
        names = self.names if names is None else list(names)
        if not names:
            return np.zeros((0, 2), dtype=np.float64)
        return np.array([self[name] for name in names], dtype=np.float64)

    def with_prefix(self, prefix: str) -> list[str]:
        return [name for name in self.points if name.startswith(prefix)]

    def transformed(self, fn: Callable[[FloatArray], FloatArray]) -> "LandmarkSet":
        """Apply ``fn`` to the (n, 2) coordinate array, keeping names and order."""
        return LandmarkSet.from_arrays(self.names, fn(self.as_array()))

    def require_eyes(self) -> None:
        missing = [name for name in REQUIRED_EYES if name not in self.points]
        if missing:
            raise LandmarkError(detail=f"Missing required landmarks: {missing}")

    def require_face_box(self) -> None:
        self.require_eyes()
        if not self.with_prefix("brow_"):
            raise LandmarkError(detail="At least one 'brow_*' landmark is required")
        if not self.with_prefix("mouth_"):
            raise LandmarkError(detail="At least one 'mouth_*' landmark is required")

    def require_inside(self, width: int, height: int) -> None:
        coords = self.as_array()
        if len(coords) == 0:
            return
        outside = (
            (coords[:, 0] < 0)
            | (coords[:, 0] > width - 1)
            | (coords[:, 1] < 0)
            | (coords[:, 1] > height - 1)
        )
        if np.any(outside):
            bad = [name for name, flag in zip(self.names, outside) if flag]
            raise LandmarkError(
                detail=f"Landmarks outside the {width}x{height} image: {bad}"
            )


@dataclass(frozen=True, eq=False)
class Kernel2D:
    """Odd-sized correlation kernel."""

    taps: FloatArray

    def __post_init__(self) -> None:
        taps = np.array(self.taps, dtype=np.float64)
        if taps.ndim == 1:
            taps = taps.reshape(1, -1)
        if taps.ndim != 2 or taps.shape[0] % 2 == 0 or taps.shape[1] % 2 == 0:
            raise ShapeMismatchError(detail=f"Kernel must be odd-sized 2-D, got {taps.shape}")
        if not np.all(np.isfinite(taps)):
            raise ShapeMismatchError(detail="Kernel taps must be finite")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def rows(self) -> int:
        return int(self.taps.shape[0])

    @property
    def cols(self) -> int:
        return int(self.taps.shape[1])
