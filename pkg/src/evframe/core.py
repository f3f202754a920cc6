"""Core types for event-to-frame accumulation.

An event camera reports a sparse stream of per-pixel brightness change
events instead of full frames.  This module defines the event record and
its batched array form, the sensor geometry, the normalized frame buffer
handed to consumers, and the configuration vector that selects how a
stream is sliced and accumulated.  The numeric helpers shared by the
other modules (neutral value, quantization, window sizing) live here too.

Pixel state is kept normalized in [0, 1] and only quantized to 8 or 16
bit rasters at the output boundary.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "StreamError",
    "OutOfBoundsEvent",
    "NonMonotonicTimestamps",
    "Event",
    "EventArray",
    "SensorGeometry",
    "FrameSpec",
    "EventFrame",
    "SliceMethod",
    "PolarityMode",
    "DecayKind",
    "Decay",
    "AccumulatorConfig",
    "neutral_value",
    "quantize_frame",
    "window_size_for",
]


class StreamError(ValueError):
    """An event stream violated its declared contract."""


class OutOfBoundsEvent(StreamError):
    """Event coordinates fall outside the sensor geometry."""


class NonMonotonicTimestamps(StreamError):
    """Event timestamps decreased within a stream."""


@dataclass(frozen=True, slots=True)
class Event:
    """One brightness change event.

    Attributes:
        t: timestamp in seconds, non-negative.
        x: column index.
        y: row index.
        p: polarity, +1 for brightness increase and -1 for decrease.
    """

    t: float
    x: int
    y: int
    p: int

    def __post_init__(self) -> None:
        if not (self.t >= 0.0 and math.isfinite(self.t)):
            raise ValueError(f"event timestamp must be finite and >= 0, got {self.t}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"event coordinates must be non-negative, got ({self.x}, {self.y})")
        if self.p not in (-1, 1):
            raise ValueError(f"event polarity must be +1 or -1, got {self.p}")


@dataclass(frozen=True)
class SensorGeometry:
    """Sensor resolution in pixels."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"geometry must be at least 1x1, got {self.width}x{self.height}")

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    @classmethod
    def from_string(cls, text: str) -> "SensorGeometry":
        """Parse a WIDTHxHEIGHT string such as "240x180"."""
        parts = text.lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"geometry must look like WIDTHxHEIGHT, got {text!r}")
        try:
            w, h = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"geometry must look like WIDTHxHEIGHT, got {text!r}") from None
        return cls(w, h)


class _Columns:
    """Shared validation for the columnar event batch."""

    @staticmethod
    def check(t: np.ndarray, x: np.ndarray, y: np.ndarray, p: np.ndarray) -> None:
        n = len(t)
        if not (len(x) == len(y) == len(p) == n):
            raise ValueError("event columns must have equal length")
        if n == 0:
            return
        if not np.isfinite(t).all() or float(t[0]) < 0.0:
            raise ValueError("event timestamps must be finite and >= 0")
        if np.any(np.diff(t) < 0.0):
            i = int(np.argmax(np.diff(t) < 0.0))
            raise NonMonotonicTimestamps(
                f"timestamps decreased: {t[i]!r} followed by {t[i + 1]!r}"
            )
        if not np.isin(p, (-1, 1)).all():
            raise ValueError("event polarities must be +1 or -1")
        if np.any(x < 0) or np.any(y < 0):
            raise ValueError("event coordinates must be non-negative")


@dataclass(frozen=True, eq=False)
class EventArray:
    """A time-ordered batch of events stored as columns.

    This is the carrier used on every batch interface: slices hold one,
    the synthetic generator returns one, and readers yield them in
    chunks.  Columns are immutable once constructed.  Indexing with an
    int returns an :class:`Event`; slicing returns a view-backed
    :class:`EventArray`.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray

    @classmethod
    def from_columns(
        cls,
        t: Iterable[float],
        x: Iterable[int],
        y: Iterable[int],
        p: Iterable[int],
    ) -> "EventArray":
        ta = np.ascontiguousarray(t, dtype=np.float64)
        xa = np.ascontiguousarray(x, dtype=np.int32)
        ya = np.ascontiguousarray(y, dtype=np.int32)
        pa = np.ascontiguousarray(p, dtype=np.int8)
        _Columns.check(ta, xa, ya, pa)
        for a in (ta, xa, ya, pa):
            a.setflags(write=False)
        return cls(ta, xa, ya, pa)

    @classmethod
    def from_events(cls, events: Iterable[Event]) -> "EventArray":
        seq = list(events)
        return cls.from_columns(
            [e.t for e in seq], [e.x for e in seq], [e.y for e in seq], [e.p for e in seq]
        )

    @classmethod
    def empty(cls) -> "EventArray":
        return cls.from_columns([], [], [], [])

    @classmethod
    def concatenate(cls, parts: Iterable["EventArray"]) -> "EventArray":
        parts = [a for a in parts if len(a)]
        if not parts:
            return cls.empty()
        for prev, nxt in zip(parts, parts[1:]):
            if nxt.t[0] < prev.t[-1]:
                raise NonMonotonicTimestamps(
                    f"timestamp decreases across batches: "
                    f"{prev.t[-1]!r} then {nxt.t[0]!r}"
                )
        if len(parts) == 1:
            return parts[0]
        columns = (
            np.concatenate([a.t for a in parts]),
            np.concatenate([a.x for a in parts]),
            np.concatenate([a.y for a in parts]),
            np.concatenate([a.p for a in parts]),
        )
        for column in columns:
            column.setflags(write=False)
        return cls(*columns)

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, key):
        if isinstance(key, slice):
            return EventArray(self.t[key], self.x[key], self.y[key], self.p[key])
        i = int(key)
        return Event(float(self.t[i]), int(self.x[i]), int(self.y[i]), int(self.p[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]


@dataclass(frozen=True)
class FrameSpec:
    """Output raster shape and quantization depth."""

    width: int
    height: int
    bit_depth: int = 8

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"frame must be at least 1x1, got {self.width}x{self.height}")
        if self.bit_depth not in (8, 16):
            raise ValueError(f"bit depth must be 8 or 16, got {self.bit_depth}")

    @property
    def geometry(self) -> SensorGeometry:
        return SensorGeometry(self.width, self.height)

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    @classmethod
    def from_geometry(cls, geometry: SensorGeometry, bit_depth: int = 8) -> "FrameSpec":
        return cls(geometry.width, geometry.height, bit_depth)


@dataclass(frozen=True, eq=False)
class EventFrame:
    """A published frame of normalized pixel state.

    Attributes:
        spec: raster geometry and bit depth.
        pixels: (height, width) float array with values in [0, 1],
            row-major, read-only.
        stamp: publish timestamp in seconds.
        held: True when this frame republishes the previous pixel state
            because too few events arrived in the interval.
    """

    spec: FrameSpec
    pixels: np.ndarray
    stamp: float
    held: bool = False

    def __post_init__(self) -> None:
        px = self.pixels
        if px.shape != (self.spec.height, self.spec.width):
            raise ValueError(
                f"pixel buffer shape {px.shape} does not match spec "
                f"{self.spec.height}x{self.spec.width}"
            )
        if px.dtype != np.float64:
            raise ValueError(f"pixel buffer must be float64, got {px.dtype}")
        if len(px) and (float(px.min()) < 0.0 or float(px.max()) > 1.0):
            raise ValueError("pixel values must stay within [0, 1]")
        px.setflags(write=False)


class SliceMethod(enum.Enum):
    """How a stream is cut into per-frame slices."""

    BY_NUMBER = "number"
    BY_TIME = "time"
    BY_TIME_AND_NUMBER = "time-number"

    @property
    def uses_interval(self) -> bool:
        return self is not SliceMethod.BY_NUMBER

    @property
    def uses_window(self) -> bool:
        return self is not SliceMethod.BY_TIME


class PolarityMode(enum.Enum):
    """Whether polarity is kept or rectified away during integration."""

    RECTIFIED = "rectified"
    SIGNED = "signed"


class DecayKind(enum.Enum):
    STEP = "step"
    LINEAR = "linear"
    EXPONENTIAL = "exp"


@dataclass(frozen=True)
class Decay:
    """Decay applied to pixel state as event time advances.

    STEP resets the frame at every slice, so parameters are ignored.
    LINEAR moves values toward neutral at `rate` per second and stops
    exactly at neutral.  EXPONENTIAL relaxes values toward neutral with
    time constant `tau` seconds and never crosses it.

    The defaults (rate 1.0/s, tau 0.1s) are illustrative starting
    points, not tuned values.
    """

    kind: DecayKind
    rate: float = 1.0
    tau: float = 0.1

    def __post_init__(self) -> None:
        if self.kind is DecayKind.LINEAR and not self.rate > 0.0:
            raise ValueError(f"linear decay rate must be > 0, got {self.rate}")
        if self.kind is DecayKind.EXPONENTIAL and not self.tau > 0.0:
            raise ValueError(f"exponential decay tau must be > 0, got {self.tau}")

    @classmethod
    def step(cls) -> "Decay":
        return cls(DecayKind.STEP)

    @classmethod
    def linear(cls, rate: float = 1.0) -> "Decay":
        return cls(DecayKind.LINEAR, rate=rate)

    @classmethod
    def exponential(cls, tau: float = 0.1) -> "Decay":
        return cls(DecayKind.EXPONENTIAL, tau=tau)


@dataclass(frozen=True)
class AccumulatorConfig:
    """Full accumulation policy for one run.

    Attributes:
        slice_method: how the stream is cut into slices.
        window_size: event count N per slice (ignored by BY_TIME).
        interval: publish period in seconds (ignored by BY_NUMBER).
        contribution: potential added per event, in (0, 1].
        polarity_mode: rectified or signed integration.
        decay: per-pixel decay policy.
        no_motion_threshold: when > 0 and fewer events than this arrive
            in a publish interval, the previous frame is republished.
            0 disables the check.
    """

    slice_method: SliceMethod = SliceMethod.BY_TIME_AND_NUMBER
    window_size: int = 10000
    interval: float = 1.0 / 30.0
    contribution: float = 0.2
    polarity_mode: PolarityMode = PolarityMode.RECTIFIED
    decay: Decay = field(default_factory=Decay.step)
    no_motion_threshold: int = 0

    def __post_init__(self) -> None:
        if self.slice_method.uses_window and self.window_size < 1:
            raise ValueError(f"window size must be >= 1, got {self.window_size}")
        if self.slice_method.uses_interval and not self.interval > 0.0:
            raise ValueError(f"interval must be > 0, got {self.interval}")
        if not (0.0 < self.contribution <= 1.0):
            raise ValueError(f"contribution must be in (0, 1], got {self.contribution}")
        if self.no_motion_threshold < 0:
            raise ValueError(
                f"no-motion threshold must be >= 0, got {self.no_motion_threshold}"
            )


def neutral_value(polarity_mode: PolarityMode) -> float:
    """Resting pixel value: 0.0 rectified, 0.5 signed.

    Signed frames keep headroom on both sides of neutral so negative
    events can darken below the resting gray.
    """
    return 0.0 if polarity_mode is PolarityMode.RECTIFIED else 0.5


def quantize_frame(frame: EventFrame, bit_depth: int | None = None) -> np.ndarray:
    """Quantize normalized pixels to an unsigned integer raster.

    Values map linearly onto [0, 2**bits - 1] with ties rounded half
    away from zero, so 0.5 at 8 bit becomes 128, 0.0 becomes 0 and 1.0
    becomes the full-scale value exactly.
    """
    if bit_depth is None:
        bit_depth = frame.spec.bit_depth
    if bit_depth == 8:
        dtype = np.uint8
    elif bit_depth == 16:
        dtype = np.uint16
    else:
        raise ValueError(f"bit depth must be 8 or 16, got {bit_depth}")
    max_value = (1 << bit_depth) - 1
    # Pixels are in [0, 1], so round-half-away-from-zero is floor(x + 0.5).
    return np.floor(frame.pixels * max_value + 0.5).astype(dtype)


def window_size_for(events_per_pixel: float, geometry: SensorGeometry) -> int:
    """Window size N for a target event density in events per pixel.

    N = round(events_per_pixel * width * height), never below 1, with
    ties rounded half away from zero.
    """
    if not events_per_pixel > 0.0:
        raise ValueError(f"events per pixel must be > 0, got {events_per_pixel}")
    n = int(math.floor(events_per_pixel * geometry.pixel_count + 0.5))
    return max(1, n)
