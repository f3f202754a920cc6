"""Integrating event slices into normalized frames.

Each event adds a contribution to its pixel's potential, clamped to
[0, 1].  In RECTIFIED mode both polarities add the same positive
contribution onto a neutral value of 0.0, so the frame ignores the sign
of brightness change.  In SIGNED mode positive events add and negative
events subtract around a neutral value of 0.5.

Decay controls what survives between slices.  STEP resets the frame for
every slice, so a frame is exactly its slice and nothing older.  LINEAR
and EXPONENTIAL keep a persistent pixel buffer that relaxes toward
neutral as event time advances; integration interleaves decay up to
each event's timestamp with the event's contribution, then decays the
whole buffer to the publish stamp.

When too few events arrived in a publish interval the previous frame is
republished unchanged (a "hold"), which keeps downstream consumers fed
during motion pauses instead of handing them an empty frame.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .core import (
    AccumulatorConfig,
    Decay,
    DecayKind,
    Event,
    EventFrame,
    FrameSpec,
    NonMonotonicTimestamps,
    OutOfBoundsEvent,
    PolarityMode,
    SensorGeometry,
    neutral_value,
)
from .slicer import Slice, detect_no_motion

__all__ = [
    "AccumulatorCarry",
    "FrameAccumulator",
    "signed_contribution",
    "integrate_event",
    "apply_decay",
    "reset_frame",
    "accumulate_slice",
    "hold_previous",
]


@dataclass(frozen=True)
class AccumulatorCarry:
    """State carried from one published frame to the next.

    Attributes:
        previous_frame: the last published frame, used by holds.
        buffer: persistent pixel potentials for LINEAR / EXPONENTIAL
            decay, already decayed to `buffer_time`.  None under STEP.
        buffer_time: timestamp the buffer is normalized to.
    """

    previous_frame: Optional[EventFrame] = None
    buffer: Optional[np.ndarray] = None
    buffer_time: Optional[float] = None


def signed_contribution(event: Event, polarity_mode: PolarityMode, contribution: float) -> float:
    """Per-event potential delta: +c when rectified, p * c when signed."""
    if polarity_mode is PolarityMode.RECTIFIED:
        return contribution
    return contribution if event.p > 0 else -contribution


def integrate_event(
    pixels: np.ndarray,
    event: Event,
    polarity_mode: PolarityMode,
    contribution: float,
) -> np.ndarray:
    """Add one event's contribution to its pixel, clamped to [0, 1].

    Mutates `pixels` in place and returns it.  This is the reference
    path; `accumulate_slice` integrates whole slices vectorized.
    """
    h, w = pixels.shape
    if not (0 <= event.x < w and 0 <= event.y < h):
        raise OutOfBoundsEvent(
            f"event at ({event.x}, {event.y}) outside {w}x{h} frame"
        )
    v = pixels[event.y, event.x] + signed_contribution(event, polarity_mode, contribution)
    pixels[event.y, event.x] = min(1.0, max(0.0, v))
    return pixels


def reset_frame(geometry: SensorGeometry, polarity_mode: PolarityMode) -> np.ndarray:
    """Fresh pixel buffer at the neutral value everywhere."""
    return np.full((geometry.height, geometry.width), neutral_value(polarity_mode))


def apply_decay(
    pixels: np.ndarray,
    dt: float,
    decay: Decay,
    neutral: float,
) -> np.ndarray:
    """Relax pixel potentials toward neutral across a time gap.

    STEP leaves the buffer untouched (slice reset happens elsewhere).
    LINEAR subtracts rate * dt from the distance to neutral, stopping
    exactly at neutral.  EXPONENTIAL scales the distance by
    exp(-dt / tau), which preserves its sign for every dt.
    Returns a new array.
    """
    if dt < 0.0:
        raise ValueError(f"decay over a negative interval: dt={dt}")
    if decay.kind is DecayKind.STEP or dt == 0.0:
        return pixels.copy()
    return _decay_values(pixels, dt, decay, neutral)


def _decay_values(pixels: np.ndarray, dt, decay: Decay, neutral: float) -> np.ndarray:
    """Decay with scalar or per-pixel dt (array dt used by lazy updates)."""
    d = pixels - neutral
    if decay.kind is DecayKind.LINEAR:
        mag = np.abs(d) - decay.rate * dt
        np.maximum(mag, 0.0, out=mag)
        return neutral + np.sign(d) * mag
    return neutral + d * np.exp(-np.asarray(dt) / decay.tau)


def _validate_slice_events(slc: Slice, spec: FrameSpec) -> None:
    ev = slc.events
    if len(ev) == 0:
        return
    if np.any(ev.x >= spec.width) or np.any(ev.y >= spec.height):
        bad = int(np.argmax((ev.x >= spec.width) | (ev.y >= spec.height)))
        raise OutOfBoundsEvent(
            f"event at ({int(ev.x[bad])}, {int(ev.y[bad])}) outside "
            f"{spec.width}x{spec.height} frame"
        )
    if np.any(np.diff(ev.t) < 0.0):
        raise NonMonotonicTimestamps("slice events are not in time order")


def _integrate_step(slc: Slice, config: AccumulatorConfig, spec: FrameSpec) -> np.ndarray:
    """Vectorized from-reset integration for STEP decay.

    Per-pixel counting is exact for RECTIFIED (the running value is
    monotone, so clamping commutes with summing).  For SIGNED the net
    sum is only used where no ordering of the pixel's events could have
    touched a clamp; the few pixels that could are replayed in order.
    Counting rounds once (count * c) instead of once per event, which
    is the closest float64 to the real-arithmetic pixel value.
    """
    ev = slc.events
    h, w = spec.height, spec.width
    c = config.contribution
    if config.polarity_mode is PolarityMode.RECTIFIED:
        if len(ev) == 0:
            return np.zeros((h, w))
        idx = ev.y.astype(np.intp) * w + ev.x.astype(np.intp)
        counts = np.bincount(idx, minlength=h * w)
        return np.minimum(counts.reshape(h, w) * c, 1.0)

    pixels = np.full((h, w), 0.5)
    if len(ev) == 0:
        return pixels
    idx = ev.y.astype(np.intp) * w + ev.x.astype(np.intp)
    pos = np.bincount(idx[ev.p > 0], minlength=h * w)
    neg = np.bincount(idx[ev.p < 0], minlength=h * w)
    # Worst-case prefix excursion per pixel: all of one sign first.
    clampable = (0.5 + c * pos > 1.0) | (0.5 - c * neg < 0.0)
    net = np.clip(0.5 + c * (pos.astype(np.float64) - neg), 0.0, 1.0)
    pixels = net.reshape(h, w)
    if clampable.any():
        pixels = pixels.copy()
        pixels.reshape(-1)[clampable] = 0.5
        replay = np.flatnonzero(clampable[idx])
        flat = pixels.reshape(-1)
        contrib = np.where(ev.p > 0, c, -c)
        for i in replay:
            j = idx[i]
            flat[j] = min(1.0, max(0.0, flat[j] + contrib[i]))
    return pixels


def _integrate_decaying(
    slc: Slice,
    config: AccumulatorConfig,
    spec: FrameSpec,
    carry: AccumulatorCarry,
) -> np.ndarray:
    """Persistent-buffer integration for LINEAR / EXPONENTIAL decay.

    Decay acts on each pixel independently, so it can be applied
    lazily: each pixel is decayed from its own last touch to the event
    (or publish) timestamp, which matches advancing the whole frame to
    every event time in order.
    """
    ev = slc.events
    neutral = neutral_value(config.polarity_mode)
    if carry.buffer is not None:
        pixels = carry.buffer.copy()
        start = carry.buffer_time
    else:
        pixels = reset_frame(spec.geometry, config.polarity_mode)
        start = float(ev.t[0]) if len(ev) else slc.publish_stamp
    if len(ev) and float(ev.t[0]) < start:
        raise ValueError(
            "slice reaches back before the accumulated buffer; overlapping "
            "windows cannot be combined with a decaying buffer"
        )
    c = config.contribution
    decay = config.decay
    last_touch = np.full(pixels.shape, start)
    signs = np.where(ev.p > 0, c, -c) if config.polarity_mode is PolarityMode.SIGNED else None
    for i in range(len(ev)):
        x = int(ev.x[i])
        y = int(ev.y[i])
        t = float(ev.t[i])
        v = pixels[y, x]
        dt = t - last_touch[y, x]
        if dt > 0.0:
            d = v - neutral
            if decay.kind is DecayKind.LINEAR:
                mag = abs(d) - decay.rate * dt
                if mag <= 0.0:
                    v = neutral
                else:
                    v = neutral + (mag if d >= 0.0 else -mag)
            else:
                v = neutral + d * float(np.exp(-dt / decay.tau))
        v += c if signs is None else signs[i]
        pixels[y, x] = min(1.0, max(0.0, v))
        last_touch[y, x] = t
    remaining = slc.publish_stamp - last_touch
    if float(remaining.min()) < 0.0:
        raise ValueError("slice events run past the publish stamp")
    return _decay_values(pixels, remaining, decay, neutral)


def accumulate_slice(
    slc: Slice,
    config: AccumulatorConfig,
    spec: FrameSpec,
    carry: Optional[AccumulatorCarry] = None,
) -> Tuple[EventFrame, AccumulatorCarry]:
    """Integrate one slice and publish the resulting frame.

    Returns the frame plus the carry to hand to the next call.  STEP
    decay starts from a fresh neutral buffer, so the carry only tracks
    the published frame; the other decays continue from the carried
    buffer.
    """
    if carry is None:
        carry = AccumulatorCarry()
    _validate_slice_events(slc, spec)
    if config.decay.kind is DecayKind.STEP:
        pixels = _integrate_step(slc, config, spec)
        buffer = carry.buffer
        buffer_time = carry.buffer_time
    else:
        pixels = _integrate_decaying(slc, config, spec, carry)
        buffer = pixels.copy()
        buffer.setflags(write=False)
        buffer_time = slc.publish_stamp
    frame = EventFrame(spec=spec, pixels=pixels, stamp=slc.publish_stamp, held=False)
    new_carry = AccumulatorCarry(
        previous_frame=frame, buffer=buffer, buffer_time=buffer_time
    )
    return frame, new_carry


def hold_previous(
    carry: AccumulatorCarry,
    publish_stamp: float,
    spec: FrameSpec,
    polarity_mode: PolarityMode,
) -> EventFrame:
    """Republish the previous frame at a new stamp, flagged as held.

    The pixel buffer is shared byte for byte with the previous frame.
    Before anything has been published, a neutral frame is emitted
    instead (still flagged held).
    """
    prev = carry.previous_frame
    if prev is None:
        pixels = reset_frame(spec.geometry, polarity_mode)
        return EventFrame(spec=spec, pixels=pixels, stamp=publish_stamp, held=True)
    return EventFrame(
        spec=prev.spec, pixels=prev.pixels, stamp=publish_stamp, held=True
    )


class FrameAccumulator:
    """Stateful slice-to-frame driver combining accumulation and holds.

    Feed it slices in publish order; it applies the configured
    no-motion hold and keeps the carry between calls.
    """

    def __init__(self, config: AccumulatorConfig, spec: FrameSpec) -> None:
        if spec.width < 1 or spec.height < 1:
            raise ValueError("frame spec must cover at least one pixel")
        self._config = config
        self._spec = spec
        self._carry = AccumulatorCarry()

    @property
    def carry(self) -> AccumulatorCarry:
        return self._carry

    def process(self, slc: Slice) -> EventFrame:
        if detect_no_motion(slc.interval_event_count, self._config.no_motion_threshold):
            frame = hold_previous(
                self._carry, slc.publish_stamp, self._spec, self._config.polarity_mode
            )
            self._carry = replace(self._carry, previous_frame=frame)
            return frame
        frame, self._carry = accumulate_slice(slc, self._config, self._spec, self._carry)
        return frame
