"""Named accumulation presets for common recording conditions.

All presets slice by time and number at 30 Hz with rectified polarity
and per-slice reset; they differ in event contribution and window
size, which together set how much edge history one frame shows.  The
"uav" preset additionally enables the no-motion hold so hover phases
republish the last frame instead of fading to noise.
"""
from __future__ import annotations

from .core import AccumulatorConfig, Decay, PolarityMode, SliceMethod

__all__ = ["preset", "preset_names", "UnknownPreset"]


class UnknownPreset(ValueError):
    """Requested preset name is not in the table."""


def _cfg(contribution: float, window_size: int, no_motion_threshold: int = 0) -> AccumulatorConfig:
    return AccumulatorConfig(
        slice_method=SliceMethod.BY_TIME_AND_NUMBER,
        window_size=window_size,
        interval=1.0 / 30.0,
        contribution=contribution,
        polarity_mode=PolarityMode.RECTIFIED,
        decay=Decay.step(),
        no_motion_threshold=no_motion_threshold,
    )


_PRESETS = {
    "dynamic_6dof": _cfg(0.2, 10000),
    "dynamic_translation": _cfg(0.33, 10000),
    "shape_6dof": _cfg(0.2, 3000),
    "shape_translation": _cfg(0.2, 3000),
    "boxes_6dof": _cfg(0.2, 15000),
    "boxes_translation": _cfg(0.2, 15000),
    "poster_6dof": _cfg(0.2, 10000),
    "poster_translation": _cfg(0.33, 10000),
    "hdr_poster": _cfg(0.2, 10000),
    "hdr_boxes": _cfg(0.2, 20000),
    "uav": _cfg(0.5, 20000, no_motion_threshold=200),
}


def preset_names() -> tuple[str, ...]:
    return tuple(sorted(_PRESETS))


def preset(name: str) -> AccumulatorConfig:
    """Look up a named preset configuration.

    Raises UnknownPreset listing the available names when `name` is
    not in the table.
    """
    try:
        return _PRESETS[name]
    except KeyError:
        available = ", ".join(preset_names())
        raise UnknownPreset(f"unknown preset {name!r}; available: {available}") from None
