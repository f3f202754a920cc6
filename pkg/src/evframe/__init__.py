"""Turn asynchronous event-camera streams into fixed-rate image frames.

The package slices a time-ordered polarity event stream into groups
(by count, by time, or by time and number), accumulates each group
into a normalized frame with configurable polarity handling and decay,
and ships a synthetic event generator whose output is predictable in
closed form, so the whole pipeline can be tested end to end without
hardware.
"""
from .accumulator import (
    AccumulatorCarry,
    FrameAccumulator,
    accumulate_slice,
    apply_decay,
    hold_previous,
    integrate_event,
    reset_frame,
    signed_contribution,
)
from .core import (
    AccumulatorConfig,
    Decay,
    DecayKind,
    Event,
    EventArray,
    EventFrame,
    FrameSpec,
    NonMonotonicTimestamps,
    OutOfBoundsEvent,
    PolarityMode,
    SensorGeometry,
    SliceMethod,
    StreamError,
    neutral_value,
    quantize_frame,
    window_size_for,
)
from .eventio import (
    InvalidPolarity,
    MalformedLine,
    format_event_line,
    parse_event_line,
    read_event_batches,
    read_frame_index,
    read_pgm,
    read_stream,
    write_events,
    write_frame_index,
    write_pgm,
)
from .metrics import (
    DegenerateFrame,
    PairScore,
    PolarityFlipReport,
    SimilarityReport,
    contribution_level_sweep,
    distinct_levels,
    fill_ratio,
    ncc,
    polarity_flip_report,
    saturation_fraction,
    speed_invariance_report,
    window_coverage_sweep,
)
from .pipeline import PipelineStats, accumulate_stream, run_accumulation
from .presets import UnknownPreset, preset, preset_names
from .slicer import (
    Slice,
    StreamSlicer,
    detect_no_motion,
    slice_by_number,
    slice_by_time,
    slice_by_time_and_number,
    slicer_for,
)
from .synth import (
    MotionProfile,
    SensorModel,
    SyntheticScene,
    add_noise,
    bars,
    checker,
    expected_event_count,
    generate_events,
    step_edge,
)

__version__ = "0.1.0"

__all__ = [
    "AccumulatorCarry",
    "AccumulatorConfig",
    "Decay",
    "DecayKind",
    "DegenerateFrame",
    "Event",
    "EventArray",
    "EventFrame",
    "FrameAccumulator",
    "FrameSpec",
    "InvalidPolarity",
    "MalformedLine",
    "MotionProfile",
    "NonMonotonicTimestamps",
    "OutOfBoundsEvent",
    "PairScore",
    "PipelineStats",
    "PolarityFlipReport",
    "PolarityMode",
    "SensorGeometry",
    "SensorModel",
    "SimilarityReport",
    "Slice",
    "SliceMethod",
    "StreamError",
    "StreamSlicer",
    "SyntheticScene",
    "UnknownPreset",
    "accumulate_slice",
    "accumulate_stream",
    "add_noise",
    "apply_decay",
    "bars",
    "checker",
    "contribution_level_sweep",
    "detect_no_motion",
    "distinct_levels",
    "expected_event_count",
    "fill_ratio",
    "format_event_line",
    "generate_events",
    "hold_previous",
    "integrate_event",
    "ncc",
    "neutral_value",
    "parse_event_line",
    "polarity_flip_report",
    "preset",
    "preset_names",
    "quantize_frame",
    "read_event_batches",
    "read_frame_index",
    "read_pgm",
    "read_stream",
    "reset_frame",
    "run_accumulation",
    "saturation_fraction",
    "signed_contribution",
    "slice_by_number",
    "slice_by_time",
    "slice_by_time_and_number",
    "slicer_for",
    "speed_invariance_report",
    "step_edge",
    "window_coverage_sweep",
    "window_size_for",
    "write_events",
    "write_frame_index",
    "write_pgm",
]
