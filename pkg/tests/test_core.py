"""Validation and value semantics of the shared domain types."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evframe import (
    AccumulatorConfig,
    Decay,
    DecayKind,
    Event,
    EventArray,
    EventFrame,
    FrameSpec,
    NonMonotonicTimestamps,
    PolarityMode,
    SensorGeometry,
    SliceMethod,
    neutral_value,
    quantize_frame,
    window_size_for,
)

from conftest import event_arrays


class TestEvent:
    def test_fields_round_trip(self):
        ev = Event(t=0.125, x=3, y=4, p=-1)
        assert (ev.t, ev.x, ev.y, ev.p) == (0.125, 3, 4, -1)

    @pytest.mark.parametrize("bad", [0, 2, -2])
    def test_rejects_bad_polarity(self, bad):
        with pytest.raises(ValueError):
            Event(t=0.0, x=0, y=0, p=bad)

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            Event(t=-1e-9, x=0, y=0, p=1)

    def test_rejects_nan_time(self):
        with pytest.raises(ValueError):
            Event(t=float("nan"), x=0, y=0, p=1)

    def test_rejects_negative_coordinates(self):
        with pytest.raises(ValueError):
            Event(t=0.0, x=-1, y=0, p=1)


class TestSensorGeometry:
    def test_pixel_count(self):
        assert SensorGeometry(240, 180).pixel_count == 43200

    def test_contains_boundaries(self):
        g = SensorGeometry(4, 3)
        assert g.contains(0, 0)
        assert g.contains(3, 2)
        assert not g.contains(4, 0)
        assert not g.contains(0, 3)
        assert not g.contains(-1, 0)

    def test_from_string(self):
        assert SensorGeometry.from_string("240x180") == SensorGeometry(240, 180)

    @pytest.mark.parametrize("text", ["240", "240x", "x180", "ax b", "240x180x2"])
    def test_from_string_rejects_garbage(self, text):
        with pytest.raises(ValueError):
            SensorGeometry.from_string(text)

    def test_rejects_non_positive_sides(self):
        with pytest.raises(ValueError):
            SensorGeometry(0, 10)


class TestEventArray:
    def test_from_events_round_trip(self):
        events = [Event(0.1, 1, 2, 1), Event(0.2, 3, 4, -1)]
        arr = EventArray.from_events(events)
        assert len(arr) == 2
        assert list(arr) == events

    def test_empty(self):
        arr = EventArray.empty()
        assert len(arr) == 0
        assert list(arr) == []

    def test_rejects_decreasing_timestamps(self):
        with pytest.raises(NonMonotonicTimestamps) as err:
            EventArray.from_columns(
                np.array([0.2, 0.1]),
                np.array([0, 0]),
                np.array([0, 0]),
                np.array([1, 1]),
            )
        assert "0.2" in str(err.value) and "0.1" in str(err.value)

    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ValueError):
            EventArray.from_columns(
                np.array([0.1]),
                np.array([0, 1]),
                np.array([0, 1]),
                np.array([1, 1]),
            )

    def test_rejects_bad_polarity_values(self):
        with pytest.raises(ValueError):
            EventArray.from_columns(
                np.array([0.1]), np.array([0]), np.array([0]), np.array([0])
            )

    def test_columns_are_read_only(self):
        arr = EventArray.from_events([Event(0.1, 1, 2, 1)])
        with pytest.raises(ValueError):
            arr.t[0] = 5.0

    def test_slicing_returns_view(self):
        arr = EventArray.from_events([Event(0.1, 1, 2, 1), Event(0.2, 3, 4, -1)])
        tail = arr[1:]
        assert isinstance(tail, EventArray)
        assert len(tail) == 1
        assert tail[0] == Event(0.2, 3, 4, -1)

    def test_concatenate(self):
        a = EventArray.from_events([Event(0.1, 0, 0, 1)])
        b = EventArray.from_events([Event(0.2, 1, 1, -1)])
        joined = EventArray.concatenate([a, b])
        assert list(joined) == [Event(0.1, 0, 0, 1), Event(0.2, 1, 1, -1)]

    def test_concatenate_rejects_out_of_order_batches(self):
        a = EventArray.from_events([Event(0.5, 0, 0, 1)])
        b = EventArray.from_events([Event(0.2, 1, 1, -1)])
        with pytest.raises(NonMonotonicTimestamps):
            EventArray.concatenate([a, b])

    @given(event_arrays())
    def test_iteration_matches_indexing(self, arr):
        assert list(arr) == [arr[i] for i in range(len(arr))]


class TestFrameTypes:
    def test_frame_spec_max_value(self):
        assert FrameSpec(4, 3).max_value == 255
        assert FrameSpec(4, 3, bit_depth=16).max_value == 65535

    def test_frame_spec_rejects_odd_depth(self):
        with pytest.raises(ValueError):
            FrameSpec(4, 3, bit_depth=12)

    def test_event_frame_validates_shape(self):
        spec = FrameSpec(4, 3)
        with pytest.raises(ValueError):
            EventFrame(spec=spec, pixels=np.zeros((4, 4)), stamp=0.0)

    def test_event_frame_validates_range(self):
        spec = FrameSpec(4, 3)
        with pytest.raises(ValueError):
            EventFrame(spec=spec, pixels=np.full((3, 4), 1.5), stamp=0.0)

    def test_event_frame_pixels_read_only(self):
        spec = FrameSpec(4, 3)
        frame = EventFrame(spec=spec, pixels=np.zeros((3, 4)), stamp=0.0)
        with pytest.raises(ValueError):
            frame.pixels[0, 0] = 1.0


class TestQuantize:
    def test_rounds_half_away_from_zero_at_8_bit(self):
        spec = FrameSpec(2, 1)
        frame = EventFrame(spec=spec, pixels=np.array([[0.5, 1.0]]), stamp=0.0)
        raster = quantize_frame(frame)
        assert raster.dtype == np.uint8
        assert raster.tolist() == [[128, 255]]

    def test_16_bit_output(self):
        spec = FrameSpec(2, 1, bit_depth=16)
        frame = EventFrame(spec=spec, pixels=np.array([[0.0, 1.0]]), stamp=0.0)
        raster = quantize_frame(frame)
        assert raster.dtype == np.uint16
        assert raster.tolist() == [[0, 65535]]

    def test_explicit_depth_overrides_spec(self):
        spec = FrameSpec(1, 1)
        frame = EventFrame(spec=spec, pixels=np.array([[1.0]]), stamp=0.0)
        assert quantize_frame(frame, bit_depth=16).tolist() == [[65535]]

    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    def test_quantized_value_in_range(self, value):
        spec = FrameSpec(1, 1)
        frame = EventFrame(spec=spec, pixels=np.array([[value]]), stamp=0.0)
        raster = quantize_frame(frame)
        assert 0 <= int(raster[0, 0]) <= 255


class TestConfig:
    def test_defaults_validate(self):
        config = AccumulatorConfig()
        assert config.slice_method is SliceMethod.BY_TIME_AND_NUMBER
        assert config.polarity_mode is PolarityMode.RECTIFIED
        assert config.decay.kind is DecayKind.STEP

    def test_rejects_bad_contribution(self):
        with pytest.raises(ValueError):
            AccumulatorConfig(contribution=0.0)
        with pytest.raises(ValueError):
            AccumulatorConfig(contribution=1.5)

    def test_rejects_bad_window(self):
        with pytest.raises(ValueError):
            AccumulatorConfig(window_size=0)

    def test_rejects_bad_interval(self):
        with pytest.raises(ValueError):
            AccumulatorConfig(interval=0.0)

    def test_rejects_negative_no_motion_threshold(self):
        with pytest.raises(ValueError):
            AccumulatorConfig(no_motion_threshold=-1)

    def test_decay_constructors(self):
        assert Decay.step().kind is DecayKind.STEP
        assert Decay.linear(2.0).rate == 2.0
        assert Decay.exponential(0.5).tau == 0.5
        with pytest.raises(ValueError):
            Decay.linear(0.0)
        with pytest.raises(ValueError):
            Decay.exponential(-1.0)

    def test_neutral_values(self):
        assert neutral_value(PolarityMode.RECTIFIED) == 0.0
        assert neutral_value(PolarityMode.SIGNED) == 0.5


class TestWindowSizeFor:
    def test_dataset_scale_round_trip(self):
        geometry = SensorGeometry(240, 180)
        assert window_size_for(10000 / geometry.pixel_count, geometry) == 10000

    def test_rounds_to_nearest(self):
        geometry = SensorGeometry(10, 10)
        assert window_size_for(0.034, geometry) == 3
        assert window_size_for(0.035, geometry) == 4

    def test_floors_at_one(self):
        assert window_size_for(1e-9, SensorGeometry(10, 10)) == 1

    def test_rejects_non_positive_density(self):
        with pytest.raises(ValueError):
            window_size_for(0.0, SensorGeometry(10, 10))
