"""Shared strategies and fixtures for the test suite."""
from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from evframe import EventArray, SensorGeometry

SMALL_GEOMETRY = SensorGeometry(8, 6)


@st.composite
def event_arrays(
    draw,
    *,
    geometry: SensorGeometry = SMALL_GEOMETRY,
    min_size: int = 0,
    max_size: int = 120,
    max_time: float = 10.0,
):
    """Time-ordered event batches inside `geometry`, duplicates allowed."""
    n = draw(st.integers(min_size, max_size))
    finite = st.floats(min_value=0.0, max_value=max_time, allow_nan=False)
    times = sorted(draw(st.lists(finite, min_size=n, max_size=n)))
    xs = draw(st.lists(st.integers(0, geometry.width - 1), min_size=n, max_size=n))
    ys = draw(st.lists(st.integers(0, geometry.height - 1), min_size=n, max_size=n))
    ps = draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
    return EventArray.from_columns(
        np.asarray(times, dtype=np.float64),
        np.asarray(xs, dtype=np.int32),
        np.asarray(ys, dtype=np.int32),
        np.asarray(ps, dtype=np.int8),
    )


def uniform_events(
    n: int,
    geometry: SensorGeometry,
    *,
    t_end: float = 1.0,
    seed: int = 0,
) -> EventArray:
    """Deterministic pseudo-random stream for tests that need bulk data."""
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0.0, t_end, size=n))
    x = rng.integers(0, geometry.width, size=n, dtype=np.int32)
    y = rng.integers(0, geometry.height, size=n, dtype=np.int32)
    p = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    return EventArray.from_columns(t, x, y, p)
