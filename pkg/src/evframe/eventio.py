"""Reading and writing event streams and frame rasters.

Event text files carry one event per line as "t x y p" with polarity
encoded 1 for brightness increase and 0 for decrease.  Reading is
chunked so arbitrarily large files stream through constant memory, and
every format or contract violation is reported with its 1-based line
number.

Frames are written as binary PGM (P5), 8 bit or big-endian 16 bit, and
a run's frames are listed in a CSV index of publish stamp, filename and
hold flag.
"""
from __future__ import annotations

import io
from pathlib import Path
from typing import IO, Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from .core import (
    Event,
    EventArray,
    NonMonotonicTimestamps,
    OutOfBoundsEvent,
    SensorGeometry,
    StreamError,
)

__all__ = [
    "MalformedLine",
    "InvalidPolarity",
    "parse_event_line",
    "format_event_line",
    "read_event_batches",
    "read_stream",
    "write_events",
    "write_pgm",
    "read_pgm",
    "write_frame_index",
    "read_frame_index",
]

_BATCH_LINES = 65536


class MalformedLine(StreamError):
    """A stream line did not parse as "t x y p"."""


class InvalidPolarity(StreamError):
    """Polarity token was not 0 or 1."""


def parse_event_line(line: str, line_number: int | None = None) -> Event:
    """Parse one "t x y p" line; p is 1 for +1 and 0 for -1.

    Raises MalformedLine, or InvalidPolarity when only the polarity
    token is bad.  Error messages name the offending line number when
    one is given.
    """
    where = f" at line {line_number}" if line_number is not None else ""
    parts = line.split()
    if len(parts) != 4:
        raise MalformedLine(
            f"expected 4 fields 't x y p'{where}, got {len(parts)}: {line.strip()!r}"
        )
    try:
        t = float(parts[0])
        x = int(parts[1])
        y = int(parts[2])
    except ValueError:
        raise MalformedLine(f"could not parse numeric fields{where}: {line.strip()!r}") from None
    if parts[3] == "1":
        p = 1
    elif parts[3] == "0":
        p = -1
    else:
        raise InvalidPolarity(f"polarity must be 0 or 1{where}, got {parts[3]!r}")
    if not t >= 0.0:
        raise MalformedLine(f"timestamp must be >= 0{where}, got {parts[0]}")
    if x < 0 or y < 0:
        raise MalformedLine(f"coordinates must be >= 0{where}, got ({x}, {y})")
    return Event(t, x, y, p)


def format_event_line(event: Event) -> str:
    """Inverse of parse_event_line; float repr round-trips the stamp."""
    return f"{float(event.t)!r} {event.x} {event.y} {1 if event.p > 0 else 0}"


def _open_text(path: Union[str, Path, IO[str]]) -> Tuple[IO[str], bool]:
    if hasattr(path, "read"):
        return path, False
    return open(path, "r", encoding="ascii"), True


def read_event_batches(
    path: Union[str, Path, IO[str]],
    geometry: SensorGeometry,
    batch_lines: int = _BATCH_LINES,
) -> Iterator[EventArray]:
    """Stream a "t x y p" text file as validated EventArray chunks.

    Checks per line: parseable fields, non-negative timestamp, polarity
    in {0, 1}.  Checks across the stream: timestamps non-decreasing
    (the error reports both offending stamps) and coordinates inside
    `geometry`.  Line numbers are 1-based.  Blank lines are skipped.
    """
    fh, owned = _open_text(path)
    prev_t: float | None = None
    line_base = 0
    try:
        while True:
            lines = fh.readlines(batch_lines * 24)
            if not lines:
                break
            kept: List[str] = []
            numbers: List[int] = []
            for i, line in enumerate(lines):
                if line.strip():
                    kept.append(line)
                    numbers.append(line_base + i + 1)
            line_base += len(lines)
            if not kept:
                continue
            try:
                raw = np.array([ln.split() for ln in kept], dtype=np.float64)
                if raw.shape[1] != 4:
                    raise ValueError
            except ValueError:
                # Some line is ragged or non-numeric; replay to name it.
                for ln, n in zip(kept, numbers):
                    parse_event_line(ln, n)
                raise MalformedLine("unparseable batch")  # pragma: no cover
            t = raw[:, 0]
            x = raw[:, 1]
            y = raw[:, 2]
            p = raw[:, 3]
            _validate_batch(t, x, y, p, numbers, geometry, prev_t)
            prev_t = float(t[-1])
            yield EventArray.from_columns(
                t,
                x.astype(np.int32),
                y.astype(np.int32),
                np.where(p > 0.5, 1, -1).astype(np.int8),
            )
    finally:
        if owned:
            fh.close()


def _validate_batch(
    t: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    p: np.ndarray,
    numbers: Sequence[int],
    geometry: SensorGeometry,
    prev_t: float | None,
) -> None:
    bad = ~np.isin(p, (0.0, 1.0))
    if bad.any():
        i = int(np.argmax(bad))
        raise InvalidPolarity(
            f"polarity must be 0 or 1 at line {numbers[i]}, got {p[i]:g}"
        )
    bad = ~np.isfinite(t) | (t < 0.0)
    if bad.any():
        i = int(np.argmax(bad))
        raise MalformedLine(f"timestamp must be finite and >= 0 at line {numbers[i]}, got {t[i]!r}")
    bad = (x != np.floor(x)) | (y != np.floor(y))
    if bad.any():
        i = int(np.argmax(bad))
        raise MalformedLine(
            f"coordinates must be integers at line {numbers[i]}: ({x[i]:g}, {y[i]:g})"
        )
    bad = (x < 0) | (x >= geometry.width) | (y < 0) | (y >= geometry.height)
    if bad.any():
        i = int(np.argmax(bad))
        raise OutOfBoundsEvent(
            f"event at ({int(x[i])}, {int(y[i])}) outside "
            f"{geometry.width}x{geometry.height} sensor at line {numbers[i]}"
        )
    if prev_t is not None and float(t[0]) < prev_t:
        raise NonMonotonicTimestamps(
            f"timestamps must not decrease: {prev_t!r} followed by {t[0]!r} "
            f"at line {numbers[0]}"
        )
    if len(t) > 1:
        drops = np.diff(t) < 0.0
        if drops.any():
            i = int(np.argmax(drops))
            raise NonMonotonicTimestamps(
                f"timestamps must not decrease: {t[i]!r} followed by {t[i + 1]!r} "
                f"at line {numbers[i + 1]}"
            )


def read_stream(
    path: Union[str, Path, IO[str]],
    geometry: SensorGeometry,
) -> Iterator[Event]:
    """Yield validated events one at a time from a "t x y p" file."""
    for batch in read_event_batches(path, geometry):
        yield from batch


def write_events(events: Iterable[Event] | EventArray, path: Union[str, Path, IO[str]]) -> None:
    """Write events as "t x y p" lines, one per event."""
    if isinstance(events, EventArray):
        events = iter(events)
    fh, owned = _open_out(path)
    try:
        fh.write("\n".join(format_event_line(e) for e in events))
        fh.write("\n")
    finally:
        if owned:
            fh.close()


def _open_out(path: Union[str, Path, IO[str]]) -> Tuple[IO[str], bool]:
    if hasattr(path, "write"):
        return path, False
    return open(path, "w", encoding="ascii"), True


def write_pgm(raster: np.ndarray, path: Union[str, Path]) -> None:
    """Write an integer raster as binary PGM (P5).

    uint8 maps to maxval 255; uint16 to maxval 65535 with big-endian
    sample bytes as the format requires.
    """
    if raster.ndim != 2:
        raise ValueError(f"raster must be 2D, got shape {raster.shape}")
    if raster.dtype == np.uint8:
        payload = raster.tobytes()
        maxval = 255
    elif raster.dtype == np.uint16:
        payload = raster.astype(">u2").tobytes()
        maxval = 65535
    else:
        raise ValueError(f"raster dtype must be uint8 or uint16, got {raster.dtype}")
    h, w = raster.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + payload)


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    """Read back a binary PGM written by :func:`write_pgm`."""
    data = Path(path).read_bytes()
    fields: List[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    if fields[0] != b"P5":
        raise ValueError(f"not a binary PGM: magic {fields[0]!r}")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval == 255:
        raster = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos)
    elif maxval == 65535:
        raster = np.frombuffer(data, dtype=">u2", count=w * h, offset=pos).astype(np.uint16)
    else:
        raise ValueError(f"unsupported maxval {maxval}")
    return raster.reshape(h, w)


def write_frame_index(
    entries: Iterable[Tuple[float, str, bool]],
    path: Union[str, Path, IO[str]],
) -> None:
    """Write the per-run frame index CSV: stamp,filename,held."""
    fh, owned = _open_out(path)
    try:
        fh.write("stamp,filename,held\n")
        for stamp, filename, held in entries:
            fh.write(f"{stamp:.9f},{filename},{1 if held else 0}\n")
    finally:
        if owned:
            fh.close()


def read_frame_index(path: Union[str, Path]) -> List[Tuple[float, str, bool]]:
    """Parse a frame index CSV back into (stamp, filename, held) rows."""
    out: List[Tuple[float, str, bool]] = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "stamp,filename,held":
            raise ValueError(f"unexpected index header: {header!r}")
        for line in fh:
            if not line.strip():
                continue
            stamp, filename, held = line.strip().split(",")
            out.append((float(stamp), filename, held == "1"))
    return out
