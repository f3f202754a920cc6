"""End-to-end runs of the evframe command-line interface."""
from __future__ import annotations

import io

import numpy as np
import pytest

from evframe import read_frame_index, read_pgm
from evframe.cli import main


def run(*argv: str) -> int:
    return main(list(argv))


@pytest.fixture(scope="module")
def stream_file(tmp_path_factory):
    """A small synthetic stream shared by the accumulate/eval tests."""
    path = tmp_path_factory.mktemp("synth") / "events.txt"
    code = run(
        "synth",
        "--geometry", "80x60",
        "--speed", "64",
        "--duration", "0.625",
        "--out", str(path),
    )
    assert code == 0
    return path


def accumulate_args(stream_file, out_dir, *extra: str) -> list[str]:
    return [
        "accumulate",
        "--input", str(stream_file),
        "--geometry", "80x60",
        "--slice", "time-number",
        "--window-size", "360",
        "--interval", "0.03125",
        "--contribution", "0.2",
        "--t0", "0",
        "--out", str(out_dir),
        *extra,
    ]


class TestSynth:
    def test_writes_expected_stream(self, stream_file, capsys):
        lines = stream_file.read_text().splitlines()
        assert len(lines) == 7200
        t, x, y, p = lines[0].split()
        assert float(t) > 0.0
        assert p in {"0", "1"}

    def test_stdout_mode_pipes_cleanly(self, capsys):
        code = run("synth", "--geometry", "16x8", "--speed", "8", "--duration", "1.0", "--out", "-")
        assert code == 0
        out = capsys.readouterr().out
        assert len(out.splitlines()) == 192
        assert out.endswith("\n")

    def test_noise_flag_adds_events(self, tmp_path):
        clean = tmp_path / "clean.txt"
        noisy = tmp_path / "noisy.txt"
        run("synth", "--geometry", "16x8", "--speed", "8", "--duration", "1.0",
            "--out", str(clean))
        run("synth", "--geometry", "16x8", "--speed", "8", "--duration", "1.0",
            "--noise-rate", "5", "--seed", "3", "--out", str(noisy))
        assert len(noisy.read_text().splitlines()) > len(clean.read_text().splitlines())

    def test_reverse_flag_emits_negative_polarity(self, tmp_path):
        path = tmp_path / "rev.txt"
        run("synth", "--geometry", "16x8", "--speed", "8", "--duration", "1.0",
            "--reverse", "--out", str(path))
        polarities = {line.split()[3] for line in path.read_text().splitlines()}
        assert polarities == {"0", "1"}


class TestAccumulate:
    def test_writes_frames_index_and_summary(self, stream_file, tmp_path, capsys):
        out_dir = tmp_path / "frames"
        assert run(*accumulate_args(stream_file, out_dir)) == 0
        captured = capsys.readouterr()
        assert "frames emitted: 21" in captured.out
        assert "held frames: 0" in captured.out
        assert "events in: 7200" in captured.out
        assert "throughput:" in captured.out
        index = read_frame_index(out_dir / "index.csv")
        assert len(index) == 21
        assert index[0][0] == pytest.approx(0.03125)
        raster = read_pgm(out_dir / index[-1][1])
        assert raster.shape == (60, 80)
        assert raster.max() > 0

    def test_repeat_runs_are_byte_identical(self, stream_file, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run(*accumulate_args(stream_file, out_a))
        run(*accumulate_args(stream_file, out_b))
        files_a = sorted(p.name for p in out_a.iterdir())
        assert files_a == sorted(p.name for p in out_b.iterdir())
        for name in files_a:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_reads_stdin_when_input_is_dash(self, stream_file, tmp_path, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO(stream_file.read_text()))
        out_dir = tmp_path / "frames"
        code = run(
            "accumulate", "--geometry", "80x60", "--slice", "time-number",
            "--window-size", "360", "--interval", "0.03125", "--out", str(out_dir),
        )
        assert code == 0
        assert "events in: 7200" in capsys.readouterr().out

    def test_preset_override_is_logged(self, stream_file, tmp_path, capsys):
        out_dir = tmp_path / "frames"
        code = run(
            "accumulate", "--input", str(stream_file), "--geometry", "80x60",
            "--preset", "uav", "--window-size", "500", "--out", str(out_dir),
        )
        assert code == 0
        err = capsys.readouterr().err
        assert "overriding preset uav window_size: 20000 -> 500" in err

    def test_sixteen_bit_output(self, stream_file, tmp_path):
        out_dir = tmp_path / "frames"
        run(*accumulate_args(stream_file, out_dir, "--bit-depth", "16"))
        index = read_frame_index(out_dir / "index.csv")
        raster = read_pgm(out_dir / index[-1][1])
        assert raster.dtype == np.uint16

    def test_decay_flag_parses_each_form(self, stream_file, tmp_path):
        # Decaying buffers need disjoint slices, so drive them by time.
        for flag in ("step", "linear:0.5", "exp:0.1"):
            out_dir = tmp_path / flag.replace(":", "_")
            code = run(
                "accumulate", "--input", str(stream_file), "--geometry", "80x60",
                "--slice", "time", "--interval", "0.03125", "--t0", "0",
                "--decay", flag, "--out", str(out_dir),
            )
            assert code == 0

    def test_rejects_bad_geometry(self, stream_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("accumulate", "--input", str(stream_file), "--geometry", "80by60",
                "--out", str(tmp_path))
        assert exc.value.code == 2

    def test_rejects_bad_decay(self, stream_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(*accumulate_args(stream_file, tmp_path, "--decay", "linear"))
        assert exc.value.code == 2

    def test_geometry_is_required(self, stream_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("accumulate", "--input", str(stream_file), "--out", str(tmp_path))
        assert exc.value.code == 2


class TestEval:
    def test_speed_invariance_writes_csv_and_panels(self, tmp_path, capsys):
        code = run(
            "eval", "speed-invariance",
            "--speeds", "64,128",
            "--out", str(tmp_path),
            "--panels",
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "by-time-and-number: mean ncc 1.0000" in out
        lines = (tmp_path / "speed_invariance.csv").read_text().splitlines()
        assert lines[0] == "method,speed_a,speed_b,frame,ncc"
        assert any(row.startswith("by-time-and-number,64,128") for row in lines[1:])
        panel = read_pgm(tmp_path / "panel_by_time_and_number.pgm")
        assert panel.shape[1] > 160  # two tiles plus separators

    def test_window_sweep_csv(self, stream_file, tmp_path, capsys):
        code = run(
            "eval", "window-sweep",
            "--input", str(stream_file),
            "--geometry", "80x60",
            "--windows", "180,720,2880",
            "--interval", "0.03125",
            "--contribution", "0.5",
            "--out", str(tmp_path),
        )
        assert code == 0
        lines = (tmp_path / "window_sweep.csv").read_text().splitlines()
        assert lines[0] == "window_size,fill_ratio,saturation_fraction"
        assert len(lines) == 4
        fills = [float(row.split(",")[1]) for row in lines[1:]]
        assert fills == sorted(fills)

    def test_contribution_sweep_csv(self, stream_file, tmp_path):
        code = run(
            "eval", "contribution-sweep",
            "--input", str(stream_file),
            "--geometry", "80x60",
            "--contributions", "0.1,0.5,1.0",
            "--interval", "0.03125",
            "--window-size", "720",
            "--out", str(tmp_path),
        )
        assert code == 0
        lines = (tmp_path / "contribution_sweep.csv").read_text().splitlines()
        assert lines[0] == "contribution,distinct_levels"
        levels = [int(row.split(",")[1]) for row in lines[1:]]
        assert levels == sorted(levels, reverse=True)

    def test_polarity_flip_csv_and_panels(self, tmp_path, capsys):
        code = run("eval", "polarity-flip", "--out", str(tmp_path), "--panels")
        assert code == 0
        assert "signed mean flips across 0.5: True" in capsys.readouterr().out
        lines = (tmp_path / "polarity_flip.csv").read_text().splitlines()
        assert lines[0] == "pair,signed_before_mean,signed_after_mean,rectified_ncc"
        assert len(lines) > 1
        assert (tmp_path / "panel_signed.pgm").exists()
        assert (tmp_path / "panel_rectified.pgm").exists()
