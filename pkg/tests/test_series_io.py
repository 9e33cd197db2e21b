"""Binary time-series frames and decimal CSV round-trips."""

import csv

import numpy as np
import pytest

from ksgreen.errors import KsgreenError
from ksgreen.series_io import (
    TimeSeriesWriter,
    format_float,
    read_time_series,
    write_csv,
)


class TestBinaryFrames:
    def test_round_trip_bitwise(self, tmp_path):
        path = tmp_path / "series.bin"
        rng = np.random.default_rng(0)
        frames = rng.standard_normal((7, 33))
        times = rng.standard_normal(7)
        with TimeSeriesWriter(path, 32) as out:
            for t, u in zip(times, frames):
                out.write(t, u)
        t_back, u_back = read_time_series(path, 32)
        assert t_back.tobytes() == times.tobytes()
        assert u_back.tobytes() == frames.tobytes()

    def test_length_mismatch_rejected(self, tmp_path):
        with TimeSeriesWriter(tmp_path / "s.bin", 10) as out:
            with pytest.raises(KsgreenError):
                out.write(0.0, np.zeros(5))

    def test_corrupt_size_detected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"\x00" * 28)  # not a multiple of the frame size
        with pytest.raises(KsgreenError):
            read_time_series(path, 32)


class TestCsv:
    def test_float_format_round_trips(self):
        vals = [1.0 / 3.0, 1e-300, -2.5e17, np.pi, 0.1 + 0.2]
        for v in vals:
            assert float(format_float(v)) == v

    def test_write_csv_round_trips(self, tmp_path):
        path = tmp_path / "table.csv"
        rows = [(1, 0.1 + 0.2, "ok"), (2, 1.0 / 7.0, "blowup@3")]
        write_csv(path, ["n", "value", "verdict"], rows)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            got = list(reader)
        assert header == ["n", "value", "verdict"]
        assert float(got[0][1]) == 0.1 + 0.2
        assert float(got[1][1]) == 1.0 / 7.0
        assert got[1][2] == "blowup@3"

    def test_csv_writer_mode(self, tmp_path):
        path = tmp_path / "frames.csv"
        with TimeSeriesWriter(path, 3, as_csv=True) as out:
            out.write(0.5, np.array([0.0, 1.0 / 3.0, 2.0, 0.0]))
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "u0", "u1", "u2", "u3"]
        assert float(rows[1][2]) == 1.0 / 3.0
