"""Time-series and CSV output formats.

Binary time series are little-endian with no header: each frame is the
time as one f64 followed by n+1 f64 solution values on the (descending)
Chebyshev nodes; the reader therefore needs the grid order. CSV output
uses 17 significant digits so values round-trip within one ulp.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import KsgreenError


class TimeSeriesWriter:
    """Appends (t, u) frames to a binary or CSV time-series file."""

    def __init__(self, path, n: int, as_csv: bool = False):
        self.n = n
        self.as_csv = as_csv
        self._fh = open(path, "w", newline="") if as_csv else open(path, "wb")
        if as_csv:
            self._csv = csv.writer(self._fh)
            self._csv.writerow(["t"] + [f"u{i}" for i in range(n + 1)])

    def write(self, t: float, u: np.ndarray) -> None:
        if u.size != self.n + 1:
            raise KsgreenError(f"frame length {u.size} != n+1 = {self.n + 1}")
        if self.as_csv:
            self._csv.writerow([format_float(t)] + [format_float(v) for v in u])
        else:
            frame = np.empty(self.n + 2)
            frame[0] = t
            frame[1:] = u
            self._fh.write(frame.astype("<f8").tobytes())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_time_series(path, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Read a binary time series; returns (times, frames[steps, n+1])."""
    data = np.fromfile(path, dtype="<f8")
    width = n + 2
    if data.size % width:
        raise KsgreenError(
            f"{path}: size {data.size} not a multiple of frame length {width}"
        )
    data = data.reshape(-1, width)
    return data[:, 0].copy(), data[:, 1:].copy()


def format_float(v) -> str:
    return f"{float(v):.17g}"


def write_csv(path, header: list[str], rows) -> None:
    """Write a result table; floats are formatted to round-trip exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, float) else v for v in row]
            )
