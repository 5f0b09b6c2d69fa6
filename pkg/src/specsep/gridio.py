"""Binary and CSV serialization of spectrogram grids.

Binary layout (little-endian throughout): magic ``SSGR``, version u32,
rows u32, cols u32, sample_rate f64, hop u32, window_len u32, fft_len u32,
then rows*cols f64 values in column-major (time frame by time frame) order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .transform import SpectrogramGrid, StftConfig

MAGIC = b"SSGR"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdIII")


class GridFormatError(ValueError):
    """Unrecognized or corrupt grid file."""


def write_grid(grid: SpectrogramGrid, path: str | Path) -> None:
    """Serialize a spectrogram grid; round-trips bit-exactly."""
    rows, cols = grid.values.shape
    config = grid.config
    header = _HEADER.pack(
        MAGIC, VERSION, rows, cols, config.sample_rate, config.hop, config.window_len, config.fft_len
    )
    payload = np.asarray(grid.values, dtype="<f8").tobytes(order="F")
    Path(path).write_bytes(header + payload)


def read_grid(path: str | Path) -> SpectrogramGrid:
    """Load a grid written by ``write_grid``."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise GridFormatError("file too short for a grid header")
    magic, version, rows, cols, sample_rate, hop, window_len, fft_len = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise GridFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise GridFormatError(f"unsupported version {version}, expected {VERSION}")
    expected = rows * cols * 8
    body = data[_HEADER.size :]
    if len(body) != expected:
        raise GridFormatError(f"payload holds {len(body)} bytes, header implies {expected}")
    values = np.frombuffer(body, dtype="<f8").reshape((rows, cols), order="F")
    config = StftConfig(window_len=window_len, hop=hop, fft_len=fft_len, sample_rate=sample_rate)
    return SpectrogramGrid(values, config)


def grid_to_csv(grid: SpectrogramGrid, path: str | Path) -> None:
    """Write one ``nu_hz,tau_s,value`` row per cell, time frame by time frame."""
    matrix_to_csv(grid.values, grid.config, path)


def matrix_to_csv(values: np.ndarray, config: StftConfig, path: str | Path) -> None:
    """CSV export for grid-shaped matrices in physical units; also used for
    signed matrices such as the cross term."""
    freqs = config.bin_frequencies()
    times = config.frame_times(values.shape[1])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("nu_hz,tau_s,value\n")
        for col, tau in enumerate(times):
            column = values[:, col]
            for nu, value in zip(freqs, column):
                fh.write(f"{float(nu)!r},{float(tau)!r},{float(value)!r}\n")
