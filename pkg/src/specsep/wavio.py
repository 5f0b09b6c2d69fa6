"""Minimal RIFF/WAVE reader and writer.

Reads 16-bit PCM and 32-bit IEEE float, mono or multichannel (channels are
averaged down to mono); writes 32-bit float mono. Hand-rolled so that parse
errors name the offending chunk and float round-trips are bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .transform import Signal

_FORMAT_PCM = 1
_FORMAT_IEEE_FLOAT = 3
_FORMAT_EXTENSIBLE = 0xFFFE


class WavFormatError(ValueError):
    """Malformed or unsupported WAV content."""


def _read_chunks(data: bytes) -> dict[bytes, bytes]:
    if len(data) < 12:
        raise WavFormatError("file too short for a RIFF header")
    if data[0:4] != b"RIFF":
        raise WavFormatError("missing 'RIFF' marker")
    if data[8:12] != b"WAVE":
        raise WavFormatError("missing 'WAVE' marker")
    chunks: dict[bytes, bytes] = {}
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise WavFormatError(f"truncated {cid.decode('ascii', 'replace')!r} chunk")
        chunks.setdefault(cid, body)
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    return chunks


def load_wav(path: str | Path) -> Signal:
    """Load a WAV file as a mono signal with samples in [-1, 1].

    16-bit PCM samples are scaled by 1/32768; 32-bit float samples pass
    through unchanged. Multichannel input is averaged down to mono.
    """
    data = Path(path).read_bytes()
    chunks = _read_chunks(data)
    if b"fmt " not in chunks:
        raise WavFormatError("missing 'fmt ' chunk")
    if b"data" not in chunks:
        raise WavFormatError("missing 'data' chunk")
    fmt = chunks[b"fmt "]
    if len(fmt) < 16:
        raise WavFormatError("'fmt ' chunk too short")
    format_tag, n_channels, sample_rate, _, block_align, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if format_tag == _FORMAT_EXTENSIBLE and len(fmt) >= 26:
        (format_tag,) = struct.unpack_from("<H", fmt, 24)  # first bytes of the sub-format GUID
    if n_channels < 1:
        raise WavFormatError(f"invalid channel count {n_channels}")

    body = chunks[b"data"]
    if format_tag == _FORMAT_PCM and bits == 16:
        raw = np.frombuffer(body[: len(body) - len(body) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif format_tag == _FORMAT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(body[: len(body) - len(body) % 4], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise WavFormatError(f"unsupported codec: format tag {format_tag}, {bits} bits per sample")

    if n_channels > 1:
        usable = samples.size - samples.size % n_channels
        samples = samples[:usable].reshape(-1, n_channels).mean(axis=1)
    return Signal(samples, float(sample_rate))


def save_wav(signal: Signal, path: str | Path) -> None:
    """Write a mono 32-bit float WAV; loading it back is bit-exact.

    The stored samples are the float32 cast of the signal, so exactness
    holds for float32-representable data.
    """
    if len(signal) == 0:
        raise WavFormatError("refusing to write an empty signal")
    rate = signal.sample_rate
    if abs(rate - round(rate)) > 0:
        raise WavFormatError(f"WAV headers store integer sample rates, got {rate}")
    rate = int(round(rate))
    payload = signal.samples.astype("<f4").tobytes()
    byte_rate = rate * 4
    # fmt (18 bytes, cbSize=0) + fact + data, the canonical float layout.
    fmt_chunk = struct.pack("<4sIHHIIHHH", b"fmt ", 18, _FORMAT_IEEE_FLOAT, 1, rate, byte_rate, 4, 32, 0)
    fact_chunk = struct.pack("<4sII", b"fact", 4, len(signal))
    data_chunk = struct.pack("<4sI", b"data", len(payload)) + payload
    if len(payload) % 2:
        data_chunk += b"\x00"
    riff_body = b"WAVE" + fmt_chunk + fact_chunk + data_chunk
    blob = struct.pack("<4sI", b"RIFF", len(riff_body)) + riff_body
    Path(path).write_bytes(blob)
