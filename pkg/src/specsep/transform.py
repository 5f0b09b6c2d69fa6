"""Discrete STFT analysis/synthesis and the consistency projector.

The analysis side frames a zero-padded signal with a periodic Hann window,
zero-pads each frame to the FFT length and keeps the one-sided spectrum.
The synthesis side is the least-squares inverse (window-weighted overlap-add
divided by the overlap-added squared-window envelope), which makes
``project_consistent`` a true projector onto the set of grids that are the
STFT of some signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

WINDOW_HANN_PERIODIC = "hann_periodic"

#: Relative spread allowed in the folded squared-window sum before a
#: window/hop pair is rejected as non-invertible.
COLA_RTOL = 1e-12

#: Overlap-add envelope floor below which division is refused.
ENVELOPE_FLOOR = 1e-12


class ConfigurationError(ValueError):
    """Invalid analysis configuration (shape, divisibility or overlap-add)."""


class ColaViolationError(RuntimeError):
    """Overlap-add envelope too small at a sample needed for inversion."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _periodic_hann(length: int) -> np.ndarray:
    n = np.arange(length)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * n / length))


@dataclass(frozen=True)
class StftConfig:
    """Window/hop/FFT geometry defining one analysis-synthesis pair.

    The hop must divide the window length and the squared window must
    overlap-add to a constant (checked numerically at construction), so the
    least-squares inverse is exact away from the padded edges.
    """

    window_len: int
    hop: int
    fft_len: int
    sample_rate: float
    window_kind: str = WINDOW_HANN_PERIODIC

    def __post_init__(self) -> None:
        if self.window_kind != WINDOW_HANN_PERIODIC:
            raise ConfigurationError(f"unsupported window kind: {self.window_kind!r}")
        if self.window_len <= 0 or self.window_len % 2 != 0:
            raise ConfigurationError(f"window_len must be positive and even, got {self.window_len}")
        if self.hop <= 0 or self.window_len % self.hop != 0:
            raise ConfigurationError(f"hop must be positive and divide window_len ({self.window_len}), got {self.hop}")
        if 2 * self.hop > self.window_len:
            raise ConfigurationError(f"hop must be at most window_len/2, got hop={self.hop}, window_len={self.window_len}")
        if self.fft_len < self.window_len or not _is_power_of_two(self.fft_len):
            raise ConfigurationError(f"fft_len must be a power of two >= window_len, got {self.fft_len}")
        if not (self.sample_rate > 0 and math.isfinite(self.sample_rate)):
            raise ConfigurationError(f"sample_rate must be positive and finite, got {self.sample_rate}")
        # Fold the squared window modulo the hop: the folded sums equal the
        # interior overlap-add envelope, which must be constant.
        sq = _periodic_hann(self.window_len) ** 2
        folded = sq.reshape(-1, self.hop).sum(axis=0)
        mean = folded.mean()
        if mean <= 0.0 or (folded.max() - folded.min()) > COLA_RTOL * mean:
            raise ConfigurationError(
                f"window/hop pair violates constant overlap-add: hop={self.hop}, window_len={self.window_len}"
            )

    @property
    def n_bins(self) -> int:
        """Rows of every grid produced under this config (one-sided bins)."""
        return self.fft_len // 2 + 1

    @property
    def window_duration(self) -> float:
        """Full window span in seconds."""
        return self.window_len / self.sample_rate

    def frame_count(self, n_samples: int) -> int:
        """Number of analysis frames for a signal of ``n_samples`` samples."""
        if n_samples <= 0:
            raise ConfigurationError(f"n_samples must be positive, got {n_samples}")
        return -(-(n_samples + self.window_len) // self.hop)

    def bin_frequencies(self) -> np.ndarray:
        """Center frequency in Hz of each grid row."""
        return np.arange(self.n_bins) * (self.sample_rate / self.fft_len)

    def frame_times(self, n_frames: int) -> np.ndarray:
        """Start time in seconds of each analysis frame (hop grid)."""
        return np.arange(n_frames) * (self.hop / self.sample_rate)


def default_stft_config(sample_rate: float, window_ms: float = 31.5, hop_divisor: int = 4) -> StftConfig:
    """Build the standard config: ~31.5 ms Hann window, quarter-window hop.

    The window length is rounded to the nearest multiple of lcm(2, hop_divisor)
    so it is even and the hop divides it; the FFT length is the next power of
    two at or above the window length.
    """
    if hop_divisor < 3:
        raise ConfigurationError(f"hop_divisor must be >= 3 for an invertible Hann analysis, got {hop_divisor}")
    step = math.lcm(2, hop_divisor)
    window_len = step * max(1, round(window_ms * 1e-3 * sample_rate / step))
    fft_len = 1 << max(1, (window_len - 1).bit_length())
    return StftConfig(
        window_len=window_len,
        hop=window_len // hop_divisor,
        fft_len=fft_len,
        sample_rate=float(sample_rate),
    )


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled real waveform."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"samples must be one-dimensional, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if not (self.sample_rate > 0 and math.isfinite(self.sample_rate)):
            raise ValueError(f"sample_rate must be positive and finite, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True, eq=False)
class ComplexTFGrid:
    """Complex STFT coefficients, frequency bins x time frames.

    ``n_samples`` records the source signal length when the grid came from
    ``stft``; ``istft`` uses it to strip the analysis padding exactly.
    """

    values: np.ndarray
    config: StftConfig
    n_samples: int | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 2:
            raise ValueError(f"grid values must be a matrix, got shape {values.shape}")
        if values.shape[0] != self.config.n_bins:
            raise ValueError(f"grid must have {self.config.n_bins} frequency rows, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        if self.n_samples is not None and self.config.frame_count(self.n_samples) != values.shape[1]:
            raise ValueError(
                f"n_samples={self.n_samples} implies {self.config.frame_count(self.n_samples)} frames, "
                f"grid has {values.shape[1]}"
            )
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class SpectrogramGrid:
    """Nonnegative squared-magnitude grid with the config that produced it."""

    values: np.ndarray
    config: StftConfig

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"grid values must be a matrix, got shape {values.shape}")
        if values.shape[0] != self.config.n_bins:
            raise ValueError(f"grid must have {self.config.n_bins} frequency rows, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        if values.size and values.min() < 0.0:
            raise ValueError("spectrogram values must be nonnegative")
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def make_window(config: StftConfig) -> np.ndarray:
    """Periodic Hann analysis window of length ``config.window_len``."""
    return _periodic_hann(config.window_len)


@lru_cache(maxsize=64)
def _ola_envelope(window_len: int, hop: int, n_frames: int) -> np.ndarray:
    """Overlap-added squared window over the padded synthesis span."""
    sq = _periodic_hann(window_len) ** 2
    env = np.zeros(hop * (n_frames - 1) + window_len)
    for t in range(n_frames):
        env[t * hop : t * hop + window_len] += sq
    env.setflags(write=False)
    return env


def stft(signal: Signal, config: StftConfig) -> ComplexTFGrid:
    """Analyze a signal into its one-sided complex time-frequency grid.

    The signal is zero-padded by one window length on each side so every
    sample is covered by full frames; frame ``t`` windows the padded samples
    ``[t*hop, t*hop + window_len)``.
    """
    if signal.sample_rate != config.sample_rate:
        raise ConfigurationError(
            f"signal sample rate {signal.sample_rate} does not match config {config.sample_rate}"
        )
    x = signal.samples
    if x.size == 0:
        raise ValueError("cannot analyze an empty signal")
    wl, hop = config.window_len, config.hop
    padded = np.pad(x, wl)
    n_frames = config.frame_count(x.size)
    idx = hop * np.arange(n_frames)[:, None] + np.arange(wl)[None, :]
    frames = padded[idx] * make_window(config)
    values = np.ascontiguousarray(np.fft.rfft(frames, n=config.fft_len, axis=1).T)
    return ComplexTFGrid(values, config, n_samples=x.size)


def istft(grid: ComplexTFGrid) -> Signal:
    """Least-squares inverse: windowed overlap-add over the envelope.

    Uses ``grid.n_samples`` to strip the analysis padding when present;
    otherwise reconstructs the longest signal consistent with the frame
    count (``hop * n_frames - window_len`` samples).
    """
    config = grid.config
    wl, hop, fft_len = config.window_len, config.hop, config.fft_len
    n_frames = grid.values.shape[1]
    n_samples = grid.n_samples if grid.n_samples is not None else hop * n_frames - wl
    if n_samples <= 0:
        raise ValueError(f"grid with {n_frames} frames is too short to invert (window_len={wl}, hop={hop})")
    window = make_window(config)
    frames = np.fft.irfft(grid.values.T, n=fft_len, axis=1)[:, :wl]
    contrib = frames * window
    out = np.zeros(hop * (n_frames - 1) + wl)
    for t in range(n_frames):
        out[t * hop : t * hop + wl] += contrib[t]
    env = _ola_envelope(wl, hop, n_frames)
    core = slice(wl, wl + n_samples)
    env_core = env[core]
    if env_core.min() < ENVELOPE_FLOOR:
        raise ColaViolationError(
            f"overlap-add envelope below {ENVELOPE_FLOOR} inside the reconstruction region"
        )
    return Signal(out[core] / env_core, config.sample_rate)


def spectrogram(grid: ComplexTFGrid) -> SpectrogramGrid:
    """Elementwise squared magnitude of a complex grid."""
    return SpectrogramGrid(np.abs(grid.values) ** 2, grid.config)


def project_consistent(grid: ComplexTFGrid) -> ComplexTFGrid:
    """Project onto consistent grids: analyze the least-squares inversion.

    Idempotent, and fixes exactly the grids of the form ``stft(s)``.
    """
    return stft(istft(grid), grid.config)


def combine_magnitude_phase(magnitudes: SpectrogramGrid, phase_ref: ComplexTFGrid) -> ComplexTFGrid:
    """Build ``sqrt(S) * exp(i*angle(ref))``; zero reference means zero phase."""
    if magnitudes.values.shape != phase_ref.values.shape:
        raise ValueError(
            f"shape mismatch: magnitudes {magnitudes.values.shape} vs reference {phase_ref.values.shape}"
        )
    if magnitudes.config != phase_ref.config:
        raise ValueError("magnitude and phase-reference grids use different configs")
    ref = phase_ref.values
    mag_ref = np.abs(ref)
    unit = np.where(mag_ref > 0.0, ref / np.where(mag_ref > 0.0, mag_ref, 1.0), 1.0 + 0.0j)
    return ComplexTFGrid(np.sqrt(magnitudes.values) * unit, phase_ref.config, n_samples=phase_ref.n_samples)
