"""Synthetic two-component mixtures: pulse trains plus AM-FM tones.

The pulse-train component is a sum of identical Hann-shaped bumps at
well-separated instants (models clicks); the AM-FM component is a sum of
modes with positive amplitude and ordered instantaneous frequencies (models
whistles). ``make_synthetic_preset`` builds the standard 1-second benchmark
mixture of one bump train and one sinusoidally modulated chirp.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .transform import Signal

BUMP_HANN = "hann"

#: RNG family used by the generators; recorded in synth metadata so runs can
#: be reproduced within one build.
RNG_ALGORITHM = "pcg64"

#: Preset constants: 1 s at 2^14 Hz, 20 bumps at least 35 ms apart, 9-sample
#: bump half-width, unit-amplitude chirp around 1.5 kHz.
PRESET_SAMPLE_RATE = 16384.0
PRESET_DURATION = 1.0
PRESET_BUMP_COUNT = 20
PRESET_MIN_SPACING = 0.035
PRESET_BUMP_HALF_WIDTH = 9.0 / PRESET_SAMPLE_RATE
PRESET_CENTER_FREQ = 1500.0


class GenerationError(RuntimeError):
    """Random placement could not satisfy the spacing constraint."""


def _time_grid(duration: float, sample_rate: float) -> np.ndarray:
    n = round(duration * sample_rate)
    return np.arange(n) / sample_rate


@dataclass(frozen=True)
class BumpsSpec:
    """Placement and shape of a pulse-train signal.

    ``min_spacing`` records the guaranteed minimum separation between
    impulses; construction verifies the actual times honor it.
    """

    impulse_times: np.ndarray
    bump_half_width: float
    min_spacing: float
    sample_rate: float
    duration: float
    bump_shape: str = BUMP_HANN

    def __post_init__(self) -> None:
        times = np.sort(np.asarray(self.impulse_times, dtype=np.float64))
        if self.bump_shape != BUMP_HANN:
            raise ValueError(f"unsupported bump shape: {self.bump_shape!r}")
        if not (self.bump_half_width > 0):
            raise ValueError(f"bump_half_width must be positive, got {self.bump_half_width}")
        if times.size == 0:
            raise ValueError("need at least one impulse time")
        if times.min() < 0 or times.max() > self.duration:
            raise ValueError("impulse times must lie within [0, duration]")
        if times.size > 1 and np.diff(times).min() < self.min_spacing:
            raise ValueError(
                f"impulse times violate the recorded min spacing {self.min_spacing}: "
                f"smallest gap is {np.diff(times).min()}"
            )
        object.__setattr__(self, "impulse_times", times)


@dataclass(frozen=True)
class AmFmSpec:
    """Modes of an AM-FM signal as (amplitude_fn, inst_freq_fn) callables.

    Both callables map an array of times in seconds to arrays; amplitudes
    and instantaneous frequencies must be positive on the sample grid and
    mode frequencies strictly increasing with mode index.
    """

    modes: Sequence[tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray]]]
    sample_rate: float
    duration: float

    def __post_init__(self) -> None:
        if not self.modes:
            raise ValueError("need at least one mode")
        t = _time_grid(self.duration, self.sample_rate)
        prev_freq = None
        for i, (amp_fn, freq_fn) in enumerate(self.modes):
            amp = np.broadcast_to(np.asarray(amp_fn(t), dtype=np.float64), t.shape)
            freq = np.broadcast_to(np.asarray(freq_fn(t), dtype=np.float64), t.shape)
            if not np.all(amp > 0):
                raise ValueError(f"mode {i}: amplitude must be positive on the sample grid")
            if not np.all(freq > 0):
                raise ValueError(f"mode {i}: instantaneous frequency must be positive on the sample grid")
            if prev_freq is not None and not np.all(freq > prev_freq):
                raise ValueError(f"mode {i}: instantaneous frequency must exceed mode {i - 1} everywhere")
            prev_freq = freq


@dataclass(frozen=True)
class PresetMixture:
    """Ground-truth components and their sum, plus the specs that made them."""

    x: Signal
    y: Signal
    z: Signal
    bumps: BumpsSpec
    amfm: AmFmSpec
    seed: int


def sample_impulse_times(
    count: int, duration: float, min_gap: float, seed: int, max_attempts: int = 100_000
) -> np.ndarray:
    """Draw ``count`` sorted times with all consecutive gaps >= ``min_gap``.

    Times are uniform on [min_gap/2, duration - min_gap/2]. Each point is
    rejected and redrawn while it falls within ``min_gap`` of an accepted
    point; a stalled placement (500 consecutive rejections) restarts the
    whole set. Deterministic given the seed.
    """
    if count < 1:
        raise GenerationError(f"count must be >= 1, got {count}")
    if count * min_gap >= duration:
        raise GenerationError(
            f"cannot fit {count} times with gap {min_gap} into {duration} s"
        )
    margin = min_gap / 2
    span = duration - 2 * margin
    rng = np.random.default_rng(seed)
    stall_limit = 500
    attempts = 0
    while attempts < max_attempts:
        times: list[float] = []
        consecutive_rejects = 0
        while len(times) < count and attempts < max_attempts and consecutive_rejects < stall_limit:
            candidate = margin + span * rng.random()
            attempts += 1
            if all(abs(candidate - t) >= min_gap for t in times):
                times.append(candidate)
                consecutive_rejects = 0
            else:
                consecutive_rejects += 1
        if len(times) == count:
            return np.sort(np.asarray(times))
    raise GenerationError(
        f"gave up after {max_attempts} attempts placing {count} times with gap {min_gap}"
    )


def bump_kernel(offsets: np.ndarray, half_width: float) -> np.ndarray:
    """Hann bump with unit peak: 0.5*(1 + cos(pi*t/hw)) on |t| <= hw, else 0."""
    offsets = np.asarray(offsets, dtype=np.float64)
    inside = np.abs(offsets) <= half_width
    out = np.zeros_like(offsets)
    out[inside] = 0.5 * (1.0 + np.cos(np.pi * offsets[inside] / half_width))
    return out


def synth_bumps(spec: BumpsSpec) -> Signal:
    """Evaluate the pulse train on the sample grid."""
    t = _time_grid(spec.duration, spec.sample_rate)
    x = np.zeros_like(t)
    for tk in spec.impulse_times:
        x += bump_kernel(t - tk, spec.bump_half_width)
    return Signal(x, spec.sample_rate)


def synth_amfm(spec: AmFmSpec) -> Signal:
    """Evaluate the AM-FM signal: phases integrate the instantaneous frequency.

    Phase is the trapezoidal cumulative integral of each mode's frequency on
    the sample grid, starting at zero.
    """
    t = _time_grid(spec.duration, spec.sample_rate)
    y = np.zeros_like(t)
    for amp_fn, freq_fn in spec.modes:
        amp = np.broadcast_to(np.asarray(amp_fn(t), dtype=np.float64), t.shape)
        freq = np.broadcast_to(np.asarray(freq_fn(t), dtype=np.float64), t.shape)
        phase = cumulative_trapezoid(freq, t, initial=0.0)
        y = y + amp * np.sin(2.0 * np.pi * phase)
    return Signal(y, spec.sample_rate)


def preset_instantaneous_frequency(t: np.ndarray | float, center_freq: float = PRESET_CENTER_FREQ) -> np.ndarray | float:
    """Preset chirp law: f0 * (1 + (t/2) * sin(2*pi*t))."""
    return center_freq * (1.0 + 0.5 * t * np.sin(2.0 * np.pi * np.asarray(t, dtype=np.float64)))


def make_synthetic_preset(seed: int) -> PresetMixture:
    """Build the benchmark mixture: 20-bump train plus unit-amplitude chirp.

    One second at 16384 Hz; bumps are 9 samples half-wide and at least 35 ms
    apart; the chirp oscillates around 1.5 kHz. The mixture is the exact
    samplewise sum of the two components.
    """
    times = sample_impulse_times(PRESET_BUMP_COUNT, PRESET_DURATION, PRESET_MIN_SPACING, seed)
    bumps = BumpsSpec(
        impulse_times=times,
        bump_half_width=PRESET_BUMP_HALF_WIDTH,
        min_spacing=PRESET_MIN_SPACING,
        sample_rate=PRESET_SAMPLE_RATE,
        duration=PRESET_DURATION,
    )
    amfm = AmFmSpec(
        modes=[(lambda t: np.ones_like(t), preset_instantaneous_frequency)],
        sample_rate=PRESET_SAMPLE_RATE,
        duration=PRESET_DURATION,
    )
    x = synth_bumps(bumps)
    y = synth_amfm(amfm)
    z = Signal(x.samples + y.samples, PRESET_SAMPLE_RATE)
    return PresetMixture(x=x, y=y, z=z, bumps=bumps, amfm=amfm, seed=seed)
