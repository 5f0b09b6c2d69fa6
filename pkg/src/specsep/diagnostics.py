"""Executable checks of the separability assumptions.

The pulse-train component is separable per bump in the spectrogram exactly
when the analysis window can straddle one bump without touching its
neighbors (``check_support_condition``). Under that condition the bumps
spectrogram is additive over bumps (``additivity_gap`` measures the
violation, which should be zero to machine precision), and the frequency
variation of the pulse spectrogram is controlled by two remainder bounds
that scale with the bump width (``remainder_bounds``). The mixture
spectrogram decomposes into the component spectrograms plus a cross term
whose size ``cross_term_report`` measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .synthesis import BumpsSpec, synth_bumps
from .transform import ComplexTFGrid, StftConfig, spectrogram, stft


class SupportConditionError(ValueError):
    """The window/bump geometry does not isolate individual bumps."""


@dataclass(frozen=True)
class RemainderBounds:
    """Bounds on the windowed-pulse transform remainders, plus the geometry check.

    ``linear_term_bound`` bounds the remainder that is first order in the bump
    half-width; ``quadratic_term_bound`` the second-order one. Their ratio is
    (4/3)*pi*half_width by construction.
    """

    linear_term_bound: float
    quadratic_term_bound: float
    support_ok: bool
    window_derivative_max: float


@dataclass(frozen=True, eq=False)
class CrossTermReport:
    """Interference between two component STFTs in the mixture spectrogram."""

    grid: np.ndarray
    max_abs: float
    rel_fro: float
    rel_max: float


def check_support_condition(bump_half_width: float, window_half_span: float, min_spacing: float) -> bool:
    """True iff the window can cover one bump while excluding its neighbors.

    Requires ``bump_half_width < window_half_span`` and
    ``window_half_span < min_spacing/2 - bump_half_width`` (all in seconds).
    """
    if bump_half_width <= 0 or window_half_span <= 0 or min_spacing <= 0:
        raise ValueError("all durations must be positive")
    return bump_half_width < window_half_span < min_spacing / 2 - bump_half_width


def window_derivative_max(window_half_span: float, window_len: int) -> float:
    """Dense-grid maximum of |d/dt| of the continuous Hann analysis window.

    Central finite differences on a grid no coarser than span/(64*window_len)
    keep both differentiation and grid-location error far below 1e-6 relative.
    """
    span = 2.0 * window_half_span
    step = span / (64 * window_len)
    t = np.arange(-window_half_span, window_half_span + step, step)

    def window_fn(tt: np.ndarray) -> np.ndarray:
        out = np.zeros_like(tt)
        inside = np.abs(tt) <= window_half_span
        out[inside] = 0.5 * (1.0 + np.cos(np.pi * tt[inside] / window_half_span))
        return out

    derivative = (window_fn(t + step) - window_fn(t - step)) / (2.0 * step)
    return float(np.max(np.abs(derivative)))


def remainder_bounds(bumps: BumpsSpec, config: StftConfig) -> RemainderBounds:
    """Evaluate the two remainder bounds for a Hann bump train.

    The bump peak is 1, so the bounds reduce to powers of the bump half-width
    times the window-derivative maximum.
    """
    half_span = config.window_duration / 2.0
    deriv_max = window_derivative_max(half_span, config.window_len)
    bump_peak = 1.0  # Hann bump shape
    hw = bumps.bump_half_width
    linear = hw**2 * bump_peak * deriv_max
    quadratic = (4.0 / 3.0) * np.pi * hw**3 * bump_peak * deriv_max
    ok = check_support_condition(hw, half_span, bumps.min_spacing)
    return RemainderBounds(
        linear_term_bound=linear,
        quadratic_term_bound=quadratic,
        support_ok=ok,
        window_derivative_max=deriv_max,
    )


def additivity_gap(bumps: BumpsSpec, config: StftConfig) -> float:
    """Max |spectrogram(all bumps) - sum of single-bump spectrograms|.

    Only meaningful when the support condition holds (each analysis frame
    sees at most one bump); then the gap is zero to machine precision.
    """
    half_span = config.window_duration / 2.0
    if not check_support_condition(bumps.bump_half_width, half_span, bumps.min_spacing):
        raise SupportConditionError(
            "support condition violated: frames may straddle multiple bumps, the gap is meaningless"
        )
    full = spectrogram(stft(synth_bumps(bumps), config)).values
    total = np.zeros_like(full)
    for tk in bumps.impulse_times:
        single = BumpsSpec(
            impulse_times=np.array([tk]),
            bump_half_width=bumps.bump_half_width,
            min_spacing=bumps.min_spacing,
            sample_rate=bumps.sample_rate,
            duration=bumps.duration,
        )
        total += spectrogram(stft(synth_bumps(single), config)).values
    return float(np.max(np.abs(full - total)))


def cross_term_report(t_x: ComplexTFGrid, t_y: ComplexTFGrid) -> CrossTermReport:
    """Measure 2*Re(T_x * conj(T_y)) against the mixture spectrogram.

    The mixture is taken as T_x + T_y, so
    |T_x + T_y|^2 == |T_x|^2 + |T_y|^2 + grid holds identically.
    """
    if t_x.values.shape != t_y.values.shape:
        raise ValueError(f"shape mismatch: {t_x.values.shape} vs {t_y.values.shape}")
    grid = 2.0 * np.real(t_x.values * np.conj(t_y.values))
    s_z = np.abs(t_x.values + t_y.values) ** 2
    max_abs = float(np.max(np.abs(grid)))
    s_z_norm = float(np.linalg.norm(s_z))
    s_z_max = float(s_z.max())
    return CrossTermReport(
        grid=grid,
        max_abs=max_abs,
        rel_fro=float(np.linalg.norm(grid)) / s_z_norm if s_z_norm > 0 else 0.0,
        rel_max=max_abs / s_z_max if s_z_max > 0 else 0.0,
    )
