import numpy as np
import pytest

from specsep.diagnostics import (
    SupportConditionError,
    additivity_gap,
    check_support_condition,
    cross_term_report,
    remainder_bounds,
    window_derivative_max,
)
from specsep.synthesis import BumpsSpec, make_synthetic_preset, synth_bumps
from specsep.transform import ComplexTFGrid, default_stft_config, spectrogram, stft

FS = 16384.0


@pytest.fixture(scope="module")
def config():
    return default_stft_config(FS)


@pytest.fixture(scope="module")
def preset():
    return make_synthetic_preset(seed=42)


def test_support_condition_preset_values():
    # 0.55 ms bump, 15.75 ms window half-span, 35 ms spacing: 15.75 < 16.95.
    assert check_support_condition(0.00055, 0.01575, 0.035)


def test_support_condition_equal_widths_false():
    assert not check_support_condition(0.01, 0.01, 0.1)


def test_support_condition_boundary_false():
    # min_spacing exactly 2*(half_span + half_width) leaves no strict margin.
    half_width, half_span = 0.001, 0.01
    assert not check_support_condition(half_width, half_span, 2 * (half_span + half_width))
    assert check_support_condition(half_width, half_span, 2 * (half_span + half_width) + 1e-6)


def test_window_derivative_max_matches_closed_form(config):
    # Closed form for the Hann shape: pi / (2 * half_span).
    half_span = config.window_duration / 2
    numeric = window_derivative_max(half_span, config.window_len)
    analytic = np.pi / (2 * half_span)
    assert abs(numeric - analytic) <= 1e-6 * analytic


def test_remainder_bounds_scaling(config, preset):
    base = remainder_bounds(preset.bumps, config)
    doubled_spec = BumpsSpec(
        impulse_times=preset.bumps.impulse_times,
        bump_half_width=2 * preset.bumps.bump_half_width,
        min_spacing=preset.bumps.min_spacing,
        sample_rate=FS,
        duration=1.0,
    )
    doubled = remainder_bounds(doubled_spec, config)
    assert doubled.linear_term_bound == pytest.approx(4 * base.linear_term_bound, rel=1e-12)
    assert doubled.quadratic_term_bound == pytest.approx(8 * base.quadratic_term_bound, rel=1e-12)


def test_remainder_bounds_ratio(config, preset):
    bounds = remainder_bounds(preset.bumps, config)
    ratio = bounds.quadratic_term_bound / bounds.linear_term_bound
    expected = (4.0 / 3.0) * np.pi * preset.bumps.bump_half_width
    assert abs(ratio - expected) <= 1e-12 * expected
    assert bounds.support_ok


def test_additivity_gap_zero_on_preset(config, preset):
    gap = additivity_gap(preset.bumps, config)
    s_x = spectrogram(stft(synth_bumps(preset.bumps), config)).values
    assert gap <= 1e-12 * s_x.max()


def test_additivity_gap_single_bump(config):
    spec = BumpsSpec(
        impulse_times=np.array([0.5]),
        bump_half_width=9.0 / FS,
        min_spacing=0.035,
        sample_rate=FS,
        duration=1.0,
    )
    assert additivity_gap(spec, config) <= 1e-12


def test_additivity_gap_refuses_bad_geometry(config):
    # Spacing too small for the window: frames straddle two bumps.
    spec = BumpsSpec(
        impulse_times=np.array([0.5, 0.52]),
        bump_half_width=9.0 / FS,
        min_spacing=0.02,
        sample_rate=FS,
        duration=1.0,
    )
    with pytest.raises(SupportConditionError):
        additivity_gap(spec, config)


def test_cross_term_zero_partner(config):
    rng = np.random.default_rng(0)
    shape = (config.n_bins, 8)
    t_x = ComplexTFGrid(rng.standard_normal(shape) + 1j * rng.standard_normal(shape), config)
    t_y = ComplexTFGrid(np.zeros(shape, dtype=complex), config)
    report = cross_term_report(t_x, t_y)
    assert np.all(report.grid == 0)
    assert report.max_abs == 0.0


def test_cross_term_identical_partners(config):
    rng = np.random.default_rng(1)
    shape = (config.n_bins, 8)
    vals = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    t = ComplexTFGrid(vals, config)
    report = cross_term_report(t, t)
    np.testing.assert_allclose(report.grid, 2 * np.abs(vals) ** 2, rtol=1e-12)


def test_cross_term_decomposition_identity(config, preset):
    t_x = stft(preset.x, config)
    t_y = stft(preset.y, config)
    t_z = stft(preset.z, config)
    report = cross_term_report(t_x, t_y)
    s_z = spectrogram(t_z).values
    recomposed = spectrogram(t_x).values + spectrogram(t_y).values + report.grid
    assert np.max(np.abs(s_z - recomposed)) <= 1e-12 * s_z.max()


def test_cross_term_shape_mismatch(config):
    a = ComplexTFGrid(np.zeros((config.n_bins, 3), dtype=complex), config)
    b = ComplexTFGrid(np.zeros((config.n_bins, 4), dtype=complex), config)
    with pytest.raises(ValueError):
        cross_term_report(a, b)
