"""Acceptance gate: every release criterion at its stated tolerance.

Each test prints one ``[acceptance] criterion N PASS`` line on success (run
with ``pytest -s`` to see them); a failing assertion marks the criterion
FAIL through the normal pytest report.
"""

import time

import numpy as np
import pytest
from scipy.signal import find_peaks

from specsep.cli import run_cli
from specsep.diagnostics import (
    additivity_gap,
    check_support_condition,
    cross_term_report,
    remainder_bounds,
)
from specsep.gridio import read_grid
from specsep.nmf import nmf_factorize
from specsep.separation import (
    SeparationParams,
    freq_diff_matrix,
    separate,
    solve_smoothing_system,
    update_sparse,
)
from specsep.synthesis import make_synthetic_preset, preset_instantaneous_frequency, synth_bumps
from specsep.transform import (
    ComplexTFGrid,
    Signal,
    default_stft_config,
    istft,
    project_consistent,
    spectrogram,
    stft,
)
from specsep.wavio import save_wav

FS = 16384.0
PRESET_SEED = 42

#: Cross-term rel_fro measured on the validated seed-42 preset; criterion 7
#: allows at most 1% drift from this frozen value.
FROZEN_CROSS_REL_FRO = 0.015520133441329683


def _report(number: int, description: str) -> None:
    print(f"[acceptance] criterion {number} PASS: {description}")


@pytest.fixture(scope="module")
def config():
    return default_stft_config(FS)


@pytest.fixture(scope="module")
def preset():
    return make_synthetic_preset(seed=PRESET_SEED)


@pytest.fixture(scope="module")
def mixture_grid(preset, config):
    return stft(preset.z, config)


@pytest.fixture(scope="module")
def separation(mixture_grid):
    start = time.perf_counter()
    result = separate(mixture_grid, SeparationParams())
    elapsed = time.perf_counter() - start
    return result, elapsed


def test_criterion_01_stft_round_trip(config):
    rng = np.random.default_rng(100)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        x = rng.standard_normal(int(FS))
        rec = istft(stft(Signal(x, FS), config))
        worst = max(worst, np.linalg.norm(rec.samples - x) / np.linalg.norm(x))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-10
    assert elapsed < 2.0
    _report(1, f"20 round trips, worst relative error {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_projector_laws(config):
    rng = np.random.default_rng(200)
    shape = (config.n_bins, 30)
    worst_idem = 0.0
    for _ in range(10):
        grid = ComplexTFGrid(rng.standard_normal(shape) + 1j * rng.standard_normal(shape), config)
        once = project_consistent(grid)
        twice = project_consistent(once)
        worst_idem = max(worst_idem, float(np.max(np.abs(twice.values - once.values))))
    assert worst_idem <= 1e-10

    x = rng.standard_normal(8000)
    consistent = stft(Signal(x, FS), config)
    fixed = project_consistent(consistent)
    fix_err = float(np.max(np.abs(fixed.values - consistent.values)))
    assert fix_err <= 1e-10
    _report(2, f"idempotence {worst_idem:.2e}, fixed point {fix_err:.2e}")


def test_criterion_03_subproblem_oracles():
    rng = np.random.default_rng(300)
    worst_resid = 0.0
    for n_bins in (2, 8, 64):
        rhs = rng.standard_normal((n_bins, 12))
        weight = 0.37
        diff = freq_diff_matrix(n_bins)
        system = np.eye(n_bins) + weight * diff.T @ diff
        solution = solve_smoothing_system(rhs, weight)
        residual = np.max(np.abs(system @ solution - rhs))
        dense = np.linalg.solve(system, rhs)
        worst_resid = max(worst_resid, residual / np.max(np.abs(rhs)), float(np.max(np.abs(solution - dense))))
    assert worst_resid <= 1e-10

    r = rng.standard_normal((128, 50))
    sparse = update_sparse(r, 0.3)
    sparse_err = float(np.max(np.abs(sparse - np.maximum(r - 0.15, 0.0))))
    assert sparse_err <= 1e-8
    _report(3, f"smooth oracle {worst_resid:.2e}, sparse oracle {sparse_err:.2e}")


def test_criterion_04_synthetic_experiment(preset, mixture_grid, separation):
    result, elapsed = separation
    assert result.converged
    assert result.iterations <= 500
    assert elapsed < 60.0

    s_z = spectrogram(mixture_grid).values
    resid = float(np.linalg.norm(s_z - result.s_x.values - result.s_y.values))
    nmf = nmf_factorize(spectrogram(mixture_grid), rank=2, iters=500, seed=0)
    assert nmf.residual_norm >= 10.0 * resid
    _report(
        4,
        f"converged in {result.iterations} iterations ({elapsed:.1f}s), "
        f"residual ratio {nmf.residual_norm / resid:.0f}x",
    )


def test_criterion_05_support_condition_and_additivity(preset, config):
    half_span = config.window_duration / 2
    assert check_support_condition(preset.bumps.bump_half_width, half_span, preset.bumps.min_spacing)
    gap = additivity_gap(preset.bumps, config)
    s_x_max = float(spectrogram(stft(synth_bumps(preset.bumps), config)).values.max())
    assert gap <= 1e-12 * s_x_max
    _report(5, f"support condition holds, additivity gap {gap:.2e} <= 1e-12*{s_x_max:.2e}")


def test_criterion_06_bound_formulas(preset, config):
    bounds = remainder_bounds(preset.bumps, config)
    analytic = np.pi / config.window_duration  # pi / (2 * half_span)
    rel_err = abs(bounds.window_derivative_max - analytic) / analytic
    assert rel_err <= 1e-6

    ratio = bounds.quadratic_term_bound / bounds.linear_term_bound
    expected = (4.0 / 3.0) * np.pi * preset.bumps.bump_half_width
    assert abs(ratio - expected) <= 1e-12 * expected
    _report(6, f"window-derivative max rel err {rel_err:.2e}, bound ratio exact")


def test_criterion_07_cross_term_identity_and_regression(preset, config, mixture_grid):
    t_x = stft(preset.x, config)
    t_y = stft(preset.y, config)
    report = cross_term_report(t_x, t_y)
    s_z = spectrogram(mixture_grid).values
    recomposed = spectrogram(t_x).values + spectrogram(t_y).values + report.grid
    identity_err = float(np.max(np.abs(s_z - recomposed)))
    assert identity_err <= 1e-12 * s_z.max()

    drift = abs(report.rel_fro - FROZEN_CROSS_REL_FRO) / FROZEN_CROSS_REL_FRO
    assert drift <= 0.01
    _report(7, f"identity error {identity_err:.2e}, rel_fro {report.rel_fro:.6f} (drift {drift:.2%})")


def test_criterion_08_component_identification(preset, config, separation):
    result, _ = separation

    # Sparse component: energy concentrated around the true frequency ridge.
    s_y = result.s_y.values
    n_frames = s_y.shape[1]
    frame_centers = (np.arange(n_frames) * config.hop - config.window_len / 2) / config.sample_rate
    ridge = preset_instantaneous_frequency(np.clip(frame_centers, 0.0, preset.bumps.duration))
    freqs = config.bin_frequencies()
    band = np.abs(freqs[:, None] - ridge[None, :]) <= 200.0
    ridge_fraction = float(s_y[band].sum() / s_y.sum())
    assert ridge_fraction >= 0.5

    # Smooth component: time marginal peaks at the true impulse times.
    marginal = result.s_x.values.sum(axis=0)
    peaks, _ = find_peaks(marginal)
    true_frames = (preset.bumps.impulse_times * config.sample_rate + config.window_len / 2) / config.hop
    hits = sum(1 for frame in true_frames if np.any(np.abs(peaks - frame) <= 2.0))
    assert hits >= 0.8 * len(true_frames)
    _report(8, f"ridge energy fraction {ridge_fraction:.3f}, impulse hits {hits}/{len(true_frames)}")


def test_criterion_09_nmf_baseline_sanity(config):
    rng = np.random.default_rng(900)
    s = np.abs(rng.standard_normal((config.n_bins, 40)))
    eps = 1e-12
    w = (1.0 - rng.random((config.n_bins, 2))) * s.mean()
    h = (1.0 - rng.random((2, 40))) * s.mean()
    fits = [np.linalg.norm(s - w @ h)]
    for _ in range(80):
        h *= (w.T @ s) / (w.T @ w @ h + eps)
        w *= (s @ h.T) / (w @ (h @ h.T) + eps)
        fits.append(np.linalg.norm(s - w @ h))
    assert np.all(np.diff(fits) <= 1e-12 * max(fits[0], 1.0))

    from specsep.transform import SpectrogramGrid

    w1 = np.abs(rng.standard_normal(config.n_bins)) + 0.05
    h1 = np.abs(rng.standard_normal(33)) + 0.05
    rank1 = SpectrogramGrid(np.outer(w1, h1), config)
    recovered = nmf_factorize(rank1, rank=1, iters=500, seed=5)
    rel = recovered.residual_norm / np.linalg.norm(rank1.values)
    assert rel <= 1e-6
    _report(9, f"fit monotone over 80 sweeps, rank-1 recovery residual {rel:.2e}")


def test_criterion_10_real_audio_cli_path(tmp_path, capsys):
    # Stand-in for a user-supplied recording: an unrelated mono WAV at a
    # different sample rate, run with the weak-sparsity field-recording
    # configuration (lambda 0.1, mu 1e-5).
    rate = 8192.0
    t = np.arange(int(1.5 * rate)) / rate
    audio = np.sin(2 * np.pi * (900.0 + 300.0 * t) * t) * 0.4
    clicks = np.zeros_like(t)
    clicks[::2048] = 1.0
    wav = tmp_path / "field_recording.wav"
    save_wav(Signal((audio + clicks).astype(np.float32).astype(np.float64), rate), wav)

    sx, sy = tmp_path / "sx.grid", tmp_path / "sy.grid"
    trace = tmp_path / "trace.csv"
    code = run_cli(
        [
            "separate",
            "--input", str(wav),
            "--lambda", "0.1",
            "--mu", "0.00001",
            "--max-iter", "40",
            "--out-sx", str(sx),
            "--out-sy", str(sy),
            "--trace", str(trace),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "iterations=" in out  # reported, not asserted

    for path in (sx, sy):
        grid = read_grid(path)  # valid GridFile round trip
        assert grid.values.min() >= 0.0
        assert path.with_suffix(".png").stat().st_size > 0
    assert trace.read_text().startswith("k,J,rho,clamped_count_x")
    _report(10, "CLI run with lambda=0.1 mu=1e-5 wrote valid grids, PNGs and trace")
