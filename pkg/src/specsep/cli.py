"""Command-line interface.

Subcommands: ``synth`` (write the benchmark mixture as WAV files plus a
metadata sidecar), ``separate`` (run the solver on a WAV and export grids,
images and a convergence trace), ``nmf`` (rank-2 baseline), ``diagnose``
(separability checks on the benchmark preset) and ``render`` (grid to PNG).

Exit codes: 0 success, 1 usage error, 2 runtime error or failed diagnosis.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import additivity_gap, cross_term_report, remainder_bounds
from .gridio import matrix_to_csv, read_grid, write_grid
from .nmf import nmf_factorize
from .render import RenderOptions, render_spectrogram
from .separation import SeparationParams, separate
from .synthesis import (
    PRESET_CENTER_FREQ,
    RNG_ALGORITHM,
    make_synthetic_preset,
    synth_bumps,
)
from .transform import default_stft_config, spectrogram, stft
from .wavio import load_wav, save_wav

_DEFAULTS = SeparationParams()


class UsageError(Exception):
    """Bad flags or arguments; mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="specsep", description="Consistent spectrogram separation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write the benchmark mixture to WAV files")
    p.add_argument("--seed", type=int, default=42, help="generator seed (default 42)")
    p.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")

    p = sub.add_parser("separate", help="separate a mixture WAV into component spectrograms")
    p.add_argument("--input", type=Path, required=True, help="mono WAV file")
    p.add_argument("--lambda", dest="smoothness", type=float, default=_DEFAULTS.smoothness_weight,
                   help=f"frequency-smoothness weight (default {_DEFAULTS.smoothness_weight})")
    p.add_argument("--mu", dest="sparsity", type=float, default=_DEFAULTS.sparsity_weight,
                   help=f"sparsity weight (default {_DEFAULTS.sparsity_weight})")
    p.add_argument("--theta", type=float, default=_DEFAULTS.rel_tol,
                   help=f"relative cost-change stop threshold (default {_DEFAULTS.rel_tol})")
    p.add_argument("--max-iter", type=int, default=_DEFAULTS.max_iter,
                   help=f"iteration cap (default {_DEFAULTS.max_iter})")
    p.add_argument("--win-ms", type=float, default=31.5, help="analysis window length in ms (default 31.5)")
    p.add_argument("--hop-div", type=int, default=4, help="hop = window_len / hop-div (default 4)")
    p.add_argument("--out-sx", type=Path, default=Path("sx.grid"), help="smooth-component grid path")
    p.add_argument("--out-sy", type=Path, default=Path("sy.grid"), help="sparse-component grid path")
    p.add_argument("--trace", type=Path, default=Path("trace.csv"), help="convergence trace CSV path")

    p = sub.add_parser("nmf", help="rank-2 multiplicative-update baseline")
    p.add_argument("--input", type=Path, required=True, help="mono WAV file")
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--win-ms", type=float, default=31.5)
    p.add_argument("--hop-div", type=int, default=4)
    p.add_argument("--out-dir", type=Path, default=Path("."), help="where component grids are written")

    p = sub.add_parser("diagnose", help="separability checks on the benchmark preset")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--win-ms", type=float, default=31.5)
    p.add_argument("--hop-div", type=int, default=4)
    p.add_argument("--out", type=Path, default=None, help="also write the key=value report here")
    p.add_argument("--cross-term-csv", type=Path, default=None, help="write the cross-term grid as CSV")

    p = sub.add_parser("render", help="render a grid file to a grayscale PNG")
    p.add_argument("--input", type=Path, required=True, help="grid file")
    p.add_argument("--out", type=Path, required=True, help="PNG path")
    p.add_argument("--db-floor", type=float, default=-80.0)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)

    return parser


def _cmd_synth(args: argparse.Namespace) -> int:
    mix = make_synthetic_preset(args.seed)
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {"x": "x.wav", "y": "y.wav", "z": "z.wav"}
    save_wav(mix.x, out_dir / files["x"])
    save_wav(mix.y, out_dir / files["y"])
    save_wav(mix.z, out_dir / files["z"])
    metadata = {
        "seed": mix.seed,
        "rng": RNG_ALGORITHM,
        "sample_rate": mix.z.sample_rate,
        "duration": mix.bumps.duration,
        "impulse_times": [float(t) for t in mix.bumps.impulse_times],
        "bump_half_width": mix.bumps.bump_half_width,
        "min_spacing": mix.bumps.min_spacing,
        "center_freq_hz": PRESET_CENTER_FREQ,
        "files": files,
    }
    with open(out_dir / "synth.json", "w", encoding="utf-8") as fh:
        json.dump(metadata, fh, indent=2)
        fh.write("\n")
    print(f"wrote {', '.join(files.values())} and synth.json to {out_dir}")
    return 0


def _write_trace(path: Path, result) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,J,rho,clamped_count_x\n")
        for i, (cost, rho, clamped) in enumerate(
            zip(result.cost_trace, result.rho_trace, result.clamp_trace), start=1
        ):
            fh.write(f"{i},{float(cost)!r},{float(rho)!r},{int(clamped)}\n")


def _cmd_separate(args: argparse.Namespace) -> int:
    signal = load_wav(args.input)
    config = default_stft_config(signal.sample_rate, window_ms=args.win_ms, hop_divisor=args.hop_div)
    params = SeparationParams(
        smoothness_weight=args.smoothness,
        sparsity_weight=args.sparsity,
        max_iter=args.max_iter,
        rel_tol=args.theta,
    )
    t_z = stft(signal, config)
    result = separate(t_z, params)

    for grid, path in ((result.s_x, args.out_sx), (result.s_y, args.out_sy)):
        path.parent.mkdir(parents=True, exist_ok=True)
        write_grid(grid, path)
        render_spectrogram(grid, RenderOptions(), path.with_suffix(".png"))
    args.trace.parent.mkdir(parents=True, exist_ok=True)
    _write_trace(args.trace, result)

    s_z = spectrogram(t_z).values
    residual = float(np.linalg.norm(s_z - result.s_x.values - result.s_y.values))
    print(f"iterations={result.iterations} converged={result.converged}")
    print(f"residual_norm={residual!r}")
    print(f"norm_factor={result.norm_factor!r}")
    print(f"wrote {args.out_sx}, {args.out_sy}, PNGs and {args.trace}")
    return 0


def _cmd_nmf(args: argparse.Namespace) -> int:
    signal = load_wav(args.input)
    config = default_stft_config(signal.sample_rate, window_ms=args.win_ms, hop_divisor=args.hop_div)
    s_z = spectrogram(stft(signal, config))
    result = nmf_factorize(s_z, rank=args.rank, iters=args.iters, seed=args.seed)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for i, grid in enumerate(result.component_grids, start=1):
        write_grid(grid, args.out_dir / f"nmf_component_{i}.grid")
    print(f"iterations={result.iterations}")
    print(f"residual_norm={result.residual_norm!r}")
    print(f"wrote {len(result.component_grids)} component grids to {args.out_dir} (spikiest activation first)")
    return 0


def _cmd_diagnose(args: argparse.Namespace) -> int:
    mix = make_synthetic_preset(args.seed)
    config = default_stft_config(mix.z.sample_rate, window_ms=args.win_ms, hop_divisor=args.hop_div)
    half_span = config.window_duration / 2.0

    bounds = remainder_bounds(mix.bumps, config)
    gap = additivity_gap(mix.bumps, config)
    s_x_max = float(spectrogram(stft(synth_bumps(mix.bumps), config)).values.max())

    t_x = stft(mix.x, config)
    t_y = stft(mix.y, config)
    report = cross_term_report(t_x, t_y)
    s_z = spectrogram(stft(mix.z, config)).values
    recomposed = spectrogram(t_x).values + spectrogram(t_y).values + report.grid
    identity_err = float(np.max(np.abs(s_z - recomposed)))

    analytic_deriv = float(np.pi / (2.0 * half_span))
    deriv_rel_err = abs(bounds.window_derivative_max - analytic_deriv) / analytic_deriv
    ratio = bounds.quadratic_term_bound / bounds.linear_term_bound
    expected_ratio = (4.0 / 3.0) * float(np.pi) * mix.bumps.bump_half_width

    checks = {
        "support_ok": bounds.support_ok,
        "additivity_ok": gap <= 1e-12 * s_x_max,
        "derivative_ok": deriv_rel_err <= 1e-6,
        "bound_ratio_ok": abs(ratio - expected_ratio) <= 1e-12 * expected_ratio,
        "identity_ok": identity_err <= 1e-12 * float(s_z.max()),
    }
    all_ok = all(checks.values())

    lines = [
        f"seed={args.seed}",
        f"bump_half_width={mix.bumps.bump_half_width!r}",
        f"window_half_span={half_span!r}",
        f"min_spacing={mix.bumps.min_spacing!r}",
        *(f"{name}={str(value).lower()}" for name, value in checks.items()),
        f"additivity_gap={gap!r}",
        f"additivity_gap_rel={gap / s_x_max!r}",
        f"window_derivative_max={bounds.window_derivative_max!r}",
        f"window_derivative_max_analytic={analytic_deriv!r}",
        f"linear_term_bound={bounds.linear_term_bound!r}",
        f"quadratic_term_bound={bounds.quadratic_term_bound!r}",
        f"bound_ratio={ratio!r}",
        f"cross_rel_fro={report.rel_fro!r}",
        f"cross_rel_max={report.rel_max!r}",
        f"cross_max_abs={report.max_abs!r}",
        f"identity_max_abs_err={identity_err!r}",
        f"all_ok={str(all_ok).lower()}",
    ]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
    if args.cross_term_csv is not None:
        args.cross_term_csv.parent.mkdir(parents=True, exist_ok=True)
        matrix_to_csv(report.grid, config, args.cross_term_csv)
    return 0 if all_ok else 2


def _cmd_render(args: argparse.Namespace) -> int:
    grid = read_grid(args.input)
    opts = RenderOptions(db_floor=args.db_floor, width=args.width, height=args.height)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    render_spectrogram(grid, opts, args.out)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "separate": _cmd_separate,
    "nmf": _cmd_nmf,
    "diagnose": _cmd_diagnose,
    "render": _cmd_render,
}


def run_cli(argv: list[str] | None = None) -> int:
    """Parse and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:
        print(f"specsep: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
