"""Consistent spectrogram separation of pulse-train + AM-FM mixtures.

Library surface: STFT analysis/synthesis with a consistency projector
(:mod:`specsep.transform`), synthetic mixture generators
(:mod:`specsep.synthesis`), the alternating separation solver
(:mod:`specsep.separation`), a rank-2 NMF baseline (:mod:`specsep.nmf`),
separability diagnostics (:mod:`specsep.diagnostics`) and file I/O plus a
CLI (:mod:`specsep.wavio`, :mod:`specsep.gridio`, :mod:`specsep.render`,
:mod:`specsep.cli`).
"""

from .diagnostics import (
    CrossTermReport,
    RemainderBounds,
    additivity_gap,
    check_support_condition,
    cross_term_report,
    remainder_bounds,
)
from .gridio import read_grid, write_grid
from .nmf import NmfResult, nmf_factorize, nmf_residual
from .render import RenderOptions, render_spectrogram
from .separation import (
    SeparationParams,
    SeparationResult,
    objective,
    separate,
    update_smooth,
    update_sparse,
)
from .synthesis import (
    AmFmSpec,
    BumpsSpec,
    PresetMixture,
    make_synthetic_preset,
    sample_impulse_times,
    synth_amfm,
    synth_bumps,
)
from .transform import (
    ComplexTFGrid,
    Signal,
    SpectrogramGrid,
    StftConfig,
    combine_magnitude_phase,
    default_stft_config,
    istft,
    make_window,
    project_consistent,
    spectrogram,
    stft,
)
from .wavio import load_wav, save_wav

__version__ = "0.1.0"

__all__ = [
    "AmFmSpec",
    "BumpsSpec",
    "ComplexTFGrid",
    "CrossTermReport",
    "NmfResult",
    "PresetMixture",
    "RemainderBounds",
    "RenderOptions",
    "SeparationParams",
    "SeparationResult",
    "Signal",
    "SpectrogramGrid",
    "StftConfig",
    "additivity_gap",
    "check_support_condition",
    "combine_magnitude_phase",
    "cross_term_report",
    "default_stft_config",
    "istft",
    "load_wav",
    "make_synthetic_preset",
    "make_window",
    "nmf_factorize",
    "nmf_residual",
    "objective",
    "project_consistent",
    "read_grid",
    "remainder_bounds",
    "render_spectrogram",
    "sample_impulse_times",
    "save_wav",
    "separate",
    "spectrogram",
    "stft",
    "synth_amfm",
    "synth_bumps",
    "update_smooth",
    "update_sparse",
    "write_grid",
    "__version__",
]
