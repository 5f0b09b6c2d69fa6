"""Grayscale PNG rendering of spectrograms on a decibel scale."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .transform import SpectrogramGrid


@dataclass(frozen=True)
class RenderOptions:
    """Rendering controls: dB floor and optional output size."""

    db_floor: float = -80.0
    width: int | None = None
    height: int | None = None
    colormap: str = "grayscale"

    def __post_init__(self) -> None:
        if not self.db_floor < 0:
            raise ValueError(f"db_floor must be negative, got {self.db_floor}")
        if self.colormap != "grayscale":
            raise ValueError(f"unsupported colormap: {self.colormap!r}")
        for name, value in (("width", self.width), ("height", self.height)):
            if value is not None and value < 1:
                raise ValueError(f"{name} must be positive, got {value}")


def render_spectrogram(grid: SpectrogramGrid, opts: RenderOptions, path: str | Path) -> None:
    """Write an 8-bit grayscale PNG, frequency upward and time rightward.

    Pixels map ``10*log10(S/max(S))`` linearly from ``db_floor`` (black) to
    0 dB (white); an all-zero grid renders all black. Scaling the grid by any
    positive constant leaves the image unchanged.
    """
    values = grid.values
    peak = values.max()
    if peak <= 0.0:
        levels = np.zeros(values.shape, dtype=np.uint8)
    else:
        with np.errstate(divide="ignore"):
            db = 10.0 * np.log10(values / peak)
        unit = np.clip((db - opts.db_floor) / (-opts.db_floor), 0.0, 1.0)
        # Floor so only exact 0 dB cells hit full white.
        levels = np.floor(unit * 255.0).astype(np.uint8)
    image = Image.fromarray(np.flipud(levels), mode="L")
    width = opts.width or values.shape[1]
    height = opts.height or values.shape[0]
    if (width, height) != image.size:
        image = image.resize((width, height), Image.NEAREST)
    image.save(Path(path), format="PNG")
