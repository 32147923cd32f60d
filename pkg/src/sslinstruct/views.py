"""Augmented-view generation: tiny random crops with flips and color jitter.

Each view is produced from its own derived random stream, so view i of a given
image and seed is always the same image regardless of how many views are
requested or in what order they are consumed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .imaging import CropLog, ImageBuffer, JitterLog, color_jitter, hflip, random_resized_crop
from .rng import stream


@dataclass
class ViewConfig:
    n_views: int
    area_range: tuple[float, float] = (0.001, 0.08)
    ar_range: tuple[float, float] = (0.75, 4 / 3)
    out_size: int = 224
    flip_prob: float = 0.5
    brightness: tuple[float, float] = (0.75, 1.25)
    contrast: tuple[float, float] = (0.75, 1.25)
    saturation: tuple[float, float] = (0.70, 1.40)
    hue: tuple[float, float] = (-0.05, 0.05)

    def __post_init__(self):
        if self.n_views < 1:
            raise ValueError("n_views must be >= 1")
        if self.out_size < 1:
            raise ValueError("out_size must be positive")
        if not (0.0 <= self.flip_prob <= 1.0):
            raise ValueError("flip_prob must be in [0, 1]")


@dataclass
class ViewParams:
    """Everything drawn for one view, for logs and replay."""

    index: int
    crop: CropLog
    flipped: bool
    jitter: JitterLog

    def to_dict(self) -> dict:
        return asdict(self)


def gen_views(img: ImageBuffer, cfg: ViewConfig, seed: int = 0):
    """Yield ``cfg.n_views`` (view, ViewParams) pairs.

    Per view the draw order is fixed: crop rectangle, flip coin (always drawn,
    even when flip_prob is 0 or 1), then the four jitter factors.
    """
    for i in range(cfg.n_views):
        rng = stream(seed, "views", i)
        crop_log: list[CropLog] = []
        jitter_log: list[JitterLog] = []
        view = random_resized_crop(
            img, rng, cfg.area_range, cfg.ar_range, cfg.out_size, log=crop_log
        )
        flipped = bool(rng.random() < cfg.flip_prob)
        if flipped:
            view = hflip(view)
        view = color_jitter(
            view, rng, cfg.brightness, cfg.contrast, cfg.saturation, cfg.hue, log=jitter_log
        )
        yield view, ViewParams(index=i, crop=crop_log[0], flipped=flipped, jitter=jitter_log[0])
