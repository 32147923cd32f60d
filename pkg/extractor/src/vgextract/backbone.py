"""Dense per-patch descriptors from plain image statistics.

A backbone tiles an image into patch_size squares (ceiling grid, so ragged
right and bottom edges form partial patches) and computes one fixed-length
float32 descriptor per patch: color moments plus a gradient orientation
histogram. Pure numpy on the raw pixels, so the same image always yields
the same floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Backbone", "BackboneError", "BACKBONES", "get_backbone"]

_ORIENT_BINS = 8


class BackboneError(Exception):
    """No backbone under the requested identifier."""


@dataclass(frozen=True)
class Backbone:
    """A named descriptor extractor with a fixed patch grid and width."""

    name: str
    patch_size: int
    dim: int

    def features(self, pixels: np.ndarray) -> np.ndarray:
        """Descriptor grid for an (H, W, 3) uint8 image.

        Returns (ceil(H/patch_size), ceil(W/patch_size), dim) float32. Each
        patch contributes its RGB means and deviations, an orientation
        histogram of luminance gradients weighted by magnitude, the mean
        gradient magnitude, and the luminance deviation.
        """
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ValueError(f"expected an (H, W, 3) image, got {pixels.shape}")
        ps = self.patch_size
        h, w = pixels.shape[:2]
        gh, gw = math.ceil(h / ps), math.ceil(w / ps)

        rgb = pixels.astype(np.float32) / 255.0
        lum = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
        gy, gx = np.gradient(lum)
        mag = np.hypot(gx, gy)
        ang = np.arctan2(gy, gx)  # [-pi, pi]
        bins = np.clip(
            ((ang + np.pi) * (_ORIENT_BINS / (2.0 * np.pi))).astype(np.int64),
            0,
            _ORIENT_BINS - 1,
        )

        out = np.zeros((gh, gw, self.dim), dtype=np.float32)
        for r in range(gh):
            ys = slice(r * ps, min((r + 1) * ps, h))
            for c in range(gw):
                xs = slice(c * ps, min((c + 1) * ps, w))
                block = rgb[ys, xs]
                m = mag[ys, xs].ravel()
                hist = np.bincount(
                    bins[ys, xs].ravel(), weights=m, minlength=_ORIENT_BINS
                )
                total = hist.sum()
                if total > 0:
                    hist = hist / total
                vec = np.concatenate(
                    [
                        block.mean(axis=(0, 1)),
                        block.std(axis=(0, 1)),
                        hist,
                        [m.mean(), lum[ys, xs].std()],
                    ]
                )
                out[r, c] = vec
        return out


BACKBONES = {
    b.name: b
    for b in (
        Backbone("colorgrad14", patch_size=14, dim=6 + _ORIENT_BINS + 2),
        Backbone("colorgrad16", patch_size=16, dim=6 + _ORIENT_BINS + 2),
    )
}


def get_backbone(name: str) -> Backbone:
    try:
        return BACKBONES[name]
    except KeyError:
        known = ", ".join(sorted(BACKBONES))
        raise BackboneError(f"unknown backbone {name!r}, available: {known}") from None
