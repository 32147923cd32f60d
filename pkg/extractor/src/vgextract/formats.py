"""Writers for the binary feature and label file formats.

Feature map (.vgft):  b"VGFT", <HIII> = version(1), h, w, D, then h*w*D
    float32 little-endian values, row-major with the feature dim innermost.
Label map   (.vglm):  b"VGLM", <HIII> = version(1), H, W, K, then H*W uint16
    little-endian labels in row-major order, each < K.
"""

from __future__ import annotations

import struct

import numpy as np

__all__ = ["write_vgft", "write_vglm"]

VGFT_MAGIC = b"VGFT"
VGLM_MAGIC = b"VGLM"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<HIII")


def write_vgft(path, features: np.ndarray) -> None:
    """Write an (h, w, D) float array as a feature map file."""
    f = np.ascontiguousarray(features, dtype=np.float32)
    if f.ndim != 3 or min(f.shape) < 1:
        raise ValueError(f"features must be (h, w, D), got {f.shape}")
    if not np.isfinite(f).all():
        raise ValueError("features contain non-finite values")
    h, w, d = f.shape
    with open(path, "wb") as fh:
        fh.write(VGFT_MAGIC)
        fh.write(_HEADER.pack(FORMAT_VERSION, h, w, d))
        fh.write(f.astype("<f4", copy=False).tobytes(order="C"))


def write_vglm(path, labels: np.ndarray, num_classes: int) -> None:
    """Write an (H, W) integer array as a label map file with K classes."""
    lab = np.ascontiguousarray(labels)
    if lab.ndim != 2 or min(lab.shape) < 1:
        raise ValueError(f"labels must be (H, W), got {lab.shape}")
    if not (1 <= num_classes <= 0xFFFF):
        raise ValueError(f"num_classes out of range: {num_classes}")
    if int(lab.min()) < 0 or int(lab.max()) >= num_classes:
        raise ValueError(
            f"labels must lie in [0, {num_classes}), got "
            f"[{int(lab.min())}, {int(lab.max())}]"
        )
    h, w = lab.shape
    with open(path, "wb") as fh:
        fh.write(VGLM_MAGIC)
        fh.write(_HEADER.pack(FORMAT_VERSION, h, w, num_classes))
        fh.write(lab.astype("<u2").tobytes(order="C"))
