"""Turn image pairs into feature and region-label files for matching tasks.

For each pair of images this module computes a dense patch descriptor grid
per image, clusters the two grids jointly into K classes so that class ids
mean the same thing on both sides, upsamples the patch labels to pixels,
and writes four binary files plus a JSON pair manifest. Runs are
deterministic: the clustering is seeded and the descriptors are pure
functions of the pixels.
"""

from __future__ import annotations

import json
import math
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.cluster.vq import kmeans2

from .backbone import Backbone, get_backbone
from .formats import write_vgft, write_vglm

__all__ = [
    "ExtractionConfig",
    "extract_pair",
    "extract_pairs",
    "joint_patch_labels",
    "upsample_labels",
]

_KMEANS_ITER = 25


@dataclass(frozen=True)
class ExtractionConfig:
    """Settings for one extraction batch.

    backbone picks the descriptor extractor; patch_size must equal that
    backbone's native grid. k is the number of shared region classes per
    pair. pairs lists (image1, image2) input paths and out_dir receives
    every emitted file.
    """

    backbone: str = "colorgrad14"
    patch_size: int = 14
    k: int = 5
    pairs: tuple = ()
    out_dir: str = "."
    seed: int = 0

    def __post_init__(self):
        bb = get_backbone(self.backbone)
        if not isinstance(self.patch_size, int) or isinstance(self.patch_size, bool):
            raise TypeError(f"patch_size must be an int, got {self.patch_size!r}")
        if self.patch_size != bb.patch_size:
            raise ValueError(
                f"patch_size {self.patch_size} does not match backbone "
                f"{bb.name!r} (native patch {bb.patch_size})"
            )
        if not isinstance(self.k, int) or isinstance(self.k, bool):
            raise TypeError(f"k must be an int, got {self.k!r}")
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise TypeError(f"seed must be an int, got {self.seed!r}")
        norm = []
        for pair in self.pairs:
            a, b = pair
            norm.append((str(a), str(b)))
        object.__setattr__(self, "pairs", tuple(norm))
        object.__setattr__(self, "out_dir", str(self.out_dir))


def _load_rgb(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def joint_patch_labels(
    feats1: np.ndarray, feats2: np.ndarray, k: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Cluster two descriptor grids together into k classes.

    Concatenating both grids before clustering makes class ids directly
    comparable across the pair. Features are scaled to unit deviation per
    component first so no single statistic dominates the distance.
    """
    d = feats1.shape[2]
    x = np.concatenate(
        [feats1.reshape(-1, d), feats2.reshape(-1, d)]
    ).astype(np.float64)
    std = x.std(axis=0)
    std[std == 0] = 1.0
    _, labels = kmeans2(
        x / std, k, iter=_KMEANS_ITER, minit="++", rng=seed
    )
    n1 = feats1.shape[0] * feats1.shape[1]
    l1 = labels[:n1].reshape(feats1.shape[:2]).astype(np.uint16)
    l2 = labels[n1:].reshape(feats2.shape[:2]).astype(np.uint16)
    return l1, l2


def upsample_labels(patch_labels: np.ndarray, patch_size: int, h: int, w: int) -> np.ndarray:
    """Expand patch labels to pixels: every pixel takes its patch's label."""
    gh, gw = patch_labels.shape
    if gh != math.ceil(h / patch_size) or gw != math.ceil(w / patch_size):
        raise ValueError(
            f"patch grid {gh}x{gw} does not cover {h}x{w} at patch {patch_size}"
        )
    full = np.repeat(np.repeat(patch_labels, patch_size, axis=0), patch_size, axis=1)
    return np.ascontiguousarray(full[:h, :w])


def _side_names(image1, image2) -> tuple[str, str]:
    s1, s2 = Path(image1).stem, Path(image2).stem
    if s1 == s2:
        s1, s2 = f"{s1}-1", f"{s2}-2"
    return s1, s2


def extract_pair(image1, image2, cfg: ExtractionConfig) -> dict:
    """Process one image pair and return its pair-manifest record.

    Writes, into cfg.out_dir: a copy of each input image, one .vgft
    descriptor file per image, and one .vglm label file per image. The
    returned record references everything by name relative to out_dir.
    """
    bb = get_backbone(cfg.backbone)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    px1, px2 = _load_rgb(image1), _load_rgb(image2)
    f1, f2 = bb.features(px1), bb.features(px2)
    l1, l2 = joint_patch_labels(f1, f2, cfg.k, cfg.seed)
    pix1 = upsample_labels(l1, cfg.patch_size, *px1.shape[:2])
    pix2 = upsample_labels(l2, cfg.patch_size, *px2.shape[:2])

    s1, s2 = _side_names(image1, image2)
    name1 = s1 + Path(image1).suffix
    name2 = s2 + Path(image2).suffix
    shutil.copyfile(image1, out / name1)
    shutil.copyfile(image2, out / name2)
    write_vgft(out / f"{s1}.vgft", f1)
    write_vgft(out / f"{s2}.vgft", f2)
    write_vglm(out / f"{s1}.vglm", pix1, cfg.k)
    write_vglm(out / f"{s2}.vglm", pix2, cfg.k)

    return {
        "image1": name1,
        "image2": name2,
        "featuremap1": f"{s1}.vgft",
        "featuremap2": f"{s2}.vgft",
        "labelmap1": f"{s1}.vglm",
        "labelmap2": f"{s2}.vglm",
        "patch_size": cfg.patch_size,
    }


def extract_pairs(cfg: ExtractionConfig, manifest_name: str = "pairs.json") -> list[dict]:
    """Process every pair in cfg.pairs and write the pair manifest.

    Pairs are independent; records land in the manifest in input order.
    Returns the records.
    """
    records = [extract_pair(a, b, cfg) for a, b in cfg.pairs]
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / manifest_name, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")
    return records
