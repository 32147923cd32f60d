"""Shared builders: synthetic images, corpora, and feature/label pairs.

Everything here is seeded and pure, so fixtures can be rebuilt identically
from any test. The acceptance tests additionally register one summary line
per criterion, printed after the run by pytest_terminal_summary.
"""

from __future__ import annotations

import numpy as np
import pytest

from sslinstruct import (
    FeatureMap,
    ImageBuffer,
    PairData,
    PairRecord,
    RegionLabelMap,
    save_png,
    write_feature_map,
    write_label_map,
)

# Eight colors pairwise >= 127 apart in RGB, none of them gray. Block images
# built from this palette always pass the grayscale filter and give the
# color-separation sampler plenty of acceptable draws.
PALETTE = np.array(
    [
        (255, 0, 0),
        (0, 255, 0),
        (0, 0, 255),
        (255, 255, 0),
        (255, 0, 255),
        (0, 255, 255),
        (255, 128, 0),
        (128, 0, 255),
    ],
    dtype=np.uint8,
)


def _block_pixels(rng: np.random.Generator, width: int, height: int, tile: int) -> np.ndarray:
    gh = -(-height // tile)
    gw = -(-width // tile)
    idx = rng.integers(0, len(PALETTE), size=(gh, gw))
    px = np.repeat(np.repeat(PALETTE[idx], tile, axis=0), tile, axis=1)
    return np.ascontiguousarray(px[:height, :width])


@pytest.fixture
def block_image():
    """Factory for tiled multi-color test images."""

    def make(seed: int = 0, width: int = 192, height: int = 144, tile: int = 24) -> ImageBuffer:
        return ImageBuffer(_block_pixels(np.random.default_rng(seed), width, height, tile))

    return make


@pytest.fixture
def noise_image():
    """Factory for uniform-noise RGB images."""

    def make(seed: int = 0, width: int = 64, height: int = 48) -> ImageBuffer:
        rng = np.random.default_rng(seed)
        return ImageBuffer(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))

    return make


@pytest.fixture
def write_corpus():
    """Factory writing a directory of seeded block-image PNGs."""

    def make(root, n: int, seed: int = 0, width: int = 128, height: int = 128, tile: int = 16):
        root.mkdir(parents=True, exist_ok=True)
        rng = np.random.default_rng(seed)
        for i in range(n):
            save_png(ImageBuffer(_block_pixels(rng, width, height, tile)), root / f"img-{i:04d}.png")
        return root

    return make


def build_pair_arrays(
    rng: np.random.Generator,
    gh1: int = 6,
    gw1: int = 6,
    gh2: int = 6,
    gw2: int = 6,
    ps: int = 8,
    num_classes: int = 3,
    dim: int = 8,
) -> dict:
    """Patch-aligned synthetic pair whose dominant class is usable.

    Label maps repeat a per-patch class grid, so the fixture knows every
    patch's class by construction (the ground truth the library must agree
    with). Grids are redrawn until the pixel-dominant class covers at least
    one patch of grid 1 and at least three of grid 2.
    """
    area = ps * ps
    while True:
        g1 = rng.integers(0, num_classes, size=(gh1, gw1))
        g2 = rng.integers(0, num_classes, size=(gh2, gw2))
        counts = [
            int((g1 == k).sum()) * area + int((g2 == k).sum()) * area
            for k in range(num_classes)
        ]
        dominant = max(range(num_classes), key=lambda k: (counts[k], -k))
        if (g1 == dominant).sum() >= 1 and (g2 == dominant).sum() >= 3:
            break
    img1 = ImageBuffer(
        rng.integers(0, 256, size=(gh1 * ps, gw1 * ps, 3), dtype=np.uint8)
    )
    img2 = ImageBuffer(
        rng.integers(0, 256, size=(gh2 * ps, gw2 * ps, 3), dtype=np.uint8)
    )
    fmap1 = FeatureMap(rng.standard_normal((gh1, gw1, dim)).astype(np.float32))
    fmap2 = FeatureMap(rng.standard_normal((gh2, gw2, dim)).astype(np.float32))
    lmap1 = RegionLabelMap(
        np.repeat(np.repeat(g1, ps, axis=0), ps, axis=1).astype(np.uint16), num_classes
    )
    lmap2 = RegionLabelMap(
        np.repeat(np.repeat(g2, ps, axis=0), ps, axis=1).astype(np.uint16), num_classes
    )
    return {
        "g1": g1,
        "g2": g2,
        "dominant": dominant,
        "img1": img1,
        "img2": img2,
        "fmap1": fmap1,
        "fmap2": fmap2,
        "lmap1": lmap1,
        "lmap2": lmap2,
        "ps": ps,
        "num_classes": num_classes,
    }


def pair_data_from_arrays(raw: dict, name: str = "pair") -> tuple[PairRecord, PairData]:
    """Wrap in-memory pair arrays for gen_corr_sample without touching disk."""
    rec = PairRecord(
        image1=f"{name}-img1.png",
        image2=f"{name}-img2.png",
        featuremap1=f"{name}-f1.vgft",
        featuremap2=f"{name}-f2.vgft",
        labelmap1=f"{name}-l1.vglm",
        labelmap2=f"{name}-l2.vglm",
        patch_size=raw["ps"],
    )
    data = PairData(
        record=rec,
        image1=raw["img1"],
        image2=raw["img2"],
        fmap1=raw["fmap1"],
        fmap2=raw["fmap2"],
        lmap1=raw["lmap1"],
        lmap2=raw["lmap2"],
    )
    return rec, data


def write_pair_files(root, raw: dict, name: str = "pair") -> PairRecord:
    """Materialize one synthetic pair as the six on-disk artifacts."""
    root.mkdir(parents=True, exist_ok=True)
    rec = PairRecord(
        image1=f"{name}-img1.png",
        image2=f"{name}-img2.png",
        featuremap1=f"{name}-f1.vgft",
        featuremap2=f"{name}-f2.vgft",
        labelmap1=f"{name}-l1.vglm",
        labelmap2=f"{name}-l2.vglm",
        patch_size=raw["ps"],
    )
    save_png(raw["img1"], root / rec.image1)
    save_png(raw["img2"], root / rec.image2)
    write_feature_map(root / rec.featuremap1, raw["fmap1"])
    write_feature_map(root / rec.featuremap2, raw["fmap2"])
    write_label_map(root / rec.labelmap1, raw["lmap1"])
    write_label_map(root / rec.labelmap2, raw["lmap2"])
    return rec


@pytest.fixture
def synth_pair(tmp_path):
    """Factory building one synthetic pair on disk; returns (record, root, raw)."""

    def make(seed: int = 0, name: str = "pair0", root=None, **kwargs):
        raw = build_pair_arrays(np.random.default_rng(seed), **kwargs)
        base = root if root is not None else tmp_path / "pairs"
        rec = write_pair_files(base, raw, name)
        return rec, base, raw

    return make


# ---------------------------------------------------------------------------
# acceptance reporting

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        _ACCEPTANCE_LINES.append(f"{status} {name}{suffix}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
