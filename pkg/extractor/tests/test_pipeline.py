"""End-to-end checks on real photographs against the downstream consumer.

Five photo pairs (overlapping crops of bundled scikit-image photographs)
go through extraction, then every output must load and validate through
the consuming package's readers, and correspondence generation must run
on at least four of the five pairs without running out of region patches.
"""

import math

import numpy as np
import pytest
from PIL import Image
from skimage import data as skdata

from sslinstruct import RegionTooSmall, gen_corr_sample, load_pair, load_pair_manifest, stream
from vgextract import ExtractionConfig, extract_pairs

_PHOTOS = ("astronaut", "chelsea", "coffee", "rocket", "immunohistochemistry")
_K = 5
_SEED = 0


@pytest.fixture(scope="module")
def photo_pairs(tmp_path_factory):
    """Each photo becomes two overlapping 85% crops saved as PNG."""
    root = tmp_path_factory.mktemp("photos")
    pairs = []
    for name in _PHOTOS:
        img = getattr(skdata, name)()
        h, w = img.shape[:2]
        ch, cw = int(h * 0.85), int(w * 0.85)
        a = root / f"{name}-a.png"
        b = root / f"{name}-b.png"
        Image.fromarray(img[:ch, :cw]).save(a)
        Image.fromarray(img[h - ch :, w - cw :]).save(b)
        pairs.append((a, b))
    return pairs


@pytest.fixture(scope="module")
def extracted(photo_pairs, tmp_path_factory):
    out = tmp_path_factory.mktemp("extracted")
    cfg = ExtractionConfig(
        k=_K,
        pairs=tuple((str(a), str(b)) for a, b in photo_pairs),
        out_dir=out,
        seed=_SEED,
    )
    records = extract_pairs(cfg)
    return out, records


def test_five_real_pairs_pass_consumer_validation(extracted):
    out, records = extracted
    assert len(records) == 5
    pairs = load_pair_manifest(out / "pairs.json")
    for pair in pairs:
        loaded = load_pair(pair, data_root=out)  # raises SchemaError on any mismatch
        for img, fmap, lmap in (
            (loaded.image1, loaded.fmap1, loaded.lmap1),
            (loaded.image2, loaded.fmap2, loaded.lmap2),
        ):
            assert fmap.grid_height == math.ceil(img.height / pair.patch_size)
            assert fmap.grid_width == math.ceil(img.width / pair.patch_size)
            assert (lmap.height, lmap.width) == (img.height, img.width)
            assert lmap.num_classes == _K
            assert int(lmap.labels.max()) < _K


def test_correspondence_generation_runs_on_most_pairs(extracted):
    out, _ = extracted
    pairs = load_pair_manifest(out / "pairs.json")
    generated = 0
    for i, pair in enumerate(pairs):
        try:
            g = gen_corr_sample(pair, stream(1, "correspondence", i), data_root=out)
        except RegionTooSmall:
            continue
        s = g.sample
        assert s.response in ("0", "1", "2")
        assert s.meta["candidates"][int(s.response)] == s.meta["target"]
        assert len(g.images) == 1
        generated += 1
    assert generated >= 4, f"only {generated}/5 pairs produced a sample"


def test_extraction_is_reproducible_on_real_photos(photo_pairs, tmp_path):
    pair = tuple(str(p) for p in photo_pairs[0])
    trees = []
    for label in ("r1", "r2"):
        out = tmp_path / label
        extract_pairs(ExtractionConfig(k=_K, pairs=(pair,), out_dir=out, seed=_SEED))
        trees.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert trees[0] == trees[1]


def test_shared_class_ids_describe_both_views(extracted):
    """The dominant class of each pair covers patches on both sides, which
    is what makes a cross-view matching question possible at all."""
    out, _ = extracted
    pairs = load_pair_manifest(out / "pairs.json")
    for pair in pairs:
        loaded = load_pair(pair, data_root=out)
        ids1 = set(np.unique(loaded.lmap1.labels).tolist())
        ids2 = set(np.unique(loaded.lmap2.labels).tolist())
        assert ids1 & ids2, "no class id appears in both views"
