"""Unit checks for the descriptor backbone, file writers, and batch driver."""

import struct

import numpy as np
import pytest
from PIL import Image

from vgextract import (
    BACKBONES,
    BackboneError,
    ExtractionConfig,
    extract_pair,
    extract_pairs,
    get_backbone,
    joint_patch_labels,
    upsample_labels,
    write_vgft,
    write_vglm,
)

_HEADER = struct.Struct("<HIII")


def _tile_image(rng, width, height, tile=16):
    th = -(-height // tile)
    tw = -(-width // tile)
    tiles = rng.integers(0, 256, size=(th, tw, 3), dtype=np.uint8)
    return np.repeat(np.repeat(tiles, tile, axis=0), tile, axis=1)[:height, :width]


def _save(path, pixels):
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(pixels).save(path)
    return path


# ---------------------------------------------------------------------------
# configuration


def test_config_defaults_are_valid():
    cfg = ExtractionConfig()
    assert cfg.backbone == "colorgrad14"
    assert cfg.patch_size == 14
    assert cfg.k == 5
    assert cfg.seed == 0


def test_config_rejects_unknown_backbone():
    with pytest.raises(BackboneError, match="resnet50"):
        ExtractionConfig(backbone="resnet50")


def test_config_rejects_patch_size_mismatch():
    with pytest.raises(ValueError, match="does not match backbone"):
        ExtractionConfig(backbone="colorgrad14", patch_size=16)
    # the other registered backbone accepts its own native patch
    cfg = ExtractionConfig(backbone="colorgrad16", patch_size=16)
    assert cfg.patch_size == 16


@pytest.mark.parametrize("k", [1, 0, -3])
def test_config_rejects_too_few_classes(k):
    with pytest.raises(ValueError, match="at least 2"):
        ExtractionConfig(k=k)


@pytest.mark.parametrize("k", [True, 5.0, "5"])
def test_config_rejects_non_int_k(k):
    with pytest.raises(TypeError):
        ExtractionConfig(k=k)


def test_config_rejects_bool_seed():
    with pytest.raises(TypeError):
        ExtractionConfig(seed=True)


def test_config_normalizes_pairs_to_string_tuples(tmp_path):
    cfg = ExtractionConfig(pairs=[(tmp_path / "a.png", tmp_path / "b.png")])
    assert cfg.pairs == ((str(tmp_path / "a.png"), str(tmp_path / "b.png")),)


# ---------------------------------------------------------------------------
# backbone


def test_registry_lists_native_patch_sizes():
    assert get_backbone("colorgrad14").patch_size == 14
    assert get_backbone("colorgrad16").patch_size == 16
    for bb in BACKBONES.values():
        assert bb.dim == 16


def test_feature_grid_uses_ceiling_division():
    bb = get_backbone("colorgrad14")
    f = bb.features(np.zeros((224, 224, 3), dtype=np.uint8))
    assert f.shape == (16, 16, 16)
    assert f.dtype == np.float32
    f = bb.features(np.zeros((90, 71, 3), dtype=np.uint8))
    assert f.shape == (7, 6, 16)  # ceil(90/14), ceil(71/14)


def test_features_are_deterministic_and_content_sensitive():
    rng = np.random.default_rng(4)
    img = _tile_image(rng, 100, 80)
    bb = get_backbone("colorgrad14")
    a = bb.features(img)
    b = bb.features(img.copy())
    assert np.array_equal(a, b)
    other = bb.features(_tile_image(rng, 100, 80))
    assert not np.array_equal(a, other)


def test_features_reject_non_rgb_input():
    bb = get_backbone("colorgrad14")
    with pytest.raises(ValueError, match="H, W, 3"):
        bb.features(np.zeros((50, 50), dtype=np.uint8))


def test_flat_patch_descriptor_is_color_mean_and_zeros():
    bb = get_backbone("colorgrad16")
    img = np.full((16, 16, 3), 200, dtype=np.uint8)
    f = bb.features(img)
    assert f.shape == (1, 1, 16)
    vec = f[0, 0]
    assert np.allclose(vec[:3], 200 / 255)
    # float32 moments of a constant block leave only rounding residue
    assert np.allclose(vec[3:], 0.0, atol=1e-5)


# ---------------------------------------------------------------------------
# clustering and upsampling


def test_joint_labels_share_ids_across_identical_grids():
    rng = np.random.default_rng(7)
    feats = rng.normal(size=(6, 8, 16)).astype(np.float32)
    l1, l2 = joint_patch_labels(feats, feats.copy(), k=3, seed=1)
    assert l1.shape == (6, 8) and l2.shape == (6, 8)
    assert l1.dtype == np.uint16 and l2.dtype == np.uint16
    # identical descriptors must land in identical clusters
    assert np.array_equal(l1, l2)
    assert int(l1.max()) < 3


def test_joint_labels_are_seeded():
    rng = np.random.default_rng(8)
    f1 = rng.normal(size=(5, 5, 16)).astype(np.float32)
    f2 = rng.normal(size=(4, 7, 16)).astype(np.float32)
    a = joint_patch_labels(f1, f2, k=4, seed=9)
    b = joint_patch_labels(f1, f2, k=4, seed=9)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_upsample_assigns_every_pixel_its_patch_label():
    patch = np.arange(6, dtype=np.uint16).reshape(2, 3)
    full = upsample_labels(patch, 4, 7, 10)  # ragged: 7 = 4+3, 10 = 4+4+2
    assert full.shape == (7, 10)
    oracle = np.repeat(np.repeat(patch, 4, axis=0), 4, axis=1)[:7, :10]
    assert np.array_equal(full, oracle)
    for y in range(7):
        for x in range(10):
            assert full[y, x] == patch[y // 4, x // 4]


def test_upsample_rejects_grid_that_does_not_cover():
    with pytest.raises(ValueError, match="does not cover"):
        upsample_labels(np.zeros((2, 3), dtype=np.uint16), 4, 20, 10)


# ---------------------------------------------------------------------------
# file writers


def test_vgft_header_and_payload(tmp_path):
    feats = np.random.default_rng(0).normal(size=(3, 5, 7)).astype(np.float32)
    path = tmp_path / "x.vgft"
    write_vgft(path, feats)
    data = path.read_bytes()
    assert data[:4] == b"VGFT"
    assert _HEADER.unpack_from(data, 4) == (1, 3, 5, 7)
    body = np.frombuffer(data[18:], dtype="<f4").reshape(3, 5, 7)
    assert np.array_equal(body, feats)


def test_vgft_rejects_non_finite(tmp_path):
    feats = np.zeros((2, 2, 2), dtype=np.float32)
    feats[0, 0, 0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        write_vgft(tmp_path / "x.vgft", feats)


def test_vglm_header_payload_and_range_check(tmp_path):
    labels = np.array([[0, 1, 2], [2, 1, 0]], dtype=np.uint16)
    path = tmp_path / "x.vglm"
    write_vglm(path, labels, num_classes=3)
    data = path.read_bytes()
    assert data[:4] == b"VGLM"
    assert _HEADER.unpack_from(data, 4) == (1, 2, 3, 3)
    assert np.array_equal(
        np.frombuffer(data[18:], dtype="<u2").reshape(2, 3), labels
    )
    with pytest.raises(ValueError, match=r"\[0, 2\)"):
        write_vglm(tmp_path / "y.vglm", labels, num_classes=2)


# ---------------------------------------------------------------------------
# extract_pair and extract_pairs


@pytest.fixture()
def synthetic_pair(tmp_path):
    rng = np.random.default_rng(12)
    src = _tile_image(rng, 200, 150, tile=28)
    a = _save(tmp_path / "in" / "left.png", src[:, :160])
    b = _save(tmp_path / "in" / "right.png", src[:, 40:])
    return a, b


def test_extract_pair_writes_all_six_files(tmp_path, synthetic_pair):
    a, b = synthetic_pair
    cfg = ExtractionConfig(k=3, out_dir=tmp_path / "out")
    rec = extract_pair(a, b, cfg)
    assert sorted(rec) == [
        "featuremap1", "featuremap2", "image1", "image2",
        "labelmap1", "labelmap2", "patch_size",
    ]
    assert rec["patch_size"] == 14
    for key in ("image1", "image2", "featuremap1", "featuremap2", "labelmap1", "labelmap2"):
        target = tmp_path / "out" / rec[key]
        assert target.is_file(), key
    # copied images are byte-identical to the inputs
    assert (tmp_path / "out" / rec["image1"]).read_bytes() == a.read_bytes()
    assert (tmp_path / "out" / rec["image2"]).read_bytes() == b.read_bytes()


def test_label_files_declare_k_classes_with_ids_below_k(tmp_path, synthetic_pair):
    a, b = synthetic_pair
    cfg = ExtractionConfig(k=4, out_dir=tmp_path / "out")
    rec = extract_pair(a, b, cfg)
    for key in ("labelmap1", "labelmap2"):
        data = (tmp_path / "out" / rec[key]).read_bytes()
        version, h, w, k = _HEADER.unpack_from(data, 4)
        assert k == 4
        labels = np.frombuffer(data[18:], dtype="<u2")
        assert labels.size == h * w
        assert int(labels.max()) < 4


def test_label_grid_matches_image_dimensions(tmp_path, synthetic_pair):
    a, b = synthetic_pair
    cfg = ExtractionConfig(k=3, out_dir=tmp_path / "out")
    rec = extract_pair(a, b, cfg)
    with Image.open(a) as im:
        w1, h1 = im.size
    data = (tmp_path / "out" / rec["labelmap1"]).read_bytes()
    assert _HEADER.unpack_from(data, 4)[1:3] == (h1, w1)
    fdata = (tmp_path / "out" / rec["featuremap1"]).read_bytes()
    gh, gw = _HEADER.unpack_from(fdata, 4)[1:3]
    assert (gh, gw) == (-(-h1 // 14), -(-w1 // 14))


def test_same_stem_inputs_get_disambiguated_names(tmp_path):
    rng = np.random.default_rng(5)
    img = _tile_image(rng, 120, 90)
    a = _save(tmp_path / "in" / "photo.png", img)
    other = tmp_path / "in2"
    other.mkdir()
    b = _save(other / "photo.png", img)
    cfg = ExtractionConfig(k=2, out_dir=tmp_path / "out")
    rec = extract_pair(a, b, cfg)
    assert rec["image1"] == "photo-1.png"
    assert rec["image2"] == "photo-2.png"


def test_identical_images_produce_identical_feature_files(tmp_path):
    rng = np.random.default_rng(6)
    img = _tile_image(rng, 140, 98)
    a = _save(tmp_path / "in" / "same-a.png", img)
    b = _save(tmp_path / "in" / "same-b.png", img)
    cfg = ExtractionConfig(k=3, out_dir=tmp_path / "out")
    rec = extract_pair(a, b, cfg)
    f1 = (tmp_path / "out" / rec["featuremap1"]).read_bytes()
    f2 = (tmp_path / "out" / rec["featuremap2"]).read_bytes()
    assert f1 == f2
    l1 = (tmp_path / "out" / rec["labelmap1"]).read_bytes()
    l2 = (tmp_path / "out" / rec["labelmap2"]).read_bytes()
    assert l1 == l2


def test_extract_pairs_writes_manifest_and_is_deterministic(tmp_path, synthetic_pair):
    a, b = synthetic_pair
    trees = []
    for label in ("one", "two"):
        out = tmp_path / label
        cfg = ExtractionConfig(k=3, pairs=((a, b),), out_dir=out, seed=2)
        records = extract_pairs(cfg)
        assert len(records) == 1
        assert (out / "pairs.json").is_file()
        trees.append({
            p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()
        })
    assert trees[0] == trees[1]
    assert len(trees[0]) == 7  # 2 images + 2 vgft + 2 vglm + manifest


def test_missing_input_image_raises(tmp_path):
    cfg = ExtractionConfig(out_dir=tmp_path / "out")
    with pytest.raises(FileNotFoundError):
        extract_pair(tmp_path / "absent.png", tmp_path / "absent2.png", cfg)
