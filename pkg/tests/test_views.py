"""Tests for augmented-view generation (random crops, flips, color jitter)."""

import itertools
import json
from dataclasses import asdict

import pytest

from sslinstruct.imaging import (
    color_jitter,
    crop,
    hflip,
    random_resized_crop,
    resize_bilinear,
)
from sslinstruct.rng import stream
from sslinstruct.views import ViewConfig, ViewParams, gen_views

_IDENTITY_JITTER = dict(
    brightness=(1.0, 1.0),
    contrast=(1.0, 1.0),
    saturation=(1.0, 1.0),
    hue=(0.0, 0.0),
)


def test_default_config_values():
    cfg = ViewConfig(n_views=1)
    assert cfg.area_range == (0.001, 0.08)
    assert cfg.ar_range == (0.75, 4 / 3)
    assert cfg.out_size == 224
    assert cfg.flip_prob == 0.5
    assert cfg.brightness == (0.75, 1.25)
    assert cfg.contrast == (0.75, 1.25)
    assert cfg.saturation == (0.70, 1.40)
    assert cfg.hue == (-0.05, 0.05)


def test_config_validation():
    with pytest.raises(ValueError, match="n_views"):
        ViewConfig(n_views=0)
    with pytest.raises(ValueError, match="out_size"):
        ViewConfig(n_views=1, out_size=0)
    with pytest.raises(ValueError, match="flip_prob"):
        ViewConfig(n_views=1, flip_prob=1.5)


def test_views_have_requested_count_size_and_indices(block_image):
    img = block_image(seed=1, width=320, height=240)
    cfg = ViewConfig(n_views=5, out_size=64)
    out = list(gen_views(img, cfg, seed=0))
    assert len(out) == 5
    assert [p.index for _, p in out] == [0, 1, 2, 3, 4]
    for view, _ in out:
        assert (view.height, view.width) == (64, 64)
        assert view.pixels.dtype.name == "uint8"


def test_default_out_size_is_224(block_image):
    img = block_image(seed=2, width=320, height=240)
    view, _ = next(gen_views(img, ViewConfig(n_views=1), seed=3))
    assert (view.height, view.width) == (224, 224)


def test_crop_rectangles_respect_config(block_image):
    img = block_image(seed=3, width=400, height=300)
    cfg = ViewConfig(n_views=40, out_size=32)
    for _, p in gen_views(img, cfg, seed=1):
        c = p.crop
        assert not c.fallback
        assert 0 <= c.x and 0 <= c.y
        assert c.x + c.w <= img.width and c.y + c.h <= img.height
        assert c.area_fraction == (c.w * c.h) / (img.width * img.height)
        assert cfg.area_range[0] <= c.area_fraction <= cfg.area_range[1]
        assert cfg.ar_range[0] <= c.aspect <= cfg.ar_range[1]


def test_pure_crops_equal_resampled_logged_rectangle(block_image):
    img = block_image(seed=4, width=400, height=300)
    cfg = ViewConfig(n_views=6, out_size=48, flip_prob=0.0, **_IDENTITY_JITTER)
    for view, p in gen_views(img, cfg, seed=2):
        c = p.crop
        assert not p.flipped
        assert p.jitter == type(p.jitter)(1.0, 1.0, 1.0, 0.0)
        expect = resize_bilinear(crop(img, c.x, c.y, c.w, c.h), 48, 48)
        assert view.same_pixels(expect)


def test_flip_prob_one_mirrors_the_pure_crop(block_image):
    img = block_image(seed=5, width=300, height=260)
    plain = ViewConfig(n_views=4, out_size=40, flip_prob=0.0, **_IDENTITY_JITTER)
    mirrored = ViewConfig(n_views=4, out_size=40, flip_prob=1.0, **_IDENTITY_JITTER)
    for (v0, p0), (v1, p1) in zip(
        gen_views(img, plain, seed=6), gen_views(img, mirrored, seed=6)
    ):
        assert not p0.flipped and p1.flipped
        assert p0.crop == p1.crop
        assert v1.same_pixels(hflip(v0))


def test_flip_rate_is_roughly_half(block_image):
    img = block_image(seed=6, width=200, height=200)
    cfg = ViewConfig(n_views=400, out_size=8)
    flips = sum(p.flipped for _, p in gen_views(img, cfg, seed=7))
    assert 120 <= flips <= 280


def test_jitter_factors_stay_in_configured_ranges(block_image):
    img = block_image(seed=7, width=200, height=150)
    cfg = ViewConfig(
        n_views=30,
        out_size=8,
        brightness=(0.8, 0.9),
        contrast=(1.1, 1.2),
        saturation=(0.7, 0.75),
        hue=(0.02, 0.04),
    )
    for _, p in gen_views(img, cfg, seed=8):
        assert 0.8 <= p.jitter.brightness <= 0.9
        assert 1.1 <= p.jitter.contrast <= 1.2
        assert 0.7 <= p.jitter.saturation <= 0.75
        assert 0.02 <= p.jitter.hue <= 0.04


def test_generation_is_deterministic(block_image):
    img = block_image(seed=8, width=280, height=210)
    cfg = ViewConfig(n_views=5, out_size=32)
    a = list(gen_views(img, cfg, seed=9))
    b = list(gen_views(img, cfg, seed=9))
    for (va, pa), (vb, pb) in zip(a, b):
        assert pa == pb
        assert va.same_pixels(vb)


def test_view_streams_do_not_depend_on_n_views(block_image):
    img = block_image(seed=9, width=280, height=210)
    small = list(gen_views(img, ViewConfig(n_views=3, out_size=24), seed=10))
    big = itertools.islice(gen_views(img, ViewConfig(n_views=10, out_size=24), seed=10), 3)
    for (vs, ps), (vb, pb) in zip(small, big):
        assert ps == pb
        assert vs.same_pixels(vb)


def test_view_replays_from_its_own_stream(block_image):
    """View i is exactly what the documented draw order yields from stream i."""
    img = block_image(seed=10, width=260, height=200)
    cfg = ViewConfig(n_views=4, out_size=32)
    out = list(gen_views(img, cfg, seed=11))
    view, params = out[2]
    rng = stream(11, "views", 2)
    replay = random_resized_crop(img, rng, cfg.area_range, cfg.ar_range, cfg.out_size)
    flipped = bool(rng.random() < cfg.flip_prob)
    if flipped:
        replay = hflip(replay)
    replay = color_jitter(replay, rng, cfg.brightness, cfg.contrast, cfg.saturation, cfg.hue)
    assert flipped == params.flipped
    assert view.same_pixels(replay)


def test_seed_changes_views(block_image):
    img = block_image(seed=11, width=260, height=200)
    cfg = ViewConfig(n_views=1, out_size=32)
    (va, pa), = gen_views(img, cfg, seed=0)
    (vb, pb), = gen_views(img, cfg, seed=1)
    assert pa.crop != pb.crop or not va.same_pixels(vb)


def test_params_to_dict_is_json_ready(block_image):
    img = block_image(seed=12, width=260, height=200)
    _, params = next(gen_views(img, ViewConfig(n_views=1, out_size=16), seed=12))
    d = params.to_dict()
    assert set(d) == {"index", "crop", "flipped", "jitter"}
    assert d["crop"] == asdict(params.crop)
    assert d["jitter"] == asdict(params.jitter)
    restored = json.loads(json.dumps(d))
    assert restored == d
