"""Point correspondence instruction samples over precomputed dense features.

Inputs come in pairs: two photos of the same scene, a patch-grid feature map
per photo, and a pixel-level region label map per photo (regions are shared
cluster ids across the pair). A sample marks a query point on the first photo
and asks which of three marked points on the second photo shows the same spot;
the true answer is found by cosine similarity between patch features, the two
distractors are other patches of the same region.

File formats
------------
Feature map (.vgft):  b"VGFT", <HIII> = version(1), h, w, D, then h*w*D
    float32 little-endian values, row-major with the feature dim innermost.
Label map   (.vglm):  b"VGLM", <HIII> = version(1), H, W, K, then H*W uint16
    little-endian labels in row-major order, each < K.
Pair manifest: a JSON array of objects with keys image1, image2, featuremap1,
    featuremap2, labelmap1, labelmap2, patch_size; paths are relative to the
    manifest's directory unless absolute.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyRegion, RegionTooSmall, SchemaError
from .imaging import (
    ImageBuffer,
    MarkerStyle,
    Point,
    compose_side_by_side,
    draw_point_marker,
    load_image,
    to_composite_point,
)
from .manifest import (
    IMAGE_TOKEN,
    GeneratedSample,
    InstructionSample,
    PromptTemplate,
    load_template,
)
from .rng import permutation, stream

VGFT_MAGIC = b"VGFT"
VGLM_MAGIC = b"VGLM"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<HIII")

LAYOUTS = ("side-by-side", "multi-image")


@dataclass
class FeatureMap:
    """A (h, w, D) float32 grid of patch descriptors."""

    features: np.ndarray

    def __post_init__(self):
        f = np.ascontiguousarray(self.features, dtype=np.float32)
        if f.ndim != 3 or min(f.shape) < 1:
            raise ValueError(f"features must be (h, w, D), got {f.shape}")
        self.features = f

    @property
    def grid_height(self) -> int:
        return self.features.shape[0]

    @property
    def grid_width(self) -> int:
        return self.features.shape[1]

    @property
    def dim(self) -> int:
        return self.features.shape[2]


@dataclass
class RegionLabelMap:
    """Pixel-level region labels: (H, W) uint16 values, each < num_classes."""

    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        lab = np.ascontiguousarray(self.labels, dtype=np.uint16)
        if lab.ndim != 2 or min(lab.shape) < 1:
            raise ValueError(f"labels must be (H, W), got {lab.shape}")
        if self.num_classes < 1 or self.num_classes > 0xFFFF:
            raise ValueError(f"num_classes out of range: {self.num_classes}")
        if lab.size and int(lab.max()) >= self.num_classes:
            raise ValueError(
                f"label {int(lab.max())} >= num_classes {self.num_classes}"
            )
        self.labels = lab

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


def write_feature_map(path, fmap: FeatureMap) -> None:
    f = fmap.features
    if not np.isfinite(f).all():
        raise ValueError("feature map contains non-finite values")
    h, w, d = f.shape
    payload = f.astype("<f4", copy=False).tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(VGFT_MAGIC)
        fh.write(_HEADER.pack(FORMAT_VERSION, h, w, d))
        fh.write(payload)


def read_feature_map(path) -> FeatureMap:
    data = Path(path).read_bytes()
    name = str(path)
    if data[:4] != VGFT_MAGIC:
        raise SchemaError(f"{name}: bad magic {data[:4]!r}, expected {VGFT_MAGIC!r}")
    if len(data) < 4 + _HEADER.size:
        raise SchemaError(f"{name}: truncated header")
    version, h, w, d = _HEADER.unpack_from(data, 4)
    if version != FORMAT_VERSION:
        raise SchemaError(f"{name}: unsupported version {version}")
    if min(h, w, d) < 1:
        raise SchemaError(f"{name}: bad dimensions {h}x{w}x{d}")
    body = data[4 + _HEADER.size :]
    expected = h * w * d * 4
    if len(body) != expected:
        raise SchemaError(f"{name}: payload is {len(body)} bytes, expected {expected}")
    feats = np.frombuffer(body, dtype="<f4").reshape(h, w, d)
    if not np.isfinite(feats).all():
        raise SchemaError(f"{name}: non-finite feature values")
    return FeatureMap(features=feats.copy())


def write_label_map(path, lmap: RegionLabelMap) -> None:
    lab = lmap.labels
    with open(path, "wb") as fh:
        fh.write(VGLM_MAGIC)
        fh.write(_HEADER.pack(FORMAT_VERSION, lab.shape[0], lab.shape[1], lmap.num_classes))
        fh.write(lab.astype("<u2", copy=False).tobytes(order="C"))


def read_label_map(path) -> RegionLabelMap:
    data = Path(path).read_bytes()
    name = str(path)
    if data[:4] != VGLM_MAGIC:
        raise SchemaError(f"{name}: bad magic {data[:4]!r}, expected {VGLM_MAGIC!r}")
    if len(data) < 4 + _HEADER.size:
        raise SchemaError(f"{name}: truncated header")
    version, h, w, k = _HEADER.unpack_from(data, 4)
    if version != FORMAT_VERSION:
        raise SchemaError(f"{name}: unsupported version {version}")
    if min(h, w) < 1 or k < 1:
        raise SchemaError(f"{name}: bad dimensions {h}x{w}, {k} classes")
    body = data[4 + _HEADER.size :]
    expected = h * w * 2
    if len(body) != expected:
        raise SchemaError(f"{name}: payload is {len(body)} bytes, expected {expected}")
    labels = np.frombuffer(body, dtype="<u2").reshape(h, w)
    if labels.size and int(labels.max()) >= k:
        raise SchemaError(f"{name}: label {int(labels.max())} >= {k} classes")
    return RegionLabelMap(labels=labels.copy(), num_classes=k)


_PAIR_KEYS = (
    "image1",
    "image2",
    "featuremap1",
    "featuremap2",
    "labelmap1",
    "labelmap2",
    "patch_size",
)


@dataclass(frozen=True)
class PairRecord:
    image1: str
    image2: str
    featuremap1: str
    featuremap2: str
    labelmap1: str
    labelmap2: str
    patch_size: int

    def __post_init__(self):
        if self.patch_size < 1:
            raise ValueError(f"patch_size must be positive, got {self.patch_size}")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in _PAIR_KEYS}

    @classmethod
    def from_dict(cls, obj, index: int | None = None) -> "PairRecord":
        if not isinstance(obj, dict):
            raise SchemaError("pair record must be an object", index=index)
        for key in _PAIR_KEYS:
            if key not in obj:
                raise SchemaError(f"missing key {key!r}", index=index, field=key)
        for key in _PAIR_KEYS[:-1]:
            if not isinstance(obj[key], str) or not obj[key]:
                raise SchemaError(
                    f"{key!r} must be a non-empty path", index=index, field=key
                )
        ps = obj["patch_size"]
        if not isinstance(ps, int) or isinstance(ps, bool) or ps < 1:
            raise SchemaError(
                "'patch_size' must be a positive integer", index=index, field="patch_size"
            )
        return cls(**{k: obj[k] for k in _PAIR_KEYS})


def load_pair_manifest(path) -> list[PairRecord]:
    name = str(path)
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{name}: not valid JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise SchemaError(f"{name}: pair manifest must be a JSON array")
    return [PairRecord.from_dict(obj, index=i) for i, obj in enumerate(payload)]


def write_pair_manifest(path, pairs) -> None:
    payload = [p.to_dict() for p in pairs]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


@dataclass
class PairData:
    """A pair record with all six referenced files loaded and cross-checked."""

    record: PairRecord
    image1: ImageBuffer
    image2: ImageBuffer
    fmap1: FeatureMap
    fmap2: FeatureMap
    lmap1: RegionLabelMap
    lmap2: RegionLabelMap


def _resolve(base: Path | None, ref: str) -> Path:
    p = Path(ref)
    if p.is_absolute() or base is None:
        return p
    return base / p


def load_pair(pair: PairRecord, data_root=None) -> PairData:
    """Load a pair's images, feature maps and label maps, then verify that the
    grids agree: label maps match their images pixel for pixel, and feature
    grids are the ceil(H/patch) x ceil(W/patch) tiling of the label maps."""
    base = Path(data_root) if data_root is not None else None
    data = PairData(
        record=pair,
        image1=load_image(_resolve(base, pair.image1)),
        image2=load_image(_resolve(base, pair.image2)),
        fmap1=read_feature_map(_resolve(base, pair.featuremap1)),
        fmap2=read_feature_map(_resolve(base, pair.featuremap2)),
        lmap1=read_label_map(_resolve(base, pair.labelmap1)),
        lmap2=read_label_map(_resolve(base, pair.labelmap2)),
    )
    ps = pair.patch_size
    for side, img, fmap, lmap in (
        (1, data.image1, data.fmap1, data.lmap1),
        (2, data.image2, data.fmap2, data.lmap2),
    ):
        if (lmap.height, lmap.width) != (img.height, img.width):
            raise SchemaError(
                f"labelmap{side} is {lmap.height}x{lmap.width} but image{side} "
                f"is {img.height}x{img.width}"
            )
        gh = math.ceil(img.height / ps)
        gw = math.ceil(img.width / ps)
        if (fmap.grid_height, fmap.grid_width) != (gh, gw):
            raise SchemaError(
                f"featuremap{side} grid is {fmap.grid_height}x{fmap.grid_width}, "
                f"expected {gh}x{gw} for patch_size {ps}"
            )
    if data.lmap1.num_classes != data.lmap2.num_classes:
        raise SchemaError(
            f"label maps disagree on class count: "
            f"{data.lmap1.num_classes} vs {data.lmap2.num_classes}"
        )
    if data.fmap1.dim != data.fmap2.dim:
        raise SchemaError(
            f"feature maps disagree on dimension: {data.fmap1.dim} vs {data.fmap2.dim}"
        )
    return data


def select_object_class(lmap1: RegionLabelMap, lmap2: RegionLabelMap) -> int:
    """Class with the most pixels across both maps combined; ties go to the
    smaller class id (np.argmax keeps the first maximum)."""
    k = lmap1.num_classes
    counts = np.bincount(lmap1.labels.ravel(), minlength=k) + np.bincount(
        lmap2.labels.ravel(), minlength=k
    )
    return int(np.argmax(counts))


def pixel_to_patch(p: Point, patch_size: int) -> tuple[int, int]:
    """(row, col) of the patch containing pixel p."""
    return (p.y // patch_size, p.x // patch_size)


def patch_region_map(lmap: RegionLabelMap, patch_size: int) -> np.ndarray:
    """Majority pixel class per patch, as a (ceil(H/ps), ceil(W/ps)) int array.

    Ties go to the smaller class id.
    """
    ps = patch_size
    gh = math.ceil(lmap.height / ps)
    gw = math.ceil(lmap.width / ps)
    out = np.empty((gh, gw), dtype=np.int64)
    lab = lmap.labels
    for r in range(gh):
        for c in range(gw):
            block = lab[r * ps : (r + 1) * ps, c * ps : (c + 1) * ps]
            out[r, c] = np.argmax(np.bincount(block.ravel(), minlength=lmap.num_classes))
    return out


def region_patches(region_map: np.ndarray, class_id: int) -> list[tuple[int, int]]:
    """Patches labeled class_id, row-major sorted."""
    return [(int(r), int(c)) for r, c in np.argwhere(region_map == class_id)]


def patch_center(patch: tuple[int, int], patch_size: int, width: int, height: int) -> Point:
    """Center pixel of a patch, clamped for ragged right/bottom edges."""
    r, c = patch
    x = min(int(c) * patch_size + patch_size // 2, width - 1)
    y = min(int(r) * patch_size + patch_size // 2, height - 1)
    return Point(x, y)


def match_point(
    fmap1: FeatureMap,
    fmap2: FeatureMap,
    query_patch: tuple[int, int],
    region2: list[tuple[int, int]],
) -> tuple[int, int]:
    """Patch in region2 whose feature is most cosine-similar to the query's.

    Zero-norm vectors score -inf; ties resolve to the earliest patch in
    row-major order.
    """
    if not region2:
        raise EmptyRegion("no candidate patches in the second image")
    q = fmap1.features[query_patch].astype(np.float64)
    qn = float(np.linalg.norm(q))
    rows = np.array([rc[0] for rc in region2])
    cols = np.array([rc[1] for rc in region2])
    cands = fmap2.features[rows, cols].astype(np.float64)
    norms = np.linalg.norm(cands, axis=1)
    sims = np.full(len(region2), -np.inf)
    if qn > 0.0:
        ok = norms > 0.0
        sims[ok] = cands[ok] @ q / (norms[ok] * qn)
    return region2[int(np.argmax(sims))]


def sample_distractors(
    region2: list[tuple[int, int]],
    target: tuple[int, int],
    rng: np.random.Generator,
) -> list[tuple[int, int]]:
    """Two distinct patches from region2 other than the target."""
    if len(region2) < 3:
        raise RegionTooSmall(
            f"need 3 patches for one target and two distractors, have {len(region2)}"
        )
    pool = [rc for rc in region2 if rc != target]
    i1 = int(rng.integers(0, len(pool)))
    i2 = int(rng.integers(0, len(pool) - 1))
    if i2 >= i1:
        i2 += 1
    return [pool[i1], pool[i2]]


def gen_corr_sample(
    pair: PairRecord,
    rng: np.random.Generator,
    layout: str = "side-by-side",
    template: PromptTemplate | None = None,
    sample_id: str | None = None,
    data_root=None,
    marker_style: MarkerStyle | None = None,
    pair_data: PairData | None = None,
) -> GeneratedSample:
    """Build one correspondence sample from a feature/label pair.

    Draw order: query patch, two distractors, candidate shuffle. The response
    is the label (0, 1 or 2) of the true match among the shuffled candidates.
    """
    if layout not in LAYOUTS:
        raise ValueError(f"layout must be one of {LAYOUTS}, got {layout!r}")
    data = pair_data if pair_data is not None else load_pair(pair, data_root)
    ps = pair.patch_size

    class_id = select_object_class(data.lmap1, data.lmap2)
    region1 = region_patches(patch_region_map(data.lmap1, ps), class_id)
    region2 = region_patches(patch_region_map(data.lmap2, ps), class_id)
    if not region1:
        raise EmptyRegion(f"class {class_id} covers no patch of the first image")
    if len(region2) < 3:
        raise RegionTooSmall(
            f"class {class_id} covers {len(region2)} patches of the second image, need 3"
        )

    query_patch = region1[int(rng.integers(0, len(region1)))]
    query = patch_center(query_patch, ps, data.image1.width, data.image1.height)
    target_patch = match_point(data.fmap1, data.fmap2, query_patch, region2)
    distractor_patches = sample_distractors(region2, target_patch, rng)

    ordered = [target_patch] + distractor_patches
    perm = permutation(3, rng)
    candidates = [ordered[i] for i in perm]
    answer = candidates.index(target_patch)
    centers2 = [
        patch_center(pc, ps, data.image2.width, data.image2.height) for pc in candidates
    ]

    marked1 = draw_point_marker(data.image1, query, "Q", marker_style)
    sid = sample_id if sample_id is not None else "correspondence-0"
    meta = {
        "class_id": class_id,
        "patch_size": ps,
        "layout": layout,
        "query": {"x": query.x, "y": query.y},
        "query_patch": list(query_patch),
        "target": {
            "x": centers2[answer].x,
            "y": centers2[answer].y,
        },
        "target_patch": list(target_patch),
        "distractor_patches": [list(pc) for pc in distractor_patches],
        "candidates": [{"x": p.x, "y": p.y} for p in centers2],
        "candidate_patches": [list(pc) for pc in candidates],
        "answer": answer,
        "image1": pair.image1,
        "image2": pair.image2,
    }

    if layout == "side-by-side":
        template = template or load_template("correspondence_single")
        composite, x_offset, scale2 = compose_side_by_side(marked1, data.image2)
        marker_centers = []
        for i, p in enumerate(centers2):
            cp = to_composite_point(p, scale2, x_offset)
            composite = draw_point_marker(composite, cp, str(i), marker_style)
            marker_centers.append({"x": cp.x, "y": cp.y})
        meta["composite"] = {
            "x_offset": x_offset,
            "scale2": scale2,
            "marker_centers": marker_centers,
        }
        out_ref = f"images/{sid}.png"
        images = {out_ref: composite}
        refs = [out_ref]
        instruction = IMAGE_TOKEN + "\n" + template.render()
    else:
        template = template or load_template("correspondence_multi")
        marked2 = data.image2
        for i, p in enumerate(centers2):
            marked2 = draw_point_marker(marked2, p, str(i), marker_style)
        ref1 = f"images/{sid}-a.png"
        ref2 = f"images/{sid}-b.png"
        images = {ref1: marked1, ref2: marked2}
        refs = [ref1, ref2]
        instruction = IMAGE_TOKEN + "\n" + IMAGE_TOKEN + "\n" + template.render()
    meta["template"] = template.version

    sample = InstructionSample(
        id=sid,
        images=refs,
        instruction=instruction,
        response=str(answer),
        task="correspondence",
        meta=meta,
    )
    return GeneratedSample(sample=sample, images=images)


def generate_batch(
    pairs: list[PairRecord],
    n: int,
    seed: int,
    layout: str = "side-by-side",
    template: PromptTemplate | None = None,
    data_root=None,
    max_skips_per_sample: int = 50,
):
    """Yield ``n`` samples, cycling the pair list and skipping pairs whose
    selected region is absent or too small. Stream index == attempt counter."""
    if not pairs:
        raise ValueError("no pairs to sample from")
    if layout not in LAYOUTS:
        raise ValueError(f"layout must be one of {LAYOUTS}, got {layout!r}")
    template = template or load_template(
        "correspondence_single" if layout == "side-by-side" else "correspondence_multi"
    )
    cache: dict[int, PairData] = {}
    produced = 0
    attempt = 0
    budget = n * max_skips_per_sample
    while produced < n:
        if attempt >= budget:
            raise RegionTooSmall(
                f"only {produced}/{n} correspondence samples after {attempt} pair attempts"
            )
        idx = attempt % len(pairs)
        rng = stream(seed, "correspondence", attempt)
        attempt += 1
        if idx not in cache:
            cache[idx] = load_pair(pairs[idx], data_root)
        try:
            out = gen_corr_sample(
                pairs[idx],
                rng,
                layout,
                template,
                sample_id=f"correspondence-{produced:06d}",
                data_root=data_root,
                pair_data=cache[idx],
            )
        except (EmptyRegion, RegionTooSmall):
            continue
        yield out
        produced += 1
