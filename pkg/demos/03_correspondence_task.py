"""
Point correspondence samples
============================

Given two views of the same object plus precomputed dense patch features,
mark a query point on the first view and several candidate points on the
second, then ask which candidate shows the same physical spot. The answer
is the candidate whose patch features are most cosine-similar to the
query patch.
"""

import tempfile
from pathlib import Path

import numpy as np

from sslinstruct import (
    FeatureMap,
    ImageBuffer,
    RegionLabelMap,
    gen_corr_sample,
    load_pair,
    load_pair_manifest,
    match_point,
    patch_region_map,
    region_patches,
    save_png,
    stream,
    write_feature_map,
    write_label_map,
    write_pair_manifest,
)
from sslinstruct.correspondence import PairRecord

out = Path(tempfile.mkdtemp(prefix="demo-corr-"))
print(f"writing pair files under {out}")

###############################################################################
# Fabricate a pair on disk
# ------------------------
# Real pipelines get images, feature maps, and patch-level class labels
# from a vision backbone plus clustering. For the demo we synthesize a
# 6x6 patch grid per image where class 1 is the shared object: its
# patches reuse noisy copies of the same feature template in both images,
# so cosine matching has a well defined answer.

ps = 8  # patch size in pixels
rng = np.random.default_rng(0)
template = rng.normal(size=(9, 16))  # one feature per object patch

labels1 = np.zeros((6, 6), dtype=np.int64)
labels1[1:4, 2:5] = 1
labels2 = np.zeros((6, 6), dtype=np.int64)
labels2[3:6, 0:3] = 1


def features_for(labels, jitter_rng):
    f = jitter_rng.normal(scale=0.05, size=(6, 6, 16))
    object_cells = np.argwhere(labels == 1)
    for t, (r, c) in enumerate(object_cells):
        f[r, c] += template[t]
    return f


fmap1 = FeatureMap(features_for(labels1, np.random.default_rng(1)))
fmap2 = FeatureMap(features_for(labels2, np.random.default_rng(2)))

for name, arr in (("img1", labels1), ("img2", labels2)):
    pixels = np.repeat(np.repeat((arr * 200 + 30).astype(np.uint8), ps, 0), ps, 1)
    save_png(ImageBuffer(np.stack([pixels] * 3, axis=2)), out / f"{name}.png")
write_feature_map(out / "img1.vgft", fmap1)
write_feature_map(out / "img2.vgft", fmap2)

# label maps are stored per pixel; expand each patch label to its ps x ps block
pix_labels1 = np.repeat(np.repeat(labels1, ps, 0), ps, 1)
pix_labels2 = np.repeat(np.repeat(labels2, ps, 0), ps, 1)
write_label_map(out / "img1.vglm", RegionLabelMap(pix_labels1, num_classes=2))
write_label_map(out / "img2.vglm", RegionLabelMap(pix_labels2, num_classes=2))

record = PairRecord(
    image1="img1.png", image2="img2.png",
    featuremap1="img1.vgft", featuremap2="img2.vgft",
    labelmap1="img1.vglm", labelmap2="img2.vglm",
    patch_size=ps,
)
write_pair_manifest(out / "pairs.json", [record])
print("pair manifest written; reloading through the public reader")
pairs = load_pair_manifest(out / "pairs.json")

###############################################################################
# Matching is exhaustive cosine argmax
# ------------------------------------
# The pixel-level label map collapses to a patch grid by majority vote,
# then match_point scans every patch of the object region in the second
# image and keeps the one most cosine-similar to the query patch.

data = load_pair(pairs[0], data_root=out)
grid2 = patch_region_map(data.lmap2, ps)
region2 = region_patches(grid2, 1)
query = (2, 3)  # an object patch in image 1
best = match_point(data.fmap1, data.fmap2, query, region2)
print(f"query patch {query} matches patch {best} in image 2")

###############################################################################
# Generate a full sample
# ----------------------
# The default layout composes the two views side by side, rescales the
# second view to the height of the first, and draws numbered markers on
# the candidate points. The response is the index of the correct marker.

g = gen_corr_sample(pairs[0], stream(5, "correspondence", 0), data_root=out)
s = g.sample
meta = s.meta

print("\ninstruction:")
print(s.instruction)
print(f"response: {s.response}")
print(f"query point:  {meta['query']}")
print(f"target point: {meta['target']}")
print(f"candidates:   {meta['candidates']}")

###############################################################################
# The composite records its own geometry
# --------------------------------------
# Marker centers in composite coordinates come from the logged scale and
# horizontal offset, so any consumer can map points back to either view.

comp = meta["composite"]
print(f"\nsecond view scaled by {comp['scale2']}, shifted {comp['x_offset']}px right")
for mc in comp["marker_centers"]:
    pixel = g.images[s.images[0]].pixels[mc["y"], mc["x"]]
    assert tuple(pixel) == (255, 0, 0)
print("every marker center lands on red marker ink in the rendered composite")
