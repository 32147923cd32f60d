"""
Point-wise colorization samples
===============================

Convert a color image to grayscale, mark a handful of points on it, and ask
which of several named colors belongs at each point. The true colors come
from the original image, so the answer key is exact and recomputable.
"""

import numpy as np

from sslinstruct import (
    ColorTaskConfig,
    ColorVocab,
    ImageBuffer,
    Point,
    gen_color_sample,
    mean_rgb,
    nearest_color_name,
    stream,
)

###############################################################################
# A colorful source image
# -----------------------
# The sampler rejects points whose local colors sit closer than a distance
# floor, so the source needs several well-separated colors. Big random
# tiles do the job.

rng = np.random.default_rng(3)
tiles = rng.integers(0, 256, size=(6, 8, 3), dtype=np.uint8)
img = ImageBuffer(np.repeat(np.repeat(tiles, 24, axis=0), 24, axis=1))
print(f"source image: {img.width}x{img.height}")

###############################################################################
# The color vocabulary
# --------------------
# Candidate colors are named by nearest neighbor lookup in a packaged
# vocabulary of 949 named RGB values.

vocab = ColorVocab.default()
print(f"vocabulary: {len(vocab.names)} names, e.g. {vocab.names[0]!r}, {vocab.names[500]!r}")
print(f"(128, 160, 40) is called {nearest_color_name((128, 160, 40), vocab)!r}")

###############################################################################
# Generate one sample
# -------------------
# Defaults ask for 5 points, average colors over a 5x5 window, keep true
# colors at least 40 apart in RGB space, and keep points 20 pixels away
# from the borders.

cfg = ColorTaskConfig()
g = gen_color_sample("demo.png", img, vocab, cfg, rng=stream(9, "colorization", 0))
s = g.sample

print("\ninstruction:")
print(s.instruction)
print(f"response: {s.response}")

###############################################################################
# Everything in the answer is recomputable
# ----------------------------------------
# Each point's metadata stores its coordinates and window mean. Recompute
# the mean with exact integer arithmetic and match it against the stored
# candidate list to rebuild the response string from scratch.

points = sorted(s.meta["points"], key=lambda d: d["label"])
candidates = [tuple(c) for c in s.meta["candidates"]]
parts = []
for pt in points:
    true_rgb = mean_rgb(img, Point(pt["x"], pt["y"]), cfg.r)
    assert tuple(pt["rgb"]) == true_rgb
    parts.append(f"{pt['label']}-{candidates.index(true_rgb) + 1}")
rebuilt = ",".join(parts)
print(f"\nrebuilt response: {rebuilt}")
assert rebuilt == s.response

###############################################################################
# The spacing guarantee
# ---------------------
# True colors of distinct points stay at least delta apart, which keeps the
# multiple-choice options unambiguous.

for i in range(len(points)):
    for j in range(i + 1, len(points)):
        a, b = points[i]["rgb"], points[j]["rgb"]
        d2 = sum((x - y) ** 2 for x, y in zip(a, b))
        assert d2 >= cfg.delta**2
print(f"all pairwise true-color distances are >= {cfg.delta}")

###############################################################################
# The emitted image is grayscale with markers
# -------------------------------------------
# The model sees labeled markers on a grayscale rendering, never the colors.

marked = g.images[s.images[0]]
px = marked.pixels.astype(int)
colored = (px.max(axis=2) != px.min(axis=2)).mean()
print(f"emitted image: {marked.width}x{marked.height}")
print(f"fraction of non-gray pixels (the red markers): {colored:.4f}")
