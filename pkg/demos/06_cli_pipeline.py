"""
The command line, end to end
============================

Drive the whole pipeline through the installed subcommands: generate
pretext samples from a corpus, mix them into a base instruction set at a
ratio, then validate and summarize the result. Each call here invokes
the same entry point as the `sslinstruct` console script.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from sslinstruct import ImageBuffer, save_png
from sslinstruct.cli import run
from sslinstruct.manifest import IMAGE_TOKEN

out = Path(tempfile.mkdtemp(prefix="demo-cli-"))
print(f"working under {out}\n")


def sh(args):
    print("$ sslinstruct " + " ".join(args))
    code = run(args)
    assert code == 0, f"exit code {code}"
    print()


###############################################################################
# Inputs
# ------
# A directory of images and a base instruction set in the common
# JSON-array interchange shape (one record per sample, singular "image"
# key, human/gpt conversation turns).

corpus = out / "corpus"
corpus.mkdir()
rng = np.random.default_rng(1)
for i in range(24):
    tiles = rng.integers(0, 256, size=(6, 8, 3), dtype=np.uint8)
    save_png(ImageBuffer(np.repeat(np.repeat(tiles, 24, 0), 24, 1)), corpus / f"img-{i:04d}.png")

base = out / "base.json"
base.write_text(json.dumps([
    {
        "id": f"ext-{i}",
        "image": f"coco/{i:05d}.jpg",
        "conversations": [
            {"from": "human", "value": f"{IMAGE_TOKEN}\nWhat is shown?"},
            {"from": "gpt", "value": f"Scene {i}."},
        ],
    }
    for i in range(400)
]))
print(f"corpus: 24 images, base set: 400 records\n")

###############################################################################
# Generate pretext samples
# ------------------------
# Each generator writes a manifest plus its images into the output
# directory. Seeds make every run repeatable.

sh(["gen-rotation", "--corpus", str(corpus), "--n", "8", "--seed", "1", "--out", str(out / "rot")])
sh(["gen-color", "--corpus", str(corpus), "--n", "4", "--seed", "2", "--out", str(out / "color")])

###############################################################################
# Build a pool and mix
# --------------------
# mix takes the base set and a pretext pool, keeps floor(rho/100 * n)
# pool samples, and emits the shuffled union. Passing no --rho merges
# the whole pool.

pool = out / "pool.json"
rot = json.loads((out / "rot" / "manifest.json").read_text())
col = json.loads((out / "color" / "manifest.json").read_text())
pool.write_text(json.dumps({"header": {}, "samples": rot["samples"] + col["samples"]}))

sh(["mix", str(base), str(pool), "--rho", "2", "--tasks", "rotation,colorization",
    "--seed", "3", "--out", str(out / "mixed.json")])

###############################################################################
# Validate and summarize
# ----------------------
# validate re-checks structure and every recomputable answer key;
# stats reports composition and the realized ratio.

sh(["validate", str(out / "mixed.json")])
sh(["stats", str(out / "mixed.json")])

###############################################################################
# What landed on disk
# -------------------

mixed = json.loads((out / "mixed.json").read_text())
print(f"mixed manifest holds {len(mixed['samples'])} samples")
print(f"header: rho={mixed['header']['rho']} task_counts={mixed['header']['task_counts']}")
