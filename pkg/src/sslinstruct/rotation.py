"""Rotation-prediction instruction samples.

Each sample rotates a source image clockwise by an angle drawn uniformly from
{0, 90, 180, 270} and asks for the applied angle; the response is the decimal
angle string, so the answer is recoverable from the image alone.
"""

from __future__ import annotations

from pathlib import PurePosixPath

import numpy as np

from .imaging import ImageBuffer, rotate90
from .manifest import (
    IMAGE_TOKEN,
    GeneratedSample,
    InstructionSample,
    PromptTemplate,
    load_template,
)
from .rng import stream

ANGLES = (0, 90, 180, 270)


def gen_rotation_sample(
    img_ref: str,
    img: ImageBuffer,
    rng: np.random.Generator,
    template: PromptTemplate | None = None,
    sample_id: str | None = None,
) -> GeneratedSample:
    """Build one rotation sample from ``img``; meta records the drawn angle."""
    template = template or load_template("rotation")
    theta = ANGLES[int(rng.integers(0, 4))]
    rotated = rotate90(img, theta)
    sid = sample_id if sample_id is not None else f"rotation-{PurePosixPath(img_ref).stem}"
    out_ref = f"images/{sid}.png"
    sample = InstructionSample(
        id=sid,
        images=[out_ref],
        instruction=IMAGE_TOKEN + "\n" + template.render(),
        response=str(theta),
        task="rotation",
        meta={
            "theta": theta,
            "source_image": img_ref,
            "template": template.version,
        },
    )
    return GeneratedSample(sample=sample, images={out_ref: rotated})


def generate_batch(corpus, n: int, seed: int, template: PromptTemplate | None = None):
    """Yield ``n`` samples, cycling the corpus; stream i = (seed, rotation, i)."""
    template = template or load_template("rotation")
    for i in range(n):
        idx = i % len(corpus)
        yield gen_rotation_sample(
            corpus.ref(idx),
            corpus.load(idx),
            stream(seed, "rotation", i),
            template,
            sample_id=f"rotation-{i:06d}",
        )
