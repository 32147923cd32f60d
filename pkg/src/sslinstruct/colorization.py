"""Point-wise colorization (color matching) instruction samples.

A sample picks K points on a color image whose local mean colors are pairwise
well separated, overlays lettered markers on a grayscale copy, and asks which
entry of a shuffled candidate color list each point originally had. The
candidate list pairs each RGB triplet with its nearest name from a replaceable
color vocabulary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path, PurePosixPath

import numpy as np

from .errors import (
    DegenerateImage,
    GrayscaleSource,
    RejectionExhausted,
    WindowOutOfBounds,
)
from .imaging import ImageBuffer, MarkerStyle, Point, draw_point_marker, to_grayscale
from .manifest import (
    IMAGE_TOKEN,
    GeneratedSample,
    InstructionSample,
    PromptTemplate,
    load_template,
)
from .rng import permutation, stream

# Letters used in the generic answer-format hint, one per point label.
_FORMAT_LETTERS = "ijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class ColorVocab:
    """Ordered color-name vocabulary; order defines nearest-neighbor tie-breaks."""

    names: tuple[str, ...]
    rgbs: np.ndarray  # (N, 3) int64

    def __post_init__(self):
        if len(self.names) == 0:
            raise ValueError("color vocabulary is empty")
        if len(set(self.names)) != len(self.names):
            raise ValueError("color vocabulary names must be unique")
        if self.rgbs.shape != (len(self.names), 3):
            raise ValueError("names/rgbs length mismatch")

    def __len__(self) -> int:
        return len(self.names)

    @classmethod
    def from_csv(cls, path) -> "ColorVocab":
        """Load 'name,#rrggbb' records, one per line, no header."""
        return cls._parse(Path(path).read_text(encoding="utf-8"), str(path))

    @classmethod
    def default(cls) -> "ColorVocab":
        """The packaged 949-entry XKCD-derived vocabulary."""
        text = (
            resources.files("sslinstruct")
            .joinpath("assets/xkcd_colors.csv")
            .read_text(encoding="utf-8")
        )
        return cls._parse(text, "<packaged xkcd_colors.csv>")

    @classmethod
    def _parse(cls, text: str, origin: str) -> "ColorVocab":
        names = []
        rgbs = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            name, sep, hexval = line.rpartition(",")
            if not sep or not name or len(hexval) != 7 or hexval[0] != "#":
                raise ValueError(f"{origin}:{lineno}: expected 'name,#rrggbb'")
            try:
                value = int(hexval[1:], 16)
            except ValueError:
                raise ValueError(f"{origin}:{lineno}: bad hex color {hexval!r}") from None
            names.append(name)
            rgbs.append(((value >> 16) & 0xFF, (value >> 8) & 0xFF, value & 0xFF))
        return cls(names=tuple(names), rgbs=np.array(rgbs, dtype=np.int64))


@dataclass
class ColorTaskConfig:
    k: int = 5  # points per sample
    r: int = 5  # mean-color neighborhood side, odd
    delta: float = 40.0  # min pairwise RGB distance between point colors
    margin: int = 20  # min distance of points from every border
    max_attempts: int = 1000  # rejection-sampling draw budget

    def __post_init__(self):
        if self.k < 2 or self.k > 26:
            raise ValueError("k must be in [2, 26] (points are lettered A..Z)")
        if self.r < 1 or self.r % 2 == 0:
            raise ValueError("r must be odd and >= 1")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.margin < math.ceil(self.r / 2):
            raise ValueError("margin must be >= ceil(r/2)")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")


def is_grayscale(img: ImageBuffer, tolerance: int = 2) -> bool:
    """True when every pixel's channel spread is <= tolerance.

    The slack absorbs the tiny chroma noise JPEG leaves on genuinely gray
    photographs.
    """
    p = img.pixels.astype(np.int16)
    spread = p.max(axis=2) - p.min(axis=2)
    return bool(spread.max() <= tolerance)


def mean_rgb(img: ImageBuffer, p: Point, r: int) -> tuple[int, int, int]:
    """Per-channel mean over the r x r window centered at p, rounded half-up."""
    if r < 1 or r % 2 == 0:
        raise ValueError("window side must be odd and >= 1")
    half = r // 2
    if p.x - half < 0 or p.y - half < 0 or p.x + half >= img.width or p.y + half >= img.height:
        raise WindowOutOfBounds(
            f"{r}x{r} window at {p} exceeds {img.width}x{img.height}"
        )
    win = img.pixels[p.y - half : p.y + half + 1, p.x - half : p.x + half + 1]
    sums = win.sum(axis=(0, 1), dtype=np.int64)
    n = r * r
    return tuple(int((2 * s + n) // (2 * n)) for s in sums)


def _dist2(a, b) -> int:
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2


def sample_distinct_points(
    img: ImageBuffer, cfg: ColorTaskConfig, rng: np.random.Generator
) -> list[tuple[Point, tuple[int, int, int]]]:
    """Draw K interior points whose mean colors are pairwise >= delta apart.

    Sequential rejection sampling: every uniform draw counts against
    ``max_attempts``; a candidate is kept iff its mean color clears delta
    against all colors accepted so far. Raises RejectionExhausted when the
    budget runs out (the caller is expected to skip the image).
    """
    m = cfg.margin
    if img.width < 2 * m + 1 or img.height < 2 * m + 1:
        raise DegenerateImage(
            f"{img.width}x{img.height} too small for margin {m}"
        )
    delta2 = cfg.delta * cfg.delta
    accepted: list[tuple[Point, tuple[int, int, int]]] = []
    for _ in range(cfg.max_attempts):
        x = m + int(rng.integers(0, img.width - 2 * m))
        y = m + int(rng.integers(0, img.height - 2 * m))
        p = Point(x, y)
        c = mean_rgb(img, p, cfg.r)
        if all(_dist2(c, c2) >= delta2 for _, c2 in accepted):
            accepted.append((p, c))
            if len(accepted) == cfg.k:
                return accepted
    raise RejectionExhausted(
        f"{len(accepted)}/{cfg.k} points after {cfg.max_attempts} draws"
    )


def nearest_color_name(rgb, vocab: ColorVocab) -> str:
    """Name of the vocabulary entry closest in RGB; ties go to the lowest index."""
    q = np.asarray(rgb, dtype=np.int64)
    d2 = ((vocab.rgbs - q) ** 2).sum(axis=1)
    return vocab.names[int(np.argmin(d2))]


def gen_color_sample(
    img_ref: str,
    img: ImageBuffer,
    vocab: ColorVocab | None = None,
    cfg: ColorTaskConfig | None = None,
    rng: np.random.Generator | None = None,
    template: PromptTemplate | None = None,
    sample_id: str | None = None,
    marker_style: MarkerStyle | None = None,
) -> GeneratedSample:
    """Build one color-matching sample from a color image.

    Markers go on the grayscale copy only; the answer colors always come from
    the clean source. The candidate list is a seeded shuffle of the K true
    colors, rendered as "i. RGB(r, g, b) (name)" lines, and the response maps
    each point label to its candidate's 1-based index.
    """
    vocab = vocab or ColorVocab.default()
    cfg = cfg or ColorTaskConfig()
    if rng is None:
        raise ValueError("rng is required")
    if is_grayscale(img):
        raise GrayscaleSource(f"{img_ref} is grayscale within tolerance")
    template = template or load_template("colorization")

    points = sample_distinct_points(img, cfg, rng)
    labels = [chr(ord("A") + i) for i in range(cfg.k)]
    names = [nearest_color_name(c, vocab) for _, c in points]

    annotated = to_grayscale(img)
    for label, (p, _) in zip(labels, points):
        annotated = draw_point_marker(annotated, p, label, marker_style)

    # Candidate slot j (1-based) shows the color of point perm[j-1].
    perm = permutation(cfg.k, rng)
    slots = [0] * cfg.k
    for j, i in enumerate(perm):
        slots[i] = j + 1
    lines = []
    for j, i in enumerate(perm):
        r, g, b = points[i][1]
        lines.append(f"{j + 1}. RGB({r}, {g}, {b}) ({names[i]})")

    answer_format = ",".join(
        f"{lab}-{_FORMAT_LETTERS[i] if i < len(_FORMAT_LETTERS) else 'n'}"
        for i, lab in enumerate(labels)
    )
    instruction = IMAGE_TOKEN + "\n" + template.render(
        points=", ".join(labels),
        candidates="\n".join(lines),
        answer_format=answer_format,
    )
    response = ",".join(f"{lab}-{slots[i]}" for i, lab in enumerate(labels))

    sid = (
        sample_id
        if sample_id is not None
        else f"colorization-{PurePosixPath(img_ref).stem}"
    )
    out_ref = f"images/{sid}.png"
    sample = InstructionSample(
        id=sid,
        images=[out_ref],
        instruction=instruction,
        response=response,
        task="colorization",
        meta={
            "points": [
                {
                    "label": lab,
                    "x": p.x,
                    "y": p.y,
                    "rgb": list(points[i][1]),
                    "name": names[i],
                    "slot": slots[i],
                }
                for i, (lab, (p, _)) in enumerate(zip(labels, points))
            ],
            "candidates": [list(points[i][1]) for i in perm],
            "candidate_names": [names[i] for i in perm],
            "permutation": perm,
            "source_image": img_ref,
            "r": cfg.r,
            "delta": cfg.delta,
            "margin": cfg.margin,
            "template": template.version,
        },
    )
    return GeneratedSample(sample=sample, images={out_ref: annotated})


def generate_batch(
    corpus,
    n: int,
    seed: int,
    vocab: ColorVocab | None = None,
    cfg: ColorTaskConfig | None = None,
    template: PromptTemplate | None = None,
    max_skips_per_sample: int = 50,
):
    """Yield ``n`` samples, skipping images that fail the grayscale filter or
    exhaust rejection sampling. Stream index == attempt counter, so skips do
    not disturb later samples."""
    vocab = vocab or ColorVocab.default()
    cfg = cfg or ColorTaskConfig()
    template = template or load_template("colorization")
    produced = 0
    attempt = 0
    budget = n * max_skips_per_sample
    while produced < n:
        if attempt >= budget:
            raise RejectionExhausted(
                f"only {produced}/{n} colorization samples after {attempt} image attempts"
            )
        idx = attempt % len(corpus)
        rng = stream(seed, "colorization", attempt)
        attempt += 1
        try:
            out = gen_color_sample(
                corpus.ref(idx),
                corpus.load(idx),
                vocab,
                cfg,
                rng,
                template,
                sample_id=f"colorization-{produced:06d}",
            )
        except (GrayscaleSource, RejectionExhausted, DegenerateImage):
            continue
        yield out
        produced += 1
