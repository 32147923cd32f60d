"""Core raster operations: decoding, geometric/photometric transforms, annotation.

Everything operates on :class:`ImageBuffer` (RGB8, row-major) and is a pure
function of its inputs; randomized transforms take an explicit numpy Generator.
Interpolation is plain bilinear sampling at output pixel centers, quantized
round-half-up, so results are bit-identical across platforms. No anti-aliasing
is used anywhere.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import _font
from .errors import DecodeError, DegenerateImage, InvalidAngle, PointOutOfBounds

PNG_COMPRESS_LEVEL = 6

# Bounded retries for random_resized_crop before the center-crop fallback.
CROP_MAX_TRIES = 10


class Point(NamedTuple):
    """Pixel location, 0-based, x = column, y = row."""

    x: int
    y: int


@dataclass(eq=False)
class ImageBuffer:
    """Decoded RGB8 raster. ``pixels`` has shape (height, width, 3), uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.pixels)
        if a.dtype != np.uint8:
            raise ValueError("pixels must be uint8")
        if a.ndim != 3 or a.shape[2] != 3:
            raise ValueError("pixels must have shape (height, width, 3)")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        self.pixels = a

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def copy(self) -> "ImageBuffer":
        return ImageBuffer(self.pixels.copy())

    def same_pixels(self, other: "ImageBuffer") -> bool:
        """Bit-exact comparison."""
        return self.pixels.shape == other.pixels.shape and np.array_equal(
            self.pixels, other.pixels
        )

    def contains(self, p: Point) -> bool:
        return 0 <= p.x < self.width and 0 <= p.y < self.height


@dataclass
class MarkerStyle:
    """Filled-disc marker with a bitmap-font label."""

    radius: int = 8
    fill: tuple[int, int, int] = (255, 0, 0)
    label_color: tuple[int, int, int] = (255, 255, 255)
    label_offset: tuple[int, int] = (10, -4)  # radius + 2, -4

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("marker radius must be >= 1")


@dataclass
class CropLog:
    """Side-channel record of one random_resized_crop draw."""

    x: int
    y: int
    w: int
    h: int
    area_fraction: float
    aspect: float
    fallback: bool


@dataclass
class JitterLog:
    """Side-channel record of one color_jitter draw."""

    brightness: float
    contrast: float
    saturation: float
    hue: float


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def _quantize(arr: np.ndarray) -> np.ndarray:
    """Float image -> uint8, round half-up, clamped to [0, 255]. Consumes arr."""
    arr += 0.5
    np.floor(arr, out=arr)
    np.clip(arr, 0, 255, out=arr)
    return arr.astype(np.uint8)


# ---------------------------------------------------------------------------
# codecs


_SUPPORTED_MODES = {"1", "L", "LA", "P", "RGB", "RGBA"}


def decode_image(data: bytes) -> ImageBuffer:
    """Decode a PNG or JPEG byte stream to RGB8.

    Grayscale sources are expanded to R=G=B; alpha channels are dropped.
    Raises DecodeError for malformed streams or color models outside the
    common PNG/JPEG set.
    """
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode not in _SUPPORTED_MODES:
                raise DecodeError(f"unsupported color model: {im.mode}")
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except DecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode image: {exc}") from exc
    return ImageBuffer(arr.copy())


def load_image(path) -> ImageBuffer:
    with open(path, "rb") as f:
        return decode_image(f.read())


def encode_png(img: ImageBuffer) -> bytes:
    """Encode as 8-bit RGB PNG, non-interlaced, fixed compression level."""
    buf = io.BytesIO()
    Image.fromarray(img.pixels, mode="RGB").save(
        buf, format="PNG", compress_level=PNG_COMPRESS_LEVEL, optimize=False
    )
    return buf.getvalue()


def save_png(img: ImageBuffer, path) -> None:
    with open(path, "wb") as f:
        f.write(encode_png(img))


# ---------------------------------------------------------------------------
# geometry


def rotate90(img: ImageBuffer, theta: int) -> ImageBuffer:
    """Rotate clockwise by theta in {0, 90, 180, 270}.

    For theta=90 input pixel (x, y) lands at (height-1-y, x).
    """
    if theta not in (0, 90, 180, 270):
        raise InvalidAngle(f"rotation angle must be one of 0/90/180/270, got {theta}")
    if theta == 0:
        return img.copy()
    k = -(theta // 90)  # np.rot90 is counter-clockwise for positive k
    return ImageBuffer(np.ascontiguousarray(np.rot90(img.pixels, k)))


def hflip(img: ImageBuffer) -> ImageBuffer:
    return ImageBuffer(np.ascontiguousarray(img.pixels[:, ::-1, :]))


def vflip(img: ImageBuffer) -> ImageBuffer:
    return ImageBuffer(np.ascontiguousarray(img.pixels[::-1, :, :]))


def to_grayscale(img: ImageBuffer) -> ImageBuffer:
    """BT.601 luma, integer arithmetic, round half-up; output has R=G=B."""
    p = img.pixels.astype(np.int64)
    luma = (299 * p[:, :, 0] + 587 * p[:, :, 1] + 114 * p[:, :, 2] + 500) // 1000
    return ImageBuffer(np.repeat(luma[:, :, None], 3, axis=2).astype(np.uint8))


def _sample_bilinear(
    arr: np.ndarray, top: int, left: int, h: int, w: int, out_h: int, out_w: int
) -> np.ndarray:
    """Bilinear-sample the (top, left, h, w) region to (out_h, out_w).

    Output pixel (i, j) samples the source at the point its center maps to,
    clamped to the region; no prefiltering. Interpolation is the factored lerp
    a + (b-a)*wx applied along x then y, in float32.
    """
    region = np.ascontiguousarray(arr[top : top + h, left : left + w]).astype(
        np.float32
    )
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0)[:, None, None].astype(np.float32)
    wx = (xs - x0)[None, :, None].astype(np.float32)
    # Separable: lerp along x over all source rows, then along y.
    left_px = region[:, x0]
    right_px = region[:, x1]
    rows = left_px + (right_px - left_px) * wx
    top_px = rows[y0]
    bot_px = rows[y1]
    return _quantize(top_px + (bot_px - top_px) * wy)


def resize_bilinear(img: ImageBuffer, out_w: int, out_h: int) -> ImageBuffer:
    if out_w < 1 or out_h < 1:
        raise ValueError("output size must be positive")
    if out_w == img.width and out_h == img.height:
        return img.copy()
    return ImageBuffer(
        _sample_bilinear(img.pixels, 0, 0, img.height, img.width, out_h, out_w)
    )


def crop(img: ImageBuffer, x: int, y: int, w: int, h: int) -> ImageBuffer:
    if x < 0 or y < 0 or w < 1 or h < 1 or x + w > img.width or y + h > img.height:
        raise ValueError(f"crop ({x},{y},{w},{h}) outside {img.width}x{img.height}")
    return ImageBuffer(img.pixels[y : y + h, x : x + w].copy())


def random_resized_crop(
    img: ImageBuffer,
    rng: np.random.Generator,
    area_range: tuple[float, float] = (0.001, 0.08),
    ar_range: tuple[float, float] = (0.75, 4 / 3),
    out_size: int = 224,
    log: list[CropLog] | None = None,
) -> ImageBuffer:
    """Crop a random area/aspect rectangle and resize it to out_size x out_size.

    The crop area fraction is uniform in ``area_range``; the aspect ratio is
    log-uniform in ``ar_range``. A draw is accepted only when the rounded
    rectangle fits inside the image and its realized area fraction is still
    within ``area_range``; after CROP_MAX_TRIES failed draws a center crop of
    the whole frame (aspect clamped to the range) is used and flagged in the
    log record.
    """
    if img.width < 2 or img.height < 2:
        raise DegenerateImage("image smaller than 2x2")
    if not (0 < area_range[0] <= area_range[1] <= 1):
        raise ValueError("area_range must be within (0, 1]")
    if not (0 < ar_range[0] <= ar_range[1]):
        raise ValueError("ar_range must be positive")

    full_area = img.width * img.height
    rect = None
    for _ in range(CROP_MAX_TRIES):
        frac = float(rng.uniform(area_range[0], area_range[1]))
        aspect = float(
            math.exp(rng.uniform(math.log(ar_range[0]), math.log(ar_range[1])))
        )
        target = frac * full_area
        w = _round_half_up(math.sqrt(target * aspect))
        h = _round_half_up(math.sqrt(target / aspect))
        if w < 1 or h < 1 or w > img.width or h > img.height:
            continue
        realized = (w * h) / full_area
        if not (area_range[0] <= realized <= area_range[1]):
            continue
        x = int(rng.integers(0, img.width - w + 1))
        y = int(rng.integers(0, img.height - h + 1))
        rect = (x, y, w, h, realized, aspect, False)
        break

    if rect is None:
        # Center-crop fallback: largest in-range-aspect rectangle, centered.
        in_ar = img.width / img.height
        aspect = min(max(in_ar, ar_range[0]), ar_range[1])
        if in_ar >= aspect:
            h = img.height
            w = min(img.width, max(1, _round_half_up(h * aspect)))
        else:
            w = img.width
            h = min(img.height, max(1, _round_half_up(w / aspect)))
        x = (img.width - w) // 2
        y = (img.height - h) // 2
        rect = (x, y, w, h, (w * h) / full_area, aspect, True)

    x, y, w, h, realized, aspect, fallback = rect
    if log is not None:
        log.append(CropLog(x, y, w, h, realized, aspect, fallback))
    return ImageBuffer(_sample_bilinear(img.pixels, y, x, h, w, out_size, out_size))


# ---------------------------------------------------------------------------
# photometry


def _luma_f(arr: np.ndarray) -> np.ndarray:
    return 0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2]


def _rgb_to_hsv(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hue in [0, 1), saturation in [0, 1], value on the input scale."""
    r, g, b = arr[:, :, 0], arr[:, :, 1], arr[:, :, 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    c = maxc - minc
    inv_c = 1.0 / np.where(c > 0, c, 1.0)
    s = np.where(maxc > 0, c / np.where(maxc > 0, maxc, 1.0), 0.0)
    h = np.where(
        maxc == r,
        ((g - b) * inv_c) % 6.0,
        np.where(maxc == g, (b - r) * inv_c + 2.0, (r - g) * inv_c + 4.0),
    )
    h = np.where(c > 0, h * (1.0 / 6.0), 0.0)
    return h, s, maxc


def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    # Branch-free inversion: channel n is v - (v*s)*clamp(min(k, 4-k), 0, 1)
    # with k = (n + 6h) mod 6, for n = 5 (red), 3 (green), 1 (blue).
    h6 = h * 6.0
    vs = v * s
    out = np.empty(h.shape + (3,), dtype=h6.dtype)
    for i, n in enumerate((5.0, 3.0, 1.0)):
        k = (n + h6) % 6.0
        np.minimum(k, 4.0 - k, out=k)
        np.clip(k, 0.0, 1.0, out=k)
        k *= vs
        np.subtract(v, k, out=k)
        out[:, :, i] = k
    return out


def color_jitter(
    img: ImageBuffer,
    rng: np.random.Generator,
    brightness: tuple[float, float] = (0.75, 1.25),
    contrast: tuple[float, float] = (0.75, 1.25),
    saturation: tuple[float, float] = (0.70, 1.40),
    hue: tuple[float, float] = (-0.05, 0.05),
    log: list[JitterLog] | None = None,
) -> ImageBuffer:
    """Apply random brightness, contrast, saturation and hue adjustments.

    Factors are sampled independently (in that order) from the given ranges
    and applied in the fixed order brightness -> contrast -> saturation -> hue.
    Hue is a fraction of the full color circle. Stages at their exact identity
    factor are skipped, so collapsed ranges reproduce the input bit-exactly.
    """
    for lo, hi in (brightness, contrast, saturation):
        if not (0 <= lo <= hi):
            raise ValueError("factor ranges must satisfy 0 <= lo <= hi")
    if not (-0.5 <= hue[0] <= hue[1] <= 0.5):
        raise ValueError("hue range must lie within [-0.5, 0.5]")

    fb = float(rng.uniform(brightness[0], brightness[1]))
    fc = float(rng.uniform(contrast[0], contrast[1]))
    fs = float(rng.uniform(saturation[0], saturation[1]))
    fh = float(rng.uniform(hue[0], hue[1]))
    if log is not None:
        log.append(JitterLog(fb, fc, fs, fh))

    if fb == 1.0 and fc == 1.0 and fs == 1.0 and fh == 0.0:
        return img.copy()

    arr = img.pixels.astype(np.float32)
    if fb != 1.0:
        arr *= fb
        np.clip(arr, 0, 255, out=arr)
    if fc != 1.0:
        mean = float(np.mean(_luma_f(arr)))
        arr *= fc
        arr += mean * (1 - fc)
        np.clip(arr, 0, 255, out=arr)
    if fs != 1.0:
        luma = _luma_f(arr)[:, :, None] * (1 - fs)
        arr *= fs
        arr += luma
        np.clip(arr, 0, 255, out=arr)
    if fh != 0.0:
        h, s, v = _rgb_to_hsv(arr)
        arr = _hsv_to_rgb(h + fh, s, v)
        np.clip(arr, 0, 255, out=arr)
    return ImageBuffer(_quantize(arr))


# ---------------------------------------------------------------------------
# annotation


def draw_point_marker(
    img: ImageBuffer, p: Point, label: str, style: MarkerStyle | None = None
) -> ImageBuffer:
    """Render a filled disc at ``p`` with a bitmap-font label next to it.

    Only pixels inside the (clipped) disc and the label glyph boxes change.
    Discs and glyphs falling partly outside the image are clipped, never
    rejected; the anchor point itself must be inside.
    """
    style = style or MarkerStyle()
    if not img.contains(p):
        raise PointOutOfBounds(f"marker point {p} outside {img.width}x{img.height}")
    if label and not _font.have_glyphs(label):
        raise ValueError(f"label {label!r} contains characters without glyphs")

    out = img.pixels.copy()
    r = style.radius
    y0, y1 = max(0, p.y - r), min(img.height - 1, p.y + r)
    x0, x1 = max(0, p.x - r), min(img.width - 1, p.x + r)
    yy, xx = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    disc = (xx - p.x) ** 2 + (yy - p.y) ** 2 <= r * r
    out[y0 : y1 + 1, x0 : x1 + 1][disc] = style.fill

    gx = p.x + style.label_offset[0]
    gy = p.y + style.label_offset[1]
    for ch in label:
        _blit_glyph(out, ch, gx, gy, style.label_color)
        gx += _font.GLYPH_ADVANCE
    return ImageBuffer(out)


def _blit_glyph(out: np.ndarray, ch: str, gx: int, gy: int, color) -> None:
    mask = _font.glyph_mask(ch)
    h, w = out.shape[0], out.shape[1]
    y0, y1 = max(0, gy), min(h, gy + _font.GLYPH_HEIGHT)
    x0, x1 = max(0, gx), min(w, gx + _font.GLYPH_WIDTH)
    if y0 >= y1 or x0 >= x1:
        return
    sub = mask[y0 - gy : y1 - gy, x0 - gx : x1 - gx]
    out[y0:y1, x0:x1][sub] = color


# ---------------------------------------------------------------------------
# composition


def compose_side_by_side(
    img1: ImageBuffer, img2: ImageBuffer
) -> tuple[ImageBuffer, int, float]:
    """Paste img1 left and img2 right, height-matching img2 to img1.

    Returns (composite, x_offset, scale2): img2 was rescaled by ``scale2``
    (aspect preserved, bilinear) and pasted at column ``x_offset`` (=
    img1.width), so an img2 point maps into the composite via
    :func:`to_composite_point`.
    """
    if img2.height == img1.height:
        scale2 = 1.0
        right = img2.copy()
    else:
        scale2 = img1.height / img2.height
        right = resize_bilinear(
            img2, max(1, _round_half_up(img2.width * scale2)), img1.height
        )
    canvas = np.zeros((img1.height, img1.width + right.width, 3), dtype=np.uint8)
    canvas[:, : img1.width] = img1.pixels
    canvas[:, img1.width :] = right.pixels
    return ImageBuffer(canvas), img1.width, scale2


def to_composite_point(p: Point, scale2: float, x_offset: int) -> Point:
    """Map an img2 pixel location into side-by-side composite coordinates."""
    return Point(_round_half_up(p.x * scale2) + x_offset, _round_half_up(p.y * scale2))
