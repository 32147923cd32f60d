"""Image corpus: a deterministic, ordered view of image files on disk."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from .imaging import ImageBuffer, load_image

_EXTENSIONS = {".png", ".jpg", ".jpeg"}


class ImageCorpus:
    """PNG/JPEG files under a directory, ordered by their relative posix path.

    The order is a pure function of the file names, so index i means the same
    image on every platform. A single image file also works; its directory
    becomes the root.
    """

    def __init__(self, root, cache_size: int = 512):
        root = Path(root)
        if root.is_file():
            self.root = root.parent
            refs = [root.name]
        elif root.is_dir():
            refs = sorted(
                p.relative_to(root).as_posix()
                for p in root.rglob("*")
                if p.is_file() and p.suffix.lower() in _EXTENSIONS
            )
            self.root = root
        else:
            raise FileNotFoundError(f"no such file or directory: {root}")
        if not refs:
            raise ValueError(f"no .png/.jpg/.jpeg files under {root}")
        self._refs = refs
        self._load = lru_cache(maxsize=cache_size)(self._load_uncached)

    def __len__(self) -> int:
        return len(self._refs)

    def ref(self, i: int) -> str:
        return self._refs[i]

    def path(self, i: int) -> Path:
        return self.root / self._refs[i]

    def _load_uncached(self, i: int) -> ImageBuffer:
        return load_image(self.path(i))

    def load(self, i: int) -> ImageBuffer:
        return self._load(i)
