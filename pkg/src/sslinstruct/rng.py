"""Deterministic randomness.

Two sources are used, both fully determined by a 64-bit seed:

* Per-sample streams: ``stream(seed, task, index)`` returns a numpy PCG64
  generator keyed by ``SeedSequence([seed, task_code, index])``. Samples can
  therefore be generated in parallel and in any order without changing the
  output.
* Manifest shuffling: a self-contained splitmix64-driven Fisher-Yates
  (:func:`seeded_shuffle`) so that mixed manifests are reproducible without
  depending on numpy's generator internals. Its identifier is recorded in
  manifest headers as :data:`SHUFFLE_ALGORITHM`.
"""

from __future__ import annotations

import numpy as np

# Fixed task codes used in the stream-splitting rule. Never renumber.
TASK_CODES = {
    "rotation": 1,
    "colorization": 2,
    "correspondence": 3,
    "views": 4,
    "mix": 5,
}

SHUFFLE_ALGORITHM = "fisher-yates-splitmix64-v1"

_MASK64 = (1 << 64) - 1


def stream(seed: int, task: str, index: int) -> np.random.Generator:
    """Derive the RNG stream for sample ``index`` of ``task`` under ``seed``."""
    if task not in TASK_CODES:
        raise KeyError(f"unknown task tag: {task!r}")
    if index < 0:
        raise ValueError("sample index must be nonnegative")
    ss = np.random.SeedSequence([seed & _MASK64, TASK_CODES[task], index])
    return np.random.Generator(np.random.PCG64(ss))


def permutation(n: int, rng: np.random.Generator) -> list[int]:
    """Uniform permutation of range(n) via Fisher-Yates on ``rng.integers``."""
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def _splitmix64(state: int):
    """Yield an endless stream of 64-bit words from a splitmix64 state."""
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def seeded_shuffle(items: list, seed: int) -> list:
    """Return a new list, shuffled by the versioned manifest algorithm.

    Fisher-Yates with draws by rejection-free modulo on splitmix64 words.
    The modulo bias is < 2**-40 for any realistic manifest size.
    """
    out = list(items)
    words = _splitmix64(seed & _MASK64)
    for i in range(len(out) - 1, 0, -1):
        j = next(words) % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out
