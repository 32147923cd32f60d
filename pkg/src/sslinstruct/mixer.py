"""Mixing pretext-task samples into a base instruction dataset at a set ratio.

The ratio rho is a percentage: a base of N samples receives floor(rho/100 * N)
pretext samples. All counting is exact rational arithmetic; rho values given
as floats are read as the decimal they print as, so ``0.3`` of 1000 is 3, not
2. The merged order is a seeded shuffle that does not depend on numpy, so a
manifest is reproducible from its header alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DuplicateId
from .manifest import SSL_TASKS, TOOL_NAME, TOOL_VERSION, DatasetManifest
from .rng import SHUFFLE_ALGORITHM, seeded_shuffle


def _as_fraction(rho) -> Fraction:
    """Exact ratio; floats are interpreted by their shortest decimal repr."""
    if isinstance(rho, Fraction):
        return rho
    if isinstance(rho, bool):
        raise TypeError("rho must be a number, not bool")
    if isinstance(rho, int):
        return Fraction(rho)
    if isinstance(rho, float):
        if not math.isfinite(rho):
            raise ValueError(f"rho must be finite, got {rho}")
        return Fraction(str(rho))
    if isinstance(rho, str):
        return Fraction(rho)
    raise TypeError(f"cannot interpret rho of type {type(rho).__name__}")


@dataclass
class MixConfig:
    """Knobs for one mixing run."""

    rho: float | int | str | Fraction = 0
    enabled_tasks: tuple[str, ...] = SSL_TASKS
    task_weights: dict | None = None
    seed: int = 0

    def __post_init__(self):
        frac = _as_fraction(self.rho)
        if frac < 0:
            raise ValueError(f"rho must be nonnegative, got {self.rho}")
        unknown = set(self.enabled_tasks) - set(SSL_TASKS)
        if unknown:
            raise ValueError(f"unknown tasks: {sorted(unknown)}")
        if frac > 0 and not self.enabled_tasks:
            raise ValueError("rho > 0 needs at least one enabled task")
        if self.task_weights is not None:
            if any(v < 0 for v in self.task_weights.values()):
                raise ValueError("weights must be nonnegative")
            if self.enabled_tasks and sum(
                self.task_weights.get(t, 0) for t in self.enabled_tasks
            ) <= 0:
                raise ValueError("weights over enabled tasks must sum > 0")


def ssl_count(rho, n_inst: int) -> int:
    """floor(rho/100 * n_inst), computed exactly."""
    frac = _as_fraction(rho)
    if frac < 0:
        raise ValueError(f"rho must be nonnegative, got {rho}")
    if n_inst < 0:
        raise ValueError(f"n_inst must be nonnegative, got {n_inst}")
    return int(frac * n_inst // 100)


def allocate_tasks(total: int, tasks=SSL_TASKS, weights=None) -> dict[str, int]:
    """Split ``total`` across tasks by largest remainder.

    Tasks always come out in canonical order (rotation, colorization,
    correspondence); remainder ties also resolve toward the earlier task.
    Weights default to equal.
    """
    if total < 0:
        raise ValueError(f"total must be nonnegative, got {total}")
    chosen = [t for t in SSL_TASKS if t in set(tasks)]
    unknown = set(tasks) - set(SSL_TASKS)
    if unknown:
        raise ValueError(f"unknown tasks: {sorted(unknown)}")
    if not chosen:
        raise ValueError("no tasks selected")
    if weights is None:
        weights = {t: 1 for t in chosen}
    bad = set(weights) - set(chosen)
    if bad:
        raise ValueError(f"weights given for unselected tasks: {sorted(bad)}")
    w = [Fraction(str(weights.get(t, 0))) for t in chosen]
    if any(x < 0 for x in w):
        raise ValueError("weights must be nonnegative")
    wsum = sum(w)
    if wsum == 0:
        raise ValueError("weights sum to zero")

    quotas = [total * x / wsum for x in w]
    counts = [int(q) for q in quotas]  # Fraction floors toward zero; all >= 0
    leftover = total - sum(counts)
    order = sorted(range(len(chosen)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return {t: c for t, c in zip(chosen, counts)}


def _header_rho(frac: Fraction, n_inst: int, n_ssl: int) -> float:
    """Nearest float to ``frac`` whose floor(r/100*n) in float math is n_ssl.

    Headers store rho as a JSON number; the closest double can land a hair on
    the wrong side of the floor boundary, so nudge it by ulps until the count
    invariant holds again.
    """
    r = float(frac)
    if n_inst == 0:
        return r
    while math.floor(r / 100 * n_inst) > n_ssl:
        r = math.nextafter(r, -math.inf)
    while math.floor(r / 100 * n_inst) < n_ssl:
        r = math.nextafter(r, math.inf)
    return r


def mix(
    base,
    ssl,
    seed: int,
    rho=None,
    source_digests: dict | None = None,
) -> DatasetManifest:
    """Merge ``ssl`` into ``base`` and shuffle with ``seed``.

    Both inputs may be DatasetManifests or plain sample lists. When ``rho`` is
    given it must agree with the sample counts
    (len(ssl) == floor(rho/100 * len(base))); when omitted the realized ratio
    is recorded instead. Ids must be unique across the union.
    """
    base = list(base.samples if isinstance(base, DatasetManifest) else base)
    ssl = list(ssl.samples if isinstance(ssl, DatasetManifest) else ssl)
    if not base and ssl:
        raise ValueError("cannot mix pretext samples into an empty base dataset")
    seen: dict[str, int] = {}
    for i, s in enumerate(base + ssl):
        if s.id in seen:
            raise DuplicateId(f"id {s.id!r} at positions {seen[s.id]} and {i}")
        seen[s.id] = i

    if rho is not None:
        frac = _as_fraction(rho)
        expect = ssl_count(frac, len(base))
        if expect != len(ssl):
            raise ValueError(
                f"rho {rho} over {len(base)} base samples calls for {expect} "
                f"pretext samples, got {len(ssl)}"
            )
    else:
        frac = Fraction(100 * len(ssl), len(base)) if base else Fraction(0)

    merged = seeded_shuffle(base + ssl, seed)
    manifest = DatasetManifest(
        header={
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "seed": seed,
            "rho": _header_rho(frac, len(base), len(ssl)),
            "shuffle": SHUFFLE_ALGORITHM,
            "task_counts": {},
            "source_digests": dict(source_digests or {}),
        },
        samples=merged,
    )
    manifest.header["task_counts"] = manifest.task_counts
    return manifest
