"""
Ratio-controlled dataset mixing
===============================

Fold generated pretext samples into an existing instruction-tuning set at
a chosen percentage of its size, with an exact count rule, a proportional
per-task split, and a seeded shuffle that reproduces bit for bit.
"""

import tempfile
from pathlib import Path

from sslinstruct import IMAGE_TOKEN, allocate_tasks, manifest_digest, manifest_to_json, mix, ssl_count, write_manifest
from sslinstruct.manifest import InstructionSample

###############################################################################
# A base set and a pretext pool
# -----------------------------
# The base set stands in for ordinary instruction data. The pool holds
# generated samples of the three pretext tasks.


def sample(prefix, i, task):
    return InstructionSample(
        id=f"{prefix}-{i}",
        images=[f"images/{prefix}-{i}.png"],
        instruction=f"{IMAGE_TOKEN}\nquestion {i}",
        response="0" if task != "external" else f"answer {i}",
        task=task,
        meta={"theta": 0} if task == "rotation" else {},
    )


base = [sample("base", i, "external") for i in range(200)]
pool = [
    sample(task, i, task)
    for task in ("rotation", "colorization", "correspondence")
    for i in range(10)
]

###############################################################################
# The count rule is exact
# -----------------------
# At ratio rho percent, floor(rho / 100 * n) pretext samples join a base
# of n. Ratios are read as decimals, so 0.3 percent of 1000 is exactly 3.

for rho in (0, 1, 3, 5, 10):
    print(f"rho={rho:>2}% of {len(base)} base samples -> {ssl_count(rho, len(base))} pretext samples")
print(f"rho=0.3% of 1000 -> {ssl_count(0.3, 1000)} (decimal read exactly)")

###############################################################################
# Task budgets split proportionally
# ---------------------------------
# allocate_tasks divides a pretext budget across the three tasks, each
# count within one sample of its exact proportional share.

k = ssl_count(10, len(base))
print(f"\nbudget of {k} splits as {allocate_tasks(k)}")
print(f"weighted 2:1:1 split of 6: {allocate_tasks(6, weights={'rotation': 2, 'colorization': 1, 'correspondence': 1})}")

###############################################################################
# Mix and shuffle
# ---------------
# mix interleaves the chosen pretext samples into the base set with a
# seeded shuffle and stamps the header with the ratio, the shuffle
# algorithm, and per-task counts.

chosen = pool[:20]
m = mix(base, chosen, seed=13, rho=10)
print(f"\nmixed manifest: {len(m.samples)} samples")
print(f"header rho: {m.header['rho']}")
print(f"header shuffle: {m.header['shuffle']}")
print(f"task counts: {m.header['task_counts']}")
print(f"first five ids: {[s.id for s in m.samples[:5]]}")

###############################################################################
# Reproducibility
# ---------------
# The same inputs and seed give the same JSON bytes, so the digest of the
# written file makes a stable fingerprint for experiment tracking.

again = mix(base, chosen, seed=13, rho=10)
assert manifest_to_json(m) == manifest_to_json(again)

path = Path(tempfile.mkdtemp(prefix="demo-mix-")) / "mixed.json"
write_manifest(m, path)
print(f"\nrerun is byte-identical, file digest {manifest_digest(path)[:16]}...")
