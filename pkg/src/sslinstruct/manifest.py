"""Manifest and prompt-template I/O.

The on-disk manifest is UTF-8 JSON with a provenance header and a sample list.
Samples serialize their instruction/response pair as a two-turn conversation
(roles "human" and "gpt"), the interchange convention of instruction-tuning
pipelines; image placeholders are the literal token ``<image>`` inside the
human turn, one per referenced image. Key order and formatting are frozen so
identical manifests produce identical bytes.

A bare JSON array of conversation records (an external instruction dataset
with no header) is also accepted on read; a synthetic header marked
``external`` is attached.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import SchemaError
from .imaging import ImageBuffer

IMAGE_TOKEN = "<image>"
TASK_TAGS = ("rotation", "colorization", "correspondence", "external")
SSL_TASKS = ("rotation", "colorization", "correspondence")

TOOL_NAME = "sslinstruct"
TOOL_VERSION = "0.1.0"


@dataclass
class InstructionSample:
    """One image-instruction-response triplet plus its answer key."""

    id: str
    images: list[str]
    instruction: str
    response: str
    task: str
    meta: dict = field(default_factory=dict)


@dataclass
class GeneratedSample:
    """A freshly generated sample together with its rendered image buffers."""

    sample: InstructionSample
    images: dict[str, ImageBuffer]


@dataclass
class DatasetManifest:
    header: dict
    samples: list[InstructionSample]

    @property
    def task_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.samples:
            counts[s.task] = counts.get(s.task, 0) + 1
        return counts


@dataclass(frozen=True)
class PromptTemplate:
    """Versioned instruction text with str.format placeholders."""

    task: str
    text: str
    version: str
    name: str = ""

    def render(self, **kwargs) -> str:
        return self.text.format(**kwargs)


# ---------------------------------------------------------------------------
# templates

_TEMPLATE_TASKS = {
    "rotation": "rotation",
    "colorization": "colorization",
    "correspondence_single": "correspondence",
    "correspondence_multi": "correspondence",
}


def load_template(name: str, version: str = "v1", directory=None) -> PromptTemplate:
    """Load template ``name`` (e.g. "rotation", "correspondence_single").

    Templates are files named ``{name}_{version}.txt``; ``directory=None``
    loads the packaged defaults.
    """
    if name not in _TEMPLATE_TASKS:
        raise KeyError(f"unknown template name: {name!r}")
    fname = f"{name}_{version}.txt"
    if directory is None:
        ref = resources.files("sslinstruct").joinpath("assets/templates").joinpath(fname)
        text = ref.read_text(encoding="utf-8")
    else:
        text = Path(directory).joinpath(fname).read_text(encoding="utf-8")
    return PromptTemplate(
        task=_TEMPLATE_TASKS[name], text=text.rstrip("\n"), version=version, name=name
    )


# ---------------------------------------------------------------------------
# serialization


def _sample_to_record(s: InstructionSample) -> dict:
    return {
        "id": s.id,
        "task": s.task,
        "images": list(s.images),
        "conversations": [
            {"from": "human", "value": s.instruction},
            {"from": "gpt", "value": s.response},
        ],
        "meta": s.meta,
    }


def manifest_to_json(m: DatasetManifest) -> str:
    doc = {
        "header": m.header,
        "samples": [_sample_to_record(s) for s in m.samples],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def write_manifest(m: DatasetManifest, path) -> None:
    validate_manifest(m)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(manifest_to_json(m))


def manifest_digest(path) -> str:
    """sha256 hex digest of a manifest file, for provenance headers."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _record_to_sample(rec, index: int) -> InstructionSample:
    if not isinstance(rec, dict):
        raise SchemaError("sample record must be an object", index=index)
    if "id" not in rec:
        raise SchemaError("missing id", index=index, field="id")
    sid = rec["id"]
    if not isinstance(sid, str):
        sid = str(sid)
    if "images" in rec:
        images = rec["images"]
    elif "image" in rec:
        images = [rec["image"]]
    else:
        raise SchemaError("missing images", index=index, field="images")
    if not isinstance(images, list) or not all(isinstance(i, str) for i in images):
        raise SchemaError("images must be a list of strings", index=index, field="images")
    convs = rec.get("conversations")
    if (
        not isinstance(convs, list)
        or len(convs) != 2
        or convs[0].get("from") != "human"
        or convs[1].get("from") != "gpt"
    ):
        raise SchemaError(
            "conversations must be [human turn, gpt turn]",
            index=index,
            field="conversations",
        )
    instruction = convs[0].get("value")
    response = convs[1].get("value")
    if not isinstance(instruction, str) or not isinstance(response, str):
        raise SchemaError("turn values must be strings", index=index, field="conversations")
    task = rec.get("task", "external")
    meta = rec.get("meta", {})
    if not isinstance(meta, dict):
        raise SchemaError("meta must be an object", index=index, field="meta")
    return InstructionSample(
        id=sid, images=images, instruction=instruction, response=response, task=task, meta=meta
    )


def read_manifest(path) -> DatasetManifest:
    """Parse and validate a manifest file."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc

    if isinstance(doc, list):
        header = {"source": "external"}
        records = doc
    elif isinstance(doc, dict) and "samples" in doc:
        header = doc.get("header", {"source": "external"})
        if not isinstance(header, dict):
            raise SchemaError("header must be an object", field="header")
        records = doc["samples"]
    else:
        raise SchemaError("manifest must be an object with 'samples' or a record array")
    if not isinstance(records, list):
        raise SchemaError("samples must be an array", field="samples")

    samples = [_record_to_sample(rec, i) for i, rec in enumerate(records)]
    m = DatasetManifest(header=header, samples=samples)
    validate_manifest(m)
    return m


def validate_manifest(m: DatasetManifest) -> None:
    """Check every structural invariant; raises SchemaError with the offender."""
    seen: dict[str, int] = {}
    for i, s in enumerate(m.samples):
        if s.id in seen:
            raise SchemaError(
                f"duplicate id {s.id!r} (first at record {seen[s.id]})", index=i, field="id"
            )
        seen[s.id] = i
        if s.task not in TASK_TAGS:
            raise SchemaError(f"unknown task tag {s.task!r}", index=i, field="task")
        if not 1 <= len(s.images) <= 2:
            raise SchemaError(
                f"expected 1 or 2 images, found {len(s.images)}", index=i, field="images"
            )
        n_tokens = s.instruction.count(IMAGE_TOKEN)
        if n_tokens != len(s.images):
            raise SchemaError(
                f"{n_tokens} image placeholder(s) for {len(s.images)} image(s)",
                index=i,
                field="conversations",
            )
        if not s.response:
            raise SchemaError("empty response", index=i, field="response")
    declared = m.header.get("task_counts")
    if declared is not None:
        observed = m.task_counts
        for task, n in declared.items():
            if observed.get(task, 0) != n:
                raise SchemaError(
                    f"header declares {n} {task!r} samples, found {observed.get(task, 0)}",
                    field="task_counts",
                )


# ---------------------------------------------------------------------------
# answer-key validation


@dataclass
class Mismatch:
    id: str
    expected: str
    actual: str
    reason: str = ""


@dataclass
class ValidationReport:
    checked: int
    mismatches: list[Mismatch]

    @property
    def passed(self) -> bool:
        return not self.mismatches


def rederive_response(s: InstructionSample) -> str | None:
    """Recompute the expected response of an SSL sample from its answer key.

    Returns None for tasks without a rederivable key (external samples) or
    when the meta record is too damaged to rederive; damaged meta is reported
    separately by validate_answer_keys.
    """
    if s.task == "rotation":
        theta = s.meta.get("theta")
        if theta not in (0, 90, 180, 270):
            return None
        return str(theta)
    if s.task == "colorization":
        points = s.meta.get("points")
        candidates = s.meta.get("candidates")
        if not isinstance(points, list) or not isinstance(candidates, list):
            return None
        cand = [tuple(c) for c in candidates]
        parts = []
        for pt in sorted(points, key=lambda d: d.get("label", "")):
            rgb = tuple(pt.get("rgb", ()))
            if rgb not in cand:
                return None
            parts.append(f"{pt['label']}-{cand.index(rgb) + 1}")
        return ",".join(parts)
    if s.task == "correspondence":
        target = s.meta.get("target")
        candidates = s.meta.get("candidates")
        if not isinstance(target, dict) or not isinstance(candidates, list):
            return None
        t = (target.get("x"), target.get("y"))
        cand = [
            (c.get("x"), c.get("y")) if isinstance(c, dict) else None
            for c in candidates
        ]
        if None in cand or t not in cand:
            return None
        return str(cand.index(t))
    return None


def validate_answer_keys(m: DatasetManifest) -> ValidationReport:
    """Re-derive every SSL sample's response from meta and report mismatches."""
    mismatches = []
    checked = 0
    for s in m.samples:
        if s.task not in SSL_TASKS:
            continue
        checked += 1
        expected = rederive_response(s)
        if expected is None:
            mismatches.append(
                Mismatch(s.id, "<underivable>", s.response, "damaged answer key")
            )
        elif expected != s.response:
            mismatches.append(Mismatch(s.id, expected, s.response, "response mismatch"))
    return ValidationReport(checked=checked, mismatches=mismatches)
