"""Command-line surface: generate pretext-task datasets, mix, validate, inspect.

Subcommands
-----------
gen-rotation / gen-color / gen-corr
    write ``<out>/manifest.json`` plus the rendered PNGs under ``<out>/images/``
gen-views
    write ``<out>/view_{index:06}.png`` plus ``<out>/params.json``
mix
    merge a pretext-sample pool into a base manifest at a given percentage
validate
    schema + answer-key checks; exit 1 naming the first failing record
stats
    per-task counts and the realized mixing percentage

Options may come from flags or from a JSON config file (``--config``); flags
win over the file, the file wins over built-in defaults. Every run is a pure
function of its inputs: same invocation, same bytes.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import colorization, correspondence, rotation
from .colorization import ColorTaskConfig, ColorVocab
from .corpus import ImageCorpus
from .correspondence import LAYOUTS, load_pair_manifest
from .errors import SslInstructError
from .imaging import save_png
from .manifest import (
    SSL_TASKS,
    TOOL_NAME,
    TOOL_VERSION,
    DatasetManifest,
    load_template,
    manifest_digest,
    read_manifest,
    validate_answer_keys,
    validate_manifest,
    write_manifest,
)
from .mixer import allocate_tasks, mix, ssl_count
from .views import ViewConfig, gen_views


class _UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# option plumbing


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise _UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise _UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise _UsageError(f"config file {path} must hold a JSON object")
    return obj


def _opt(args, config: dict, key: str, default=None):
    v = getattr(args, key, None)
    if v is not None:
        return v
    if key in config:
        return config[key]
    return default


def _req(args, config: dict, key: str):
    v = _opt(args, config, key)
    if v is None:
        raise _UsageError(f"missing required option --{key.replace('_', '-')}")
    return v


def _range_pair(value, key: str) -> tuple[float, float] | None:
    if value is None:
        return None
    try:
        lo, hi = value
        return (float(lo), float(hi))
    except (TypeError, ValueError):
        raise _UsageError(f"{key} must be a [low, high] pair") from None


def _task_list(value) -> list[str]:
    if value is None:
        return list(SSL_TASKS)
    if isinstance(value, str):
        value = [value]
    tasks: list[str] = []
    for item in value:
        tasks.extend(t for t in str(item).split(",") if t)
    unknown = set(tasks) - set(SSL_TASKS)
    if unknown:
        raise _UsageError(
            f"unknown tasks: {', '.join(sorted(unknown))} "
            f"(choose from {', '.join(SSL_TASKS)})"
        )
    if not tasks:
        raise _UsageError("--tasks given but empty")
    return tasks


def _base_header(command: str, seed: int, config_echo: dict) -> dict:
    return {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "command": command,
        "seed": seed,
        "config": config_echo,
    }


def _write_generated(out_dir: Path, header: dict, generated) -> DatasetManifest:
    out_dir.mkdir(parents=True, exist_ok=True)
    samples = []
    for g in generated:
        for ref, buf in g.images.items():
            path = out_dir / ref
            path.parent.mkdir(parents=True, exist_ok=True)
            save_png(buf, path)
        samples.append(g.sample)
    m = DatasetManifest(header=header, samples=samples)
    m.header["task_counts"] = m.task_counts
    write_manifest(m, out_dir / "manifest.json")
    return m


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen_rotation(args, config) -> int:
    corpus = ImageCorpus(_req(args, config, "corpus"))
    n = int(_req(args, config, "n"))
    seed = int(_opt(args, config, "seed", 0))
    out = Path(_req(args, config, "out"))
    tdir = _opt(args, config, "templates")
    template = load_template("rotation", directory=tdir)
    header = _base_header(
        "gen-rotation",
        seed,
        {"corpus": str(_req(args, config, "corpus")), "n": n, "seed": seed},
    )
    header["templates"] = {"rotation": template.version}
    m = _write_generated(out, header, rotation.generate_batch(corpus, n, seed, template))
    print(f"wrote {len(m.samples)} rotation samples to {out}")
    return 0


def _cmd_gen_color(args, config) -> int:
    corpus = ImageCorpus(_req(args, config, "corpus"))
    n = int(_req(args, config, "n"))
    seed = int(_opt(args, config, "seed", 0))
    out = Path(_req(args, config, "out"))
    vocab_path = _opt(args, config, "vocab")
    vocab = ColorVocab.from_csv(vocab_path) if vocab_path else ColorVocab.default()
    cfg = ColorTaskConfig(
        k=int(_opt(args, config, "k", 5)),
        r=int(_opt(args, config, "r", 5)),
        delta=float(_opt(args, config, "delta", 40.0)),
        margin=int(_opt(args, config, "margin", 20)),
        max_attempts=int(_opt(args, config, "max_attempts", 1000)),
    )
    tdir = _opt(args, config, "templates")
    template = load_template("colorization", directory=tdir)
    header = _base_header(
        "gen-color",
        seed,
        {
            "corpus": str(_req(args, config, "corpus")),
            "n": n,
            "seed": seed,
            "vocab": str(vocab_path) if vocab_path else "packaged",
            "k": cfg.k,
            "r": cfg.r,
            "delta": cfg.delta,
            "margin": cfg.margin,
            "max_attempts": cfg.max_attempts,
        },
    )
    header["templates"] = {"colorization": template.version}
    m = _write_generated(
        out, header, colorization.generate_batch(corpus, n, seed, vocab, cfg, template)
    )
    print(f"wrote {len(m.samples)} colorization samples to {out}")
    return 0


def _cmd_gen_corr(args, config) -> int:
    pairs_path = Path(_req(args, config, "pairs"))
    pairs = load_pair_manifest(pairs_path)
    n = int(_req(args, config, "n"))
    seed = int(_opt(args, config, "seed", 0))
    out = Path(_req(args, config, "out"))
    layout = _opt(args, config, "layout", "side-by-side")
    if layout not in LAYOUTS:
        raise _UsageError(f"--layout must be one of {', '.join(LAYOUTS)}")
    tdir = _opt(args, config, "templates")
    tname = "correspondence_single" if layout == "side-by-side" else "correspondence_multi"
    template = load_template(tname, directory=tdir)
    header = _base_header(
        "gen-corr",
        seed,
        {"pairs": str(pairs_path), "n": n, "seed": seed, "layout": layout},
    )
    header["templates"] = {"correspondence": template.version}
    m = _write_generated(
        out,
        header,
        correspondence.generate_batch(
            pairs, n, seed, layout, template, data_root=pairs_path.parent
        ),
    )
    print(f"wrote {len(m.samples)} correspondence samples to {out}")
    return 0


def _cmd_gen_views(args, config) -> int:
    corpus = ImageCorpus(_req(args, config, "corpus"))
    if len(corpus) != 1:
        raise _UsageError(
            f"gen-views expects --corpus to name a single image, found {len(corpus)}"
        )
    n = int(_req(args, config, "n"))
    seed = int(_opt(args, config, "seed", 0))
    out = Path(_req(args, config, "out"))
    kwargs = {"n_views": n}
    for key in ("area_range", "ar_range", "brightness", "contrast", "saturation", "hue"):
        pair = _range_pair(_opt(args, config, key), key)
        if pair is not None:
            kwargs[key] = pair
    if _opt(args, config, "out_size") is not None:
        kwargs["out_size"] = int(_opt(args, config, "out_size"))
    if _opt(args, config, "flip_prob") is not None:
        kwargs["flip_prob"] = float(_opt(args, config, "flip_prob"))
    cfg = ViewConfig(**kwargs)

    out.mkdir(parents=True, exist_ok=True)
    params = []
    for view, vp in gen_views(corpus.load(0), cfg, seed):
        save_png(view, out / f"view_{vp.index:06d}.png")
        params.append(vp.to_dict())
    log = {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "command": "gen-views",
        "seed": seed,
        "image": corpus.ref(0),
        "config": {
            "n_views": cfg.n_views,
            "area_range": list(cfg.area_range),
            "ar_range": list(cfg.ar_range),
            "out_size": cfg.out_size,
            "flip_prob": cfg.flip_prob,
            "brightness": list(cfg.brightness),
            "contrast": list(cfg.contrast),
            "saturation": list(cfg.saturation),
            "hue": list(cfg.hue),
        },
        "views": params,
    }
    with open(out / "params.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(log, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    print(f"wrote {cfg.n_views} views to {out}")
    return 0


def _select_pool(pool, counts: dict[str, int]):
    """First count[t] pool samples of each task t, in pool order."""
    chosen = []
    for task, want in counts.items():
        have = [s for s in pool if s.task == task]
        if len(have) < want:
            raise ValueError(
                f"pretext pool has {len(have)} {task} samples, need {want}"
            )
        chosen.extend(have[:want])
    return chosen


def _cmd_mix(args, config) -> int:
    base_path = Path(args.base)
    ssl_path = Path(args.ssl)
    seed = int(_opt(args, config, "seed", 0))
    out = Path(_req(args, config, "out"))
    rho = _opt(args, config, "rho")
    tasks = _task_list(_opt(args, config, "tasks"))
    weights = config.get("task_weights")

    base = read_manifest(base_path)
    pool = read_manifest(ssl_path)
    digests = {
        "base": manifest_digest(base_path),
        "ssl": manifest_digest(ssl_path),
    }
    if rho is not None:
        budget = ssl_count(rho, len(base.samples))
        counts = allocate_tasks(budget, tasks, weights)
        selected = _select_pool(pool.samples, counts)
    else:
        selected = [s for s in pool.samples if s.task in set(tasks)]

    m = mix(base, selected, seed, rho=rho, source_digests=digests)
    out_path = out if out.suffix == ".json" else out / "manifest.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_manifest(m, out_path)
    print(
        f"wrote {len(m.samples)} samples ({len(base.samples)} base + "
        f"{len(selected)} pretext) to {out_path}"
    )
    return 0


def _cmd_validate(args, config) -> int:
    m = read_manifest(args.manifest)
    validate_manifest(m)
    report = validate_answer_keys(m)
    if not report.passed:
        first = report.mismatches[0]
        print(
            f"error: record id={first.id}: {first.reason}",
            file=sys.stderr,
        )
        return 1
    print(f"ok: {len(m.samples)} samples, {report.checked} answer keys checked")
    return 0


def _fmt_fraction(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator} (~{float(f):.6g})"


def _cmd_stats(args, config) -> int:
    m = read_manifest(args.manifest)
    counts = m.task_counts
    n_ssl = sum(counts.get(t, 0) for t in SSL_TASKS)
    n_inst = counts.get("external", 0)
    print(f"samples: {len(m.samples)}")
    print("tasks:")
    for task in ("rotation", "colorization", "correspondence", "external"):
        if task in counts:
            print(f"  {task}: {counts[task]}")
    if n_inst > 0:
        realized = Fraction(100 * n_ssl, n_inst)
        print(f"realized rho: {_fmt_fraction(realized)}")
    else:
        print("realized rho: n/a (no external samples)")
    report = validate_answer_keys(m)
    print(f"answer keys: {report.checked} checked, {len(report.mismatches)} mismatches")
    per_sample_images = {len(s.images) for s in m.samples}
    if per_sample_images:
        print(
            "images per sample: "
            + "/".join(str(k) for k in sorted(per_sample_images))
        )
    return 0


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Fabricate visual pretext-task instruction data and mix it "
        "into instruction-tuning manifests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("gen-rotation", help="rotation prediction samples")
    common(p)
    p.add_argument("--corpus", default=None, help="image file or directory")
    p.add_argument("--n", type=int, default=None, help="number of samples")
    p.add_argument("--templates", default=None, help="prompt template directory")
    p.set_defaults(func=_cmd_gen_rotation)

    p = sub.add_parser("gen-color", help="point colorization samples")
    common(p)
    p.add_argument("--corpus", default=None, help="image file or directory")
    p.add_argument("--n", type=int, default=None, help="number of samples")
    p.add_argument("--vocab", default=None, help="color vocabulary CSV")
    p.add_argument("--templates", default=None, help="prompt template directory")
    p.set_defaults(func=_cmd_gen_color)

    p = sub.add_parser("gen-corr", help="point correspondence samples")
    common(p)
    p.add_argument("--pairs", default=None, help="pair manifest JSON")
    p.add_argument("--n", type=int, default=None, help="number of samples")
    p.add_argument("--layout", default=None, choices=LAYOUTS, help="image layout")
    p.add_argument("--templates", default=None, help="prompt template directory")
    p.set_defaults(func=_cmd_gen_corr)

    p = sub.add_parser("gen-views", help="augmented views of one image")
    common(p)
    p.add_argument("--corpus", default=None, help="single image file")
    p.add_argument("--n", type=int, default=None, help="number of views")
    p.set_defaults(func=_cmd_gen_views)

    p = sub.add_parser("mix", help="merge pretext samples into a base manifest")
    common(p)
    p.add_argument("base", help="base instruction manifest JSON")
    p.add_argument("ssl", help="pretext sample pool manifest JSON")
    p.add_argument("--rho", default=None, help="pretext percentage of base size")
    p.add_argument(
        "--tasks", nargs="+", default=None, help="tasks to draw from the pool"
    )
    p.set_defaults(func=_cmd_mix)

    p = sub.add_parser("validate", help="schema and answer-key checks")
    p.add_argument("manifest", help="manifest JSON to check")
    p.add_argument("--config", default=None, help="JSON config file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("stats", help="counts and realized mixing percentage")
    p.add_argument("manifest", help="manifest JSON to inspect")
    p.add_argument("--config", default=None, help="JSON config file")
    p.set_defaults(func=_cmd_stats)

    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        config = _load_config(getattr(args, "config", None))
        return args.func(args, config)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (SslInstructError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
