"""Command line interface: ``gradfuse {fuse,evaluate,batch,ablate,synth}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import image, synth
from .batch import ManifestError, PairEntry, read_manifest, run_ablation, run_batch, write_manifest
from .metrics import METRIC_NAMES, evaluate
from .pipeline import PipelineConfig, fuse_pair, map_image

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("gradfuse")

# config-file key -> (PipelineConfig field, parser)
_CONFIG_KEYS = {
    "lhe_tile": ("lhe_tile", int),
    "hvs_sigma": ("hvs_sigma", float),
    "hvs_radius": ("hvs_radius", int),
    "diffusion": ("diffusion", str),
    "focus_block": ("focus_block", int),
    "tie_eps": ("tie_eps", float),
    "vote_windows": ("vote_windows", lambda s: tuple(int(v) for v in s.split(",") if v.strip())),
    "decision_fusion": ("decision_fusion", lambda s: s.strip().lower() in ("1", "true", "yes", "on")),
    "size": ("size", lambda s: _parse_size(s)),
    "dump_stages": ("dump_stages", lambda s: s.strip().lower() in ("1", "true", "yes", "on")),
    "dump_map": ("dump_map", lambda s: s.strip().lower() in ("1", "true", "yes", "on")),
}


class ConfigError(ValueError):
    pass


def _parse_size(text: str):
    text = str(text).strip().lower()
    if text in ("0", "none", "off"):
        return None
    w, _, h = text.partition("x")
    return (int(w), int(h or w))


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: cannot parse {line!r}")
        field_, conv = _CONFIG_KEYS[key]
        try:
            values[field_] = conv(value.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return values


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--config", type=Path, help="key = value config file; flags override it")
    g.add_argument("--lhe-tile", type=int)
    g.add_argument("--hvs-sigma", type=float)
    g.add_argument("--hvs-radius", type=int)
    g.add_argument("--diffusion", choices=["floyd", "jarvis", "stucki"])
    g.add_argument("--focus-block", type=int)
    g.add_argument("--tie-eps", type=float)
    g.add_argument("--vote-windows", type=_CONFIG_KEYS["vote_windows"][1], help="e.g. 2,4,8")
    g.add_argument("--no-decision-fusion", dest="decision_fusion", action="store_const", const=False)
    g.add_argument("--size", type=_parse_size, default=argparse.SUPPRESS,
                   help="resize target, e.g. 256 or 320x240; 0 disables resizing")
    g.add_argument("--dump-stages", action="store_const", const=True)
    g.add_argument("--dump-map", action="store_const", const=True)


def pipeline_config(args) -> PipelineConfig:
    values = read_config_file(args.config) if args.config else {}
    for field_ in ("lhe_tile", "hvs_sigma", "hvs_radius", "diffusion", "focus_block", "tie_eps",
                   "vote_windows", "decision_fusion", "dump_stages", "dump_map"):
        v = getattr(args, field_, None)
        if v is not None:
            values[field_] = v
    if hasattr(args, "size"):
        values["size"] = args.size
    return PipelineConfig(**values)


def cmd_fuse(args) -> int:
    cfg = pipeline_config(args)
    result = fuse_pair(args.image_a, args.image_b, cfg, args.out)
    log.info("fused in %.3f s -> %s", result.seconds, args.out)
    return EXIT_OK


def _load_gray(path, size):
    img = image.load_image(path)
    if size is not None:
        img = image.resize_to(img, *size)
    return image.luma(img)


def cmd_evaluate(args) -> int:
    names = tuple(args.metrics.split(",")) if args.metrics else METRIC_NAMES
    size = getattr(args, "size", None)
    values = evaluate(*(_load_gray(p, size) for p in (args.image_a, args.image_b, args.fused)), names)
    row = {"pair": args.pair, **values}
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(row.keys())
    writer.writerow([row["pair"], *(repr(v) for v in values.values())])
    if args.json:
        Path(args.json).write_text(json.dumps(row, indent=2) + "\n")
    return EXIT_OK


def cmd_batch(args) -> int:
    cfg = pipeline_config(args)
    results = run_batch(read_manifest(args.manifest), cfg, args.out, args.jobs)
    failed = sum(not r.ok for r in results)
    log.info("%d pairs, %d failed; reports in %s", len(results), failed, args.out)
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_ablate(args) -> int:
    cfg = pipeline_config(args)
    rows = run_ablation(read_manifest(args.manifest), cfg, args.out, args.jobs)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(("setting",) + METRIC_NAMES + ("accuracy",))
    for label, row in rows.items():
        acc = "" if row["accuracy"] is None else f"{row['accuracy']:.6f}"
        writer.writerow([label, *(f"{row[m]:.6f}" for m in METRIC_NAMES), acc])
    return EXIT_PARTIAL if any(r["failed"] for r in rows.values()) else EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    size = getattr(args, "size", (256, 256))
    if args.images:
        sources = [(Path(p).stem, image.load_image(p)) for p in args.images]
    else:
        sources = [(f"proc{i:02d}", synth.procedural_image(256, args.seed + i)) for i in range(args.count)]
    entries = []
    for k, (name, pristine) in enumerate(sources):
        if size is not None:
            pristine = image.resize_to(pristine, *size)
        if args.mode == "halves":
            a, b, truth = synth.half_blur_pair(pristine, args.sigma, args.radius)
        else:
            a, b, truth = synth.region_pair(pristine, args.seed + k, args.sigma, args.radius)
        d = out / name
        d.mkdir(exist_ok=True)
        image.save_image(d / "pristine.png", pristine)
        image.save_image(d / "a.png", a)
        image.save_image(d / "b.png", b)
        image.save_image(d / "truth.png", map_image(truth))
        entries.append(PairEntry(name, d / "a.png", d / "b.png", d / "truth.png"))
    write_manifest(out / "manifest.csv", entries)
    log.info("wrote %d pairs and %s", len(entries), out / "manifest.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradfuse", description="Multi-focus image fusion by gradient transform.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", help="fuse one image pair")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--out", required=True, type=Path)
    _add_pipeline_args(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("evaluate", help="score a fused image against its two sources (CSV on stdout)")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("fused")
    p.add_argument("--pair", default="pair")
    p.add_argument("--metrics", help=f"comma list from {','.join(METRIC_NAMES)}")
    p.add_argument("--json", type=Path)
    p.add_argument("--size", type=_parse_size, default=None)
    p.set_defaults(func=cmd_evaluate)

    for name, func, helptext in (("batch", cmd_batch, "fuse and score every pair in a manifest"),
                                 ("ablate", cmd_ablate, "compare with/without decision-level fusion")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--manifest", required=True, type=Path, help="CSV: name,path_a,path_b[,truth]")
        p.add_argument("--out", required=True, type=Path)
        p.add_argument("--jobs", type=int, default=1)
        _add_pipeline_args(p)
        p.set_defaults(func=func)

    p = sub.add_parser("synth", help="generate blurred pairs with ground truth")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("images", nargs="*", help="pristine images; procedural scenes if omitted")
    p.add_argument("--mode", choices=["halves", "regions"], default="halves")
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=3.0)
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--size", type=_parse_size, default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (FileNotFoundError, image.ImageError) as exc:
        print(f"gradfuse: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except (ConfigError, ManifestError, ValueError) as exc:
        print(f"gradfuse: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
