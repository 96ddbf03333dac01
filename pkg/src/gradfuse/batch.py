"""Batch fusion over a manifest of image pairs, with metric reports."""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import image
from .metrics import METRIC_NAMES, MetricReport, evaluate_all
from .pipeline import PipelineConfig, fuse_images, write_outputs
from .synth import label_accuracy

log = logging.getLogger(__name__)

REPORT_HEADER = ("pair",) + METRIC_NAMES


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class PairEntry:
    name: str
    path_a: Path
    path_b: Path
    truth: Path | None = None


@dataclass
class PairResult:
    name: str
    report: MetricReport | None = None
    seconds: float | None = None
    accuracy: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def read_manifest(path) -> list[PairEntry]:
    """Parse ``name,path_a,path_b[,truth]`` rows; relative paths resolve against the manifest."""
    path = Path(path)
    base = path.parent
    entries = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            row = [c.strip() for c in row]
            if not row or not row[0] or row[0].startswith("#"):
                continue
            if row[:3] == ["name", "path_a", "path_b"]:
                continue
            if len(row) not in (3, 4):
                raise ManifestError(f"{path}: expected name,path_a,path_b[,truth], got {row}")
            paths = [base / p for p in row[1:]]
            entries.append(PairEntry(row[0], *paths))
    if not entries:
        raise ManifestError(f"{path}: manifest is empty")
    names = [e.name for e in entries]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ManifestError(f"{path}: duplicate pair names {dupes}")
    return entries


def write_manifest(path, entries) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "path_a", "path_b", "truth"])
        for e in entries:
            paths = [p for p in (e.path_a, e.path_b, e.truth) if p is not None]
            w.writerow([e.name, *(os.path.relpath(p, path.parent) for p in paths)])


def process_pair(entry: PairEntry, cfg: PipelineConfig, out_dir=None) -> PairResult:
    try:
        result = fuse_images(image.load_image(entry.path_a), image.load_image(entry.path_b), cfg)
        if out_dir is not None:
            write_outputs(result, Path(out_dir) / entry.name, cfg.dump_stages, cfg.dump_map)
        report = evaluate_all(image.luma(result.src_a), image.luma(result.src_b),
                              image.luma(result.fused))
        accuracy = None
        if entry.truth is not None:
            truth = image.load_image(entry.truth)
            if cfg.size is not None:
                truth = image.resize_to(truth, *cfg.size)
            truth = (image.luma(truth) >= 127.5).astype(np.uint8)
            accuracy = label_accuracy(result.decision, truth, cfg.focus_block)
        return PairResult(entry.name, report, result.seconds, accuracy)
    except Exception as exc:  # a bad pair must not stop the batch
        log.warning("pair %s failed: %s", entry.name, exc)
        return PairResult(entry.name, error=f"{type(exc).__name__}: {exc}")


def run_batch(entries, cfg: PipelineConfig, out_dir=None, jobs: int = 1) -> list[PairResult]:
    """Fuse and score every pair; results come back in manifest order."""
    entries = list(entries)
    if not entries:
        raise ManifestError("nothing to process")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(process_pair, e, cfg, out_dir) for e in entries]
            results = [f.result() for f in futures]
    else:
        results = [process_pair(e, cfg, out_dir) for e in entries]
    if out_dir is not None:
        write_reports(results, out_dir)
    return results


def mean_report(results) -> MetricReport | None:
    ok = [r.report for r in results if r.ok]
    return MetricReport.mean(ok) if ok else None


def _fmt(v: float) -> str:
    return repr(float(v))


def write_reports(results, out_dir) -> None:
    """``report.csv`` / ``report.json`` hold metrics only (deterministic); timings go to ``timing.csv``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mean = mean_report(results)
    with open(out_dir / "report.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER + ("status",))
        for r in results:
            if r.ok:
                w.writerow([r.name, *(_fmt(getattr(r.report, m)) for m in METRIC_NAMES), "ok"])
            else:
                w.writerow([r.name, *([""] * len(METRIC_NAMES)), f"error: {r.error}"])
        if mean is not None:
            w.writerow(["mean", *(_fmt(getattr(mean, m)) for m in METRIC_NAMES), "mean"])
    payload = {
        "pairs": [{"pair": r.name, **(r.report.as_dict() if r.ok else {}),
                   **({"accuracy": r.accuracy} if r.accuracy is not None else {}),
                   "status": "ok" if r.ok else f"error: {r.error}"} for r in results],
        "mean": mean.as_dict() if mean is not None else None,
    }
    (out_dir / "report.json").write_text(json.dumps(payload, indent=2) + "\n")
    with open(out_dir / "timing.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair", "seconds"])
        for r in results:
            w.writerow([r.name, "" if r.seconds is None else f"{r.seconds:.4f}"])


def run_ablation(entries, cfg: PipelineConfig, out_dir=None, jobs: int = 1) -> dict:
    """Run the batch with and without decision-level fusion; returns both mean rows."""
    entries = list(entries)
    rows = {}
    for label, enabled in (("with_fusion", True), ("without_fusion", False)):
        sub = None if out_dir is None else Path(out_dir) / label
        results = run_batch(entries, replace(cfg, decision_fusion=enabled), sub, jobs)
        mean = mean_report(results)
        accs = [r.accuracy for r in results if r.ok and r.accuracy is not None]
        rows[label] = {
            **(mean.as_dict() if mean is not None else {m: float("nan") for m in METRIC_NAMES}),
            "accuracy": float(np.mean(accs)) if accs else None,
            "failed": sum(not r.ok for r in results),
        }
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        with open(Path(out_dir) / "ablation.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("setting",) + METRIC_NAMES + ("accuracy",))
            for label, row in rows.items():
                acc = "" if row["accuracy"] is None else _fmt(row["accuracy"])
                w.writerow([label, *(_fmt(row[m]) for m in METRIC_NAMES), acc])
    return rows
