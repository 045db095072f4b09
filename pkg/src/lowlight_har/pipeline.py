"""Filesystem-mediated pipeline: degrade -> enhance -> segment -> features -> LOOCV.

Every stage reads and writes plain files (PGM frames, PGM masks, CSV
features, JSON reports) so stages can be run and inspected one at a time.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import degrader, esihe, keypose, learner, silhouette
from .frame_store import Clip, FrameError, list_clip_dirs, load_clip, save_clip

log = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.10


@dataclass
class PipelineConfig:
    input: str = ""
    output: str = "run"
    preset: str = "none"  # none | S1 | S2 | S3
    esihe: bool = True
    k: int = keypose.DEFAULT_K
    grid: str = "8x6"
    norm_size: str = "64x48"
    window: int = silhouette.DEFAULT_WINDOW
    threshold: Optional[float] = None  # fixed entropy threshold; Otsu if unset
    pca_variance: float = 0.95
    pca_scope: str = "fold"
    svm_c: float = 1.0
    seed: int = 7
    workers: int = 1

    def __post_init__(self):
        if self.preset.lower() != "none":
            degrader.preset(self.preset)
        keypose.GridSpec.parse(self.grid, self.norm_size)
        if self.pca_scope not in ("fold", "global"):
            raise ValueError(f"pca_scope must be fold or global, got {self.pca_scope!r}")
        if self.k < 1 or self.workers < 1:
            raise ValueError("k and workers must be >= 1")

    @property
    def grid_spec(self) -> keypose.GridSpec:
        return keypose.GridSpec.parse(self.grid, self.norm_size)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {'' if v is None else _fmt(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, **overrides) -> "PipelineConfig":
        """Parse ``key = value`` lines; ``#`` starts a comment.  Keyword
        overrides win over file values."""
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {n}: expected key = value")
            key, _, val = (s.strip() for s in line.partition("="))
            key = key.replace("-", "_")
            if key not in types:
                raise ValueError(f"config line {n}: unknown key {key!r}")
            values[key] = _parse(types[key], val)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def from_file(cls, path, **overrides) -> "PipelineConfig":
        return cls.from_text(Path(path).read_text(), **overrides)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def _parse(type_name, val: str):
    t = str(type_name)
    if val == "":
        return "" if t == "str" else None
    if "bool" in t:
        low = val.lower()
        if low not in ("true", "false", "1", "0", "yes", "no", "on", "off"):
            raise ValueError(f"not a boolean: {val!r}")
        return low in ("true", "1", "yes", "on")
    if "int" in t:
        return int(val)
    if "float" in t:
        return float(val)
    return val


# ----------------------------------------------------------- stage helpers


def degrade_clip(clip: Clip, preset_name: str) -> Clip:
    spec = degrader.preset(preset_name)
    return Clip([degrader.degrade(f, spec) for f in clip.frames], clip.id, clip.label, clip.names)


def enhance_clip(clip: Clip, params: Optional[list] = None) -> Clip:
    out = []
    for name, f in zip(clip.names, clip.frames):
        p, table = esihe.analyze(f)
        if params is not None:
            params.append((clip.id, name, p))
        out.append(table[f])
    return Clip(out, clip.id, clip.label, clip.names)


def segment_clip(clip: Clip, window: int = silhouette.DEFAULT_WINDOW, threshold=None) -> Clip:
    masks = [silhouette.extract_silhouette(f, window, threshold) for f in clip.frames]
    return Clip(masks, clip.id, clip.label, clip.names)


def map_clips(fn: Callable, items: list, workers: int = 1) -> list:
    """Order-preserving map, optionally over a process pool."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def write_features_csv(fm: keypose.FeatureMatrix, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["clip_id", "label"] + [f"f{i}" for i in range(fm.values.shape[1])])
        for cid, lab, row in zip(fm.ids, fm.labels, fm.values):
            w.writerow([cid, lab or ""] + [int(v) for v in row])


def read_features_csv(path) -> keypose.FeatureMatrix:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["clip_id", "label"]:
        raise ValueError(f"{path}: missing clip_id,label header")
    body = rows[1:]
    if not body:
        raise ValueError(f"{path}: no feature rows")
    width = len(rows[0]) - 2
    values = np.array([[int(v) for v in r[2:]] for r in body], dtype=np.int64).reshape(len(body), width)
    return keypose.FeatureMatrix(
        values=values, labels=[r[1] or None for r in body], ids=[r[0] for r in body]
    )


def write_report(report: learner.EvalReport, path, extra: Optional[dict] = None) -> None:
    doc = report.to_dict()
    if extra:
        doc.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- pipeline


@dataclass
class _ClipJob:
    src: str
    out: str
    preset: str
    esihe: bool
    window: int
    threshold: Optional[float]


def _process_clip(job: _ClipJob):
    """Load, degrade, enhance and segment one clip, writing every stage.
    Returns ``(clip_id, label, masks | None, error | None)``."""
    src = Path(job.src)
    out = Path(job.out)
    try:
        clip = load_clip(src)
        if job.preset.lower() != "none":
            clip = degrade_clip(clip, job.preset)
            save_clip(clip, out / "degraded" / clip.id)
        if job.esihe:
            clip = enhance_clip(clip)
            save_clip(clip, out / "enhanced" / clip.id)
        masks = segment_clip(clip, job.window, job.threshold)
        save_clip(masks, out / "masks" / clip.id, masks=True)
        return clip.id, clip.label, masks.frames, None
    except (FrameError, ValueError) as exc:
        return src.name, None, None, str(exc)


class PipelineError(RuntimeError):
    pass


def run_pipeline(config: PipelineConfig) -> learner.EvalReport:
    """Run every stage and write ``report.json``, ``confusion.csv``,
    ``features.csv`` and ``timings.json`` under ``config.output``."""
    if not config.input:
        raise PipelineError("no input directory given")
    clip_dirs = list_clip_dirs(config.input)
    if not clip_dirs:
        raise PipelineError(f"{config.input}: no labelled clip directories")
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    timings = {}

    t0 = time.perf_counter()
    jobs = [
        _ClipJob(str(d), str(out), config.preset, config.esihe, config.window, config.threshold)
        for d in clip_dirs
    ]
    results = map_clips(_process_clip, jobs, config.workers)
    timings["frames_to_masks"] = time.perf_counter() - t0

    failures = {cid: err for cid, _, _, err in results if err is not None}
    t0 = time.perf_counter()
    spec = config.grid_spec
    ids, labels, rows = [], [], []
    for cid, label, masks, err in results:
        if err is not None:
            continue
        try:
            rows.append(keypose.build_feature(masks, config.k, spec))
        except (keypose.FeatureError, ValueError) as exc:
            failures[cid] = str(exc)
            continue
        ids.append(cid)
        labels.append(label)
    for cid, err in sorted(failures.items()):
        log.warning("clip %s failed: %s", cid, err)
    if len(failures) > MAX_FAILURE_FRACTION * len(clip_dirs):
        raise PipelineError(f"{len(failures)} of {len(clip_dirs)} clips failed: {failures}")
    fm = keypose.FeatureMatrix(values=np.vstack(rows), labels=labels, ids=ids)
    write_features_csv(fm, out / "features.csv")
    timings["features"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    report = learner.loocv(
        fm.values, fm.labels, config.pca_variance, config.svm_c, config.pca_scope, ids=fm.ids
    )
    timings["loocv"] = time.perf_counter() - t0

    cfg = asdict(config)
    cfg.pop("workers")
    cfg.pop("input")
    cfg.pop("output")
    write_report(report, out / "report.json", {"config": cfg, "failures": failures})
    (out / "confusion.csv").write_text(report.confusion_csv())
    (out / "timings.json").write_text(json.dumps(timings, indent=2) + "\n")
    log.info("overall accuracy %.2f%% over %d clips", report.overall_accuracy, len(ids))
    return report
