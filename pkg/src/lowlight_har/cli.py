"""Command-line entry point: ``lowlight-har <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from functools import partial
from pathlib import Path

from . import degrader, keypose, learner, pipeline, synthgen
from .frame_store import FrameError, list_clip_dirs, load_clip, save_clip, save_mask

log = logging.getLogger("lowlight_har")


def _clip_dirs(path):
    dirs = list_clip_dirs(path)
    if not dirs:
        raise FrameError(f"{path}: no clip directories found")
    return dirs


def cmd_synth(args):
    classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    out = Path(args.out)
    data = synthgen.gen_dataset(
        classes, args.per_class, args.seed,
        frames=args.frames, width=args.width, height=args.height,
        texture_contrast=args.texture_contrast,
    )
    for clip, masks in data:
        save_clip(clip, out / clip.id)
        gt_dir = out / "gt" / clip.id
        gt_dir.mkdir(parents=True, exist_ok=True)
        for name, m in zip(clip.names, masks):
            save_mask(m, gt_dir / name)
    log.info("wrote %d clips to %s", len(data), out)


def _degrade_one(preset, out, d):
    save_clip(pipeline.degrade_clip(load_clip(d), preset), Path(out) / Path(d).name)


def _segment_one(window, threshold, out, d):
    save_clip(pipeline.segment_clip(load_clip(d), window, threshold), Path(out) / Path(d).name, masks=True)


def cmd_degrade(args):
    degrader.preset(args.preset)
    dirs = [str(d) for d in _clip_dirs(args.inp)]
    pipeline.map_clips(partial(_degrade_one, args.preset, args.out), dirs, args.workers)


def cmd_enhance(args):
    params = []
    for d in _clip_dirs(args.inp):
        clip = pipeline.enhance_clip(load_clip(d), params)
        save_clip(clip, Path(args.out) / d.name)
    if args.dump_params:
        lines = ["clip\tframe\tEt\tEa\tTc\tNL\tNU"]
        for cid, name, p in params:
            lines.append(
                f"{cid}\t{name}\t{p.exposure_threshold:.6f}\t{p.boundary}\t"
                f"{p.clip_threshold:.6f}\t{p.n_lower:.6f}\t{p.n_upper:.6f}"
            )
        Path(args.dump_params).write_text("\n".join(lines) + "\n")


def cmd_segment(args):
    dirs = [str(d) for d in _clip_dirs(args.inp)]
    pipeline.map_clips(partial(_segment_one, args.window, args.threshold, args.out), dirs, args.workers)


def cmd_features(args):
    dirs = []
    for p in args.inp:
        dirs.extend(_clip_dirs(p))
    clips = []
    for d in dirs:
        c = load_clip(d)
        c.frames = [f > 127 for f in c.frames]
        clips.append(c)
    fm = keypose.build_matrix(clips, args.k, keypose.GridSpec.parse(args.grid, args.size))
    pipeline.write_features_csv(fm, args.out)
    log.info("wrote %d x %d features to %s", *fm.values.shape, args.out)


def cmd_train(args):
    fm = pipeline.read_features_csv(args.features)
    model = learner.fit_classifier(fm.values, fm.labels, args.pca_variance, args.C)
    learner.save_model(model, args.out)


def cmd_eval(args):
    fm = pipeline.read_features_csv(args.features)
    if args.loocv:
        report = learner.loocv(fm.values, fm.labels, args.pca_variance, args.C, args.pca_scope, ids=fm.ids)
    else:
        model = learner.load_model(args.model)
        report = learner.confusion_report(fm.labels, model.predict(fm.values), ids=fm.ids)
    pipeline.write_report(report, args.report)
    if args.confusion:
        Path(args.confusion).write_text(report.confusion_csv())
    print(f"overall accuracy: {report.overall_accuracy:.2f}%")


def cmd_pipeline(args):
    overrides = dict(
        input=args.inp, output=args.out, preset=args.preset, esihe=args.esihe, k=args.k,
        grid=args.grid, norm_size=args.size, threshold=args.threshold,
        pca_variance=args.pca_variance, pca_scope=args.pca_scope, svm_c=args.C,
        seed=args.seed, workers=args.workers,
    )
    if args.config:
        cfg = pipeline.PipelineConfig.from_file(args.config, **overrides)
    else:
        cfg = pipeline.PipelineConfig(**{k: v for k, v in overrides.items() if v is not None})
    report = pipeline.run_pipeline(cfg)
    print(json.dumps({"overall_accuracy": report.overall_accuracy, "output": cfg.output}))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lowlight-har", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labelled dataset")
    p.add_argument("--classes", default=",".join(synthgen.ACTIONS))
    p.add_argument("--per-class", type=int, default=10)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--frames", type=int, default=40)
    p.add_argument("--width", type=int, default=160)
    p.add_argument("--height", type=int, default=120)
    p.add_argument("--texture-contrast", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("degrade", help="apply an S1/S2/S3 brightness/contrast preset")
    p.add_argument("--preset", required=True, choices=sorted(degrader.PRESETS))
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("enhance", help="ESIHE enhancement of every frame")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-params", metavar="FILE")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("segment", help="entropy-based silhouette masks")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float, help="fixed entropy threshold (default: Otsu)")
    p.add_argument("--window", type=int, default=9)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("features", help="key-pose cell features to CSV")
    p.add_argument("--in", dest="inp", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=keypose.DEFAULT_K)
    p.add_argument("--grid", default="8x6")
    p.add_argument("--size", default="64x48", help="normalized mask size, HxW")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="fit PCA + linear SVM on a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pca-variance", type=float, default=0.95)
    p.add_argument("--C", type=float, default=1.0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="LOOCV or held-out evaluation")
    p.add_argument("--features", required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--loocv", action="store_true")
    mode.add_argument("--model")
    p.add_argument("--report", required=True)
    p.add_argument("--confusion", help="also write the confusion matrix as CSV")
    p.add_argument("--pca-variance", type=float, default=0.95)
    p.add_argument("--pca-scope", choices=("fold", "global"), default="fold")
    p.add_argument("--C", type=float, default=1.0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--in", dest="inp")
    p.add_argument("--out")
    p.add_argument("--preset", choices=("none", "S1", "S2", "S3"))
    p.add_argument("--esihe", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--k", type=int)
    p.add_argument("--grid")
    p.add_argument("--size")
    p.add_argument("--threshold", type=float)
    p.add_argument("--pca-variance", type=float)
    p.add_argument("--pca-scope", choices=("fold", "global"))
    p.add_argument("--C", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except (FrameError, ValueError, OSError, pipeline.PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
