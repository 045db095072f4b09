#!/usr/bin/env python
"""Run the synthetic 4-class benchmark and print LOOCV accuracy per condition.

    python scripts/run_benchmark.py --out bench --seed 7 --per-class 10
"""

import argparse
import json
import tempfile

from lowlight_har.benchmark import run_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="work directory (default: a temp dir)")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--per-class", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = args.out or tempfile.mkdtemp(prefix="lowlight_bench_")
    reports, secs = run_benchmark(out, args.seed, args.per_class, workers=args.workers)
    summary = {name: r.overall_accuracy for name, r in reports.items()}
    for name, r in reports.items():
        print(f"{name:10s} {r.overall_accuracy:6.2f}%")
        print(r.confusion_csv())
    print(json.dumps({"accuracy": summary, "seconds": round(secs, 1), "workdir": out}))


if __name__ == "__main__":
    main()
