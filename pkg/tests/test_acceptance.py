"""Exit criteria.  Each test records one PASS/FAIL line, printed in the
terminal summary under "acceptance criteria"."""

import time

import numpy as np
import pytest
from conftest import ACCEPTANCE_RESULTS

from lowlight_har import esihe, keypose, learner, silhouette
from lowlight_har.benchmark import run_benchmark
from lowlight_har.degrader import preset, transfer_table
from lowlight_har.pipeline import PipelineConfig, run_pipeline
from lowlight_har.synthgen import ACTIONS, SynthSpec, gen_clip, two_object_frame
from oracles import TOY_1D, TOY_2D, grid_search_svm
from test_degrader import oracle as degrade_oracle

BENCH_SECONDS_LIMIT = 300.0


def record(name, ok, detail=""):
    ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
    assert ok, f"{name}: {detail}"


def test_esihe_hand_oracle():
    frame = np.array([[0, 64], [64, 192]], np.uint8)
    esihe.enhance(frame)  # warm-up
    times = []
    for _ in range(50):
        t0 = time.perf_counter()
        out = esihe.enhance(frame)
        times.append(time.perf_counter() - t0)
    elapsed = float(np.median(times))
    params, _ = esihe.analyze(frame)
    ok = (
        out.tolist() == [[88, 175], [175, 255]]
        and abs(params.exposure_threshold - 0.316406) <= 1e-6
        and params.boundary == 175
        and params.clip_threshold == 0.015625
        and elapsed < 1e-3
    )
    record("esihe_hand_oracle", ok,
           f"out={out.ravel().tolist()} Et={params.exposure_threshold:.6f} Ea={params.boundary} "
           f"Tc={params.clip_threshold} median t={elapsed * 1e3:.3f}ms")


def test_esihe_property_suite():
    violations = 0
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(1, 33, 2)
        lo = int(rng.integers(0, 256))
        hi = int(rng.integers(lo + 1, 257))
        f = rng.integers(lo, hi, (h, w)).astype(np.uint8)
        p, table = esihe.analyze(f)
        out = esihe.enhance(f)
        ea = p.boundary
        low = f <= ea
        bad = (
            out.shape != f.shape
            or not (out[low] <= ea).all()
            or (p.n_upper > 0 and not (out[~low] >= ea + 1).all())
            or (np.diff(table[: ea + 1].astype(int)) < 0).any()
            or (np.diff(table[ea + 1 :].astype(int)) < 0).any()
        )
        c = np.full((h, w), lo, np.uint8)
        bad = bad or len(np.unique(esihe.enhance(c))) != 1
        violations += int(bad)
    record("esihe_property_suite", violations == 0, f"{violations} violations / 1000 frames")


def test_degradation_oracle():
    checks = mismatches = 0
    for name in ("S1", "S2", "S3"):
        s = preset(name)
        table = transfer_table(s)
        for p in range(256):
            checks += 1
            mismatches += int(table[p] != degrade_oracle(p, s.brightness_pct, s.contrast_pct))
    record("degradation_oracle", checks == 768 and mismatches == 0, f"{mismatches} mismatches / {checks}")


def test_entropy_and_glcm():
    board = (np.indices((8, 8)).sum(axis=0) % 2 * 255).astype(np.uint8)
    e_board = silhouette.texture_entropy(silhouette.glcm(board, (0, 1), levels=2))
    e_four = silhouette.texture_entropy(np.ones((2, 2)))
    const = silhouette.local_entropy_map(np.full((30, 30), 100, np.uint8))
    ok = abs(e_board - 1.0) <= 1e-9 and abs(e_four - 2.0) <= 1e-9 and (const == 0).all()
    record("entropy_glcm", ok, f"checkerboard={e_board:.12f} uniform4={e_four:.12f} const_max={const.max()}")


def test_silhouette_iou_and_two_objects():
    ious = []
    for i in range(20):
        action = ACTIONS[i % 4]
        clip, gt = gen_clip(SynthSpec(action, seed=100 + i))
        t = (7 * i) % len(clip)
        m = silhouette.extract_silhouette(clip.frames[t])
        ious.append((m & gt[t]).sum() / (m | gt[t]).sum())
    two_ok = True
    for seed in range(5):
        f, big, small = two_object_frame(seed)
        m = silhouette.extract_silhouette(f)
        two_ok &= not (m & small).any() and (m & big).sum() > 0
    record("silhouette", min(ious) >= 0.8 and two_ok,
           f"min IoU={min(ious):.3f} mean={np.mean(ious):.3f} two_object={two_ok}")


def test_feature_conservation():
    spec = keypose.GridSpec()
    bad = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        m = rng.random((spec.norm_height, spec.norm_width)) < rng.random()
        bad += int(keypose.cell_counts(m, spec).sum() != m.sum())
    lengths_ok = True
    for k, grid in ((1, "8x6"), (5, "4x3"), (15, "8x6"), (20, "2x2")):
        g = keypose.GridSpec.parse(grid)
        mask = np.zeros((30, 30), bool)
        mask[5:20, 8:14] = True
        lengths_ok &= keypose.build_feature([mask] * 7, k, g).size == k * g.cell_count
    record("feature_conservation", bad == 0 and lengths_ok, f"{bad} conservation failures / 100; lengths_ok={lengths_ok}")


def test_learner_oracles():
    acc_ok = (learner.accuracy(5, 5, 0, 0), learner.accuracy(0, 0, 5, 5), learner.accuracy(3, 2, 1, 4)) == (100.0, 0.0, 50.0)
    rng = np.random.default_rng(0)
    m = learner.pca_fit(rng.normal(size=(40, 12)) * np.arange(1, 13), 1.0)
    ortho = np.abs(m.components @ m.components.T - np.eye(m.retained)).max()
    r1 = learner.pca_fit(np.array([[t, 0.0, 0.0] for t in range(1, 11)]), 0.95)
    rank1_ok = r1.retained == 1 and abs(r1.explained_ratio - 1.0) < 1e-12
    gaps = []
    for X, y, C in (TOY_1D, TOY_2D):
        ref, _, _ = grid_search_svm(X, y, C)
        w, b = learner.binary_svm(X, y, C)
        gaps.append(abs(learner.hinge_objective(w, b, X, y, C) - ref) / ref)
    toy = np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0], [5.0, 5.0]])
    loo = learner.loocv(toy, ["a", "a", "b", "b"]).overall_accuracy
    ok = acc_ok and ortho < 1e-9 and rank1_ok and max(gaps) <= 0.01 and loo == 100.0
    record("learner_oracles", ok,
           f"eq17={acc_ok} ortho_err={ortho:.1e} rank1={rank1_ok} svm_gap={max(gaps):.2e} loocv_toy={loo}")


@pytest.fixture(scope="module")
def benchmark(tmp_path_factory):
    work = tmp_path_factory.mktemp("bench")
    reports, secs = run_benchmark(work, seed=7, per_class=10)
    return work, reports, secs


def test_end_to_end_benchmark(benchmark):
    _, reports, secs = benchmark
    clean = reports["clean"].overall_accuracy
    raw = reports["s3_raw"].overall_accuracy
    enh = reports["s3_esihe"].overall_accuracy
    ok = clean >= 90 and enh >= 85 and enh >= raw and secs < BENCH_SECONDS_LIMIT
    record("end_to_end_benchmark", ok,
           f"clean={clean:.1f}% S3={raw:.1f}% S3+ESIHE={enh:.1f}% wall={secs:.1f}s")


def test_determinism(benchmark):
    work, _, _ = benchmark
    again = work / "clean_again"
    run_pipeline(PipelineConfig(input=str(work / "data"), output=str(again), seed=7))
    a = (work / "clean" / "report.json").read_bytes()
    b = (again / "report.json").read_bytes()
    record("determinism", a == b, f"report bytes {len(a)} vs {len(b)}, identical={a == b}")
