from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from lowlight_har import esihe

WORKED = np.array([[0, 64], [64, 192]], np.uint8)


def reference_table(frame):
    """Loop-level ESIHE in exact rationals, written straight from the formulas."""
    L = 256
    h = [0] * L
    for v in frame.ravel():
        h[int(v)] += 1
    total = sum(h)
    et = Fraction(sum(h[g] * (g + 1) for g in range(L)), L * total)
    x = L * (1 - et)
    ea = min(max((x + Fraction(1, 2)).__floor__(), 0), L - 1)
    tc = Fraction(total, L)
    hc = [tc if h[g] >= tc else Fraction(h[g]) for g in range(L)]
    nl = sum(hc[: ea + 1])
    nu = sum(hc[ea + 1 :])
    table = []
    run = Fraction(0)
    for g in range(ea + 1):
        if nl == 0:
            table.append(g)
            continue
        run += hc[g] / nl
        table.append((ea * run + Fraction(1, 2)).__floor__())
    run = Fraction(0)
    for g in range(ea + 1, L):
        if nu == 0:
            table.append(g)
            continue
        run += hc[g] / nu
        table.append(((ea + 1) + (L - 1 - (ea + 1)) * run + Fraction(1, 2)).__floor__())
    return np.array(table), float(et), ea, float(tc)


def test_histogram_counts():
    h = esihe.compute_histogram(WORKED)
    assert h.shape == (256,)
    assert (h[0], h[64], h[192]) == (1, 2, 1)
    assert h.sum() == 4
    h7 = esihe.compute_histogram(np.full((2, 2), 7, np.uint8))
    assert h7[7] == 4 and h7.sum() == 4


@pytest.mark.parametrize(
    "value,expected", [(255, 1.0), (0, 1 / 256)]
)
def test_exposure_threshold_extremes(value, expected):
    h = esihe.compute_histogram(np.full((3, 3), value, np.uint8))
    assert esihe.exposure_threshold(h) == pytest.approx(expected, abs=1e-15)


def test_worked_exposure_and_boundary():
    h = esihe.compute_histogram(WORKED)
    et = esihe.exposure_threshold(h)
    assert et == pytest.approx(324 / 1024, abs=1e-12)
    assert esihe.exposure_boundary(et) == 175


@pytest.mark.parametrize("et,ea", [(1.0, 0), (0.5, 128), (1 / 256, 255)])
def test_boundary(et, ea):
    assert esihe.exposure_boundary(et) == ea


def test_empty_histogram_rejected():
    with pytest.raises(ValueError):
        esihe.exposure_threshold(np.zeros(256))


def test_clip_worked():
    hc, tc = esihe.clip_histogram(esihe.compute_histogram(WORKED))
    assert tc == 0.015625
    assert hc[0] == hc[64] == hc[192] == 0.015625
    assert np.count_nonzero(hc) == 3


def test_clip_single_bin():
    h = np.zeros(256)
    h[10] = 100
    hc, tc = esihe.clip_histogram(h)
    assert tc == 0.390625 and hc[10] == 0.390625 and hc.sum() == 0.390625


def test_clip_uniform_fixed_point():
    h = np.full(256, 3.0)
    hc, tc = esihe.clip_histogram(h)
    assert tc == 3.0
    np.testing.assert_array_equal(hc, h)


def test_transfer_worked():
    hc, _ = esihe.clip_histogram(esihe.compute_histogram(WORKED))
    table, nl, nu = esihe.build_transfer(hc, 175)
    assert (table[0], table[64], table[192]) == (88, 175, 255)
    assert nl == pytest.approx(2 * 0.015625) and nu == pytest.approx(0.015625)


def test_transfer_single_dark_bin():
    h = np.zeros(256)
    h[0] = 50
    table, _, _ = esihe.build_transfer(h, 128)
    assert table[0] == 128


def test_transfer_empty_lower_is_identity():
    h = np.zeros(256)
    h[200] = 5
    table, nl, _ = esihe.build_transfer(h, 100)
    assert nl == 0
    np.testing.assert_array_equal(table[:101], np.arange(101))


def test_enhance_worked():
    np.testing.assert_array_equal(esihe.enhance(WORKED), [[88, 175], [175, 255]])


def test_params_worked():
    p, _ = esihe.analyze(WORKED)
    assert p.exposure_threshold == pytest.approx(0.316406, abs=1e-6)
    assert p.boundary == 175
    assert p.clip_threshold == 0.015625
    assert p.n_lower + p.n_upper == pytest.approx(3 * 0.015625)


@pytest.mark.parametrize("seed", range(25))
def test_matches_rational_reference(seed):
    rng = np.random.default_rng(seed)
    # mix of dark, bright and full-range frames
    lo, hi = sorted(rng.integers(0, 257, 2))
    hi = max(hi, lo + 1)
    f = rng.integers(lo, hi, (rng.integers(1, 20), rng.integers(1, 20)), dtype=np.int64).astype(np.uint8)
    table, et, ea, tc = reference_table(f)
    p, got = esihe.analyze(f)
    assert p.exposure_threshold == pytest.approx(et, abs=1e-12)
    assert p.boundary == ea
    assert p.clip_threshold == pytest.approx(tc)
    np.testing.assert_array_equal(got, table)


def check_invariants(frame):
    p, table = esihe.analyze(frame)
    out = esihe.enhance(frame)
    ea = p.boundary
    assert out.shape == frame.shape and out.dtype == np.uint8
    low = frame <= ea
    assert (out[low] <= ea).all()
    if p.n_upper > 0:
        assert (out[~low] >= ea + 1).all()
    assert (np.diff(table[: ea + 1].astype(int)) >= 0).all()
    assert (np.diff(table[ea + 1 :].astype(int)) >= 0).all()
    # rank order within each sub-image
    f, o = frame.ravel().astype(int), out.ravel().astype(int)
    for part in (f <= ea, f > ea):
        order = np.argsort(f[part], kind="stable")
        assert (np.diff(o[part][order]) >= 0).all()


@settings(max_examples=200, deadline=None)
@given(hnp.arrays(np.uint8, hnp.array_shapes(min_dims=2, max_dims=2, max_side=24)))
def test_invariants_property(frame):
    check_invariants(frame)


@given(st.integers(0, 255), st.integers(1, 12), st.integers(1, 12))
def test_constant_in_constant_out(v, h, w):
    out = esihe.enhance(np.full((h, w), v, np.uint8))
    assert len(np.unique(out)) == 1


@pytest.mark.parametrize("seed", range(40))
def test_exact_boundary_agrees_with_float_path_off_ties(seed):
    rng = np.random.default_rng(1000 + seed)
    f = rng.integers(0, 256, (9, 11), dtype=np.int64).astype(np.uint8)
    h = esihe.compute_histogram(f)
    x = 256 * (1 - esihe.exposure_threshold(h))
    if abs(x - np.floor(x) - 0.5) > 1e-9:
        assert esihe.boundary_from_histogram(h) == esihe.exposure_boundary(esihe.exposure_threshold(h))


def test_float_histogram_path():
    h = np.zeros(256)
    h[[10, 20, 30]] = [0.3, 0.3, 0.4]
    table, nl, nu = esihe.build_transfer(h, 100)
    assert nu == 0 and nl == pytest.approx(1.0)
    assert (table[10], table[20], table[30]) == (30, 60, 100)
