"""Exposure-based sub-image histogram equalization (ESIHE).

The histogram is clipped at its mean bin height, split at the grey level
derived from the exposure threshold, and each half is equalized onto its own
output range.  Clipped bins are integers or multiples of 1/L, so the lookup
table is computed in exact integer arithmetic and rounded half up; float64 is
used only for histograms that do not have that form.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import L
from .frame_store import check_frame


@dataclass(frozen=True)
class EsiheParams:
    exposure_threshold: float  # Et, (0, 1]
    boundary: int  # Ea, grey level splitting the two sub-images
    clip_threshold: float  # Tc, mean bin height
    n_lower: float  # NL, clipped mass on [0, Ea]
    n_upper: float  # NU, clipped mass on [Ea+1, L-1]

    def as_dict(self):
        return asdict(self)


def _round_half_up(x):
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def compute_histogram(frame: np.ndarray) -> np.ndarray:
    frame = check_frame(frame)
    return np.bincount(frame.ravel(), minlength=L).astype(np.int64)


def exposure_threshold(hist: np.ndarray) -> float:
    """Normalized intensity-weighted mean, with grey values counted 1..L.

    An all-255 frame therefore gives exactly 1.0 and an all-0 frame 1/L.
    """
    hist = np.asarray(hist, dtype=np.float64)
    total = hist.sum()
    if hist.shape != (L,) or total <= 0:
        raise ValueError("exposure threshold needs a non-empty 256-bin histogram")
    k = np.arange(1, L + 1, dtype=np.float64)
    return float((hist * k).sum() / (L * total))


def exposure_boundary(et: float) -> int:
    if not 0 < et <= 1:
        raise ValueError(f"exposure threshold must lie in (0, 1], got {et}")
    return int(np.clip(_round_half_up(L * (1.0 - et)), 0, L - 1))


def clip_histogram(hist: np.ndarray):
    """Cap every bin at Tc = total / L.  Returns ``(clipped, Tc)``."""
    hist = np.asarray(hist, dtype=np.float64)
    total = hist.sum()
    if total <= 0:
        raise ValueError("cannot clip an empty histogram")
    tc = total / L
    return np.where(hist >= tc, tc, hist), tc


def _equalize_range(hist_c, lo, hi):
    """Lookup for grey levels lo..hi onto [lo, hi]; identity when the range holds no mass."""
    part = hist_c[lo : hi + 1]
    scaled = part * L
    if np.all(scaled == np.round(scaled)) and scaled.sum() < 2**52:
        # clipped bins are integers or total/L: exact integer arithmetic
        num = np.cumsum(np.round(scaled).astype(np.int64))
        n = int(num[-1])
        if n == 0:
            return np.arange(lo, hi + 1, dtype=np.int64), 0.0
        span = hi - lo
        # lo + round_half_up(span * num / n)
        table = lo + (2 * span * num + n) // (2 * n)
        return table, n / L
    n = part.sum()
    if n <= 0:
        return np.arange(lo, hi + 1, dtype=np.int64), 0.0
    cdf = np.cumsum(part / n)
    return _round_half_up(lo + (hi - lo) * cdf).astype(np.int64), float(n)


def build_transfer(hist_c: np.ndarray, ea: int):
    """Piecewise transfer table.  Returns ``(table, NL, NU)``.

    Lower part: ``Ea * C_L(g)`` on [0, Ea].  Upper part:
    ``(Ea + 1) + (L - 1 - (Ea + 1)) * C_U(g)`` on [Ea + 1, L - 1], which keeps
    the output of the upper sub-image inside [Ea + 1, 255].  Entries are
    rounded half up.
    """
    hist_c = np.asarray(hist_c, dtype=np.float64)
    ea = int(ea)
    if not 0 <= ea <= L - 1:
        raise ValueError(f"boundary must lie in [0, {L - 1}], got {ea}")
    lower, n_lower = _equalize_range(hist_c, 0, ea)
    if ea < L - 1:
        upper, n_upper = _equalize_range(hist_c, ea + 1, L - 1)
    else:
        upper, n_upper = np.empty(0, dtype=np.int64), 0.0
    table = np.concatenate([lower, upper])
    return np.clip(table, 0, L - 1).astype(np.uint8), n_lower, n_upper


def boundary_from_histogram(hist: np.ndarray) -> int:
    """Ea computed exactly from integer counts: round_half_up(L - sum(h k) / sum(h))."""
    hist = np.asarray(hist, dtype=np.int64)
    total = int(hist.sum())
    if total <= 0:
        raise ValueError("empty histogram")
    weighted = int((hist * np.arange(1, L + 1)).sum())
    ea = (2 * (L * total - weighted) + total) // (2 * total)
    return int(min(max(ea, 0), L - 1))


def analyze(frame: np.ndarray):
    """Run the parameter stages on ``frame``.  Returns ``(EsiheParams, table)``."""
    hist = compute_histogram(frame)
    et = exposure_threshold(hist)
    ea = boundary_from_histogram(hist)
    hist_c, tc = clip_histogram(hist)
    table, n_lower, n_upper = build_transfer(hist_c, ea)
    return EsiheParams(et, ea, tc, n_lower, n_upper), table


def enhance(frame: np.ndarray) -> np.ndarray:
    frame = check_frame(frame)
    _, table = analyze(frame)
    return table[frame]
