"""Texture-entropy silhouette extraction.

The main path is a local Shannon-entropy filter over a 9x9 window, an Otsu
threshold on the entropy values, and selection of the largest 8-connected
blob.  A grey-level co-occurrence matrix and its entropy are provided as a
standalone texture measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numba import njit
from scipy import ndimage

from .frame_store import check_frame

DEFAULT_WINDOW = 9
EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass
class GlcmMatrix:
    counts: np.ndarray  # (levels, levels)
    levels: int
    offset: Tuple[int, int]
    symmetric: bool


def glcm(frame: np.ndarray, offset=(0, 1), levels: int = 32, symmetric: bool = True) -> GlcmMatrix:
    """Co-occurrence counts of quantized grey levels ``floor(g * levels / 256)``
    over the pixel pairs ``(p, p + offset)``."""
    frame = check_frame(frame)
    if not 2 <= levels <= 256:
        raise ValueError(f"levels must lie in [2, 256], got {levels}")
    dy, dx = (int(v) for v in offset)
    if dy == 0 and dx == 0:
        raise ValueError("offset must be nonzero")
    h, w = frame.shape
    if abs(dy) >= h or abs(dx) >= w:
        raise ValueError(f"frame {frame.shape} too small for offset {offset}")
    q = (frame.astype(np.int64) * levels) // 256
    src = q[max(0, -dy) : h - max(0, dy), max(0, -dx) : w - max(0, dx)]
    dst = q[max(0, dy) : h - max(0, -dy), max(0, dx) : w - max(0, -dx)]
    counts = np.bincount((src * levels + dst).ravel(), minlength=levels * levels)
    counts = counts.reshape(levels, levels)
    if symmetric:
        counts = counts + counts.T
    return GlcmMatrix(counts=counts, levels=levels, offset=(dy, dx), symmetric=symmetric)


def texture_entropy(matrix) -> float:
    """Shannon entropy in bits of the normalized co-occurrence matrix (0 log 0 = 0)."""
    counts = matrix.counts if isinstance(matrix, GlcmMatrix) else np.asarray(matrix)
    counts = counts.astype(np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty co-occurrence matrix")
    p = counts[counts > 0] / total
    return float(max(0.0, -(p * np.log2(p)).sum()))


@njit(cache=True)
def _entropy_kernel(padded, h, w, window, clogc):
    # sliding 256-bin histogram along each row, tracking sum(c log2 c)
    n = window * window
    log2n = np.log2(n)
    out = np.empty((h, w), dtype=np.float64)
    hist = np.zeros(256, dtype=np.int64)
    for y in range(h):
        hist[:] = 0
        s = 0.0
        for dy in range(window):
            for dx in range(window):
                v = padded[y + dy, dx]
                c = hist[v]
                s += clogc[c + 1] - clogc[c]
                hist[v] = c + 1
        out[y, 0] = log2n - s / n
        for x in range(1, w):
            for dy in range(window):
                v = padded[y + dy, x - 1]
                c = hist[v]
                s += clogc[c - 1] - clogc[c]
                hist[v] = c - 1
                v = padded[y + dy, x + window - 1]
                c = hist[v]
                s += clogc[c + 1] - clogc[c]
                hist[v] = c + 1
            out[y, x] = log2n - s / n
    return out


def local_entropy_map(frame: np.ndarray, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Per-pixel entropy (bits) of the grey-level histogram of its
    ``window x window`` neighbourhood, borders replicate-padded.

    For a window of n pixels whose values occur with counts c,
    H = log2(n) - sum(c log2 c) / n.
    """
    frame = check_frame(frame)
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and positive, got {window}")
    h, w = frame.shape
    if h < window or w < window:
        raise ValueError(f"frame {frame.shape} smaller than the {window}x{window} window")
    n = window * window
    c = np.arange(n + 1, dtype=np.float64)
    clogc = np.zeros(n + 1)
    clogc[1:] = c[1:] * np.log2(c[1:])
    padded = np.pad(frame, window // 2, mode="edge")
    ent = _entropy_kernel(padded, h, w, window, clogc)
    ent[ent < 1e-9] = 0.0
    return ent


def otsu_threshold(values: np.ndarray) -> Optional[float]:
    """Exact Otsu threshold over the distinct values of ``values``.

    Returns the smallest value of the upper class maximizing the
    between-class variance, or ``None`` if all values are equal.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    uniq, counts = np.unique(v, return_counts=True)
    if uniq.size < 2:
        return None
    w0 = np.cumsum(counts)[:-1].astype(np.float64)
    s0 = np.cumsum(uniq * counts)[:-1]
    total_n = float(counts.sum())
    total_s = float((uniq * counts).sum())
    w1 = total_n - w0
    mu0 = s0 / w0
    mu1 = (total_s - s0) / w1
    between = w0 * w1 * (mu0 - mu1) ** 2
    return float(uniq[int(np.argmax(between)) + 1])


def binarize(entropy_map: np.ndarray, threshold: Optional[float] = None) -> np.ndarray:
    """True where the entropy reaches the threshold (Otsu unless given).
    A constant map yields an all-false mask when no threshold is given."""
    emap = np.asarray(entropy_map, dtype=np.float64)
    if emap.size == 0:
        raise ValueError("empty entropy map")
    if threshold is None:
        threshold = otsu_threshold(emap)
        if threshold is None:
            return np.zeros(emap.shape, dtype=bool)
    return emap >= threshold


def largest_blob(mask: np.ndarray) -> np.ndarray:
    """Keep the largest 8-connected component.

    Components are labelled in raster order, so on equal areas the one whose
    first pixel comes earliest in row-major order is kept.
    """
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if count == 0:
        return np.zeros_like(mask)
    areas = np.bincount(labels.ravel())
    areas[0] = 0
    return labels == int(np.argmax(areas))


def extract_silhouette(
    frame: np.ndarray, window: int = DEFAULT_WINDOW, threshold: Optional[float] = None
) -> np.ndarray:
    return largest_blob(binarize(local_entropy_map(frame, window), threshold))
