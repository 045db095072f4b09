"""Key-pose selection and grid-cell white-pixel features."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

DEFAULT_K = 15


@dataclass(frozen=True)
class GridSpec:
    rows: int = 8
    cols: int = 6
    norm_height: int = 64
    norm_width: int = 48

    def __post_init__(self):
        if min(self.rows, self.cols, self.norm_height, self.norm_width) < 1:
            raise ValueError("grid and raster sizes must be positive")
        if self.norm_height % self.rows or self.norm_width % self.cols:
            raise ValueError(
                f"{self.rows}x{self.cols} grid does not tile a "
                f"{self.norm_height}x{self.norm_width} raster"
            )

    @property
    def cell_count(self) -> int:
        return self.rows * self.cols

    @property
    def cell_shape(self):
        return self.norm_height // self.rows, self.norm_width // self.cols

    @classmethod
    def parse(cls, grid: str, size: Optional[str] = None) -> "GridSpec":
        """``GridSpec.parse("8x6", "64x48")``: rows x cols, height x width."""
        rows, cols = (int(v) for v in grid.lower().split("x"))
        if size is None:
            return cls(rows, cols)
        nh, nw = (int(v) for v in size.lower().split("x"))
        return cls(rows, cols, nh, nw)


@dataclass
class KeyPoseSet:
    indices: List[int]
    masks: List[np.ndarray]

    @property
    def k(self) -> int:
        return len(self.indices)


@dataclass
class FeatureMatrix:
    values: np.ndarray  # (clips, k * cells), int64
    labels: List[Optional[str]]
    ids: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 2:
            raise ValueError("feature matrix must be 2-D")
        if len(self.labels) != self.values.shape[0]:
            raise ValueError("one label per row required")
        if not self.ids:
            self.ids = [f"clip{i:03d}" for i in range(self.values.shape[0])]


class FeatureError(ValueError):
    pass


def frame_energy(mask: np.ndarray) -> int:
    """Sum of squared pixel values; for a 0/1 mask, the white-pixel count."""
    m = np.asarray(mask).astype(np.int64)
    return int((m * m).sum())


def select_keyframes(masks: Sequence[np.ndarray], k: int = DEFAULT_K) -> List[int]:
    """Indices of the ``k`` highest-energy frames in temporal order.

    Ties in energy go to the earlier frame.  Clips shorter than ``k`` keep all
    frames (temporally sorted) and are padded by repeating the index of the
    highest-energy frame.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(masks) == 0:
        raise FeatureError("no frames to select from")
    energies = np.array([frame_energy(m) for m in masks])
    order = np.argsort(-energies, kind="stable")
    chosen = sorted(int(i) for i in order[:k])
    chosen += [int(order[0])] * (k - len(chosen))
    return chosen


def normalize_pose(mask: np.ndarray, spec: GridSpec = GridSpec()) -> np.ndarray:
    """Crop to the foreground bounding box and resize by nearest neighbour."""
    mask = np.asarray(mask, dtype=bool)
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        raise FeatureError("cannot normalize an empty mask")
    box = mask[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]
    bh, bw = box.shape
    ri = ((np.arange(spec.norm_height) + 0.5) * bh / spec.norm_height).astype(np.int64)
    ci = ((np.arange(spec.norm_width) + 0.5) * bw / spec.norm_width).astype(np.int64)
    return box[np.ix_(ri, ci)]


def cell_counts(mask: np.ndarray, spec: GridSpec = GridSpec()) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (spec.norm_height, spec.norm_width):
        raise FeatureError(
            f"mask {mask.shape} does not match normalized size "
            f"{(spec.norm_height, spec.norm_width)}"
        )
    ch, cw = spec.cell_shape
    cells = mask.reshape(spec.rows, ch, spec.cols, cw)
    return cells.sum(axis=(1, 3), dtype=np.int64).ravel()


def key_poses(masks: Sequence[np.ndarray], k: int = DEFAULT_K, spec: GridSpec = GridSpec()) -> KeyPoseSet:
    """Select and normalize key poses.  A selected frame with no foreground
    is replaced by the clip's highest-energy mask."""
    energies = [frame_energy(m) for m in masks]
    if not energies or max(energies) == 0:
        raise FeatureError("clip has no foreground in any frame")
    idx = select_keyframes(masks, k)
    best = int(np.argmax(energies))
    norm = [normalize_pose(masks[i] if energies[i] > 0 else masks[best], spec) for i in idx]
    return KeyPoseSet(indices=idx, masks=norm)


def build_feature(masks: Sequence[np.ndarray], k: int = DEFAULT_K, spec: GridSpec = GridSpec()) -> np.ndarray:
    """Concatenated per-cell counts of the ``k`` key poses, length ``k * cells``."""
    poses = key_poses(masks, k, spec)
    return np.concatenate([cell_counts(m, spec) for m in poses.masks])


def build_matrix(clips, k: int = DEFAULT_K, spec: GridSpec = GridSpec()) -> FeatureMatrix:
    """One feature row per clip.  ``clips`` holds objects with ``frames``
    (binary masks), ``label`` and ``id``."""
    clips = list(clips)
    if not clips:
        raise FeatureError("empty dataset")
    rows = []
    for clip in clips:
        try:
            rows.append(build_feature(clip.frames, k, spec))
        except (FeatureError, ValueError) as exc:
            raise FeatureError(f"clip {clip.id}: {exc}") from exc
    return FeatureMatrix(
        values=np.vstack(rows), labels=[c.label for c in clips], ids=[c.id for c in clips]
    )
