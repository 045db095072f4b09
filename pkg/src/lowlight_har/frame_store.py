"""Grayscale frame and clip I/O.

A frame is a 2-D ``uint8`` numpy array of shape ``(height, width)``.  Binary
PGM (P5, maxval 255) is the canonical on-disk format; PNG is accepted on
input.  A clip is a directory of frame files ordered by filename and named
``<class>__<id>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

FRAME_SUFFIXES = (".pgm", ".png")
LABEL_SEP = "__"


class FrameError(ValueError):
    """Raised for unreadable, malformed or inconsistent frames."""


def check_frame(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.ndim != 2 or frame.shape[0] == 0 or frame.shape[1] == 0:
        raise FrameError(f"frame must be a non-empty 2-D array, got shape {frame.shape}")
    if frame.dtype != np.uint8:
        if np.issubdtype(frame.dtype, np.integer) and frame.min() >= 0 and frame.max() <= 255:
            frame = frame.astype(np.uint8)
        else:
            raise FrameError(f"frame intensities must be integers in [0, 255], dtype {frame.dtype}")
    return frame


def rgb_to_luma(rgb: np.ndarray) -> np.ndarray:
    """Rec.601 luma, rounded half up: round(0.299 R + 0.587 G + 0.114 B)."""
    rgb = rgb.astype(np.int64)
    y = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return y.astype(np.uint8)


def load_frame(path) -> np.ndarray:
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                arr = np.array(im, dtype=np.uint8)
            elif mode == "1":
                arr = np.array(im.convert("L"), dtype=np.uint8)
            elif mode in ("RGB", "RGBA", "P", "LA"):
                if mode == "LA":
                    arr = np.array(im.getchannel(0), dtype=np.uint8)
                else:
                    arr = rgb_to_luma(np.array(im.convert("RGB"), dtype=np.uint8))
            else:
                raise FrameError(f"{path}: unsupported image mode {mode!r}")
    except (OSError, UnidentifiedImageError) as exc:
        raise FrameError(f"{path}: cannot read image ({exc})") from exc
    if arr.ndim != 2 or 0 in arr.shape:
        raise FrameError(f"{path}: zero-dimension image")
    return arr


def save_frame(frame: np.ndarray, path) -> None:
    """Write ``frame`` as binary PGM (P5, maxval 255)."""
    frame = check_frame(frame)
    h, w = frame.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(frame).tobytes())
    except OSError as exc:
        raise FrameError(f"{path}: cannot write frame ({exc})") from exc


def save_mask(mask: np.ndarray, path) -> None:
    save_frame(np.where(mask, 255, 0).astype(np.uint8), path)


def load_mask(path) -> np.ndarray:
    return load_frame(path) > 127


@dataclass
class Clip:
    frames: List[np.ndarray]
    id: str
    label: Optional[str] = None
    names: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.frames:
            shape = self.frames[0].shape
            for i, f in enumerate(self.frames):
                if f.shape != shape:
                    raise FrameError(
                        f"clip {self.id}: frame {i} has shape {f.shape}, expected {shape}"
                    )
        if not self.names:
            self.names = [f"f{i:03d}.pgm" for i in range(len(self.frames))]

    def __len__(self):
        return len(self.frames)

    @property
    def shape(self):
        return self.frames[0].shape


def parse_clip_name(name: str):
    """``"wave__03"`` -> ``("wave", "03")``; names without the separator have no label."""
    if LABEL_SEP in name:
        label, _, ident = name.partition(LABEL_SEP)
        return label, ident
    return None, name


def frame_files(directory) -> List[Path]:
    directory = Path(directory)
    return sorted(
        (p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in FRAME_SUFFIXES),
        key=lambda p: p.name,
    )


def load_clip(directory) -> Clip:
    directory = Path(directory)
    if not directory.is_dir():
        raise FrameError(f"{directory}: not a directory")
    files = frame_files(directory)
    if not files:
        raise FrameError(f"{directory}: no frame files")
    frames = [load_frame(p) for p in files]
    label, _ = parse_clip_name(directory.name)
    return Clip(frames=frames, id=directory.name, label=label, names=[p.name for p in files])


def save_clip(clip: Clip, directory, masks: bool = False) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, frame in zip(clip.names, clip.frames):
        out = directory / (Path(name).stem + ".pgm")
        if masks:
            save_mask(frame, out)
        else:
            save_frame(frame, out)


def is_clip_dir(directory) -> bool:
    directory = Path(directory)
    return directory.is_dir() and any(
        p.suffix.lower() in FRAME_SUFFIXES for p in directory.iterdir() if p.is_file()
    )


def list_clip_dirs(root) -> List[Path]:
    """Clip directories under ``root``: ``root`` itself if it holds frames,
    otherwise its labelled ``<class>__<id>`` subdirectories in name order."""
    root = Path(root)
    if not root.is_dir():
        raise FrameError(f"{root}: not a directory")
    if is_clip_dir(root):
        return [root]
    return sorted(
        (d for d in root.iterdir() if d.is_dir() and LABEL_SEP in d.name and is_clip_dir(d)),
        key=lambda d: d.name,
    )

