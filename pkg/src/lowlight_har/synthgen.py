"""Procedural action clips with ground-truth masks.

The actor is a stick-figure blob (head disc, torso ellipse, capsule limbs)
filled with seeded high-variance noise over a flat, faintly noisy background.
Silhouette extraction keys on texture entropy, so the actor is the textured
region and the background is flat, which is the reverse of natural footage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .frame_store import Clip

ACTIONS = ("wave", "walk", "jump", "bend")
BACKGROUND = 128
BACKGROUND_NOISE = 2


@dataclass(frozen=True)
class SynthSpec:
    action_class: str = "wave"
    seed: int = 0
    frames: int = 40
    width: int = 160
    height: int = 120
    texture_contrast: int = 100

    def __post_init__(self):
        if self.action_class not in ACTIONS:
            raise ValueError(f"unknown action {self.action_class!r}; expected one of {ACTIONS}")
        if self.frames < 10:
            raise ValueError("need at least 10 frames")
        if self.width < 32 or self.height < 32:
            raise ValueError("frames must be at least 32x32")
        if not 1 <= self.texture_contrast <= 127:
            raise ValueError("texture_contrast must lie in [1, 127]")


def _rot(deg):
    """Unit vector at ``deg`` degrees from straight down, positive toward +x."""
    a = np.deg2rad(deg)
    return np.array([np.sin(a), np.cos(a)])  # (x, y), y grows downward


class _Canvas:
    def __init__(self, h, w):
        self.yy, self.xx = np.mgrid[0:h, 0:w].astype(np.float64)
        self.mask = np.zeros((h, w), dtype=bool)

    def disc(self, c, r):
        self.mask |= (self.xx - c[0]) ** 2 + (self.yy - c[1]) ** 2 <= r * r

    def ellipse(self, c, ax, ay, tilt_deg=0.0):
        t = np.deg2rad(tilt_deg)
        dx, dy = self.xx - c[0], self.yy - c[1]
        u = dx * np.cos(t) + dy * np.sin(t)
        v = -dx * np.sin(t) + dy * np.cos(t)
        self.mask |= (u / ax) ** 2 + (v / ay) ** 2 <= 1.0

    def limb(self, a, direction, length, width):
        """Rectangle of ``length`` x ``width`` from point ``a`` along ``direction``."""
        dx, dy = self.xx - a[0], self.yy - a[1]
        along = dx * direction[0] + dy * direction[1]
        across = -dx * direction[1] + dy * direction[0]
        self.mask |= (along >= -width / 2) & (along <= length) & (np.abs(across) <= width / 2)
        return np.asarray(a) + length * np.asarray(direction)


def _pose(cls, t, p):
    """Joint angles and offsets for frame ``t`` of class ``cls``; ``p`` holds
    the clip's random parameters."""
    ph = 2 * np.pi * t / p["period"] + p["phase"]
    s = np.sin(ph)
    pose = dict(
        dx=0.0, dy=0.0, torso=0.0,
        arm_l=20.0, arm_r=-20.0, leg_l=8.0, leg_r=-8.0,
    )
    if cls == "wave":
        pose["arm_r"] = -(95.0 + 65.0 * s)  # sweeps from low to nearly overhead
    elif cls == "walk":
        pose["dx"] = p["speed"] * t
        pose["leg_l"], pose["leg_r"] = 28.0 * s, -28.0 * s
        pose["arm_l"], pose["arm_r"] = -22.0 * s, 22.0 * s
    elif cls == "jump":
        lift = abs(s)
        pose["dy"] = -10.0 * lift
        pose["arm_l"], pose["arm_r"] = 20.0 + 130.0 * lift, -(20.0 + 130.0 * lift)
        pose["leg_l"], pose["leg_r"] = 8.0 + 22.0 * lift, -(8.0 + 22.0 * lift)
    elif cls == "bend":
        pose["torso"] = 35.0 + 35.0 * s  # forward lean 0..70 degrees
        pose["arm_l"] = pose["arm_r"] = 0.0
    return pose


def _render(cls, t, p, h, w):
    q = _pose(cls, t, p)
    sc = p["scale"]
    hip = np.array([p["x0"] + q["dx"], p["y0"] + q["dy"]])
    cv = _Canvas(h, w)
    # legs hang from the hip
    leg_len = 36.0 * sc
    for side, ang in ((-1, q["leg_l"]), (1, q["leg_r"])):
        cv.limb(hip + np.array([6.0 * side * sc, 0.0]), _rot(ang), leg_len, 14.0 * sc)
    # torso leans by rotating the up-axis toward +x
    lean = np.deg2rad(q["torso"])
    up = np.array([np.sin(lean), -np.cos(lean)])
    torso_len = 34.0 * sc
    cv.ellipse(hip + up * torso_len / 2, 15.0 * sc, torso_len / 2 + 3.0, tilt_deg=q["torso"])
    shoulder = hip + up * torso_len * 0.85
    cv.disc(hip + up * (torso_len + 10.0 * sc), 10.0 * sc)
    for side, ang in ((-1, q["arm_l"]), (1, q["arm_r"])):
        cv.limb(shoulder, _rot(ang + q["torso"]), 30.0 * sc, 13.0 * sc)
    return cv.mask


def _clip_params(spec: SynthSpec, rng: np.random.Generator):
    w, h = spec.width, spec.height
    scale = rng.uniform(0.9, 1.05) * min(h / 120.0, w / 160.0)
    p = dict(
        scale=scale,
        period=rng.uniform(14.0, 22.0) * spec.frames / 40.0,
        phase=rng.uniform(0, 2 * np.pi),
        y0=h * 0.6 + rng.uniform(-2, 2),
    )
    if spec.action_class == "walk":
        p["speed"] = rng.uniform(1.3, 1.7) * (w / 160.0) * 40.0 / spec.frames
        travel = p["speed"] * (spec.frames - 1)
        p["x0"] = (w - travel) / 2 + rng.uniform(-4, 4)
    else:
        p["speed"] = 0.0
        p["x0"] = w / 2 + rng.uniform(-12, 12) * w / 160.0
    return p


def texture_fill(mask: np.ndarray, rng: np.random.Generator, contrast: int = 100) -> np.ndarray:
    """Flat background with faint noise; textured noise inside ``mask``."""
    h, w = mask.shape
    bg = BACKGROUND + rng.integers(-BACKGROUND_NOISE, BACKGROUND_NOISE + 1, size=(h, w))
    tex = rng.integers(BACKGROUND - contrast, BACKGROUND + contrast + 1, size=(h, w))
    return np.where(mask, tex, bg).astype(np.uint8)


def gen_clip(spec: SynthSpec, clip_id: str | None = None) -> Tuple[Clip, List[np.ndarray]]:
    """Deterministic clip and per-frame ground-truth masks for ``spec``."""
    rng = np.random.default_rng([spec.seed, ACTIONS.index(spec.action_class)])
    params = _clip_params(spec, rng)
    frames, masks = [], []
    for t in range(spec.frames):
        m = _render(spec.action_class, t, params, spec.height, spec.width)
        masks.append(m)
        frames.append(texture_fill(m, rng, spec.texture_contrast))
    cid = clip_id or f"{spec.action_class}__s{spec.seed}"
    return Clip(frames=frames, id=cid, label=spec.action_class), masks


def gen_dataset(
    classes: Sequence[str] = ACTIONS, per_class: int = 10, base_seed: int = 7, **spec_kw
) -> List[Tuple[Clip, List[np.ndarray]]]:
    """``per_class`` clips per class; clip ``i`` of a class uses seed ``base_seed + i``."""
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    out = []
    for cls in classes:
        for i in range(per_class):
            spec = SynthSpec(action_class=cls, seed=base_seed + i, **spec_kw)
            out.append(gen_clip(spec, clip_id=f"{cls}__{i:02d}"))
    return out


def two_object_frame(seed: int = 0, size=(120, 160), big=(40, 30), small=(18, 14), contrast: int = 100):
    """Frame with two textured rectangles of different area on a flat background.
    Returns ``(frame, big_mask, small_mask)``."""
    rng = np.random.default_rng(seed)
    h, w = size
    big_m = np.zeros(size, dtype=bool)
    small_m = np.zeros(size, dtype=bool)
    by, bx = rng.integers(10, h - big[0] - 10), rng.integers(10, w // 2 - big[1])
    sy, sx = rng.integers(10, h - small[0] - 10), rng.integers(w // 2 + 10, w - small[1] - 10)
    big_m[by : by + big[0], bx : bx + big[1]] = True
    small_m[sy : sy + small[0], sx : sx + small[1]] = True
    return texture_fill(big_m | small_m, rng, contrast), big_m, small_m
