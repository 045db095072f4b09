"""Brightness/contrast reduction used to build the low-quality subsets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame_store import check_frame


@dataclass(frozen=True)
class DegradeSpec:
    brightness_pct: float = 0.0
    contrast_pct: float = 0.0

    def __post_init__(self):
        for name in ("brightness_pct", "contrast_pct"):
            v = getattr(self, name)
            if not -100 <= v <= 100:
                raise ValueError(f"{name} must lie in [-100, 100], got {v}")


PRESETS = {
    "S1": DegradeSpec(-20, -20),
    "S2": DegradeSpec(-40, -40),
    "S3": DegradeSpec(-50, -50),
}


def preset(name: str) -> DegradeSpec:
    try:
        return PRESETS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None


def transfer_table(spec: DegradeSpec) -> np.ndarray:
    """256-entry lookup implementing the degradation.

    p' = clamp(round_half_up((p - 128)(1 + c/100) + 128 + 255 b/100), 0, 255)

    Evaluated as ``num / 100`` with ``num`` integral for integer percents, so
    exact half-way cases are represented exactly.
    """
    p = np.arange(256, dtype=np.float64)
    num = (p - 128.0) * (100.0 + spec.contrast_pct) + 12800.0 + 255.0 * spec.brightness_pct
    out = np.floor(num / 100.0 + 0.5)
    return np.clip(out, 0, 255).astype(np.uint8)


def degrade(frame: np.ndarray, spec: DegradeSpec) -> np.ndarray:
    frame = check_frame(frame)
    return transfer_table(spec)[frame]
