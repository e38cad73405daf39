"""Seeded synthetic images with exact ground-truth masks."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter

SIZE = 256
KINDS = ("center-object", "boundary-object", "two-objects")


@dataclass(frozen=True)
class DatasetEntry:
    image: Path
    mask: Path | None = None

    @property
    def stem(self) -> str:
        return self.image.stem


def _texture(rng: np.random.Generator, size: int) -> np.ndarray:
    """Fine oriented waves, low-frequency shading, a few interior clutter patches and noise."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    base = rng.uniform(60, 170, size=3)
    img = np.broadcast_to(base, (size, size, 3)).copy()
    for _ in range(3):
        theta = rng.uniform(0, np.pi)
        period = rng.uniform(6, 14)
        phase = rng.uniform(0, 2 * np.pi)
        wave = np.sin(2 * np.pi * (xx * np.cos(theta) + yy * np.sin(theta)) / period + phase)
        img += wave[..., None] * rng.uniform(5, 12, size=3)
    shading = gaussian_filter(rng.normal(size=(size, size, 3)), sigma=(12, 12, 0))
    img += 6 * shading / shading.std()
    # Clutter stays off the borders and away from the centre.
    for _ in range(rng.integers(2, 5)):
        angle, dist = rng.uniform(0, 2 * np.pi), rng.uniform(0.29, 0.39) * size
        cx, cy = size / 2 + dist * np.cos(angle), size / 2 + dist * np.sin(angle)
        radius = rng.uniform(10, 16)
        d = np.hypot(xx + 0.5 - cx, yy + 0.5 - cy)
        soft = np.clip((radius - d) / 2, 0, 1)
        img += soft[..., None] * rng.choice([-1, 1], size=3) * rng.uniform(50, 80, size=3)
    img += rng.uniform(-4, 4, size=img.shape)
    return img


def _object_color(rng: np.random.Generator, background: np.ndarray) -> np.ndarray:
    mean = background.reshape(-1, 3).mean(axis=0)
    while True:
        color = rng.uniform(0, 255, size=3)
        if np.linalg.norm(color - mean) > 140:
            return color


def _ellipse(size: int, cx: float, cy: float, rx: float, ry: float, angle: float) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size] + 0.5
    c, s = np.cos(angle), np.sin(angle)
    u = (xx - cx) * c + (yy - cy) * s
    v = -(xx - cx) * s + (yy - cy) * c
    return (u / rx) ** 2 + (v / ry) ** 2 <= 1.0


def _layout(kind: str, rng: np.random.Generator, size: int) -> np.ndarray:
    if kind == "center-object":
        rx, ry = rng.uniform(38, 60, size=2)
        cx, cy = size / 2 + rng.uniform(-16, 16, size=2)
        return _ellipse(size, cx, cy, rx, ry, rng.uniform(0, np.pi))
    if kind == "boundary-object":
        # Axis-aligned so the extent, and thus which borders are hit, is exact.
        rx, ry = rng.uniform(40, 60, size=2)
        side = rng.choice(["top", "bottom", "left", "right"])
        along = rng.uniform(-24, 24)
        if side in ("top", "bottom"):
            cx = size / 2 + along
            cy = 0.45 * ry if side == "top" else size - 0.45 * ry
        else:
            cy = size / 2 + along
            cx = 0.45 * rx if side == "left" else size - 0.45 * rx
        return _ellipse(size, cx, cy, rx, ry, 0.0)
    if kind == "two-objects":
        mask = np.zeros((size, size), dtype=bool)
        for cx in (size * 0.3, size * 0.7):
            rx, ry = rng.uniform(24, 34, size=2)
            cy = size / 2 + rng.uniform(-30, 30)
            mask |= _ellipse(size, cx + rng.uniform(-8, 8), cy, rx, ry, rng.uniform(0, np.pi))
        return mask
    raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")


def generate(kind: str, seed: int, size: int = SIZE) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(rgb uint8 image, boolean mask)`` for one seeded sample."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    rng = np.random.default_rng([KINDS.index(kind), seed])
    background = _texture(rng, size)
    mask = _layout(kind, rng, size)
    color = _object_color(rng, background)
    obj = color + rng.uniform(-5, 5, size=(size, size, 3))
    img = np.where(mask[..., None], obj, background)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8), mask


def synth(kind: str, seed: int, out_dir, count: int = 1) -> list[DatasetEntry]:
    """Write ``count`` samples (seeds ``seed .. seed+count-1``) under ``out_dir``.

    Images land in ``out_dir/images`` and masks, with the same file name,
    in ``out_dir/masks``.
    """
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    entries = []
    for s in range(seed, seed + count):
        img, mask = generate(kind, s)
        name = f"{kind}_{s:04d}.png"
        image_path, mask_path = out / "images" / name, out / "masks" / name
        Image.fromarray(img).save(image_path, format="PNG")
        Image.fromarray(mask.astype(np.uint8) * 255).save(mask_path, format="PNG")
        entries.append(DatasetEntry(image_path, mask_path))
    return entries
