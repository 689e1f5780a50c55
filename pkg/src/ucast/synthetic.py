"""Procedural desk-scale corpora.

"Artistic" images are random shape layouts rendered with a style-specific
palette and stroke texture; "realistic" images are smooth gradients with
softly shaded geometric shapes.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

STYLES = {
    "ember": {"palette": [(0.55, 0.08, 0.05), (0.93, 0.45, 0.10), (0.99, 0.82, 0.30), (0.30, 0.05, 0.10)],
              "texture": "stripes"},
    "tide": {"palette": [(0.05, 0.20, 0.45), (0.10, 0.55, 0.60), (0.70, 0.90, 0.85), (0.02, 0.08, 0.20)],
             "texture": "stipple"},
    "moss": {"palette": [(0.20, 0.35, 0.10), (0.55, 0.65, 0.25), (0.85, 0.85, 0.60), (0.10, 0.15, 0.05)],
             "texture": "crosshatch"},
    "violet": {"palette": [(0.35, 0.10, 0.45), (0.75, 0.35, 0.70), (0.95, 0.80, 0.95), (0.15, 0.02, 0.20)],
               "texture": "swirl"},
}
STYLE_NAMES = list(STYLES)


def _shape_layout(rng: np.random.Generator, size: int, n_shapes: int = 6) -> np.ndarray:
    """Integer label map: background 0, shapes 1..3."""
    yy, xx = np.mgrid[0:size, 0:size] / size
    labels = np.zeros((size, size), dtype=np.int64)
    for _ in range(n_shapes):
        cx, cy = rng.uniform(0.1, 0.9, 2)
        r = rng.uniform(0.08, 0.3)
        label = rng.integers(1, 4)
        if rng.random() < 0.5:
            inside = (xx - cx) ** 2 + (yy - cy) ** 2 < r ** 2
        else:
            inside = (np.abs(xx - cx) < r) & (np.abs(yy - cy) < r * rng.uniform(0.4, 1.0))
        labels[inside] = label
    return labels


def _texture(kind: str, rng: np.random.Generator, size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    phase = rng.uniform(0, 2 * np.pi)
    period = rng.uniform(2.5, 8.0) * size / 64
    if kind == "stripes":
        angle = rng.uniform(0.6, 1.0)
        t = np.sin((xx * np.cos(angle) + yy * np.sin(angle)) * 2 * np.pi / period + phase)
    elif kind == "stipple":
        t = rng.standard_normal((size, size))
        t = np.clip(t * 1.5, -1, 1)
    elif kind == "crosshatch":
        t = 0.5 * (np.sin((xx + yy) * 2 * np.pi / period + phase) + np.sin((xx - yy) * 2 * np.pi / period))
    elif kind == "swirl":
        cx, cy = rng.uniform(0, size, 2)
        r = np.hypot(xx - cx, yy - cy)
        t = np.sin(r * 2 * np.pi / (period * 1.5) + phase)
    else:
        raise ValueError(f"unknown texture {kind!r}")
    return t


def make_style_image(style: str, rng: np.random.Generator, size: int = 64) -> np.ndarray:
    """(size, size, 3) float image in [0, 1] drawn from the named style.

    Each draw jitters the family palette, texture period and texture strength,
    so images of one style share a look without being interchangeable.
    """
    family = STYLES[style]
    palette = np.clip(np.asarray(family["palette"]) * rng.uniform(0.75, 1.25, 3), 0, 1)
    labels = _shape_layout(rng, size)
    img = palette[labels]
    tex = _texture(family["texture"], rng, size)
    strength = rng.uniform(0.2, 0.5)
    img = img * (1 + strength * tex[..., None]) + 0.02 * rng.standard_normal((size, size, 1))
    return np.clip(img, 0, 1)


def make_content_image(rng: np.random.Generator, size: int = 64) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size] / size
    top, bottom = rng.uniform(0.2, 0.9, 3), rng.uniform(0.1, 0.7, 3)
    img = top * (1 - yy[..., None]) + bottom * yy[..., None]
    for _ in range(rng.integers(2, 5)):
        cx, cy = rng.uniform(0.15, 0.85, 2)
        r = rng.uniform(0.08, 0.25)
        color = rng.uniform(0.05, 0.95, 3)
        d = np.hypot(xx - cx, yy - cy) / r if rng.random() < 0.5 else np.maximum(np.abs(xx - cx), np.abs(yy - cy)) / r
        inside = d < 1
        shade = 1 - 0.3 * (yy - cy) / r
        img[inside] = np.clip(color * shade[inside][:, None], 0, 1)
    return np.clip(img, 0, 1)


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.round(np.clip(img, 0, 1) * 255).astype(np.uint8)


def write_corpus(root, n_content: int = 64, n_per_style: int = 32, styles=("ember", "tide"),
                 size: int = 64, seed: int = 0) -> dict:
    """Write ``root/real/*.png`` and ``root/art/*.png``; returns the directories
    plus a mapping from artistic file stem to style name."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    real, art = root / "real", root / "art"
    real.mkdir(parents=True, exist_ok=True)
    art.mkdir(parents=True, exist_ok=True)
    for k in range(n_content):
        Image.fromarray(to_uint8(make_content_image(rng, size))).save(real / f"real_{k:04d}.png")
    labels = {}
    for style in styles:
        for k in range(n_per_style):
            stem = f"{style}_{k:04d}"
            Image.fromarray(to_uint8(make_style_image(style, rng, size))).save(art / f"{stem}.png")
            labels[stem] = style
    return {"real": real, "art": art, "labels": labels}
