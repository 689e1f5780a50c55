"""PNG/JPEG reading and writing for unit-range ``(3, H, W)`` tensors."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import torch
from PIL import Image, ImageOps, UnidentifiedImageError

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


def num_workers() -> int:
    try:
        return max(int(os.environ.get("UCAST_NUM_WORKERS", "0")), 0)
    except ValueError:
        return 0


def load_image(path, size: Optional[int] = None) -> torch.Tensor:
    with Image.open(path) as img:
        img = img.convert("RGB")
        if size is not None:
            img = ImageOps.fit(img, (size, size), Image.BICUBIC)
        arr = np.asarray(img, dtype=np.float32) / 255.0
    return torch.from_numpy(arr.copy()).permute(2, 0, 1).contiguous()


def save_image(x: torch.Tensor, path) -> None:
    if x.dim() == 4:
        x = x[0]
    arr = (x.detach().clamp(0, 1).permute(1, 2, 0).cpu().numpy() * 255.0).round().astype(np.uint8)
    Image.fromarray(arr).save(path, format="PNG")


def _try_load(path: Path, size):
    try:
        return load_image(path, size)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        return exc


def scan_images(directory, size: Optional[int] = None) -> List[Tuple[Path, torch.Tensor]]:
    """Decode every file of ``directory`` in lexicographic order.

    Unreadable or non-image files are skipped with one warning each.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory} is not a directory")
    paths = sorted(p for p in directory.iterdir() if p.is_file() and not p.name.startswith("."))
    workers = num_workers()
    if workers > 0:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            loaded = list(pool.map(lambda p: _try_load(p, size), paths))
    else:
        loaded = [_try_load(p, size) for p in paths]
    out = []
    for p, img in zip(paths, loaded):
        if isinstance(img, Exception):
            log.warning("skipping unreadable image %s: %s", p, img)
            continue
        out.append((p, img))
    return out
