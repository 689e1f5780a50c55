"""Video consistency: patch-wise content loss, flow warping, temporal metric.

Flow fields are ``(H, W, 2)`` arrays of (u, v) pixel displacements mapping
frame t-1 onto frame t; they are read from UFLO files, never estimated.
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch
import torch.nn.functional as F

UFLO_MAGIC = b"UFLO"
OCCLUSION_THRESHOLD = 10 / 255


class FlowFormatError(ValueError):
    pass


def write_flow(path, flow: np.ndarray) -> None:
    flow = np.asarray(flow, dtype="<f4")
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ValueError(f"flow must have shape (H, W, 2), got {flow.shape}")
    h, w = flow.shape[:2]
    with open(path, "wb") as f:
        f.write(UFLO_MAGIC + struct.pack("<II", w, h) + flow.tobytes(order="C"))


def read_flow(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != UFLO_MAGIC:
        raise FlowFormatError(f"{path}: not a UFLO file (bad magic bytes)")
    w, h = struct.unpack("<II", data[4:12])
    expected = 12 + h * w * 2 * 4
    if len(data) != expected:
        raise FlowFormatError(f"{path}: expected {expected} bytes for {w}x{h} flow, found {len(data)}")
    return np.frombuffer(data, dtype="<f4", offset=12).reshape(h, w, 2).astype(np.float32)


def warp(frame: torch.Tensor, flow) -> torch.Tensor:
    """Bilinear backward warp: out(y, x) = frame(y + v, x + u), edges clamped.

    ``frame`` is ``(C, H, W)`` or ``(1, C, H, W)``.
    """
    flow = torch.as_tensor(np.asarray(flow), dtype=frame.dtype)
    squeeze = frame.dim() == 3
    img = frame if squeeze else frame[0]
    c, h, w = img.shape
    if flow.shape != (h, w, 2):
        raise ValueError(f"flow shape {tuple(flow.shape)} does not match frame {h}x{w}")
    if not torch.isfinite(flow).all():
        raise ValueError("flow contains non-finite values")
    ys, xs = torch.meshgrid(torch.arange(h, dtype=frame.dtype), torch.arange(w, dtype=frame.dtype), indexing="ij")
    sx = (xs + flow[..., 0]).clamp(0, w - 1)
    sy = (ys + flow[..., 1]).clamp(0, h - 1)
    x0 = sx.floor().long().clamp(max=w - 1)
    y0 = sy.floor().long().clamp(max=h - 1)
    x1 = (x0 + 1).clamp(max=w - 1)
    y1 = (y0 + 1).clamp(max=h - 1)
    fx = sx - x0.to(frame.dtype)
    fy = sy - y0.to(frame.dtype)
    top = img[:, y0, x0] * (1 - fx) + img[:, y0, x1] * fx
    bottom = img[:, y1, x0] * (1 - fx) + img[:, y1, x1] * fx
    out = top * (1 - fy) + bottom * fy
    return out if squeeze else out[None]


def occlusion_mask(warped_prev: torch.Tensor, current: torch.Tensor,
                   threshold: float = OCCLUSION_THRESHOLD, invert: bool = False) -> torch.Tensor:
    """Per-pixel boolean map of max-over-channels |difference| > threshold.

    ``invert`` gives the conventional mask that keeps the small differences.
    """
    if warped_prev.shape != current.shape:
        raise ValueError("frame size mismatch")
    diff = (warped_prev - current).abs().amax(dim=-3)
    mask = diff > threshold
    return ~mask if invert else mask


def temporal_loss(frames: Sequence[torch.Tensor], flows: Sequence, threshold: float = OCCLUSION_THRESHOLD,
                  invert_mask: bool = False) -> float:
    """Mean over frame pairs of the masked mean absolute warp residual.

    Frames are ``(C, H, W)`` tensors in [0, 1]; pairs with an empty mask count
    as zero.
    """
    if len(flows) != len(frames) - 1:
        raise ValueError(f"{len(frames)} frames need {len(frames) - 1} flows, got {len(flows)}")
    if len(frames) < 2:
        return 0.0
    frames = [torch.as_tensor(f, dtype=torch.float64).reshape(f.shape[-3:]) for f in frames]
    per_pair = []
    for prev, cur, flow in zip(frames[:-1], frames[1:], flows):
        warped = warp(prev, flow)
        mask = occlusion_mask(warped, cur, threshold, invert_mask)
        n = int(mask.sum())
        if n == 0:
            per_pair.append(0.0)
            continue
        resid = (warped - cur).abs()
        per_pair.append(float(resid[:, mask].sum()) / (n * resid.shape[-3]))
    return float(np.mean(per_pair))


def sample_locations(height: int, width: int, count: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    total = height * width
    if count > total:
        raise ValueError(f"cannot sample {count} patches from {total} locations")
    rng = rng if rng is not None else np.random.default_rng(0)
    return np.sort(rng.choice(total, size=count, replace=False))


def patch_content_loss(content_feats: torch.Tensor, output_feats: torch.Tensor, num_negatives: int = 255,
                       tau: float = 0.07, rng: Optional[np.random.Generator] = None,
                       locations: Optional[np.ndarray] = None) -> torch.Tensor:
    """Patch-wise InfoNCE between output and content features.

    ``num_negatives + 1`` spatial locations are sampled (shared by both
    tensors).  Each output patch is pulled towards the content patch at the
    same location and pushed from the content patches at the other sampled
    locations.  Averaged over locations and batch.
    """
    if content_feats.shape != output_feats.shape:
        raise ValueError("content and output features must have the same shape")
    if num_negatives < 1:
        raise ValueError("num_negatives must be >= 1")
    b, c, h, w = content_feats.shape
    if locations is None:
        locations = sample_locations(h, w, num_negatives + 1, rng)
    elif len(locations) != num_negatives + 1:
        raise ValueError("need num_negatives + 1 locations")
    idx = torch.as_tensor(np.asarray(locations), dtype=torch.long)
    v = F.normalize(output_feats.flatten(2)[:, :, idx].transpose(1, 2), dim=2)            # (B, P, C)
    v_c = F.normalize(content_feats.detach().flatten(2)[:, :, idx].transpose(1, 2), dim=2)
    logits = v @ v_c.transpose(1, 2) / tau                                                 # (B, P, P)
    target = torch.arange(logits.shape[1]).expand(b, -1)
    return F.cross_entropy(logits.reshape(-1, logits.shape[-1]), target.reshape(-1))
