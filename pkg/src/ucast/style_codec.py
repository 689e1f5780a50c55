"""Multi-layer style projector (MSP).

A feature extractor taps M convolutional layers; one projector head per layer
turns each tap into a unit-norm style vector.  A style code is a plain list of
M tensors of shape ``(batch, K)``.
"""
from __future__ import annotations

from typing import Callable, List, Optional, Sequence

import torch
import torch.nn as nn
import torch.nn.functional as F

StyleCode = List[torch.Tensor]

DEFAULT_TAPS = ("relu1_2", "relu2_2", "relu3_3", "relu4_3")


class ConfigError(ValueError):
    pass


class InputError(ValueError):
    pass


def check_image_batch(x: torch.Tensor, resolution: Optional[int] = None) -> torch.Tensor:
    if x.dim() != 4 or x.shape[1] != 3:
        raise InputError(f"expected (batch, 3, H, W) image batch, got {tuple(x.shape)}")
    if resolution is not None and (x.shape[2] != resolution or x.shape[3] != resolution):
        raise InputError(f"expected {resolution}x{resolution} images, got {x.shape[2]}x{x.shape[3]}")
    if not torch.isfinite(x).all():
        raise InputError("image batch contains non-finite values")
    if x.min() < 0 or x.max() > 1:
        raise InputError("pixel values must lie in [0, 1]")
    return x


class ConvStackExtractor(nn.Module):
    """Small VGG-like 4-stage stack, one tap at the end of each stage.

    Stage i runs at stride 2**i relative to the input, so 64px inputs give taps
    of spatial size 64, 32, 16, 8.
    """

    def __init__(self, channels: Sequence[int] = (16, 32, 64, 128), taps: Sequence[str] = DEFAULT_TAPS,
                 seed: int = 0):
        super().__init__()
        if len(taps) != len(channels):
            raise ConfigError("one tap point per stage is required")
        unknown = [t for t in taps if t not in DEFAULT_TAPS]
        if unknown:
            raise ConfigError(f"unknown tap point(s): {unknown}; available: {list(DEFAULT_TAPS)}")
        self.layer_ids = list(taps)
        self.channels = list(channels)
        gen = torch.Generator().manual_seed(seed)
        stages = []
        in_ch = 3
        for i, ch in enumerate(channels):
            layers: List[nn.Module] = []
            if i > 0:
                layers.append(nn.AvgPool2d(2))
            layers += [nn.Conv2d(in_ch, ch, 3, padding=1, padding_mode="reflect"), nn.ReLU(),
                       nn.Conv2d(ch, ch, 3, padding=1, padding_mode="reflect"), nn.ReLU()]
            stages.append(nn.Sequential(*layers))
            in_ch = ch
        self.stages = nn.ModuleList(stages)
        for m in self.modules():
            if isinstance(m, nn.Conv2d):
                fan_in = m.in_channels * 9
                with torch.no_grad():
                    m.weight.copy_(torch.randn(m.weight.shape, generator=gen) * (2.0 / fan_in) ** 0.5)
                    m.bias.zero_()

    @property
    def min_size(self) -> int:
        return 2 ** (len(self.stages) - 1)

    def forward(self, x: torch.Tensor) -> List[torch.Tensor]:
        if x.shape[-1] < self.min_size or x.shape[-2] < self.min_size:
            raise InputError(f"input {x.shape[-2]}x{x.shape[-1]} is too small for the deepest tap "
                             f"(needs >= {self.min_size})")
        feats = []
        h = x
        for stage in self.stages:
            h = stage(h)
            feats.append(h)
        return feats


class ExternalExtractor(nn.Module):
    """Adapter for a pretrained multi-scale network supplied by the caller.

    ``fn`` maps an image batch to a dict of named feature maps; ``taps`` picks
    and orders the ones fed to the projector.
    """

    def __init__(self, fn: Callable[[torch.Tensor], dict], taps: Sequence[str], channels: Sequence[int],
                 min_size: int = 1):
        super().__init__()
        self.fn = fn
        self.layer_ids = list(taps)
        self.channels = list(channels)
        self.min_size = min_size
        if isinstance(fn, nn.Module):
            self.net = fn

    def forward(self, x: torch.Tensor) -> List[torch.Tensor]:
        if x.shape[-1] < self.min_size or x.shape[-2] < self.min_size:
            raise InputError("input too small for the deepest tap")
        out = self.fn(x)
        missing = [t for t in self.layer_ids if t not in out]
        if missing:
            raise ConfigError(f"extractor did not produce tap point(s) {missing}")
        return [out[t] for t in self.layer_ids]


def extract_features(image: torch.Tensor, extractor: nn.Module) -> List[torch.Tensor]:
    return extractor(image)


class ProjectorHead(nn.Module):
    """max-pool ++ avg-pool -> 1x1 conv -> 2-layer MLP -> L2 normalize."""

    def __init__(self, in_channels: int, code_dim: int = 512, hidden: int = 512):
        super().__init__()
        self.conv = nn.Conv2d(2 * in_channels, hidden, 1)
        self.mlp = nn.Sequential(nn.ReLU(), nn.Linear(hidden, hidden), nn.ReLU(), nn.Linear(hidden, code_dim))

    def forward(self, feat: torch.Tensor) -> torch.Tensor:
        pooled = torch.cat([F.adaptive_max_pool2d(feat, 1), F.adaptive_avg_pool2d(feat, 1)], dim=1)
        h = self.conv(pooled).flatten(1)
        return F.normalize(self.mlp(h), dim=1, eps=1e-12)


class MultiLayerStyleProjector(nn.Module):
    """Extractor plus one projector head per tap.

    The extractor is frozen by default; only the heads are trained by the
    contrastive objective.
    """

    def __init__(self, extractor: nn.Module, code_dims: Sequence[int] | int = 512, hidden: int = 512,
                 freeze_extractor: bool = True):
        super().__init__()
        self.extractor = extractor
        n = len(extractor.channels)
        if isinstance(code_dims, int):
            code_dims = [code_dims] * n
        if len(code_dims) != n:
            raise ConfigError("one code dimension per tap point is required")
        self.code_dims = list(code_dims)
        self.heads = nn.ModuleList(ProjectorHead(c, k, hidden) for c, k in zip(extractor.channels, code_dims))
        if freeze_extractor:
            extractor.requires_grad_(False)

    @property
    def num_layers(self) -> int:
        return len(self.heads)

    def features(self, image: torch.Tensor) -> List[torch.Tensor]:
        return extract_features(image, self.extractor)

    def project(self, feats: Sequence[torch.Tensor]) -> StyleCode:
        return project(feats, self.heads)

    def forward(self, image: torch.Tensor) -> StyleCode:
        return self.project(self.features(image))

    encode_style = forward

    def head_parameters(self):
        return self.heads.parameters()


def project(feats: Sequence[torch.Tensor], heads: Sequence[nn.Module]) -> StyleCode:
    if len(feats) != len(heads):
        raise ConfigError(f"{len(feats)} feature layers but {len(heads)} projector heads")
    return [head(f) for head, f in zip(heads, feats)]


def encode_style(image: torch.Tensor, msp: MultiLayerStyleProjector) -> StyleCode:
    return msp(image)


def code_similarity(a: StyleCode, b: StyleCode) -> torch.Tensor:
    """Per-sample cosine similarity averaged over layers, shape ``(batch,)``."""
    return torch.stack([(x * y).sum(1) for x, y in zip(a, b)]).mean(0)
