"""Style-code-conditioned generators.

A backbone maps a style code to a list of per-site conditioning parameters
(``style_params``) and renders a content image with them (``render``).
Keeping the two apart is what makes interpolation in parameter space and
backbone swapping possible without touching the trainer.
"""
from __future__ import annotations

from typing import List, Sequence

import torch
import torch.nn as nn

from .style_codec import InputError, StyleCode

IN_EPS = 1e-5


def instance_norm(x: torch.Tensor, eps: float = IN_EPS) -> torch.Tensor:
    mean = x.mean(dim=(2, 3), keepdim=True)
    var = x.var(dim=(2, 3), keepdim=True, unbiased=False)
    return (x - mean) / torch.sqrt(var + eps)


def condition(features: torch.Tensor, style_vec: torch.Tensor, head: nn.Module) -> torch.Tensor:
    """Instance-normalize ``features`` then apply the (gamma, beta) emitted by ``head``."""
    return apply_affine(features, head(style_vec))


def apply_affine(features: torch.Tensor, gamma_beta: torch.Tensor) -> torch.Tensor:
    c = features.shape[1]
    if gamma_beta.shape[-1] != 2 * c:
        raise ValueError(f"affine head emits {gamma_beta.shape[-1]} values for {c} channels")
    gamma, beta = gamma_beta[:, :c, None, None], gamma_beta[:, c:, None, None]
    return gamma * instance_norm(features) + beta


class Generator(nn.Module):
    """Backbone interface: ``forward(content, codes)`` stylizes ``content``."""

    min_size = 1

    def style_params(self, codes: StyleCode) -> List[torch.Tensor]:
        raise NotImplementedError

    def render(self, content: torch.Tensor, params: Sequence[torch.Tensor]) -> torch.Tensor:
        raise NotImplementedError

    def forward(self, content: torch.Tensor, codes: StyleCode) -> torch.Tensor:
        if content.shape[-1] < self.min_size or content.shape[-2] < self.min_size:
            raise InputError(f"content {content.shape[-2]}x{content.shape[-1]} is below the "
                             f"minimum resolution {self.min_size}")
        return self.render(content, self.style_params(codes))


class IdentityGenerator(Generator):
    """Returns the content unchanged; exercises the backbone interface."""

    def style_params(self, codes):
        return list(codes)

    def render(self, content, params):
        return content


def _conv(i, o, stride=1):
    return nn.Conv2d(i, o, 3, stride=stride, padding=1, padding_mode="reflect")


class AdaINGenerator(Generator):
    """Encoder with three stride-2 stages; mirrored decoder with nearest upsampling.

    Conditioning sites run from the bottleneck outwards and take the style
    vector of the matching MSP depth (deepest code at the bottleneck).
    """

    min_size = 16

    def __init__(self, code_dims: Sequence[int], channels: Sequence[int] = (16, 32, 64, 128),
                 conditioned: Sequence[bool] | None = None):
        super().__init__()
        c0, c1, c2, c3 = channels
        self.encoder = nn.Sequential(
            _conv(3, c0), nn.ReLU(),
            _conv(c0, c1, 2), nn.ReLU(),
            _conv(c1, c2, 2), nn.ReLU(),
            _conv(c2, c3, 2), nn.ReLU(),
        )
        self.site_channels = [c3, c2, c1, c0]
        self.blocks = nn.ModuleList([
            nn.Sequential(_conv(c3, c3), nn.ReLU()),
            nn.Sequential(nn.Upsample(scale_factor=2, mode="nearest"), _conv(c3, c2), nn.ReLU()),
            nn.Sequential(nn.Upsample(scale_factor=2, mode="nearest"), _conv(c2, c1), nn.ReLU()),
            nn.Sequential(nn.Upsample(scale_factor=2, mode="nearest"), _conv(c1, c0), nn.ReLU()),
        ])
        self.to_rgb = nn.Conv2d(c0, 3, 3, padding=1, padding_mode="reflect")
        self.conditioned = list(conditioned) if conditioned is not None else [True] * 4
        m = len(code_dims)
        self.code_index = [max(m - 1 - k, 0) for k in range(4)]
        self.heads = nn.ModuleDict()
        for k, ch in enumerate(self.site_channels):
            if self.conditioned[k]:
                head = nn.Linear(code_dims[self.code_index[k]], 2 * ch)
                nn.init.normal_(head.weight, std=0.02)
                with torch.no_grad():
                    head.bias[:ch].fill_(1.0)
                    head.bias[ch:].zero_()
                self.heads[str(k)] = head

    def style_params(self, codes):
        batch = codes[0].shape[0]
        return [self.heads[str(k)](codes[self.code_index[k]]) if self.conditioned[k]
                else torch.empty(batch, 0) for k in range(4)]

    def _condition(self, k, h, params):
        return apply_affine(h, params[k]) if self.conditioned[k] else h

    def render(self, content, params):
        h = self._condition(0, self.encoder(content), params)
        h = self.blocks[0](h)
        for k in range(1, 4):
            h = self._condition(k, self.blocks[k](h), params)
        return torch.sigmoid(self.to_rgb(h)).clamp(0, 1)


def stylize(content: torch.Tensor, style: torch.Tensor, g: Generator, msp) -> torch.Tensor:
    return g(content, msp(style))


def check_weights(weights: Sequence[float], n: int) -> torch.Tensor:
    if n == 0:
        raise ValueError("at least one style is required")
    w = torch.as_tensor([float(x) for x in weights], dtype=torch.float64)
    if w.numel() != n:
        raise ValueError(f"{w.numel()} weights for {n} styles")
    if not torch.isfinite(w).all() or (w < 0).any() or abs(float(w.sum()) - 1.0) > 1e-6:
        raise ValueError(f"weights must be nonnegative and sum to 1, got {w.tolist()}")
    return w


def interpolate_styles(content: torch.Tensor, styles: Sequence[torch.Tensor], weights: Sequence[float],
                       g: Generator, msp) -> torch.Tensor:
    """Decode ``content`` with a convex mixture of the per-style conditioning parameters."""
    w = check_weights(weights, len(styles))
    per_style = [g.style_params(msp(s)) for s in styles]
    mixed = []
    for site in zip(*per_style):
        acc = site[0] * float(w[0])
        for p, wk in zip(site[1:], w[1:]):
            acc = acc + p * float(wk)
        mixed.append(acc)
    return g.render(content, mixed)
