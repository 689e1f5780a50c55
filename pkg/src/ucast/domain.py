"""Dual-discriminator domain enhancement: adversarial and cycle losses."""
from __future__ import annotations

from typing import Callable, Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

PROB_EPS = 1e-7


class Discriminator(nn.Module):
    """4-layer strided convolutional patch classifier with a sigmoid head.

    Returns a per-patch probability map clamped to [1e-7, 1 - 1e-7].
    """

    def __init__(self, domain: str = "artistic", channels=(16, 32, 64)):
        super().__init__()
        if domain not in ("realistic", "artistic", "mixed"):
            raise ValueError(f"unknown domain {domain!r}")
        self.domain = domain
        layers = []
        in_ch = 3
        for ch in channels:
            layers += [nn.Conv2d(in_ch, ch, 4, stride=2, padding=1), nn.LeakyReLU(0.2)]
            in_ch = ch
        layers.append(nn.Conv2d(in_ch, 1, 4, stride=2, padding=1))
        self.net = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.net(x)).clamp(PROB_EPS, 1 - PROB_EPS)


def _log(p: torch.Tensor) -> torch.Tensor:
    return torch.log(p.clamp(PROB_EPS, 1 - PROB_EPS))


def _mean_log_real(d, x):
    return _log(d(x)).flatten(1).mean(1).mean()


def _mean_log_fake(d, x):
    return torch.log1p(-d(x).clamp(PROB_EPS, 1 - PROB_EPS)).flatten(1).mean(1).mean()


def _pairs(d_r, d_a, i_c, i_s, i_cs, i_sc, pairing: str, mode: str):
    """(discriminator, real, fake) triples for the chosen domain setup."""
    if mode == "dual":
        if pairing == "prose":
            return [(d_r, i_c, i_sc), (d_a, i_s, i_cs)]
        if pairing == "printed":
            return [(d_r, i_c, i_cs), (d_a, i_s, i_sc)]
        raise ValueError(f"unknown pairing {pairing!r}")
    if mode == "mix":
        return [(d_r, i_c, i_cs), (d_r, i_s, i_sc)]
    if mode == "one":
        return [(d_a, i_s, i_cs)]
    raise ValueError(f"unknown discriminator mode {mode!r}")


def _check_batches(*xs):
    sizes = {x.shape[0] for x in xs}
    if len(sizes) != 1:
        raise ValueError(f"mismatched batch sizes {sorted(sizes)}")


def adversarial_loss(d_r: Callable, d_a: Optional[Callable], i_c, i_s, i_cs, i_sc,
                     pairing: str = "prose", mode: str = "dual") -> torch.Tensor:
    """Sum of E[log D(real)] + E[log(1 - D(fake))] over the discriminators.

    ``pairing="prose"`` scores the artistic output I_cs with the artistic
    discriminator and I_sc with the realistic one; ``"printed"`` swaps the
    fakes.  ``mode`` selects the ablations: ``"mix"`` uses ``d_r`` for both
    domains, ``"one"`` keeps only the artistic discriminator.
    """
    _check_batches(i_c, i_s, i_cs, i_sc)
    total = 0.0
    for d, real, fake in _pairs(d_r, d_a, i_c, i_s, i_cs, i_sc, pairing, mode):
        total = total + _mean_log_real(d, real) + _mean_log_fake(d, fake)
    return total


def discriminator_loss(d_r, d_a, i_c, i_s, i_cs, i_sc, pairing="prose", mode="dual") -> torch.Tensor:
    """Negated adversarial value with fakes detached; minimizing it maximizes the objective."""
    return -adversarial_loss(d_r, d_a, i_c, i_s, i_cs.detach(), i_sc.detach(), pairing, mode)


def generator_adversarial_loss(d_r, d_a, i_c, i_s, i_cs, i_sc, pairing="prose", mode="dual") -> torch.Tensor:
    """Non-saturating generator term: -E[log D(fake)] for every fake."""
    total = 0.0
    for d, _, fake in _pairs(d_r, d_a, i_c, i_s, i_cs, i_sc, pairing, mode):
        total = total - _log(d(fake)).flatten(1).mean(1).mean()
    return total


def l1_mean(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {tuple(a.shape)} vs {tuple(b.shape)}")
    return (a - b).abs().mean()


def cycle_consistency_loss(g: Callable, i_c, i_s, i_cs, i_sc, asymmetric: bool = False) -> torch.Tensor:
    """E|I_c - G(I_cs, I_c)| + E|I_s - G(I_sc, I_s)| with per-pixel mean L1.

    ``g(x, y)`` stylizes ``x`` with the style of ``y``.  ``asymmetric`` keeps
    only the realistic reconstruction.
    """
    loss = l1_mean(i_c, g(i_cs, i_c))
    if not asymmetric:
        loss = loss + l1_mean(i_s, g(i_sc, i_s))
    return loss
