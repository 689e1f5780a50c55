"""Contrastive style losses with input-dependent dual temperatures.

All per-layer losses use the shifted form

    log(1 + sum_j exp(s_neg_j / tau_neg - s_pos / tau_pos))

which is the InfoNCE term with the positive logit factored out.  It stays
finite for unit-vector similarities at any temperature >= 1e-3 and keeps the
gradients of a nearly-solved term from underflowing to exactly zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import torch
from scipy.special import expit

from .style_codec import StyleCode

SIGMA_FLOOR = 1e-6


@dataclass
class TemperatureConfig:
    t_range_neg: float = 0.2
    t_bound_neg: float = 0.05
    t_range_pos: float = 1.0
    t_bound_pos: float = 0.5
    clip_threshold: float = 0.3
    ema_decay: float = 0.99
    fixed_tau: float = 0.07
    adaptive: bool = True
    # statistics used before the first observation
    mu_neg_prior: float = 2.0
    sigma_neg_prior: float = 1.0
    mu_pos_prior: float = 0.0
    sigma_pos_prior: float = 1.0
    # "output" clips similarities of the generated code (as in the formula);
    # "reference" uses the reference style code instead
    anchor: str = "output"

    def __post_init__(self):
        if self.t_bound_neg <= 0 or self.t_bound_pos <= 0:
            raise ValueError("temperature lower bounds must be positive")
        if self.t_range_neg < 0 or self.t_range_pos < 0:
            raise ValueError("temperature ranges must be nonnegative")
        if not 0 < self.ema_decay < 1:
            raise ValueError("ema_decay must lie in (0, 1)")
        if self.fixed_tau <= 0:
            raise ValueError("fixed_tau must be positive")
        if not -1 <= self.clip_threshold <= 1:
            raise ValueError("clip_threshold must lie in [-1, 1]")
        if self.anchor not in ("output", "reference"):
            raise ValueError("anchor must be 'output' or 'reference'")


@dataclass
class TemperatureState:
    """Running mean/std of the two temperature drivers, one entry per layer."""

    mu_neg: np.ndarray
    sigma_neg: np.ndarray
    mu_pos: np.ndarray
    sigma_pos: np.ndarray
    update_count: int = 0
    _var_neg: np.ndarray = field(default=None, repr=False)
    _var_pos: np.ndarray = field(default=None, repr=False)

    @classmethod
    def fresh(cls, num_layers: int = 1, config: Optional[TemperatureConfig] = None) -> "TemperatureState":
        config = config or TemperatureConfig()
        full = lambda v: np.full(num_layers, float(v))
        return cls(full(config.mu_neg_prior), full(config.sigma_neg_prior),
                   full(config.mu_pos_prior), full(config.sigma_pos_prior), 0,
                   full(config.sigma_neg_prior) ** 2, full(config.sigma_pos_prior) ** 2)

    def state_dict(self) -> dict:
        return {k: torch.as_tensor(np.asarray(v, dtype=np.float64)) for k, v in (
            ("mu_neg", self.mu_neg), ("sigma_neg", self.sigma_neg), ("mu_pos", self.mu_pos),
            ("sigma_pos", self.sigma_pos), ("var_neg", self._var_neg), ("var_pos", self._var_pos),
            ("update_count", self.update_count))}

    @classmethod
    def from_state_dict(cls, d: dict) -> "TemperatureState":
        a = lambda k: d[k].numpy().astype(np.float64).copy()
        return cls(a("mu_neg"), a("sigma_neg"), a("mu_pos"), a("sigma_pos"),
                   int(d["update_count"].item()), a("var_neg"), a("var_pos"))


def _ema(mu, var, x, decay):
    diff = x - mu
    incr = (1 - decay) * diff
    return mu + incr, decay * (var + diff * incr)


def update_stats(state: TemperatureState, sum_g_neg, pos_content_sim, config: TemperatureConfig) -> TemperatureState:
    """Exponential moving estimates of the mean and std of both drivers.

    The first observation sets the mean and keeps the prior spread; the std is
    floored at 1e-6.  Non-finite inputs raise and leave ``state`` untouched.
    """
    x_neg = np.broadcast_to(np.asarray(sum_g_neg, dtype=np.float64), state.mu_neg.shape)
    x_pos = np.broadcast_to(np.asarray(pos_content_sim, dtype=np.float64), state.mu_pos.shape)
    if not (np.isfinite(x_neg).all() and np.isfinite(x_pos).all()):
        raise ValueError("temperature statistics received a non-finite observation")
    if state.update_count == 0:
        mu_neg, var_neg = x_neg.copy(), state._var_neg.copy()
        mu_pos, var_pos = x_pos.copy(), state._var_pos.copy()
    else:
        mu_neg, var_neg = _ema(state.mu_neg, state._var_neg, x_neg, config.ema_decay)
        mu_pos, var_pos = _ema(state.mu_pos, state._var_pos, x_pos, config.ema_decay)
    state.mu_neg, state._var_neg = mu_neg, var_neg
    state.mu_pos, state._var_pos = mu_pos, var_pos
    state.sigma_neg = np.maximum(np.sqrt(var_neg), SIGMA_FLOOR)
    state.sigma_pos = np.maximum(np.sqrt(var_pos), SIGMA_FLOOR)
    state.update_count += 1
    return state


class MemoryBank:
    """Per-layer FIFO queue of detached, unit-norm negative style codes."""

    def __init__(self, num_layers: int, dims: Sequence[int] | int, capacity: int = 4096,
                 dtype: torch.dtype = torch.float32):
        if isinstance(dims, int):
            dims = [dims] * num_layers
        if len(dims) != num_layers:
            raise ValueError("one code dimension per layer is required")
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.dims = list(dims)
        self.queues = [torch.empty(0, k, dtype=dtype) for k in self.dims]

    @property
    def num_layers(self) -> int:
        return len(self.queues)

    def __len__(self) -> int:
        return self.queues[0].shape[0]

    def enqueue(self, codes: StyleCode) -> "MemoryBank":
        if len(codes) != self.num_layers:
            raise ValueError(f"bank has {self.num_layers} layers, got a code with {len(codes)}")
        for i, (q, z) in enumerate(zip(self.queues, codes)):
            z = z.detach().to(q.dtype)
            if z.dim() == 1:
                z = z[None]
            if z.shape[1] != q.shape[1]:
                raise ValueError(f"layer {i}: bank dimension {q.shape[1]}, code dimension {z.shape[1]}")
            self.queues[i] = torch.cat([q, z])[-self.capacity:].clone()
        return self

    def negatives(self, layer: int) -> torch.Tensor:
        """Stored codes of ``layer``, oldest first."""
        return self.queues[layer]

    def state_dict(self) -> dict:
        return {f"layer{i}": q.clone() for i, q in enumerate(self.queues)}

    def load_state_dict(self, d: dict) -> None:
        self.queues = [d[f"layer{i}"].clone() for i in range(self.num_layers)]


def bank_enqueue(bank: MemoryBank, codes: StyleCode) -> MemoryBank:
    return bank.enqueue(codes)


@dataclass
class SimilarityPack:
    s_pos: List[torch.Tensor]      # (B,) per layer
    s_neg: List[torch.Tensor]      # (B, N) per layer
    s_content: List[torch.Tensor]  # (B,) per layer
    s_ref_neg: List[torch.Tensor] = None  # (B, N) reference-vs-bank, detached


def similarities(z_tilde: StyleCode, z_hat: StyleCode, z_c: StyleCode, bank: MemoryBank) -> SimilarityPack:
    """Gradients flow into ``z_tilde`` only."""
    s_pos, s_neg, s_c, s_ref = [], [], [], []
    for i, (zt, zh, zc) in enumerate(zip(z_tilde, z_hat, z_c)):
        zh, zc = zh.detach(), zc.detach()
        negs = bank.negatives(i).to(zt.dtype)
        s_pos.append((zt * zh).sum(1))
        s_neg.append(zt @ negs.T)
        s_c.append((zh * zc).sum(1))
        s_ref.append(zh @ negs.T)
    return SimilarityPack(s_pos, s_neg, s_c, s_ref)


def _logistic(x):
    if isinstance(x, torch.Tensor):
        return torch.sigmoid(x)
    return expit(np.asarray(x, dtype=np.float64))


def clipped_similarity_sum(s_neg, threshold: float):
    """sum_j g(s_j), g(s) = s if s > threshold else 0."""
    if isinstance(s_neg, torch.Tensor):
        return torch.where(s_neg > threshold, s_neg, torch.zeros_like(s_neg)).sum(-1)
    s = np.asarray(s_neg, dtype=np.float64)
    return np.where(s > threshold, s, 0.0).sum(-1)


def negative_temperature(s_neg: Sequence, state: TemperatureState, config: TemperatureConfig) -> list:
    """tau_neg per layer from the clipped bank similarities; never carries gradient.

    ``s_neg[i]`` is a ``(..., N)`` array of similarities for layer ``i``.
    """
    taus = []
    for i, s in enumerate(s_neg):
        if isinstance(s, torch.Tensor):
            s = s.detach()
        total = clipped_similarity_sum(s, config.clip_threshold)
        scale = 1.0 / max(float(state.sigma_neg[i]), SIGMA_FLOOR)
        taus.append(config.t_range_neg * _logistic((total - float(state.mu_neg[i])) * scale) + config.t_bound_neg)
    return taus


def suitability_factor(s_content, mu_pos: float, sigma_pos: float, config: TemperatureConfig):
    """Multiplier f applied to tau_neg; decreasing in the reference/content similarity."""
    scale = 1.0 / max(float(sigma_pos), SIGMA_FLOOR)
    return config.t_range_pos * _logistic(-(s_content - mu_pos) * scale) + config.t_bound_pos


def positive_temperature(tau_neg: Sequence, s_content: Sequence, state: TemperatureState,
                         config: TemperatureConfig) -> list:
    taus = []
    for i, (tn, sc) in enumerate(zip(tau_neg, s_content)):
        if isinstance(sc, torch.Tensor):
            sc = sc.detach()
        taus.append(tn * suitability_factor(sc, float(state.mu_pos[i]), float(state.sigma_pos[i]), config))
    return taus


def dual_temperature_nce(s_pos: torch.Tensor, s_neg: torch.Tensor, tau_pos, tau_neg) -> torch.Tensor:
    """Per-sample InfoNCE term with separate positive/negative temperatures.

    ``s_pos`` has shape ``(...)``, ``s_neg`` shape ``(..., N)``; temperatures
    broadcast against ``s_pos``.
    """
    tau_pos = torch.as_tensor(tau_pos, dtype=s_pos.dtype)
    tau_neg = torch.as_tensor(tau_neg, dtype=s_pos.dtype)
    if (tau_pos <= 0).any() or (tau_neg <= 0).any():
        raise ValueError("temperatures must be positive")
    rel = s_neg / tau_neg[..., None] - (s_pos / tau_pos)[..., None]
    zero = torch.zeros(rel.shape[:-1] + (1,), dtype=rel.dtype)
    return torch.logsumexp(torch.cat([zero, rel], dim=-1), dim=-1)


def info_nce(s_pos: torch.Tensor, s_neg: torch.Tensor, tau: float) -> torch.Tensor:
    return dual_temperature_nce(s_pos, s_neg, tau, tau)


def msp_contrastive_loss(z: StyleCode, z_plus: StyleCode, bank: MemoryBank, tau: float) -> torch.Tensor:
    """Instance-discrimination loss for the projector, summed over layers and
    averaged over the batch.  Gradients reach both ``z`` and ``z_plus``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if len(bank) == 0:
        raise ValueError("memory bank is empty")
    if not len(z) == len(z_plus) == bank.num_layers:
        raise ValueError("layer count mismatch between codes and bank")
    total = 0.0
    for i, (a, b) in enumerate(zip(z, z_plus)):
        negs = bank.negatives(i).to(a.dtype)
        total = total + info_nce((a * b).sum(1), a @ negs.T, tau).mean()
    return total


def temperatures(pack: SimilarityPack, state: TemperatureState, config: TemperatureConfig):
    """(tau_pos, tau_neg) lists, one ``(B,)`` tensor per layer, both detached."""
    if not config.adaptive:
        taus = [torch.full_like(s.detach(), config.fixed_tau) for s in pack.s_pos]
        return taus, [t.clone() for t in taus]
    source = pack.s_neg if config.anchor == "output" else pack.s_ref_neg
    tau_neg = negative_temperature(source, state, config)
    tau_pos = positive_temperature(tau_neg, pack.s_content, state, config)
    return tau_pos, tau_neg


def adaptive_contrastive_loss(z_tilde: StyleCode, z_hat: StyleCode, z_c: StyleCode, bank: MemoryBank,
                              state: TemperatureState, config: TemperatureConfig, return_info: bool = False):
    """Generator-side style loss: per-layer dual-temperature InfoNCE, summed
    over layers and averaged over the batch.

    With ``return_info`` also returns a dict holding the per-layer batch means
    of tau_pos, tau_neg, the clipped negative sum and the reference/content
    similarity (the inputs of :func:`update_stats`).
    """
    if len(bank) == 0:
        raise ValueError("memory bank is empty")
    if not len(z_tilde) == len(z_hat) == len(z_c) == bank.num_layers:
        raise ValueError("layer count mismatch between codes and bank")
    pack = similarities(z_tilde, z_hat, z_c, bank)
    for s in pack.s_pos + pack.s_neg:
        if not torch.isfinite(s).all():
            raise ValueError("non-finite similarity")
    tau_pos, tau_neg = temperatures(pack, state, config)
    loss = 0.0
    for sp, sn, tp, tn in zip(pack.s_pos, pack.s_neg, tau_pos, tau_neg):
        loss = loss + dual_temperature_nce(sp, sn, tp, tn).mean()
    if not return_info:
        return loss
    source = pack.s_neg if config.anchor == "output" else pack.s_ref_neg
    info = {
        "tau_pos": [float(t.mean()) for t in tau_pos],
        "tau_neg": [float(t.mean()) for t in tau_neg],
        "sum_g_neg": np.array([float(clipped_similarity_sum(s.detach(), config.clip_threshold).mean())
                               for s in source]),
        "pos_content_sim": np.array([float(s.detach().mean()) for s in pack.s_content]),
    }
    return loss, info


def contrastive_gradients(s_pos, s_neg, tau_pos, tau_neg):
    """Analytic d/ds of one dual-temperature InfoNCE term.

    Returns ``(g_pos, g_neg)`` with g_pos = -(1/tau_pos) * (1 - p_pos) and
    g_neg_j = (1/tau_neg) * E_j / Z, evaluated in float64 with the logits
    shifted by their maximum.
    """
    if tau_pos <= 0 or tau_neg <= 0:
        raise ValueError("temperatures must be positive")
    s_neg = np.atleast_1d(np.asarray(s_neg, dtype=np.float64))
    a = float(s_pos) / tau_pos
    b = s_neg / tau_neg
    m = max(a, b.max())
    e_neg = np.exp(b - m)
    z = np.exp(a - m) + e_neg.sum()
    w = e_neg / z
    return -w.sum() / tau_pos, w / tau_neg

