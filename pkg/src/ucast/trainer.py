"""Parallel optimization of the style projector, generator and discriminators."""
from __future__ import annotations

import contextlib
import copy
import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Optional, Sequence

import numpy as np
import torch
import torch.nn.functional as F

from .backbone import AdaINGenerator, Generator, IdentityGenerator
from .contrastive import (MemoryBank, TemperatureConfig, TemperatureState, adaptive_contrastive_loss,
                          msp_contrastive_loss, update_stats)
from .domain import Discriminator, adversarial_loss, cycle_consistency_loss, discriminator_loss, \
    generator_adversarial_loss
from .imageio import scan_images
from .style_codec import ConfigError, ConvStackExtractor, MultiLayerStyleProjector, StyleCode
from .video import patch_content_loss

log = logging.getLogger(__name__)


class NonFiniteLossError(RuntimeError):
    def __init__(self, term: str, value: float):
        super().__init__(f"non-finite loss term {term!r} ({value})")
        self.term = term


@dataclass
class TrainConfig:
    lambda1: float = 1.0
    lambda2: float = 2.0
    lambda3: float = 0.2
    lambda4: float = 1.0
    lr: float = 1e-4
    betas: tuple = (0.5, 0.999)
    iterations: int = 800_000
    batch_size: int = 4
    resolution: int = 256
    decay: str = "linear"
    seed: int = 0
    # ablations
    fixed_temperature: bool = False
    no_contrastive: bool = False
    mix_de: bool = False
    no_de: bool = False
    one_de: bool = False
    asym_cycle: bool = False
    # architecture
    extractor: str = "convstack"
    backbone: str = "adain"
    extractor_channels: tuple = (16, 32, 64, 128)
    generator_channels: tuple = (16, 32, 64, 128)
    disc_channels: tuple = (16, 32, 64)
    code_dim: int = 512
    msp_hidden: int = 512
    # contrastive terms
    bank_capacity: int = 4096
    key_momentum: float = 0.999
    fixed_tau: float = 0.07
    t_range_neg: float = 0.2
    t_bound_neg: float = 0.05
    t_range_pos: float = 1.0
    t_bound_pos: float = 0.5
    clip_threshold: float = 0.3
    ema_decay: float = 0.99
    temperature_anchor: str = "output"
    patch_negatives: int = 255
    patch_tau: float = 0.07
    patch_layer: int = 2
    msp_pretrain_steps: int = 0
    printed_pairing: bool = False
    checkpoint_every: int = 0

    def __post_init__(self):
        self.betas = tuple(float(b) for b in self.betas)
        for name in ("extractor_channels", "generator_channels", "disc_channels"):
            setattr(self, name, tuple(int(c) for c in getattr(self, name)))
        for name in ("lambda1", "lambda2", "lambda3", "lambda4"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not 0 <= self.key_momentum < 1:
            raise ConfigError("key_momentum must lie in [0, 1)")
        if not (math.isfinite(self.lr) and self.lr > 0):
            raise ConfigError(f"lr must be a positive number, got {self.lr}")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.decay not in ("linear", "none"):
            raise ConfigError(f"unknown decay schedule {self.decay!r}")
        if self.extractor not in EXTRACTORS:
            raise ConfigError(f"unknown extractor {self.extractor!r}")
        if self.backbone not in BACKBONES:
            raise ConfigError(f"unknown backbone {self.backbone!r}")
        if sum([self.mix_de, self.no_de, self.one_de]) > 1:
            raise ConfigError("mix_de, no_de and one_de are mutually exclusive")

    def temperature_config(self) -> TemperatureConfig:
        return TemperatureConfig(t_range_neg=self.t_range_neg, t_bound_neg=self.t_bound_neg,
                                 t_range_pos=self.t_range_pos, t_bound_pos=self.t_bound_pos,
                                 clip_threshold=self.clip_threshold, ema_decay=self.ema_decay,
                                 fixed_tau=self.fixed_tau, adaptive=not self.fixed_temperature,
                                 anchor=self.temperature_anchor)

    def weights(self) -> Dict[str, float]:
        return {"adv": 0.0 if self.no_de else self.lambda1, "cyc": self.lambda2,
                "contra_G": 0.0 if self.no_contrastive else self.lambda3, "contra_c": self.lambda4}

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self).items()}

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


EXTRACTORS = {"convstack"}
BACKBONES = {"adain": AdaINGenerator, "identity": IdentityGenerator}


def desk_config(**overrides) -> TrainConfig:
    """64px, batch 4, 2000 iterations, small codes: trainable on one CPU core.

    The projector trains alone for the first 1000 steps so the generator is
    not chasing a code space that is still forming.
    """
    base = dict(resolution=64, batch_size=4, iterations=2000, lr=5e-4, code_dim=128, msp_hidden=128,
                bank_capacity=128, key_momentum=0.99, msp_pretrain_steps=1000, patch_negatives=255)
    base.update(overrides)
    return TrainConfig(**base)


def _coerce(name: str, raw: str, default):
    raw = raw.strip()
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    try:
        if isinstance(default, tuple):
            kind = type(default[0]) if default else float
            return tuple(kind(x) for x in raw.replace(",", " ").split())
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None
    return raw


def parse_config(text: str, base: Optional[TrainConfig] = None) -> TrainConfig:
    """Plain ``key: value`` lines, ``#`` comments; unknown keys are fatal."""
    base = base or TrainConfig()
    defaults = {f.name: getattr(base, f.name) for f in dataclasses.fields(TrainConfig)}
    values = dict(defaults)
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"line {lineno}: expected 'key: value'")
        key, raw = (s.strip() for s in line.split(":", 1))
        if key not in defaults:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _coerce(key, raw, defaults[key])
    return TrainConfig(**values)


def load_config(path) -> TrainConfig:
    return parse_config(Path(path).read_text())


def format_config(config: TrainConfig) -> str:
    lines = []
    for k, v in config.to_dict().items():
        if isinstance(v, list):
            v = ", ".join(str(x) for x in v)
        elif isinstance(v, bool):
            v = str(v).lower()
        lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def augment(images: torch.Tensor, rng: np.random.Generator, resolution: Optional[int] = None) -> torch.Tensor:
    """Random square crop (side 50-100% of the image), resized to ``resolution``,
    then a random 90-degree rotation.

    Crops this aggressive keep the spatial layout from identifying an image,
    so the projector has to tell images apart by their style statistics.
    """
    resolution = resolution or images.shape[-1]
    out = []
    for img in images:
        h, w = img.shape[-2:]
        side = max(int(round(min(h, w) * rng.uniform(0.5, 1.0))), 1)
        top, left = int(rng.integers(0, h - side + 1)), int(rng.integers(0, w - side + 1))
        x = img[None, :, top:top + side, left:left + side]
        x = F.interpolate(x, size=(resolution, resolution), mode="bilinear", align_corners=False)
        x = torch.rot90(x, int(rng.integers(0, 4)), dims=(2, 3))
        out.append(x)
    return torch.cat(out).clamp(0, 1).contiguous()


def total_loss(parts: Dict[str, torch.Tensor], config: TrainConfig):
    weights = config.weights()
    total = 0.0
    for name in ("adv", "cyc", "contra_G", "contra_c"):
        value = parts.get(name, 0.0)
        v = float(value.detach()) if isinstance(value, torch.Tensor) else float(value)
        if not math.isfinite(v):
            raise NonFiniteLossError(name, v)
        if weights[name]:
            total = total + weights[name] * value
    return total


class ImageStream:
    """Infinite shuffled batches over an in-memory image set; reshuffles per epoch."""

    def __init__(self, images: torch.Tensor, batch_size: int, seed: int = 0, domain_tag: str = "realistic",
                 names: Sequence[str] = ()):
        if len(images) == 0:
            raise ValueError("image stream needs at least one image")
        self.images = images
        self.names = list(names)
        self.batch_size = batch_size
        self.domain_tag = domain_tag
        self.rng = np.random.default_rng(seed)
        self.order = self.rng.permutation(len(images))
        self.pos = 0

    def next_indices(self) -> np.ndarray:
        idx = []
        while len(idx) < self.batch_size:
            if self.pos == len(self.order):
                self.order = self.rng.permutation(len(self.images))
                self.pos = 0
            idx.append(int(self.order[self.pos]))
            self.pos += 1
        return np.asarray(idx)

    def __iter__(self) -> Iterator[torch.Tensor]:
        return self

    def __next__(self) -> torch.Tensor:
        return self.images[self.next_indices()]

    def state_dict(self) -> dict:
        return {"rng": self.rng.bit_generator.state, "order": self.order.tolist(), "pos": self.pos}

    def load_state_dict(self, d: dict) -> None:
        self.rng.bit_generator.state = d["rng"]
        self.order = np.asarray(d["order"], dtype=np.int64)
        self.pos = int(d["pos"])


def load_dataset(root, domain_tag: str, batch_size: int = 4, resolution: int = 64, seed: int = 0) -> ImageStream:
    items = scan_images(root, resolution)
    if not items:
        raise ValueError(f"no readable images in {root}")
    images = torch.stack([img for _, img in items])
    return ImageStream(images, batch_size, seed, domain_tag, [p.stem for p, _ in items])


@contextlib.contextmanager
def frozen(*modules):
    saved = [[p.requires_grad for p in m.parameters()] for m in modules]
    for m in modules:
        m.requires_grad_(False)
    try:
        yield
    finally:
        for m, flags in zip(modules, saved):
            for p, f in zip(m.parameters(), flags):
                p.requires_grad_(f)


def _adam(params, config):
    params = [p for p in params if p.requires_grad]
    return torch.optim.Adam(params, lr=config.lr, betas=config.betas) if params else None


class Trainer:
    """Owns all models, optimizers, the memory bank and the temperature state.

    One ``train_step`` runs: discriminator update, generator update with the
    projector frozen, projector update with the generator out of the graph,
    bank enqueue of the style batch, temperature-statistic update, and a
    learning-rate tick.
    """

    def __init__(self, config: TrainConfig, content: Optional[ImageStream] = None,
                 style: Optional[ImageStream] = None, extractor: Optional[torch.nn.Module] = None,
                 generator: Optional[Generator] = None):
        self.config = config
        self.content, self.style = content, style
        torch.manual_seed(config.seed)
        if extractor is None:
            extractor = ConvStackExtractor(config.extractor_channels, seed=config.seed)
        self.msp = MultiLayerStyleProjector(extractor, config.code_dim, config.msp_hidden)
        m = self.msp.num_layers
        if generator is None:
            cls = BACKBONES[config.backbone]
            generator = cls(self.msp.code_dims, config.generator_channels) if cls is AdaINGenerator else cls()
        self.gen = generator
        self.disc_r = Discriminator("mixed" if config.mix_de else "realistic", config.disc_channels)
        self.disc_a = Discriminator("artistic", config.disc_channels)
        self.opt_g = _adam(self.gen.parameters(), config)
        self.opt_d = _adam(list(self.disc_r.parameters()) + list(self.disc_a.parameters()), config)
        self.opt_msp = _adam(self.msp.head_parameters(), config)
        self.msp_key = None
        if config.key_momentum > 0:
            # momentum copy of the heads (shared frozen extractor) that encodes bank entries and positives
            self.msp_key = MultiLayerStyleProjector(extractor, self.msp.code_dims, config.msp_hidden)
            self.msp_key.heads.load_state_dict(self.msp.heads.state_dict())
            self.msp_key.requires_grad_(False)
        self.temp_config = config.temperature_config()
        self.bank = MemoryBank(m, self.msp.code_dims, config.bank_capacity)
        self.temp_state = TemperatureState.fresh(m, self.temp_config)
        self.rng = np.random.default_rng(config.seed + 7)
        self.iteration = 0
        self.adv_mode = "mix" if config.mix_de else "one" if config.one_de else "dual"
        self.pairing = "printed" if config.printed_pairing else "prose"

    # -- schedule -------------------------------------------------------
    def lr_at(self, iteration: int) -> float:
        if self.config.decay == "none":
            return self.config.lr
        return self.config.lr * (1.0 - iteration / self.config.iterations)

    def _set_lr(self):
        lr = self.lr_at(self.iteration)
        for opt in (self.opt_g, self.opt_d, self.opt_msp):
            if opt is not None:
                for group in opt.param_groups:
                    group["lr"] = lr

    @property
    def optimizers(self):
        return {"gen": self.opt_g, "disc": self.opt_d, "msp": self.opt_msp}

    # -- building blocks ------------------------------------------------
    @property
    def style_encoder(self) -> MultiLayerStyleProjector:
        """The projector whose codes fill the bank and condition the generator:
        the momentum copy when there is one, else the trained projector."""
        return self.msp_key if self.msp_key is not None else self.msp

    def encode(self, images: torch.Tensor) -> StyleCode:
        return self.style_encoder(images)

    def stylize(self, content: torch.Tensor, style: torch.Tensor) -> torch.Tensor:
        return self.gen(content, self.encode(style))

    def bank_ready(self) -> bool:
        return len(self.bank) >= self.config.batch_size

    def _warmup_penalty(self, a: StyleCode, b: StyleCode) -> torch.Tensor:
        # positive-only term used until the bank holds one batch of negatives
        tau = self.temp_config.fixed_tau
        return sum(((1 - (x * y.detach()).sum(1)) / tau).mean() for x, y in zip(a, b))

    def _generator_losses(self, batch_c, batch_s, z_c, z_s, i_cs, i_sc, feats_c=None):
        cfg = self.config
        parts, info = {}, None
        if self.adv_mode != "none" and not cfg.no_de:
            parts["adv"] = generator_adversarial_loss(self.disc_r, self.disc_a, batch_c, batch_s, i_cs, i_sc,
                                                      self.pairing, self.adv_mode)
        parts["cyc"] = cycle_consistency_loss(lambda x, y: self.gen(x, z_c if y is batch_c else z_s),
                                              batch_c, batch_s, i_cs, i_sc, asymmetric=cfg.asym_cycle)
        enc = self.style_encoder
        feats_o = enc.features(i_cs)
        z_tilde = enc.project(feats_o)
        if self.bank_ready():
            parts["contra_G"], info = adaptive_contrastive_loss(z_tilde, z_s, z_c, self.bank, self.temp_state,
                                                                self.temp_config, return_info=True)
        else:
            parts["contra_G"] = self._warmup_penalty(z_tilde, z_s)
        if cfg.lambda4 > 0:
            k = cfg.patch_layer
            if feats_c is None:
                with torch.no_grad():
                    feats_c = enc.features(batch_c)
            parts["contra_c"] = patch_content_loss(feats_c[k], feats_o[k], cfg.patch_negatives, cfg.patch_tau,
                                                   self.rng)
        return parts, info

    # -- one iteration --------------------------------------------------
    def train_step(self, batch_c: torch.Tensor, batch_s: torch.Tensor) -> dict:
        cfg = self.config
        if self.iteration >= cfg.iterations:
            raise RuntimeError("training schedule already finished")
        if self.iteration < cfg.msp_pretrain_steps:
            record = {"iteration": self.iteration + 1, "phase": "msp_pretrain", "lr": self.lr_at(self.iteration)}
            record.update(self._msp_update(batch_s))
            self._finish(batch_s, None)
            return record

        record = {"iteration": self.iteration + 1, "phase": "joint", "lr": self.lr_at(self.iteration)}
        with torch.no_grad():
            enc = self.style_encoder
            feats_c = enc.features(batch_c)
            z_c, z_s = enc.project(feats_c), enc(batch_s)
        i_cs, i_sc = self.gen(batch_c, z_s), self.gen(batch_s, z_c)
        snapshot = None

        use_de = not cfg.no_de
        if use_de:
            snapshot = (copy.deepcopy(self.disc_r.state_dict()), copy.deepcopy(self.disc_a.state_dict()),
                        copy.deepcopy(self.opt_d.state_dict()))
            d_loss = discriminator_loss(self.disc_r, self.disc_a, batch_c, batch_s, i_cs, i_sc,
                                        self.pairing, self.adv_mode)
            if not torch.isfinite(d_loss):
                raise NonFiniteLossError("disc", float(d_loss.detach()))
            self.opt_d.zero_grad(set_to_none=True)
            d_loss.backward()
            self.opt_d.step()
            record["loss_disc"] = float(d_loss.detach())

        try:
            with frozen(self.msp, self.disc_r, self.disc_a):
                parts, info = self._generator_losses(batch_c, batch_s, z_c, z_s, i_cs, i_sc, feats_c)
                loss = total_loss(parts, cfg)
            if self.opt_g is not None and isinstance(loss, torch.Tensor) and loss.requires_grad:
                self.opt_g.zero_grad(set_to_none=True)
                loss.backward()
                self.opt_g.step()
            record.update(self._msp_update(batch_s))
        except Exception:
            if snapshot is not None:
                self.disc_r.load_state_dict(snapshot[0])
                self.disc_a.load_state_dict(snapshot[1])
                self.opt_d.load_state_dict(snapshot[2])
            raise

        if use_de:
            with torch.no_grad():
                record["loss_adv"] = float(adversarial_loss(self.disc_r, self.disc_a, batch_c, batch_s, i_cs, i_sc,
                                                            self.pairing, self.adv_mode))
        for name, value in parts.items():
            record[f"loss_{name}"] = float(value.detach())
        record["loss_total"] = float(loss.detach()) if isinstance(loss, torch.Tensor) else float(loss)
        record["warmup"] = info is None
        if info is not None and self.temp_config.adaptive:
            record["tau_pos"] = float(np.mean(info["tau_pos"]))
            record["tau_neg"] = float(np.mean(info["tau_neg"]))
        else:
            record["tau_pos"] = record["tau_neg"] = self.temp_config.fixed_tau
        self._finish(batch_s, info)
        return record

    def _msp_update(self, batch_s: torch.Tensor) -> dict:
        if self.opt_msp is None:
            return {}
        z = self.msp(batch_s)
        augmented = augment(batch_s, self.rng, batch_s.shape[-1])
        if self.msp_key is not None:
            with torch.no_grad():
                z_plus = self.msp_key(augmented)
        else:
            z_plus = self.msp(augmented)
        if self.bank_ready():
            loss = msp_contrastive_loss(z, z_plus, self.bank, self.temp_config.fixed_tau)
        elif self.msp_key is not None:
            loss = self._warmup_penalty(z, z_plus)
        else:
            loss = self._warmup_penalty(z, z_plus) + self._warmup_penalty(z_plus, z)
        if not torch.isfinite(loss):
            raise NonFiniteLossError("msp", float(loss.detach()))
        self.opt_msp.zero_grad(set_to_none=True)
        loss.backward()
        self.opt_msp.step()
        if self.msp_key is not None:
            m = self.config.key_momentum
            with torch.no_grad():
                for pk, pq in zip(self.msp_key.heads.parameters(), self.msp.heads.parameters()):
                    pk.mul_(m).add_(pq, alpha=1 - m)
        return {"loss_msp": float(loss.detach())}

    def _finish(self, batch_s, info):
        with torch.no_grad():
            self.bank.enqueue(self.style_encoder(batch_s))
        if info is not None and self.temp_config.adaptive:
            update_stats(self.temp_state, info["sum_g_neg"], info["pos_content_sim"], self.temp_config)
        self.iteration += 1
        self._set_lr()

    def step(self) -> dict:
        return self.train_step(next(self.content), next(self.style))

    def run(self, out_dir=None, steps: Optional[int] = None, log_every: int = 0) -> list:
        """Train until ``iterations`` (or ``steps`` more), appending to metrics.jsonl."""
        out = Path(out_dir) if out_dir is not None else None
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
        end = self.config.iterations if steps is None else min(self.iteration + steps, self.config.iterations)
        records = []
        while self.iteration < end:
            rec = self.step()
            records.append(rec)
            if out is not None:
                with open(out / "metrics.jsonl", "a") as f:
                    f.write(json.dumps(rec) + "\n")
                every = self.config.checkpoint_every
                if (every and self.iteration % every == 0) or self.iteration == self.config.iterations:
                    self.save_checkpoint(out / f"ckpt_{self.iteration}.bin")
            if log_every and self.iteration % log_every == 0:
                log.info("iter %d: %s", self.iteration,
                         {k: round(v, 4) for k, v in rec.items() if isinstance(v, float)})
        return records

    # -- checkpoints ----------------------------------------------------
    def state_tensors(self) -> Dict[str, torch.Tensor]:
        out = {}
        for k, v in self.msp.extractor.state_dict().items():
            out[f"extractor.{k}"] = v
        for i, head in enumerate(self.msp.heads):
            for k, v in head.state_dict().items():
                out[f"msp.layer{i}.{k}"] = v
        if self.msp_key is not None:
            for i, head in enumerate(self.msp_key.heads):
                for k, v in head.state_dict().items():
                    out[f"msp_key.layer{i}.{k}"] = v
        for prefix, module in (("gen", self.gen), ("disc_r", self.disc_r), ("disc_a", self.disc_a)):
            for k, v in module.state_dict().items():
                out[f"{prefix}.{k}"] = v
        for k, v in self.bank.state_dict().items():
            out[f"bank.{k}"] = v
        for k, v in self.temp_state.state_dict().items():
            out[f"tempstate.{k}"] = v
        return {k: v.detach().clone() for k, v in out.items()}

    def save_checkpoint(self, path) -> None:
        meta = {
            "iteration": self.iteration,
            "config": self.config.to_dict(),
            "config_hash": self.config.hash(),
            "rng": self.rng.bit_generator.state,
            "streams": {name: s.state_dict() for name, s in (("content", self.content), ("style", self.style))
                        if s is not None},
        }
        archive = {
            "tensors": self.state_tensors(),
            "optim": {k: o.state_dict() for k, o in self.optimizers.items() if o is not None},
            "meta": json.dumps(meta),
        }
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        torch.save(archive, tmp)
        tmp.replace(path)

    def load_checkpoint(self, path) -> None:
        archive = torch.load(path, map_location="cpu", weights_only=True)
        meta = json.loads(archive["meta"])
        t = archive["tensors"]

        def sub(prefix):
            return {k[len(prefix):]: v for k, v in t.items() if k.startswith(prefix)}

        self.msp.extractor.load_state_dict(sub("extractor."))
        for i, head in enumerate(self.msp.heads):
            head.load_state_dict(sub(f"msp.layer{i}."))
        if self.msp_key is not None:
            for i, head in enumerate(self.msp_key.heads):
                head.load_state_dict(sub(f"msp_key.layer{i}."))
        self.gen.load_state_dict(sub("gen."))
        self.disc_r.load_state_dict(sub("disc_r."))
        self.disc_a.load_state_dict(sub("disc_a."))
        self.bank.load_state_dict(sub("bank."))
        self.temp_state = TemperatureState.from_state_dict(sub("tempstate."))
        for k, opt in self.optimizers.items():
            if opt is not None and k in archive["optim"]:
                opt.load_state_dict(archive["optim"][k])
        self.rng.bit_generator.state = meta["rng"]
        for name, s in (("content", self.content), ("style", self.style)):
            if s is not None and name in meta["streams"]:
                s.load_state_dict(meta["streams"][name])
        self.iteration = int(meta["iteration"])
        self._set_lr()


def checkpoint_meta(path) -> dict:
    return json.loads(torch.load(path, map_location="cpu", weights_only=True)["meta"])


def read_checkpoint_config(path) -> TrainConfig:
    return TrainConfig(**checkpoint_meta(path)["config"])


def trainer_from_checkpoint(path, content: Optional[ImageStream] = None,
                            style: Optional[ImageStream] = None) -> Trainer:
    trainer = Trainer(read_checkpoint_config(path), content, style)
    trainer.load_checkpoint(path)
    return trainer
