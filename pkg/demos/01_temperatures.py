"""How the two adaptive temperatures react to their inputs.

The negative temperature grows when the bank holds many hard negatives
(similarities above the clip threshold). The positive temperature is the
negative one scaled by a factor that shrinks as the reference style resembles
the content image. With tau+ = tau- the loss is plain InfoNCE, and the
gradient on the positive balances the summed gradients on the negatives.

    python3 demos/01_temperatures.py
"""
import numpy as np
import torch

from ucast.contrastive import (TemperatureConfig, TemperatureState, contrastive_gradients, info_nce,
                               negative_temperature, positive_temperature, update_stats)

cfg = TemperatureConfig()
state = TemperatureState.fresh(1, cfg)
rng = np.random.default_rng(0)

# Warm the running statistics with typical banks: mostly easy negatives.
for _ in range(200):
    s_neg = rng.uniform(-0.2, 0.45, 64)
    s_neg_sum = np.where(s_neg > cfg.clip_threshold, s_neg, 0).sum()
    update_stats(state, [s_neg_sum], [rng.normal(0.3, 0.1)], cfg)
print(f"running stats  mu-={state.mu_neg[0]:.2f}  sigma-={state.sigma_neg[0]:.2f}  "
      f"mu+={state.mu_pos[0]:.2f}  sigma+={state.sigma_pos[0]:.2f}")

print("\nhard negatives in a 64-entry bank -> tau-")
for hard in (0, 4, 8, 16, 32):
    s_neg = np.concatenate([np.full(hard, 0.6), np.full(64 - hard, 0.0)])
    (tau,) = negative_temperature([s_neg], state, cfg)
    print(f"  {hard:2d} hard  tau- = {float(tau):.4f}")

print("\nreference/content similarity -> tau+ (tau- fixed at 0.10)")
for sim in (-0.2, 0.1, 0.3, 0.5, 0.9):
    (tau,) = positive_temperature([0.10], [sim], state, cfg)
    print(f"  sim {sim:+.1f}  tau+ = {float(tau):.4f}")

# Gradient balance at a shared temperature.
s_pos = torch.tensor(0.4)
s_neg = torch.tensor(rng.uniform(-1, 1, 8))
g_pos, g_neg = contrastive_gradients(s_pos.double(), s_neg, 0.1, 0.1)
print(f"\nshared tau=0.1: |dL/ds+| = {abs(float(g_pos)):.6f},  sum dL/ds- = {float(g_neg.sum()):.6f}")
print(f"uniform similarities, N=8: loss = {float(info_nce(torch.tensor(0.2), torch.full((8,), 0.2), 0.1)):.6f}"
      f"  (ln 9 = {np.log(9):.6f})")
