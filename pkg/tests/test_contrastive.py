import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings, strategies as st

from ucast.contrastive import (MemoryBank, TemperatureConfig, TemperatureState, adaptive_contrastive_loss,
                               bank_enqueue, clipped_similarity_sum, contrastive_gradients,
                               dual_temperature_nce, info_nce, msp_contrastive_loss, negative_temperature,
                               positive_temperature, suitability_factor, update_stats)


def unit(*shape, seed=0, dtype=torch.float64):
    g = torch.Generator().manual_seed(seed)
    return torch.nn.functional.normalize(torch.randn(*shape, generator=g, dtype=dtype), dim=-1)


def filled_bank(vectors, layers=1):
    bank = MemoryBank(layers, vectors.shape[1], capacity=max(len(vectors), 1), dtype=vectors.dtype)
    bank.enqueue([vectors] * layers)
    return bank


def reference_term(s_pos, s_neg, tau_pos, tau_neg):
    # straight transcription: -log(e^{s+/t+} / (e^{s+/t+} + sum_j e^{s-_j/t-}))
    num = math.exp(s_pos / tau_pos)
    den = num + sum(math.exp(s / tau_neg) for s in s_neg)
    return -math.log(num / den)


# -- msp loss -----------------------------------------------------------

def test_msp_loss_uniform_two_negatives():
    e = unit(1, 8)
    bank = filled_bank(e.repeat(2, 1))
    assert float(msp_contrastive_loss([e], [e], bank, 0.07)) == pytest.approx(math.log(3), abs=1e-12)


def test_msp_loss_softplus_case():
    e1 = torch.tensor([[1.0, 0.0]], dtype=torch.float64)
    bank = filled_bank(-e1)
    loss = float(msp_contrastive_loss([e1], [e1], bank, 0.1))
    assert loss == pytest.approx(math.log1p(math.exp(-20)), rel=1e-9)
    assert loss == pytest.approx(2.06e-9, rel=1e-2)


def test_msp_loss_sums_layers_full_bank():
    e = unit(1, 16)
    bank = MemoryBank(4, 16, capacity=4096, dtype=torch.float64)
    bank.enqueue([e.repeat(4096, 1)] * 4)
    loss = float(msp_contrastive_loss([e] * 4, [e] * 4, bank, 0.07))
    assert loss == pytest.approx(4 * math.log(4097), abs=1e-9)
    assert loss == pytest.approx(33.27, abs=5e-3)


def test_msp_loss_errors_and_gradients():
    z, zp = unit(3, 8, seed=1).requires_grad_(), unit(3, 8, seed=2).requires_grad_()
    with pytest.raises(ValueError):
        msp_contrastive_loss([z], [zp], MemoryBank(1, 8), 0.07)
    bank = filled_bank(unit(5, 8, seed=3))
    with pytest.raises(ValueError):
        msp_contrastive_loss([z], [zp], bank, 0.0)
    loss = msp_contrastive_loss([z], [zp], bank, 0.07)
    assert float(loss.detach()) > 0
    loss.backward()
    assert z.grad.abs().sum() > 0 and zp.grad.abs().sum() > 0


# -- temperatures -------------------------------------------------------

def test_negative_temperature_midpoint_and_saturation():
    cfg = TemperatureConfig()
    state = TemperatureState.fresh(1, cfg)
    s = np.array([0.5, 0.9, 0.6])  # all above threshold: sum = 2.0 = prior mean
    (tau,) = negative_temperature([s], state, cfg)
    assert tau == pytest.approx(0.5 * cfg.t_range_neg + cfg.t_bound_neg, abs=1e-15)
    (tau,) = negative_temperature([np.full(5000, 0.99)], state, cfg)
    assert tau == pytest.approx(cfg.t_bound_neg + cfg.t_range_neg, abs=1e-12)


def test_negative_temperature_all_clipped_default_value():
    cfg = TemperatureConfig()
    state = TemperatureState.fresh(1, cfg)
    (tau,) = negative_temperature([np.array([0.3, -0.2, 0.1])], state, cfg)
    expected = 0.2 / (1 + math.exp(2.0)) + 0.05
    assert tau == pytest.approx(expected, abs=1e-15)
    assert tau == pytest.approx(0.0738, abs=1e-4)


def test_clip_is_strict():
    assert clipped_similarity_sum(np.array([0.3, 0.30001]), 0.3) == pytest.approx(0.30001)


def test_positive_temperature_midpoint_and_saturation():
    cfg = TemperatureConfig()
    state = TemperatureState.fresh(1, cfg)
    (tp,) = positive_temperature([0.1], [cfg.mu_pos_prior], state, cfg)
    assert tp == pytest.approx(0.1 * (0.5 * cfg.t_range_pos + cfg.t_bound_pos), abs=1e-15)
    f = suitability_factor(1.0, 0.0, 1e-4, cfg)
    assert f == pytest.approx(cfg.t_bound_pos, abs=1e-12)


def test_suitability_factor_nonincreasing_on_grid():
    cfg = TemperatureConfig()
    grid = np.linspace(-1, 1, 100)
    f = suitability_factor(grid, 0.2, 0.3, cfg)
    assert np.all(np.diff(f) <= 0)


def test_temperatures_carry_no_gradient():
    cfg = TemperatureConfig()
    state = TemperatureState.fresh(1, cfg)
    s = torch.rand(2, 6, dtype=torch.float64, requires_grad=True)
    (tn,) = negative_temperature([s], state, cfg)
    (tp,) = positive_temperature([tn], [s[:, 0]], state, cfg)
    assert not tn.requires_grad and not tp.requires_grad


# -- adaptive loss ------------------------------------------------------

def test_adaptive_uniform_case_is_log_n_plus_one():
    cfg = TemperatureConfig(adaptive=False)
    e = unit(1, 8)
    bank = MemoryBank(1, 8, capacity=4096, dtype=torch.float64)
    bank.enqueue([e.repeat(4096, 1)])
    loss = adaptive_contrastive_loss([e], [e], [e], bank, TemperatureState.fresh(1), cfg)
    assert float(loss) == pytest.approx(math.log(4097), abs=1e-12)
    assert float(loss) == pytest.approx(8.318, abs=1e-3)


def test_adaptive_closed_form_orthogonal_negatives():
    cfg = TemperatureConfig(adaptive=False, fixed_tau=0.07)
    e1 = torch.tensor([[1.0, 0.0, 0.0]], dtype=torch.float64)
    e2 = torch.tensor([[0.0, 1.0, 0.0]], dtype=torch.float64)
    bank = filled_bank(e2.repeat(10, 1))
    loss = float(adaptive_contrastive_loss([e1], [e1], [e1], bank, TemperatureState.fresh(1), cfg))
    assert loss == pytest.approx(math.log1p(10 * math.exp(-1 / 0.07)), rel=1e-9)
    assert loss == pytest.approx(6.2e-6, rel=2e-2)


@pytest.mark.parametrize("seed", range(5))
def test_adaptive_matches_scalar_reference(seed):
    cfg = TemperatureConfig(clip_threshold=0.0)
    m, b, n, k = 3, 2, 20, 16
    zt = [unit(b, k, seed=seed * 10 + i) for i in range(m)]
    zh = [unit(b, k, seed=seed * 10 + i + 3) for i in range(m)]
    zc = [unit(b, k, seed=seed * 10 + i + 6) for i in range(m)]
    bank = MemoryBank(m, k, capacity=n, dtype=torch.float64)
    bank.enqueue([unit(n, k, seed=seed * 10 + i + 100) for i in range(m)])
    state = TemperatureState.fresh(m, cfg)
    update_stats(state, [0.5, 1.0, 1.5], [0.1, 0.0, -0.1], cfg)
    update_stats(state, [1.5, 0.5, 1.0], [0.3, 0.2, 0.1], cfg)
    loss = float(adaptive_contrastive_loss(zt, zh, zc, bank, state, cfg))

    total = 0.0
    for r in range(b):
        for i in range(m):
            neg = bank.negatives(i).tolist()
            t, h, c = zt[i][r].tolist(), zh[i][r].tolist(), zc[i][r].tolist()
            dot = lambda u, v: sum(x * y for x, y in zip(u, v))
            s_pos = dot(t, h)
            s_neg = [dot(t, v) for v in neg]
            g = sum(s for s in s_neg if s > cfg.clip_threshold)
            tau_n = cfg.t_range_neg / (1 + math.exp(-(g - state.mu_neg[i]) / state.sigma_neg[i])) + cfg.t_bound_neg
            f = cfg.t_range_pos / (1 + math.exp((dot(h, c) - state.mu_pos[i]) / state.sigma_pos[i])) + cfg.t_bound_pos
            total += reference_term(s_pos, s_neg, tau_n * f, tau_n)
    assert loss == pytest.approx(total / b, rel=1e-6)


def test_adaptive_fixed_reduces_to_info_nce():
    cfg = TemperatureConfig(adaptive=False, fixed_tau=0.2)
    zt, zh = unit(4, 8, seed=1), unit(4, 8, seed=2)
    bank = filled_bank(unit(30, 8, seed=3))
    loss = float(adaptive_contrastive_loss([zt], [zh], [zh], bank, TemperatureState.fresh(1), cfg))
    ref = float(info_nce((zt * zh).sum(1), zt @ bank.negatives(0).T, 0.2).mean())
    assert loss == pytest.approx(ref, rel=1e-12)


def test_adaptive_gradient_reaches_output_code_only():
    cfg = TemperatureConfig()
    zt = unit(2, 8, seed=1).requires_grad_()
    zh = unit(2, 8, seed=2).requires_grad_()
    zc = unit(2, 8, seed=3).requires_grad_()
    bank = filled_bank(unit(12, 8, seed=4))
    adaptive_contrastive_loss([zt], [zh], [zc], bank, TemperatureState.fresh(1), cfg).backward()
    assert zt.grad is not None and zt.grad.abs().sum() > 0
    assert zh.grad is None and zc.grad is None


def test_adaptive_code_gradient_matches_chain_rule():
    # dL/dz~ = g_pos * z^ + sum_j g_neg_j * z-_j with the analytic oracle
    cfg = TemperatureConfig()
    zt = unit(1, 8, seed=5).requires_grad_()
    zh, zc = unit(1, 8, seed=6), unit(1, 8, seed=7)
    negs = unit(9, 8, seed=8)
    bank = filled_bank(negs)
    state = TemperatureState.fresh(1, cfg)
    loss, info = adaptive_contrastive_loss([zt], [zh], [zc], bank, state, cfg, return_info=True)
    loss.backward()
    s_pos = float((zt * zh).sum().detach())
    s_neg = (zt @ negs.T).detach().numpy()[0]
    g_pos, g_neg = contrastive_gradients(s_pos, s_neg, info["tau_pos"][0], info["tau_neg"][0])
    expected = g_pos * zh[0].numpy() + g_neg @ negs.numpy()
    np.testing.assert_allclose(zt.grad[0].numpy(), expected, atol=1e-10)


def test_adaptive_errors():
    cfg = TemperatureConfig()
    z = unit(1, 4)
    with pytest.raises(ValueError):
        adaptive_contrastive_loss([z], [z], [z], MemoryBank(1, 4), TemperatureState.fresh(1), cfg)
    bank = filled_bank(unit(3, 4))
    bad = torch.full((1, 4), float("nan"), dtype=torch.float64)
    with pytest.raises(ValueError):
        adaptive_contrastive_loss([bad], [z], [z], bank, TemperatureState.fresh(1), cfg)


# -- analytic gradients -------------------------------------------------

def test_gradients_symmetric_two_way():
    g_pos, g_neg = contrastive_gradients(0.0, [0.0], 1.0, 1.0)
    assert g_pos == pytest.approx(-0.5, abs=1e-15)
    np.testing.assert_allclose(g_neg, [0.5], atol=1e-15)
    loss = float(dual_temperature_nce(torch.tensor(0.0, dtype=torch.float64),
                                      torch.zeros(1, dtype=torch.float64), 1.0, 1.0))
    assert loss == pytest.approx(math.log(2), abs=1e-15)


def test_gradients_stable_at_extremes():
    g_pos, g_neg = contrastive_gradients(-1.0, np.ones(4096), 1e-3, 1e-3)
    assert np.isfinite(g_pos) and np.isfinite(g_neg).all()
    loss = dual_temperature_nce(torch.tensor(-1.0, dtype=torch.float64), torch.ones(4096, dtype=torch.float64),
                                1e-3, 1e-3)
    assert torch.isfinite(loss)


def test_hardness_awareness():
    s_neg = np.linspace(-1, 1, 50)
    _, g_neg = contrastive_gradients(0.3, s_neg, 0.2, 0.1)
    assert np.all(np.diff(g_neg) > 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1, 1), st.lists(st.floats(-1, 1), min_size=1, max_size=32),
       st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_gradient_ratio_identity(s_pos, s_neg, tau_pos, tau_neg):
    g_pos, g_neg = contrastive_gradients(s_pos, s_neg, tau_pos, tau_neg)
    lhs, rhs = tau_pos * abs(g_pos), tau_neg * g_neg.sum()
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-300)


# -- memory bank --------------------------------------------------------

def _scalar_codes(values):
    return [torch.tensor([[float(v)] for v in values])]


def test_bank_fifo_order():
    bank = MemoryBank(1, 1, capacity=4)
    for v in range(6):  # a..f
        bank_enqueue(bank, _scalar_codes([v]))
    assert bank.negatives(0)[:, 0].tolist() == [2, 3, 4, 5]


def test_bank_partial_and_full():
    bank = MemoryBank(2, 8, capacity=4096)
    bank.enqueue([unit(3, 8, dtype=torch.float32)] * 2)
    assert len(bank) == 3
    first = unit(1, 8, seed=99, dtype=torch.float32)
    bank = MemoryBank(1, 8, capacity=4096)
    bank.enqueue([first])
    bank.enqueue([unit(4095, 8, seed=1, dtype=torch.float32)])
    assert len(bank) == 4096 and torch.equal(bank.negatives(0)[0], first[0])
    bank.enqueue([unit(1, 8, seed=2, dtype=torch.float32)])
    assert len(bank) == 4096
    assert not (bank.negatives(0) == first).all(1).any()


def test_bank_rejects_bad_shapes_and_detaches():
    bank = MemoryBank(2, 4)
    with pytest.raises(ValueError):
        bank.enqueue([unit(1, 4)])
    with pytest.raises(ValueError):
        bank.enqueue([unit(1, 4), unit(1, 5)])
    z = unit(2, 4, dtype=torch.float32).requires_grad_()
    bank.enqueue([z, z])
    assert not bank.negatives(0).requires_grad


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.lists(st.lists(st.integers(0, 1000), min_size=1, max_size=7), max_size=20))
def test_bank_matches_reference_queue(capacity, batches):
    from collections import deque
    ref = deque(maxlen=capacity)
    bank = MemoryBank(1, 1, capacity=capacity)
    for batch in batches:
        bank.enqueue(_scalar_codes(batch))
        ref.extend(batch)
    assert bank.negatives(0)[:, 0].tolist() == list(ref)


# -- running statistics -------------------------------------------------

def test_update_stats_first_observation():
    cfg = TemperatureConfig()
    state = update_stats(TemperatureState.fresh(1, cfg), 3.5, -0.25, cfg)
    assert state.mu_neg[0] == 3.5 and state.mu_pos[0] == -0.25 and state.update_count == 1


def test_update_stats_constant_stream_hits_floor():
    cfg = TemperatureConfig(ema_decay=0.9)
    state = TemperatureState.fresh(1, cfg)
    for _ in range(1000):
        update_stats(state, 2.0, 0.5, cfg)
    assert state.mu_neg[0] == pytest.approx(2.0)
    assert state.sigma_neg[0] == pytest.approx(1e-6) and state.sigma_pos[0] == pytest.approx(1e-6)


def test_update_stats_alternating_stream():
    cfg = TemperatureConfig(ema_decay=0.99)
    state = TemperatureState.fresh(1, cfg)
    for k in range(10_000):
        update_stats(state, k % 2, k % 2, cfg)
    assert 0.45 <= state.mu_neg[0] <= 0.55
    assert state.sigma_neg[0] == pytest.approx(0.5, abs=0.02)


def test_update_stats_rejects_non_finite():
    cfg = TemperatureConfig()
    state = update_stats(TemperatureState.fresh(2, cfg), [1.0, 2.0], [0.0, 0.1], cfg)
    before = state.state_dict()
    with pytest.raises(ValueError):
        update_stats(state, [float("nan"), 1.0], [0.0, 0.0], cfg)
    after = state.state_dict()
    assert all(torch.equal(before[k], after[k]) for k in before)


def test_temperature_config_validation():
    with pytest.raises(ValueError):
        TemperatureConfig(t_bound_neg=0.0)
    with pytest.raises(ValueError):
        TemperatureConfig(ema_decay=1.0)
