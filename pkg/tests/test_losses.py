import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from tristat.losses import ADFState, adf_loss, loss_l1_svd, loss_patch_stats, patch_bounds
from tristat.tensor import Tensor


def rand(shape, seed=0):
    return np.random.default_rng(seed).normal(size=shape)


def test_perfect_prediction_zero_loss():
    y = rand((2, 24, 3))
    total, parts = adf_loss(Tensor(y.copy()), y, ADFState(2, 8))
    # the 1e-8 guard in the correlation denominator leaves 1 - r = 1e-8 / var per patch
    assert total.item() == pytest.approx(0.0, abs=1e-7)
    assert all(parts[k] == pytest.approx(0.0, abs=1e-12) for k in ("mse", "l1_svd", "mean", "var"))


def test_log_sigma_gradient_is_one_at_zero_aux():
    y = rand((2, 24, 3))
    state = ADFState(2, 8)
    total, _ = adf_loss(Tensor(y.copy()), y, state)
    total.backward()
    np.testing.assert_allclose(state.log_sigma.grad, 1.0)


def test_log_sigma_gradient_general():
    y, p = rand((2, 24, 3)), rand((2, 24, 3), 1)
    state = ADFState(2, 8)
    state.log_sigma.data[...] = [0.1, -0.2, 0.3, 0.0]
    total, parts = adf_loss(Tensor(p), y, state)
    total.backward()
    aux = np.array([parts[k] for k in ("l1_svd", "mean", "var", "corr")])
    want = -aux * np.exp(-2 * state.log_sigma.data) + 1
    np.testing.assert_allclose(state.log_sigma.grad, want, rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(hnp.arrays(np.float64, 4, elements=st.floats(-50, 50)))
def test_finite_for_any_log_sigma(ls):
    state = ADFState(2, 8)
    state.log_sigma.data[...] = ls
    total, _ = adf_loss(Tensor(rand((1, 16, 2))), rand((1, 16, 2), 1), state)
    assert np.isfinite(total.item())


def test_l1_svd_full_rank_equals_plain_l1():
    y, p = rand((2, 6, 3)), rand((2, 6, 3), 1)
    assert loss_l1_svd(Tensor(p), y, 3).item() == pytest.approx(np.abs(p - y).mean(), abs=1e-8)


def test_l1_svd_dense_oracle():
    y, p = rand((1, 6, 3)), rand((1, 6, 3), 1)
    _, _, vt = np.linalg.svd(y[0])
    proj = vt[:2].T @ vt[:2]
    want = np.abs(p[0] @ proj - y[0] @ proj).mean()
    assert loss_l1_svd(Tensor(p), y, 2).item() == pytest.approx(want, abs=1e-8)


def test_patch_stats_cases():
    y = rand((2, 24, 3))
    y = y - y.reshape(2, 3, 8, 3).mean(axis=2).repeat(8, axis=1)   # zero-mean patches
    m, v, c = (t.item() for t in loss_patch_stats(Tensor(y.copy()), y, 8))
    assert (m, v) == pytest.approx((0, 0), abs=1e-12) and c == pytest.approx(0, abs=1e-6)
    _, _, c = loss_patch_stats(Tensor(-y), y, 8)
    assert c.item() == pytest.approx(2.0, abs=1e-6)
    m, v, c = (t.item() for t in loss_patch_stats(Tensor(y + 0.7), y, 8))
    assert m == pytest.approx(0.49) and v == pytest.approx(0, abs=1e-12) and c == pytest.approx(0, abs=1e-6)


def test_constant_patch_corr_is_one():
    y = np.zeros((1, 8, 1))
    _, _, c = loss_patch_stats(Tensor(rand((1, 8, 1))), y, 8)
    assert c.item() == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(hnp.arrays(np.float64, (2, 20, 2), elements=st.floats(-5, 5)),
       hnp.arrays(np.float64, (2, 20, 2), elements=st.floats(-5, 5)))
def test_aux_ranges(p, y):
    m, v, c = (t.item() for t in loss_patch_stats(Tensor(p), y, 6))
    assert m >= 0 and v >= 0 and -1e-9 <= c <= 2 + 1e-9


def test_patch_bounds():
    assert patch_bounds(96, 24) == [(0, 24), (24, 48), (48, 72), (72, 96)]
    assert patch_bounds(49, 24) == [(0, 24), (24, 49)]
    assert patch_bounds(50, 24) == [(0, 24), (24, 48), (48, 50)]
    assert patch_bounds(60, 24) == [(0, 24), (24, 48), (48, 60)]
