import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tristat.errors import ConfigurationError
from tristat.temporal import MemoryBank, PatchConfig, TemporalLearner, patchify, retrieve
from tristat.tensor import Tensor


def learner(L=48, T=12, C=2, d=8, **kw):
    return TemporalLearner(L, T, C, PatchConfig(16, 8, d, 2), np.random.default_rng(0), **kw)


@pytest.mark.parametrize("L, P, S, N", [(96, 16, 8, 11), (96, 96, 5, 1), (50, 10, 10, 5), (17, 4, 3, 5)])
def test_patch_count(L, P, S, N):
    assert PatchConfig(P, S, 8, 2).num_patches(L) == N
    assert patchify(np.zeros((2, L, 3)), PatchConfig(P, S, 8, 2)).shape == (2, N, P * 3)


def test_patch_errors():
    with pytest.raises(ConfigurationError):
        PatchConfig(8, 9, 8, 2)
    with pytest.raises(ConfigurationError):
        PatchConfig(16, 8, 8, 2).num_patches(10)


def test_patch_layout_and_coverage():
    L, C = 40, 2
    x = np.arange(L * C, dtype=float).reshape(1, L, C)
    cfg = PatchConfig(8, 4, 8, 2)
    p = patchify(x, cfg).data[0]
    np.testing.assert_array_equal(p[1], x[0, 4:12].reshape(-1))
    covered = np.unique(p)
    np.testing.assert_array_equal(covered, x.reshape(-1))


def test_zero_patches_give_position_plus_bias():
    m = learner()
    emb = m.embed_patches(Tensor(np.zeros((1, 5, 32)))).data[0]
    np.testing.assert_allclose(emb, m.pos_embedding.data + m.patch_proj.bias.data)


def test_position_sensitivity():
    m = learner()
    p = np.random.default_rng(1).normal(size=(1, 5, 32))
    swapped = p[:, [1, 0, 2, 3, 4]]
    a = m.embed_patches(Tensor(p)).data
    b = m.embed_patches(Tensor(swapped)).data
    assert not np.allclose(a[0, :2], b[0, [1, 0]])


def test_bank_fifo_against_reference():
    rng = np.random.default_rng(2)
    bank = MemoryBank(4, 3)
    ref = []
    for n in (2, 1, 3, 2):
        v = rng.normal(size=(n, 3))
        bank.enqueue(v)
        ref.extend(v)
        ref = ref[-4:]
        np.testing.assert_array_equal(bank.entries(), np.array(ref))
    assert bank.fill == 4


def test_bank_update_is_patch_mean():
    bank = MemoryBank(8, 3)
    x = np.random.default_rng(3).normal(size=(2, 5, 3))
    bank.update(Tensor(x))
    assert bank.fill == 2
    np.testing.assert_allclose(bank.entries(), x.mean(axis=1))


def test_frozen_bank_ignores_writes():
    bank = MemoryBank(4, 2)
    bank.frozen = True
    bank.enqueue(np.ones((3, 2)))
    assert bank.fill == 0


def test_empty_bank_is_identity():
    m = learner()
    x = Tensor(np.random.default_rng(4).normal(size=(2, 5, 8)))
    assert m.local_correlation(x) is x


def test_retrieve_exact_match_k1():
    q = np.random.default_rng(5).normal(size=(1, 1, 4))
    bank = np.vstack([np.random.default_rng(6).normal(size=(3, 4)), q[0]])
    np.testing.assert_allclose(retrieve(Tensor(q), bank, 1).data, q)


def test_retrieve_matches_linear_scan():
    rng = np.random.default_rng(7)
    q = rng.normal(size=(2, 3, 4))
    bank = rng.normal(size=(10, 4))
    got = retrieve(Tensor(q), bank, 3).data
    for b in range(2):
        for n in range(3):
            sims = np.array([q[b, n] @ e / np.linalg.norm(q[b, n]) / np.linalg.norm(e) for e in bank])
            top = np.argsort(-sims, kind="stable")[:3]
            w = np.exp(sims[top] - sims[top].max())
            w /= w.sum()
            np.testing.assert_allclose(got[b, n], w @ bank[top], atol=1e-12)


def test_retrieve_ties_prefer_older_entries():
    bank = np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 0.0], [3.0, 0.0]])
    out = retrieve(Tensor(np.array([[[1.0, 0.0]]])), bank, 2).data
    np.testing.assert_allclose(out[0, 0], (bank[0] + bank[2]) / 2)


def test_forward_shapes_and_query_construction():
    m = learner(C=2)
    x = np.random.default_rng(8).normal(size=(3, 48, 2))
    y, q, f = m(x)
    assert y.shape == (3, 12, 2) and q.shape == (3, 2, 8) and f.shape == (3, 5, 8)
    diff = q.data[:, 0] - q.data[:, 1]
    np.testing.assert_allclose(diff, np.broadcast_to(m.channel_embedding.data[0] - m.channel_embedding.data[1], diff.shape))


def test_bank_written_after_retrieval():
    m = learner()
    x = np.random.default_rng(9).normal(size=(2, 48, 2))
    y_first, _, _ = m(x)
    assert m.bank.fill == 2
    m.bank.reset()
    y_cold, _, _ = m(x, update_bank=False)
    np.testing.assert_array_equal(y_first.data, y_cold.data)
    assert m.bank.fill == 0


def test_gradient_reaches_patch_projection():
    m = learner()
    y, _, _ = m(np.random.default_rng(10).normal(size=(2, 48, 2)))
    (y ** 2).sum().backward()
    assert np.abs(m.patch_proj.weight.grad).sum() > 0


def test_global_mean_is_permutation_invariant_without_positions():
    m = learner()
    x = np.random.default_rng(11).normal(size=(1, 5, 8))
    a = m.global_correlation(Tensor(x)).data
    b = m.global_correlation(Tensor(x[:, ::-1].copy())).data
    np.testing.assert_allclose(a, b, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(-1e3, 1e3), st.integers(0, 5))
def test_outputs_finite(scale, fill):
    m = learner()
    x = np.random.default_rng(fill).normal(size=(2, 48, 2)) * scale
    for _ in range(fill):
        m(x)
    y, q, _ = m(x, update_bank=False)
    assert np.isfinite(y.data).all() and np.isfinite(q.data).all()
