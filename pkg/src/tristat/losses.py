"""Adaptive dual-fidelity training loss.

Total = MSE + sum_i ( L_i / (2 sigma_i^2) + log sigma_i ) over four shape
terms: a low-rank L1 term, patch-mean, patch-std and patch-correlation.
Each sigma_i is exp(log_sigma_i) so it stays positive.

The low-rank term projects prediction and target onto the top-k right
singular subspace of the target. The target is fixed within a step, so
the projection is a constant matrix and no SVD derivative is needed.
"""
from __future__ import annotations

import numpy as np

from . import tensor as tn
from .nn import Module
from .tensor import Param, Tensor

CORR_EPS = 1e-8
STD_EPS = 1e-12


class ADFState(Module):
    """Learnable log-uncertainties plus the fixed shape-term settings."""

    def __init__(self, svd_rank: int = 4, patch_len: int = 24):
        self.log_sigma = Param(np.zeros(4))
        self.svd_rank = svd_rank
        self.patch_len = patch_len


def mse(pred, target) -> Tensor:
    pred = tn.as_tensor(pred)
    return ((pred - target) ** 2).mean()


def low_rank_projector(target: np.ndarray, k: int) -> np.ndarray:
    """(B, C, C) projector onto each sample's top-k right singular vectors."""
    _, _, v = tn.truncated_svd(target, k)
    return v @ np.swapaxes(v, -1, -2)


def loss_l1_svd(pred, target, k: int) -> Tensor:
    """Mean absolute difference of the rank-k projections of pred and target."""
    pred = tn.as_tensor(pred)
    target = np.asarray(target.data if isinstance(target, Tensor) else target, dtype=float)
    proj = low_rank_projector(target, k)
    diff = tn.matmul(pred - target, proj)
    return tn.abs_(diff).mean()


def patch_bounds(length: int, patch_len: int) -> list[tuple[int, int]]:
    """Non-overlapping patches along time; a final partial patch is kept,
    except a single leftover step, which joins the previous patch."""
    bounds = [(s, min(s + patch_len, length)) for s in range(0, length, patch_len)]
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] == 1:
        s, _ = bounds.pop(-2)
        bounds[-1] = (s, length)
    return bounds


def loss_patch_stats(pred, target, patch_len: int) -> tuple[Tensor, Tensor, Tensor]:
    """Patch-wise (mean, std, correlation) mismatch along the time axis.

    Inputs are (B, T, C). Every patch of every channel of every sample
    counts once in each average.
    """
    pred = tn.as_tensor(pred)
    target = tn.as_tensor(np.asarray(target.data if isinstance(target, Tensor) else target, dtype=float))
    means, stds, corrs = [], [], []
    for s, e in patch_bounds(pred.shape[1], patch_len):
        p = pred[:, s:e, :]
        t = target[:, s:e, :]
        mp, mt = p.mean(axis=1), t.mean(axis=1)
        sp = tn.std(p, axis=1, eps=STD_EPS)
        st = tn.std(t, axis=1, eps=STD_EPS)
        cov = ((p - mp.reshape(mp.shape[0], 1, -1)) * (t - mt.reshape(mt.shape[0], 1, -1))).mean(axis=1)
        r = cov / (sp * st + CORR_EPS)
        means.append((mp - mt) ** 2)
        stds.append((sp - st) ** 2)
        corrs.append(1.0 - r)
    return (tn.stack(means, 1).mean(), tn.stack(stds, 1).mean(), tn.stack(corrs, 1).mean())


def aux_terms(pred, target, state: ADFState) -> list[Tensor]:
    l1 = loss_l1_svd(pred, target, state.svd_rank)
    l_mean, l_var, l_corr = loss_patch_stats(pred, target, state.patch_len)
    return [l1, l_mean, l_var, l_corr]


def adf_loss(pred, target, state: ADFState) -> tuple[Tensor, dict[str, float]]:
    """Total loss and a dict of its (detached) components."""
    anchor = mse(pred, target)
    terms = aux_terms(pred, target, state)
    total = anchor
    for i, term in enumerate(terms):
        log_s = state.log_sigma[i]
        total = total + term * (0.5 * tn.exp(log_s * -2.0)) + log_s
    parts = {"mse": anchor.item(), "l1_svd": terms[0].item(), "mean": terms[1].item(),
             "var": terms[2].item(), "corr": terms[3].item()}
    return total, parts
