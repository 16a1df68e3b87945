"""Magnitude and shape metrics: MSE, MAE, DTW and the time distortion index."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

# successor moves, in tie-break preference order: diagonal, vertical (advance m), horizontal
_MOVES = ((1, 1), (1, 0), (0, 1))


@dataclass(frozen=True)
class WarpingPath:
    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def is_valid(self, len_y: int, len_yhat: int) -> bool:
        if not self.pairs or self.pairs[0] != (0, 0) or self.pairs[-1] != (len_y - 1, len_yhat - 1):
            return False
        return all((m2 - m1, n2 - n1) in _MOVES for (m1, n1), (m2, n2) in zip(self.pairs, self.pairs[1:]))


def mse_mae(pred: np.ndarray, target: np.ndarray) -> tuple[float, float]:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ContractError(f"shape mismatch {pred.shape} vs {target.shape}")
    err = pred - target
    return float((err * err).mean()), float(np.abs(err).mean())


def cost_to_go(y: np.ndarray, yhat: np.ndarray) -> np.ndarray:
    """Batched suffix DP: R[p, m, n] = min cost of a path from (m, n) to the end.

    ``y`` is (P, M) and ``yhat`` (P, N); local cost is the squared difference.
    Anti-diagonals are swept from the far corner so each step is vectorised.
    """
    P, M = y.shape
    N = yhat.shape[1]
    d = (y[:, :, None] - yhat[:, None, :]) ** 2
    R = np.full((P, M + 1, N + 1), np.inf)
    R[:, M - 1, N - 1] = d[:, M - 1, N - 1]
    for s in range(M + N - 3, -1, -1):
        m = np.arange(max(0, s - N + 1), min(M - 1, s) + 1)
        n = s - m
        best = np.minimum(np.minimum(R[:, m + 1, n + 1], R[:, m + 1, n]), R[:, m, n + 1])
        R[:, m, n] = d[:, m, n] + best
    return R


def _walk(R: np.ndarray) -> WarpingPath:
    M, N = R.shape[0] - 1, R.shape[1] - 1
    m = n = 0
    pairs = [(0, 0)]
    while (m, n) != (M - 1, N - 1):
        best = None
        for dm, dn in _MOVES:
            val = R[m + dm, n + dn]
            if best is None or val < best[0]:
                best = (val, dm, dn)
        m, n = m + best[1], n + best[2]
        pairs.append((m, n))
    return WarpingPath(tuple(pairs))


def dtw_batch(y: np.ndarray, yhat: np.ndarray, with_paths: bool = True):
    """DTW cost (and optimal path) for each row pair of two (P, len) arrays."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    yhat = np.atleast_2d(np.asarray(yhat, dtype=float))
    if y.shape[1] == 0 or yhat.shape[1] == 0:
        raise ContractError("dtw needs non-empty sequences")
    R = cost_to_go(y, yhat)
    costs = R[:, 0, 0].copy()
    if not with_paths:
        return costs
    return costs, [_walk(R[p]) for p in range(len(R))]


def dtw(y, yhat) -> tuple[float, WarpingPath]:
    """Minimum summed squared distance over monotone warping paths.

    Among optimal paths, each step from (0, 0) prefers the diagonal move,
    then advancing ``m`` (the ``y`` index), then advancing ``n``.
    """
    y = np.asarray(y, dtype=float).ravel()
    yhat = np.asarray(yhat, dtype=float).ravel()
    if y.size == 0 or yhat.size == 0:
        raise ContractError("dtw needs non-empty sequences")
    costs, paths = dtw_batch(y[None, :], yhat[None, :])
    return float(costs[0]), paths[0]


def tdi(path: WarpingPath, horizon: int) -> float:
    """Sum of squared index offsets along ``path`` divided by ``horizon**2``."""
    return float(sum((m - n) ** 2 for m, n in path)) / float(horizon * horizon)


def shape_metrics(pred: np.ndarray, target: np.ndarray, chunk: int = 256) -> tuple[float, float]:
    """Mean DTW and TDI over every (sample, channel) series of (S, T, C) arrays."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ContractError(f"shape mismatch {pred.shape} vs {target.shape}")
    T = target.shape[1]
    ys = np.moveaxis(target, 1, -1).reshape(-1, T)
    ps = np.moveaxis(pred, 1, -1).reshape(-1, T)
    dtws, tdis = [], []
    for i in range(0, len(ys), chunk):
        costs, paths = dtw_batch(ys[i:i + chunk], ps[i:i + chunk])
        dtws.extend(costs)
        tdis.extend(tdi(p, T) for p in paths)
    return float(np.mean(dtws)), float(np.mean(tdis))


def all_metrics(pred: np.ndarray, target: np.ndarray) -> dict[str, float]:
    m, a = mse_mae(pred, target)
    d, t = shape_metrics(pred, target)
    return {"mse": m, "mae": a, "dtw": d, "tdi": t}
