"""Why shape metrics disagree with MSE: a shifted forecast vs a flat one.

    python demos/02_dtw_and_tdi.py
"""
import numpy as np

from tristat.metrics import dtw, mse_mae, tdi

t = np.arange(48)
y = np.sin(2 * np.pi * t / 16)
shifted = np.sin(2 * np.pi * (t - 3) / 16)     # right shape, three steps late
flat = np.zeros_like(y)                        # the mean, no shape at all

for name, pred in (("shifted", shifted), ("flat", flat)):
    mse, _ = mse_mae(pred, y)
    cost, path = dtw(y, pred)
    print(f"{name:<8} mse={mse:.3f} dtw={cost:.3f} tdi={tdi(path, len(y)):.4f}")

# The worked case: one extra step in the target costs one unit and bends the path once.
cost, path = dtw([0, 1, 2], [0, 2])
print("\n[0,1,2] vs [0,2]: cost", cost, "path", path.pairs, "tdi", tdi(path, 3))
