"""Turn a noisy sine into symbols at three tolerances and decode it again.

    python demos/01_symbolize_walkthrough.py
"""
import numpy as np

from tristat.prompt import render_prompt
from tristat.symbolize import compress, digitize, reconstruct, symbolize, zscore

rng = np.random.default_rng(0)
t = np.arange(96)
x = zscore(np.sin(2 * np.pi * t / 24) + 0.1 * rng.normal(size=96))

# Compression first: each piece is (steps, total change).
for tol in (0.01, 0.10, 0.50):
    pieces = compress(x, tol)
    cb = digitize(pieces, tol)
    seq = symbolize(x, cb, tol)
    err = np.abs(reconstruct(seq, x[0]) - x).max()
    print(f"tol={tol:<5} pieces={len(pieces):3d} alphabet={len(cb):2d} "
          f"max decode error={err:.3f}  {seq.symbols[:40]}")

# Coarse tolerances keep the trend and drop the wiggles.
pieces = compress(x, 0.5)
print("\ncoarse pieces:", [(p.len, round(p.inc, 2)) for p in pieces])

# The prompt the textual branch reads for the same window.
print("\n" + render_prompt(x[:, None], "A toy daily cycle.", 96, 24).text)
