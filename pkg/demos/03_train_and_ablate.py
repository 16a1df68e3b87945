"""Train on the synthetic regime-switching series, then drop each branch in turn.

Takes a couple of minutes on a laptop CPU.

    python demos/03_train_and_ablate.py
"""
import numpy as np

from tristat import RunConfig
from tristat.evaluation import persistence_forecast, predict, report_for
from tristat.experiments import run_ablation
from tristat.training import prepare, train

cfg = RunConfig(synthetic_rows=1600, d_model=64, max_epochs=5)
prepared = prepare(cfg)
print(f"windows train/val/test: {len(prepared.split.train)}/{len(prepared.split.val)}/{len(prepared.split.test)}")

run = train(cfg, prepared, verbose=True)
fc = predict(run.model, prepared.split.test, prepared.features["test"])
print(report_for(fc, "synthetic").as_text())
print(report_for(persistence_forecast(prepared.split.test), "persistence").as_text())

# How the router splits credit between the temporal, textual and symbolic experts.
w = fc.weights.mean(axis=(0, 2))
print("\nmean routing weight at steps 0, 47, 95:")
for step in (0, 47, 95):
    print(f"  step {step:2d}: " + " ".join(f"{v:.3f}" for v in w[step]))
print("volatility alpha range on test:", np.round([prepared.features['test'].alpha.min(),
                                                   prepared.features['test'].alpha.max()], 3))

# A one-horizon ablation; the CLI's `bench --suite table6` runs all four horizons.
print()
print(run_ablation(cfg.replace(max_epochs=3), horizons=(96,)).as_text())
