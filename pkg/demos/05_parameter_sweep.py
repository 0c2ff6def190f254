"""
Blow-up map over the kernel parameters
======================================

A small sweep over ``(B, b)`` for a Gaussian datum. Each cell either blows
up (B) or survives to the horizon (G). The sweep also checks that blow-up
is never lost when a parameter decreases. Cells run in parallel worker
processes but are merged by grid index, so the matrix does not depend on
the worker count.
"""

# %%
from fwlab import harness

cfg = harness.ExperimentConfig(
    "sweep",
    {"kind": "gaussian", "lam": 1.0},
    {"B_grid": "0.1, 1, 4", "b_grid": "0.1, 1, 4", "n_points": 512},
)
out = harness.cmd_sweep(cfg, workers=2, write=False)
print(f"horizon {out.horizon:.3f}")
print(out.matrix_csv())
print("monotonicity findings:", out.monotonicity_violations)
