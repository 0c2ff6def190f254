"""
Wave breaking without the nonlocal term
=======================================

With ``B = 0`` the equation is the inviscid Burgers equation. Its solution
is known along characteristics, and the slope first becomes infinite at
``-1/inf u0'``. This demo runs the spectral solver on a Gaussian and checks
the detected breaking time and the blow-up rate against that reference.
"""

# %%
# Reference solution from characteristics.
import numpy as np

from fwlab import burgers, evolution, initial_data
from fwlab.spectral import Grid, KernelParams

u0 = initial_data.gaussian(1.0)
exact = burgers.BurgersSolution(u0)
print(f"reference breaking time  {exact.lifespan:.6f}")

# %%
# The spectral run stops once the steepest slope passes 1e4 in magnitude.
grid = Grid(10.0, 2048)
cfg = evolution.SimConfig(KernelParams(0.0, 1.0, allow_zero=True), grid, t_end=2.0)
res = evolution.run(cfg, initial_data.sample(u0, grid))
lo, hi = res.verdict.t0_bracket
print(f"detected breaking time   {res.verdict.t0_estimate:.6f}  bracket [{lo:.5f}, {hi:.5f}]")

# %%
# Near breaking the slope behaves like ``-1/(T0 - t)``, so ``m(t)(T0 - t)``
# should sit close to -1.
fit = evolution.blowup_rate_fit(res.series, res.verdict.t0_estimate, (1e2, 1e4))
print(f"rate constant            {fit.c_hat:+.4f} over {fit.n_samples} samples")

# %%
# Before breaking the grid solution agrees with the characteristic solution.
t = 0.5 * exact.lifespan
early = evolution.run(evolution.SimConfig(cfg.kernel, grid, t_end=t), initial_data.sample(u0, grid))
err = np.max(np.abs(early.final.u.values - burgers.evaluate(exact, t, grid.x)))
print(f"max error at t = {t:.3f}    {err:.2e}")
