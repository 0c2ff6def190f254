"""
Dispersive decay of the linear flow
===================================

Dropping the Burgers term leaves a linear flow with the odd Fourier
multiplier ``2Bb xi/(b^2 + xi^2)``. It conserves the L2 norm and spreads
the datum, so the L4 and sup norms decay. The phase has inflection points
at ``xi = 0`` and ``xi = +-sqrt(3)``, which slows the sup-norm decay to
``t^(-1/3)``. That rate only becomes visible at large times.
"""

# %%
import math

import numpy as np

from fwlab import initial_data, linear
from fwlab.spectral import KernelParams

k = KernelParams(0.5, 1.0)
print(f"mu'' at 0, sqrt(3): {linear.mu_derivative(2, 0.0):.1e}, {linear.mu_derivative(2, math.sqrt(3)):.1e}")
print(f"mu''' at 0, sqrt(3): {linear.mu_derivative(3, 0.0):+.4f}, {linear.mu_derivative(3, math.sqrt(3)):+.4f}")

# %%
# Fitted exponents over an early and a late window. The box grows with
# the horizon so that the fastest waves stay inside.
for t_lo, t_hi in ((10.0, 100.0), (1e3, 1e4)):
    grid = linear.decay_grid(k, t_hi)
    u0 = initial_data.sample(initial_data.gaussian(1.0), grid)
    ts = np.geomspace(t_lo, t_hi, 8)
    fits = [linear.measure_decay(u0, k, r, ts) for r in (2, 4, math.inf)]
    print(f"\nt in [{t_lo:g}, {t_hi:g}] on {grid.n_points} points")
    print(linear.decay_fits_to_csv(fits).strip())
