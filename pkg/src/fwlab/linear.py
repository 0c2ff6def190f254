"""Free dispersive evolution and its decay rates.

The linear part of the equation is the unitary Fourier multiplier

    T(t) u0 = F^{-1}[ exp(-i t m(xi)) u0_hat ],   m(xi) = 2 B b xi / (b^2 + xi^2),

and ``m(xi) = 2B mu(xi/b)`` with ``mu(xi) = xi / (1 + xi^2)``.  The zeros of
``mu''`` at ``0`` and ``+-sqrt(3)`` (where ``mu'''`` does not vanish) are what
make the sup norm decay like ``t^{-1/3}`` instead of ``t^{-1/2}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import TailToleranceError
from .spectral import DEFAULT_TAIL_TOL, Field, Grid, KernelParams

MAX_MU_ORDER = 12


@dataclass(frozen=True)
class PhaseFunction:
    kernel: KernelParams

    def m(self, xi):
        return spectral.fw_multiplier(self.kernel, xi)

    @staticmethod
    def mu(xi):
        xi = np.asarray(xi, dtype=float)
        return xi / (1.0 + xi**2)

    def scaled_mu(self, xi):
        """``2B mu(xi/b)``; identical to :meth:`m`."""
        return 2.0 * self.kernel.B * self.mu(np.asarray(xi, dtype=float) / self.kernel.b)


def propagate(u0: Field, kernel: KernelParams, t: float) -> Field:
    """Exact free evolution ``T(t) u0`` on the periodic grid."""
    if t < 0:
        raise ValueError("t must be non-negative")
    c = spectral.forward(u0)
    phase = np.exp(-1j * t * spectral.fw_multiplier(kernel, c.grid.xi))
    # the Nyquist mode has no conjugate partner; keep it real
    phase[c.grid.nyquist_index] = math.cos(t * float(spectral.fw_multiplier(kernel, c.grid.xi[c.grid.nyquist_index])))
    return spectral.inverse(spectral.SpectralCoeffs(c.grid, c.coeffs * phase))


def mu_derivative(n: int, xi):
    """Closed form of the ``n``-th derivative of ``mu(xi) = xi/(1+xi^2)``.

    ``(-1)^n n! sum_k (-1)^k C(n+1, 2k) xi^(n+1-2k) / (1+xi^2)^(n+1)``,
    ``k = 0 .. floor((n+1)/2)``.
    """
    if int(n) != n or n < 0:
        raise ValueError("order must be a non-negative integer")
    if n > MAX_MU_ORDER:
        raise ValueError(f"order {n} exceeds the supported maximum {MAX_MU_ORDER}")
    n = int(n)
    xi = np.asarray(xi, dtype=float)
    num = np.zeros_like(xi)
    for k in range((n + 1) // 2 + 1):
        num = num + (-1) ** k * math.comb(n + 1, 2 * k) * xi ** (n + 1 - 2 * k)
    return (-1) ** n * math.factorial(n) * num / (1.0 + xi**2) ** (n + 1)


def decay_box(kernel: KernelParams, t_max: float, base: float = 20.0) -> float:
    """Half-width that keeps the free wave inside the box up to ``t_max``.

    The group velocity ``m'(xi)`` is bounded by ``2B/b``; the extra factor of
    two leaves room for the slowly decaying oscillatory precursor ahead of
    the fastest caustic.
    """
    return base + 4.0 * kernel.B / kernel.b * t_max


@dataclass(frozen=True)
class DecayFit:
    r: float
    predicted_slope: float
    slope: float
    intercept: float
    residual: float
    t: np.ndarray
    values: np.ndarray


def predicted_slope(r: float) -> float:
    """Exponent ``-(1/3)(1 - 2/r)`` of the ``L^r`` decay estimate."""
    return -(1.0 - 2.0 / r) / 3.0 if np.isfinite(r) else -1.0 / 3.0


def measure_decay(
    u0: Field,
    kernel: KernelParams,
    r: float,
    t_grid,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> DecayFit:
    """Least-squares slope of ``log ||T(t)u0||_{L^r}`` against ``log t``.

    Raises :class:`TailToleranceError` if the propagated wave reaches the box
    boundary at any sampled time.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 8:
        raise ValueError("need at least 8 sample times")
    if np.any(t_grid <= 0):
        raise ValueError("sample times must be positive")
    if not r >= 2:
        raise ValueError("r must be >= 2")
    vals = np.empty_like(t_grid)
    for i, t in enumerate(t_grid):
        ut = propagate(u0, kernel, t)
        if _boundary_energy(ut) > tail_tol:
            raise TailToleranceError(f"free wave reached the box boundary by t={t:g}")
        vals[i] = spectral.lp_norm(ut, r)
    A = np.column_stack([np.ones_like(t_grid), np.log(t_grid)])
    coef, *_ = np.linalg.lstsq(A, np.log(vals), rcond=None)
    resid = np.log(vals) - A @ coef
    return DecayFit(float(r), predicted_slope(r), float(coef[1]), float(coef[0]), float(np.sqrt(np.mean(resid**2))), t_grid, vals)


def _boundary_energy(f: Field, frac: float = 0.02) -> float:
    """Root-mean-square amplitude in the outer ``frac`` of the box, relative to the peak."""
    v = np.abs(f.values)
    peak = v.max()
    if peak == 0:
        return 0.0
    w = max(2, int(frac * v.size))
    edge = np.concatenate([v[:w], v[-w:]])
    return float(np.sqrt(np.mean(edge**2)) / peak)


def decay_fits_to_csv(fits, path=None) -> str:
    lines = ["r,predicted_slope,measured_slope,residual"]
    for f in fits:
        lines.append(f"{f.r!r},{f.predicted_slope!r},{f.slope!r},{f.residual!r}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def decay_grid(kernel: KernelParams, t_max: float, dx: float = 0.1) -> Grid:
    """Grid for decay measurements: box from :func:`decay_box`, spacing at most ``dx``."""
    L = decay_box(kernel, t_max)
    n = 16
    while 2 * L / n > dx:
        n *= 2
    return Grid(L, n)
