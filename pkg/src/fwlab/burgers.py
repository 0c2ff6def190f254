"""Inviscid Burgers reference solution ``v_t + v v_x = 0`` by characteristics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import BeyondLifespanError, ConvergenceError
from .initial_data import InitialDatum
from .spectral import Field, KernelParams

MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class BurgersSolution:
    """Classical solution from ``datum``, defined for ``t < lifespan``."""

    datum: InitialDatum

    @property
    def lifespan(self) -> float:
        m0 = self.datum.inf_deriv
        return -1.0 / m0 if m0 < 0 else math.inf

    def __call__(self, t, x):
        return evaluate(self, t, x)


def _check_time(sol: BurgersSolution, t: float) -> None:
    if t < 0:
        raise ValueError("t must be non-negative")
    if t >= sol.lifespan * (1 - 1e-9):
        raise BeyondLifespanError(f"t={t:g} is at or beyond the lifespan {sol.lifespan:g}")


def foot(sol: BurgersSolution, t: float, x) -> np.ndarray:
    """Solve ``x = x0 + t u0(x0)`` for ``x0``.

    Newton iteration safeguarded by a bracket: the map ``x0 -> x0 + t u0(x0)``
    is strictly increasing before breaking, so any Newton step leaving the
    current bracket is replaced by bisection.
    """
    _check_time(sol, t)
    d = sol.datum
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t == 0:
        return x.copy()

    def phi(y):
        return y + t * d(y) - x

    w = t * d.linf_norm + 1.0 if math.isfinite(d.linf_norm) else 1.0
    lo, hi = x - w, x + w
    for _ in range(60):
        bad_lo = phi(lo) > 0
        bad_hi = phi(hi) < 0
        if not (bad_lo.any() or bad_hi.any()):
            break
        w *= 2
        lo = np.where(bad_lo, x - w, lo)
        hi = np.where(bad_hi, x + w, hi)
    else:
        raise ConvergenceError("could not bracket the characteristic foot")

    y = 0.5 * (lo + hi)
    for _ in range(MAX_ITER):
        r = phi(y)
        # near breaking the foot can be far larger than x; measure roundoff on y
        scale = np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
        done = np.abs(r) <= 1e-14 * scale
        if done.all():
            return y
        lo = np.where(r < 0, y, lo)
        hi = np.where(r > 0, y, hi)
        dr = 1.0 + t * d.derivative(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            y_new = y - r / dr
        inside = np.isfinite(y_new) & (y_new > lo) & (y_new < hi)
        y_new = np.where(inside, y_new, 0.5 * (lo + hi))
        y = np.where(done, y, y_new)
        if np.all((hi - lo) <= 4 * np.finfo(float).eps * scale):
            return y
    raise ConvergenceError("Newton iteration did not converge (close to breaking?)")


def evaluate(sol: BurgersSolution, t: float, x) -> np.ndarray:
    """``v(t, x) = u0(x0)`` with ``x = x0 + t u0(x0)``."""
    scalar = np.ndim(x) == 0
    out = sol.datum(foot(sol, t, x))
    return out[0] if scalar else out


def slope(sol: BurgersSolution, t: float, x) -> np.ndarray:
    """``v_x(t, x) = u0'(x0) / (1 + t u0'(x0))``."""
    s = sol.datum.derivative(foot(sol, t, x))
    return s / (1.0 + t * s)


def slope_sup(sol: BurgersSolution, t: float) -> float:
    """``||v_x(t)||_inf = -m0/(1 + t m0)`` when the steepest descent dominates."""
    m0 = sol.datum.inf_deriv
    s0 = sol.datum.sup_deriv
    return max(-m0 / (1.0 + t * m0), s0 / (1.0 + t * s0))


def slope_integral(sol: BurgersSolution, T: float) -> float:
    """``int_0^T ||v_x(t)||_inf dt``.

    Closed form ``-log(1 + T m0)`` for the closed-form families; custom data
    integrate :func:`slope_sup` by quadrature.
    """
    _check_time(sol, T)
    d = sol.datum
    if d.analytics.exact and -d.inf_deriv >= d.sup_deriv:
        return -math.log1p(T * d.inf_deriv)
    val, _ = integrate.quad(lambda t: slope_sup(sol, t), 0.0, T, limit=200)
    return float(val)


@dataclass(frozen=True)
class Comparison:
    T: float
    lhs: float
    rhs: float
    satisfied: bool
    n_times: int

    def to_dict(self) -> dict:
        return {"T": self.T, "lhs": self.lhs, "rhs": self.rhs, "satisfied": self.satisfied, "n_times": self.n_times}


def comparison_rhs(sol: BurgersSolution, kernel: KernelParams, T: float) -> float:
    """``B b^{1/2} T ||u0||_2 exp(int_0^T ||v_x||_inf)``."""
    return kernel.B * math.sqrt(kernel.b) * T * sol.datum.l2_norm * math.exp(slope_integral(sol, T))


def compare_bound(snapshots: Sequence, sol: BurgersSolution, kernel: KernelParams, T: float) -> Comparison:
    """Sup-norm distance between a nonlocal run and Burgers, against its bound.

    Parameters
    ----------
    snapshots : sequence of (t, Field)
        Recorded solution of the nonlocal equation; entries with ``t > T``
        are ignored.
    """
    _check_time(sol, T)
    lhs = 0.0
    n = 0
    for t, f in snapshots:
        if t > T * (1 + 1e-12):
            continue
        f = f if isinstance(f, Field) else Field(*f)
        v = evaluate(sol, t, f.grid.x)
        lhs = max(lhs, float(np.max(np.abs(f.values - v))))
        n += 1
    rhs = comparison_rhs(sol, kernel, T)
    return Comparison(float(T), lhs, rhs, bool(lhs <= rhs * (1 + 1e-6)), n)
