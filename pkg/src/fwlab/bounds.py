"""
Closed-form blow-up criteria, blow-up-time upper bounds and lifespan lower
bounds for the ``p = 2`` equation with kernel ``B exp(-b|x|)``.

Every criterion reports one of three states: ``HOLDS``, ``FAILS`` or
``INAPPLICABLE`` (a precondition such as ``F(T, x0) >= 0`` is not met).
Where a criterion only asserts existence of a point ``x0`` or a time ``T``,
a witness is searched for numerically and returned with the result.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from . import spectral
from .initial_data import InitialDatum, sample
from .spectral import Grid, KernelParams

HOLDS = "HOLDS"
FAILS = "FAILS"
INAPPLICABLE = "INAPPLICABLE"

DEFAULT_C = 16.0
T_SEARCH = (1e-3, 1e3)
DEFAULT_ALPHAS = (1.0, 2.0, 4.0, 8.0, 16.0)


@dataclass(frozen=True)
class Criterion:
    name: str
    status: str
    time_bound: Optional[float] = None
    witness: dict = field(default_factory=dict)
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.status == HOLDS


def _l2(d: InitialDatum) -> float:
    return d.l2_norm


def F_value(d: InitialDatum, kernel: KernelParams, t: float, x0: float) -> float:
    """``2Bb u0(x0) + B b^{3/2} ||u0||_2 + 2 B^2 b^{3/2} ||u0||_2 t``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    B, b = kernel.B, kernel.b
    n2 = _l2(d)
    return float(2 * B * b * d(x0) + B * b**1.5 * n2 + 2 * B**2 * b**1.5 * n2 * t)


def Phi(d: InitialDatum, kernel: KernelParams, t: float, time_coefficient: Optional[float] = None) -> float:
    """``2Bb ||u0||_inf + B b^{3/2} ||u0||_2 + 2 B^2 b^{3/2} ||u0||_2 t``.

    ``time_coefficient`` overrides the coefficient of ``t`` (testing hook).
    """
    B, b = kernel.B, kernel.b
    n2 = _l2(d)
    slope = 2 * B**2 * b**1.5 * n2 if time_coefficient is None else time_coefficient
    return float(2 * B * b * d.linf_norm + B * b**1.5 * n2 + slope * t)


def alpha_factor(alpha: float) -> float:
    """``(1 + 1/alpha) / (1 - 1/(2 alpha))``; equals 4 at ``alpha = 1`` and tends to 1."""
    return (1 + 1 / alpha) / (1 - 1 / (2 * alpha))


def nonlocal_slope_threshold(F: float, T: float, alpha: float = 1.0) -> float:
    """Right-hand side the slope ``u0'(x0)`` must not exceed."""
    k = alpha_factor(alpha)
    return -alpha * ((F**0.25 + math.sqrt(math.sqrt(F) + k * 4.0 / T)) / 2.0) ** 2


def nonlocal_slope_criterion(d: InitialDatum, kernel: KernelParams, T: float, x0: float, alpha: float = 1.0) -> Criterion:
    """Nonlocal blow-up criterion with threshold ``F(T, x0)``.

    Inapplicable when ``F(T, x0) < 0``.  When it holds, the blow-up time is
    bounded by ``-k(alpha) / (u0'(x0) + sqrt(-u0'(x0)) F^{1/4})``, which never
    exceeds ``T``.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if not T > 0:
        raise ValueError("T must be positive")
    F = F_value(d, kernel, T, x0)
    witness = {"x0": float(x0), "T": float(T), "alpha": float(alpha), "F": F}
    if F < 0:
        return Criterion("nonlocal_slope", INAPPLICABLE, witness=witness, note="F(T,x0) < 0")
    s = float(d.derivative(x0))
    if s > nonlocal_slope_threshold(F, T, alpha):
        return Criterion("nonlocal_slope", FAILS, witness=witness)
    T_upper = -alpha_factor(alpha) / (s + math.sqrt(-s) * F**0.25)
    # the bound is <= T by construction; a violation means an arithmetic bug
    assert T_upper <= T * (1 + 1e-12), (T_upper, T)
    return Criterion("nonlocal_slope", HOLDS, T_upper, witness)


def pointwise_criterion(d: InitialDatum, kernel: KernelParams, x0: float) -> Criterion:
    """Pointwise criterion with ``2 u0(x0) + b^{1/2} ||u0||_2 < 0``; bound ``-1/u0'(x0)``."""
    B, b = kernel.B, kernel.b
    n2 = _l2(d)
    u = float(d(x0))
    s = float(d.derivative(x0))
    c1 = 2 * u + math.sqrt(b) * n2
    witness = {"x0": float(x0), "first": c1}
    if not c1 < 0:
        return Criterion("pointwise", FAILS, witness=witness, note="2u0(x0) + b^1/2 |u0|_2 >= 0")
    rhs = 2 * B * math.sqrt(b) * n2 / c1
    witness["slope_threshold"] = rhs
    if s <= rhs and s < 0:
        return Criterion("pointwise", HOLDS, -1.0 / s, witness)
    return Criterion("pointwise", FAILS, witness=witness)


def classical_criteria(inf_deriv: float, sup_deriv: float, B: float) -> dict:
    """The three earlier slope criteria; none of them involves ``b``."""
    disc = B**2 + 4 * B * sup_deriv
    if disc < 0:
        root_bound = -2 * B
    else:
        root_bound = min(-2 * B, (-B - math.sqrt(disc)) / 2)
    return {
        "slope_sum": inf_deriv + sup_deriv <= -2 * B,
        "slope_root": inf_deriv < root_bound,
        "weighted_slope": 5 * inf_deriv + sup_deriv <= -6 * B,
    }


@dataclass(frozen=True)
class Lifespan:
    T_lower: float
    witness_T: float
    in_scope: bool = True


def _arctan_term(phi: float, m0: float) -> float:
    y = math.sqrt(phi) / -m0
    ratio = math.atan(y) / y if y > 0 else 1.0
    return ratio / -m0


def lifespan_lower(
    d: InitialDatum, kernel: KernelParams, time_coefficient: Optional[float] = None, rtol: float = 1e-10
) -> Lifespan:
    """Lower bound ``sup_T min{T, Phi(T)^{-1/2} arctan(-Phi(T)^{1/2}/m(0))}``.

    The second argument is decreasing in ``T`` and the first increasing, so the
    supremum sits at their crossing, found by bisection.  With ``m(0) >= 0``
    the bound is infinite and flagged out of scope.
    """
    m0 = d.inf_deriv
    if m0 >= 0:
        return Lifespan(math.inf, math.inf, in_scope=False)

    def gap(T):
        return T - _arctan_term(Phi(d, kernel, T, time_coefficient), m0)

    hi = -1.0 / m0
    if gap(hi) <= 0:
        return Lifespan(hi, hi)
    T = optimize.bisect(gap, 0.0, hi, xtol=1e-300, rtol=rtol, maxiter=400)
    return Lifespan(float(T), float(T))


def small_b_threshold(d: InitialDatum, C: float = DEFAULT_C) -> float:
    """``A(u0) = (inf u0' / (C (||u0||_inf^{1/2} + ||u0||_2^{1/2} + 1)))^2``.

    Blow-up is guaranteed for ``B > 1, b < 1`` with ``b <= A B^{-4/3}``; the
    constant ``C`` is not known explicitly and is exposed as a knob.
    """
    m0 = d.inf_deriv
    if m0 >= 0:
        raise ValueError("inf u0' must be negative")
    return (m0 / (C * (math.sqrt(d.linf_norm) + math.sqrt(d.l2_norm) + 1))) ** 2


def burgers_lifespan(d: InitialDatum) -> float:
    """``-1 / inf u0'``; ``inf`` when the datum has no descending part."""
    m0 = d.inf_deriv
    if m0 >= 0:
        return math.inf
    return -1.0 / m0


def local_existence_time(d: InitialDatum, kernel: KernelParams, s: float = 3.0, C: float = 1.0, grid: Grid = Grid(20.0, 2048)) -> float:
    """Schematic local existence time ``min{C/((1+B)||u0||_{H^s}), C/(1+B)}``.

    The constant is unknown; the value is only indicative.
    """
    hs = spectral.hs_norm(sample(d, grid), s)
    B = kernel.B
    return min(C / ((1 + B) * hs) if hs > 0 else math.inf, C / (1 + B))


def candidate_points(d: InitialDatum, grid: Grid = Grid(20.0, 1024), refine: int = 4) -> np.ndarray:
    """Witness candidates: refined grid nodes with ``u0' < 0``, plus the analytic argmin."""
    xs = grid.refined(refine).x
    ds = d.derivative(xs)
    pts = xs[ds < 0]
    if d.inf_deriv < 0:
        pts = np.append(pts, d.argmin_deriv)
    return np.unique(pts)


def search_nonlocal_slope(
    d: InitialDatum,
    kernel: KernelParams,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    points: Optional[np.ndarray] = None,
    t_range=T_SEARCH,
    n_t: int = 121,
) -> Criterion:
    """Smallest nonlocal-slope upper bound over ``x0``, ``T`` and ``alpha``.

    ``T_upper`` grows with ``T`` through ``F``, so for each ``(x0, alpha)`` the
    best ``T`` is the smallest one at which the criterion holds: located on
    a log grid, then refined by bisection (vectorized over ``x0``).
    """
    if points is None:
        points = candidate_points(d)
    points = np.asarray(points, dtype=float)
    B, b = kernel.B, kernel.b
    n2 = _l2(d)
    u = d(points)
    s = d.derivative(points)
    ts = np.geomspace(*t_range, n_t)

    def holds(T, alpha, sel=slice(None)):
        F = 2 * B * b * u[sel] + B * b**1.5 * n2 + 2 * B**2 * b**1.5 * n2 * T
        Fp = np.maximum(F, 0.0)
        k = alpha_factor(alpha)
        thr = -alpha * ((Fp**0.25 + np.sqrt(np.sqrt(Fp) + k * 4.0 / T)) / 2.0) ** 2
        return (F >= 0) & (s[sel] <= thr), F >= 0

    best: Optional[Criterion] = None
    any_applicable = False
    for alpha in alphas:
        grid_hold = np.empty((ts.size, points.size), dtype=bool)
        for i, T in enumerate(ts):
            h, app = holds(T, alpha)
            grid_hold[i] = h
            any_applicable |= bool(app.any())
        ok = grid_hold.any(axis=0)
        if not ok.any():
            continue
        idx = np.argmax(grid_hold[:, ok], axis=0)
        hi = ts[idx]
        lo = np.where(idx > 0, ts[np.maximum(idx - 1, 0)], hi)
        for _ in range(60):
            mid = np.sqrt(lo * hi)
            h, _ = holds(mid, alpha, ok)
            hi = np.where(h, mid, hi)
            lo = np.where(h, lo, mid)
        for x0, T in zip(points[ok], hi):
            res = nonlocal_slope_criterion(d, kernel, float(T), float(x0), alpha)
            if res.holds and (best is None or res.time_bound < best.time_bound):
                best = res
    if best is not None:
        return best
    return Criterion("nonlocal_slope", FAILS if any_applicable else INAPPLICABLE, note="no witness found")


def search_pointwise(d: InitialDatum, kernel: KernelParams, points: Optional[np.ndarray] = None) -> Criterion:
    if points is None:
        points = candidate_points(d)
    best = None
    for x0 in points:
        res = pointwise_criterion(d, kernel, x0)
        if res.holds and (best is None or res.time_bound < best.time_bound):
            best = res
    return best or Criterion("pointwise", FAILS, note="no witness found")


@dataclass
class BoundsReport:
    kernel: dict
    datum: dict
    criteria: list
    derived: dict
    knobs: dict
    violations: list = field(default_factory=list)

    def upper_bounds(self) -> dict:
        return {c.name: c.time_bound for c in self.criteria if c.holds and c.time_bound is not None and c.name != "lifespan_lower"}

    @property
    def best_upper(self) -> float:
        ub = [v for k, v in self.upper_bounds().items() if k != "burgers_lifespan"]
        return min(ub) if ub else math.inf

    @property
    def lifespan_lower(self) -> float:
        return self.derived["lifespan_lower"]

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "datum": self.datum,
            "criteria": [asdict(c) for c in self.criteria],
            "derived": self.derived,
            "knobs": self.knobs,
            "violations": self.violations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)

    def table(self) -> str:
        lines = [f"B = {self.kernel['B']:g}, b = {self.kernel['b']:g}   (C = {self.knobs['C']:g})"]
        lines.append(f"{'criterion':<22}{'status':<14}{'time bound':>14}  witness")
        for c in self.criteria:
            tb = "" if c.time_bound is None else f"{c.time_bound:.6g}"
            wit = ", ".join(f"{k}={v:.4g}" for k, v in c.witness.items() if isinstance(v, float))
            lines.append(f"{c.name:<22}{c.status:<14}{tb:>14}  {wit}")
        lines.append("derived: " + ", ".join(f"{k}={v:.6g}" for k, v in self.derived.items()))
        if self.violations:
            lines.append("VIOLATIONS: " + "; ".join(self.violations))
        return "\n".join(lines)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def bounds_report(
    d: InitialDatum,
    kernel: KernelParams,
    C: float = DEFAULT_C,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    grid: Grid = Grid(20.0, 1024),
) -> BoundsReport:
    """Evaluate every criterion and bound for one datum and kernel."""
    points = candidate_points(d, grid)
    criteria = []
    classical = classical_criteria(d.inf_deriv, d.sup_deriv, kernel.B)
    for name, ok in classical.items():
        criteria.append(Criterion(name, HOLDS if ok else FAILS))
    if d.inf_deriv < 0 and kernel.B > 0:
        criteria.append(search_nonlocal_slope(d, kernel, alphas, points))
        criteria.append(search_pointwise(d, kernel, points))
    else:
        criteria.append(Criterion("nonlocal_slope", INAPPLICABLE, note="needs B > 0 and inf u0' < 0"))
        criteria.append(Criterion("pointwise", INAPPLICABLE, note="needs B > 0 and inf u0' < 0"))
    life = lifespan_lower(d, kernel) if kernel.B > 0 else Lifespan(burgers_lifespan(d), burgers_lifespan(d), d.inf_deriv < 0)
    derived = {
        "inf_deriv": d.inf_deriv,
        "sup_deriv": d.sup_deriv,
        "l2_norm": d.l2_norm,
        "linf_norm": d.linf_norm,
        "lifespan_lower": life.T_lower,
        "burgers_lifespan": burgers_lifespan(d),
        "Phi(0)": Phi(d, kernel, 0.0),
    }
    w = next((c.witness for c in criteria if c.name == "nonlocal_slope" and c.holds), None)
    if w is not None:
        derived["F(T,x0)"] = w["F"]
    if d.inf_deriv < 0:
        derived["small_b_A"] = small_b_threshold(d, C)
    derived["local_existence_time_schematic"] = local_existence_time(d, kernel)
    report = BoundsReport(
        kernel={"B": kernel.B, "b": kernel.b},
        datum=d.spec(),
        criteria=criteria,
        derived=derived,
        knobs={"C": C, "alphas": list(alphas), "local_existence_C": 1.0},
    )
    for name, ub in report.upper_bounds().items():
        if name != "burgers_lifespan" and life.T_lower > ub * (1 + 1e-9):
            report.violations.append(f"lifespan_lower {life.T_lower:.6g} exceeds {name} bound {ub:.6g}")
    return report
