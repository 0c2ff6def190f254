"""
Periodic-box Fourier machinery.

Functions on the real line are approximated on the box ``[-L, L)`` sampled at
``N`` equispaced nodes ``x_j = -L + j*dx``.  Everything that touches
wavenumbers goes through :class:`Grid`, which fixes the one convention used
in the whole package:

    xi_k = pi * k / L,  k in numpy FFT order  [0, 1, ..., N/2-1, -N/2, ..., -1]

Spectral coefficients are normalised Fourier-series coefficients,
``c_k = fft(u)[k] / N``, so that ``u(x) = sum_k c_k exp(i xi_k (x + L))``.
With this normalisation a constant field ``1`` has ``c_0 = 1`` and Parseval
reads ``dx * sum |u_j|^2 = 2L * sum |c_k|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Union

import numpy as np

from .errors import GridMismatchError, NonFiniteError, TailToleranceError

Multiplier = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, float, complex]

DEFAULT_TAIL_TOL = 1e-8


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-half_width, half_width)``.

    Parameters
    ----------
    half_width : float
        Half the box length ``L``.
    n_points : int
        Number of nodes ``N``; a power of two, at least 16.
    """

    half_width: float = 20.0
    n_points: int = 1024

    def __post_init__(self):
        n = int(self.n_points)
        if n != self.n_points or n < 16 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 16, got {self.n_points}")
        if not (np.isfinite(self.half_width) and self.half_width > 0):
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def length(self) -> float:
        return 2.0 * self.half_width

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_width + self.dx * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def xi(self) -> np.ndarray:
        """Wavenumbers ``pi*k/L`` in FFT order."""
        k = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points)
        xi = np.pi * k / self.half_width
        xi.flags.writeable = False
        return xi

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2

    def dealias_mask(self) -> np.ndarray:
        """Boolean mask keeping modes with ``|k| < N/3`` (2/3 rule)."""
        k = np.abs(np.fft.fftfreq(self.n_points, d=1.0 / self.n_points))
        return k < self.n_points / 3.0

    def refined(self, factor: int) -> "Grid":
        return Grid(self.half_width, self.n_points * int(factor))


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} samples, got shape {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self.grid, other.grid)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self.grid, other.grid)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} coefficients, got shape {c.shape}")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class KernelParams:
    """Amplitude ``B`` and decay rate ``b`` of the kernel ``B exp(-b|x|)``.

    ``B = 0`` is accepted only with ``allow_zero=True`` (Burgers pathways).
    """

    B: float
    b: float
    allow_zero: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.B) and np.isfinite(self.b)):
            raise ValueError("kernel parameters must be finite")
        if self.b <= 0:
            raise ValueError(f"b must be positive, got {self.b}")
        if self.B < 0 or (self.B == 0 and not self.allow_zero):
            raise ValueError(f"B must be positive, got {self.B}")

    @classmethod
    def burgers(cls, b: float = 1.0) -> "KernelParams":
        return cls(0.0, b, allow_zero=True)

    @property
    def is_burgers(self) -> bool:
        return self.B == 0


def _same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def _require_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{what} contains non-finite values")


def check_tail(f: Field, tol: float = DEFAULT_TAIL_TOL, width: int = 2) -> float:
    """Return the boundary-tail indicator ``max|f| near +-L / max|f|``.

    Raises :class:`TailToleranceError` if it exceeds ``tol``.
    """
    v = np.abs(f.values)
    peak = v.max()
    if peak == 0.0:
        return 0.0
    edge = max(v[:width].max(), v[-width:].max())
    ratio = edge / peak
    if ratio > tol:
        raise TailToleranceError(
            f"boundary values are {ratio:.3e} of the peak (tolerance {tol:.1e}); "
            "enlarge the box"
        )
    return float(ratio)


def tail_indicator(f: Field, width: int = 2) -> float:
    v = np.abs(f.values)
    peak = v.max()
    if peak == 0.0:
        return 0.0
    return float(max(v[:width].max(), v[-width:].max()) / peak)


def forward(f: Field) -> SpectralCoeffs:
    _require_finite(f.values, "field")
    return SpectralCoeffs(f.grid, np.fft.fft(f.values) / f.grid.n_points)


def inverse(c: SpectralCoeffs) -> Field:
    """Inverse transform; the imaginary part (roundoff for real data) is dropped."""
    _require_finite(c.coeffs, "coefficients")
    return Field(c.grid, np.fft.ifft(c.coeffs * c.grid.n_points).real)


def _evaluate_multiplier(m: Multiplier, xi: np.ndarray) -> np.ndarray:
    if callable(m):
        vals = np.asarray(m(xi))
    else:
        vals = np.asarray(m)
    vals = np.broadcast_to(vals, xi.shape).astype(complex)
    _require_finite(vals, "multiplier")
    return vals


def apply_multiplier(c: SpectralCoeffs, m: Multiplier) -> SpectralCoeffs:
    """Pointwise product ``m(xi_k) * c_k``.

    ``m`` may be a callable of the wavenumber array, an array in FFT order,
    or a scalar.
    """
    return SpectralCoeffs(c.grid, c.coeffs * _evaluate_multiplier(m, c.grid.xi))


def fw_multiplier(kernel: KernelParams, xi):
    """Fourier symbol ``2 B b xi / (b^2 + xi^2)`` of the nonlocal term.

    Odd in ``xi``, with peak magnitude ``B`` at ``xi = +-b``.
    """
    xi = np.asarray(xi, dtype=float)
    return 2.0 * kernel.B * kernel.b * xi / (kernel.b**2 + xi**2)


def derivative(f: Field, order: int = 1) -> Field:
    """Spectral derivative of order ``order`` (Nyquist mode dropped for odd orders)."""
    c = forward(f)
    sym = (1j * c.grid.xi) ** order
    out = c.coeffs * sym
    if order % 2:
        out[c.grid.nyquist_index] = 0.0
    return inverse(SpectralCoeffs(f.grid, out))


def kernel_convolve(f: Field, kernel: KernelParams, tail_tol: float = DEFAULT_TAIL_TOL) -> Field:
    """Nonlocal term ``int B exp(-b|x-y|) f'(y) dy`` on the periodic box.

    Evaluated as the multiplier ``i * fw_multiplier``.  On the box this is the
    exact convolution of ``f'`` with the periodized kernel
    ``B cosh(b(L-|y|)) / sinh(bL)``.
    """
    check_tail(f, tail_tol)
    return inverse(SpectralCoeffs(f.grid, _kernel_term_coeffs(forward(f).coeffs, f.grid, kernel)))


def _kernel_term_coeffs(c: np.ndarray, grid: Grid, kernel: KernelParams) -> np.ndarray:
    out = c * (1j * fw_multiplier(kernel, grid.xi))
    out[grid.nyquist_index] = 0.0
    return out


def periodized_kernel(y, kernel: KernelParams, half_width: float):
    """``sum_n B exp(-b|y + 2nL|)`` in closed form, for ``|y| <= 2L``."""
    y = np.abs(np.asarray(y, dtype=float))
    bL = kernel.b * half_width
    # cosh(b(L-y))/sinh(bL) rewritten to stay finite for large bL
    return kernel.B * (np.exp(-kernel.b * y) + np.exp(kernel.b * (y - 2 * half_width))) / (
        1.0 - np.exp(-2 * bL)
    )


def resample(f: Field, n_points: int) -> Field:
    """Trigonometric interpolation of ``f`` onto a grid with ``n_points`` nodes."""
    n_old = f.grid.n_points
    if n_points == n_old:
        return f
    g = Grid(f.grid.half_width, n_points)
    c = np.fft.fft(f.values) / n_old
    new = np.zeros(n_points, dtype=complex)
    if n_points > n_old:
        h = n_old // 2
        new[:h] = c[:h]
        new[n_points - h + 1:] = c[h + 1:]
        # split the old Nyquist mode between +-h so the interpolant is real
        new[h] = 0.5 * c[h]
        new[n_points - h] = 0.5 * c[h]
    else:
        h = n_points // 2
        new[:h] = c[:h]
        new[h + 1:] = c[n_old - h + 1:]
        new[h] = c[h] + c[n_old - h]
    return Field(g, np.fft.ifft(new * n_points).real)


def interpolate(c: SpectralCoeffs, points) -> np.ndarray:
    """Evaluate the real trigonometric interpolant at arbitrary ``points``."""
    grid = c.grid
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    n = grid.n_points
    half = n // 2
    phase = (pts[:, None] + grid.half_width) * grid.xi[None, 1:half]
    body = np.exp(1j * phase) @ c.coeffs[1:half]
    nyq = c.coeffs[half].real * np.cos((pts + grid.half_width) * np.pi * half / grid.half_width)
    return c.coeffs[0].real + 2.0 * body.real + nyq


class Norms(NamedTuple):
    l2: float
    linf: float
    h_s: float
    w_s1: float
    s: float


def l2_norm(f: Field) -> float:
    return float(np.sqrt(f.grid.dx * np.sum(f.values**2)))


def linf_norm(f: Field) -> float:
    return float(np.max(np.abs(f.values)))


def lp_norm(f: Field, r: float) -> float:
    if np.isinf(r):
        return linf_norm(f)
    return float((f.grid.dx * np.sum(np.abs(f.values) ** r)) ** (1.0 / r))


def hs_norm(f: Field, s: float) -> float:
    if s < 0:
        raise ValueError("s must be non-negative")
    c = forward(f)
    w = (1.0 + c.grid.xi**2) ** s
    return float(np.sqrt(c.grid.length * np.sum(w * np.abs(c.coeffs) ** 2)))


def ws1_norm(f: Field, s: float) -> float:
    """``W^{s,1}`` norm: weight by ``(1+xi^2)^{s/2}``, invert, then L1 quadrature."""
    if s < 0:
        raise ValueError("s must be non-negative")
    c = forward(f)
    weighted = c.coeffs * (1.0 + c.grid.xi**2) ** (s / 2.0)
    vals = np.fft.ifft(weighted * c.grid.n_points).real
    return float(c.grid.dx * np.sum(np.abs(vals)))


def norms(f: Field, s: float = 0.0) -> Norms:
    return Norms(l2_norm(f), linf_norm(f), hs_norm(f, s), ws1_norm(f, s), s)
