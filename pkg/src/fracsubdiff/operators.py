"""Centered differences, compact stencils and the discrete RL derivative.

The sixth-order compact approximation of ``u''`` is used in multiplied-through
form, ``A u'' ~= B u / h**2`` with

* ``A = 1 - delta^4 / 90``
* ``B = delta^2 - delta^4 / 12``

and the eighth-order one as ``A8 u'' ~= B8 u / h**2`` with

* ``A8 = 1 + delta^6 / 560``
* ``B8 = delta^2 - delta^4 / 12 + delta^6 / 90``.

The inverse operators are never formed, so every matrix stays banded.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .fracweights import shifted_weights

__all__ = [
    "CompactStencil",
    "A6",
    "B6",
    "A8",
    "B8",
    "SIXTH_ORDER_PAIR",
    "EIGHTH_ORDER_PAIR",
    "difference_coefficients",
    "combine_differences",
    "central_difference_power",
    "apply_stencil",
    "fit_order",
    "compact_residual",
    "compact_residual_order",
    "rl_derivative_halfpoint",
]


def difference_coefficients(p: int) -> tuple[Fraction, ...]:
    """Coefficients of the centered difference ``delta^p`` (``p`` even).

    ``delta^p u_j = sum_m (-1)^m C(p, m) u_{j - p/2 + m}``.
    """
    if p < 0 or p % 2:
        raise ValueError(f"p must be a non-negative even integer, got {p!r}")
    return tuple(Fraction((-1) ** m * comb(p, m)) for m in range(p + 1))


def combine_differences(terms: dict[int, Fraction], half_bandwidth: int) -> tuple[Fraction, ...]:
    """Sum ``c_p * delta^p`` for ``{p: c_p}`` into one centered row.

    ``p = 0`` stands for the identity.
    """
    row = [Fraction(0)] * (2 * half_bandwidth + 1)
    for p, c in terms.items():
        coeffs = (Fraction(1),) if p == 0 else difference_coefficients(p)
        start = half_bandwidth - p // 2
        if start < 0:
            raise ValueError(f"delta^{p} does not fit half bandwidth {half_bandwidth}")
        for m, a in enumerate(coeffs):
            row[start + m] += Fraction(c) * a
    return tuple(row)


@dataclass(frozen=True)
class CompactStencil:
    """Constant interior row of a symmetric banded Toeplitz operator."""

    name: str
    exact: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.exact) % 2 != 1:
            raise ValueError("stencil row must have odd length")
        if tuple(reversed(self.exact)) != self.exact:
            raise ValueError("stencil row must be symmetric")

    @property
    def half_bandwidth(self) -> int:
        return len(self.exact) // 2

    @property
    def row(self) -> np.ndarray:
        # float(Fraction) is correctly rounded
        return np.array([float(c) for c in self.exact])

    def symbol(self, sigma):
        """Fourier symbol as a function of ``sigma = sin^2(theta/2)``."""
        sigma = np.asarray(sigma, dtype=np.float64)
        p = self.half_bandwidth
        theta = 2.0 * np.arcsin(np.sqrt(np.clip(sigma, 0.0, 1.0)))
        out = np.full_like(sigma, float(self.exact[p]))
        for m in range(1, p + 1):
            out = out + 2.0 * float(self.exact[p + m]) * np.cos(m * theta)
        return out


def _F(*vals) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in vals)


A6 = CompactStencil("A", _F("-1/90", "2/45", "14/15", "2/45", "-1/90"))
B6 = CompactStencil("B", _F("-1/12", "4/3", "-5/2", "4/3", "-1/12"))
A8 = CompactStencil("A~", _F("1/560", "-3/280", "3/112", "27/28", "3/112", "-3/280", "1/560"))
B8 = CompactStencil("B~", _F("1/90", "-3/20", "3/2", "-49/18", "3/2", "-3/20", "1/90"))

SIXTH_ORDER_PAIR = (A6, B6)
EIGHTH_ORDER_PAIR = (A8, B8)


def central_difference_power(p: int, u) -> np.ndarray:
    """``delta^p u`` at every index where the full stencil fits.

    Output length is ``len(u) - p``.
    """
    if p not in (2, 4, 6):
        raise ValueError(f"p must be one of 2, 4, 6, got {p!r}")
    u = np.asarray(u, dtype=np.float64)
    if u.shape[0] < p + 1:
        raise ValueError(f"need at least {p + 1} points for delta^{p}, got {u.shape[0]}")
    coeffs = np.array([float(c) for c in difference_coefficients(p)])
    return np.convolve(u, coeffs, mode="valid")


def apply_stencil(s: CompactStencil, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape[0] < 2 * s.half_bandwidth + 1:
        raise ValueError(
            f"stencil {s.name} needs at least {2 * s.half_bandwidth + 1} points, got {u.shape[0]}"
        )
    # rows are symmetric, so convolution equals correlation
    return np.convolve(u, s.row, mode="valid")


def fit_order(steps: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(step)``."""
    steps = np.asarray(steps, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if steps.size < 2 or steps.size != errors.size:
        raise ValueError("need matching step/error sequences of length >= 2")
    if np.any(errors <= 0.0) or np.any(steps <= 0.0):
        raise ValueError("steps and errors must be positive")
    slope, _ = np.polyfit(np.log(steps), np.log(errors), 1)
    return float(slope)


def _sin_pi(x):
    return np.sin(np.pi * x)


def _sin_pi_d2(x):
    return -np.pi**2 * np.sin(np.pi * x)


def compact_residual(
    pair: tuple[CompactStencil, CompactStencil],
    h: float,
    u: Callable = _sin_pi,
    d2u: Callable = _sin_pi_d2,
    length: float = 1.0,
) -> float:
    """``max_j |A u''(x_j) - B u(x_j) / h^2|`` over the interior nodes of ``[0, length]``.

    The test function is sampled off the interval where the stencil reaches
    past it, so ``u`` must be defined there.
    """
    lhs, rhs = pair
    M = int(round(length / h))
    p = lhs.half_bandwidth
    j = np.arange(1, M)
    offsets = np.arange(-p, p + 1)
    x = (j[:, None] + offsets[None, :]) * h
    r = d2u(x) @ lhs.row - (u(x) @ rhs.row) / h**2
    return float(np.max(np.abs(r)))


def compact_residual_order(
    pair: tuple[CompactStencil, CompactStencil],
    hs: Sequence[float],
    u: Callable = _sin_pi,
    d2u: Callable = _sin_pi_d2,
    length: float = 1.0,
) -> tuple[float, list[float]]:
    """Fitted order of the compact residual and the residuals themselves.

    Defaults to ``u = sin(pi x)`` on ``[0, 1]``.
    """
    if len(hs) < 3:
        raise ValueError("at least 3 grid levels are required")
    res = [compact_residual(pair, h, u, d2u, length) for h in hs]
    return fit_order(hs, res), res


def rl_derivative_halfpoint(order: float, history, tau: float) -> float:
    """Second-order Riemann-Liouville derivative at ``t_{k+1/2}``.

    Parameters
    ----------
    order : float
        Derivative order in (0, 1).
    history : array_like
        Values ``u(t_0), ..., u(t_{k+1})`` at one spatial point.
    tau : float
        Time step.

    Returns
    -------
    float
        ``tau**(-order) * sum_l g_l * u(t_{k+1-l})``.
    """
    history = np.asarray(history, dtype=np.float64)
    if history.ndim != 1 or history.size == 0:
        raise ValueError("history must be a non-empty 1-D sequence")
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    g = shifted_weights(order, history.size - 1)
    return float(g @ history[::-1]) / tau**order
