"""Grünwald-Letnikov weights and their second-order shifted combination.

The time discretization of the Riemann-Liouville operator of order ``gamma``
at the half step ``t_{k+1/2}`` is a convolution of the stored levels with the
shifted weights

.. math::

    g_0 = \\frac{1+\\gamma}{2}\\varpi_0, \\qquad
    g_\\ell = \\frac{1+\\gamma}{2}\\varpi_\\ell + \\frac{1-\\gamma}{2}\\varpi_{\\ell-1},

where :math:`\\varpi_\\ell = (-1)^\\ell \\binom{\\gamma}{\\ell}` are the plain
Grünwald-Letnikov coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "WeightTable",
    "CombinedWeights",
    "gl_weights",
    "gl_weights_exact",
    "shifted_weights",
    "shifted_weights_exact",
    "weight_table",
    "combined_weights",
]

#: Largest index served by the exact rational evaluators.
EXACT_MAX_LENGTH = 64


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def gl_weights(order: float, n: int) -> np.ndarray:
    """Return ``varpi_0..varpi_n`` for the given order.

    Uses the recurrence ``varpi_l = varpi_{l-1} * (l - 1 - order) / l`` so that
    long tables never touch the Gamma function. For ``order == 1`` the result
    is exactly ``[1, -1, 0, 0, ...]``.
    """
    if not 0.0 < order <= 1.0:
        raise ValueError(f"order must lie in (0, 1], got {order!r}")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n!r}")
    ell = np.arange(1, n + 1, dtype=np.float64)
    w = np.empty(n + 1)
    w[0] = 1.0
    w[1:] = np.cumprod((ell - 1.0 - order) / ell)
    return w


def shifted_weights(order: float, n: int) -> np.ndarray:
    """Return the shifted weights ``g_0..g_n`` for ``0 < order < 1``."""
    if not 0.0 < order < 1.0:
        raise ValueError(f"order must lie in (0, 1), got {order!r}")
    raw = gl_weights(order, n)
    return _shift(raw, order)


def _shift(raw: np.ndarray, order: float) -> np.ndarray:
    lead = 0.5 * (1.0 + order)
    lag = 0.5 * (1.0 - order)
    g = np.empty_like(raw)
    g[0] = lead * raw[0]
    g[1:] = lead * raw[1:] + lag * raw[:-1]
    return g


def gl_weights_exact(order: Fraction, n: int) -> list[Fraction]:
    """Rational ``varpi_0..varpi_n``; limited to ``n <= 64``."""
    order = Fraction(order)
    if not 0 < order <= 1:
        raise ValueError(f"order must lie in (0, 1], got {order}")
    if not 0 <= n <= EXACT_MAX_LENGTH:
        raise ValueError(f"exact evaluation limited to 0 <= n <= {EXACT_MAX_LENGTH}")
    out = [Fraction(1)]
    for ell in range(1, n + 1):
        out.append(out[-1] * (ell - 1 - order) / ell)
    return out


def shifted_weights_exact(order: Fraction, n: int) -> list[Fraction]:
    order = Fraction(order)
    if not 0 < order < 1:
        raise ValueError(f"order must lie in (0, 1), got {order}")
    raw = gl_weights_exact(order, n)
    lead, lag = (1 + order) / 2, (1 - order) / 2
    return [lead * raw[0]] + [lead * raw[i] + lag * raw[i - 1] for i in range(1, n + 1)]


@dataclass(frozen=True)
class WeightTable:
    """Raw and shifted weights for one fractional order.

    Attributes
    ----------
    order : float
        Differentiation order ``gamma`` in (0, 1). The solver builds tables at
        ``1 - alpha`` and ``1 - beta``.
    raw, shifted : numpy.ndarray
        ``varpi_0..varpi_n`` and ``g_0..g_n`` (read-only).
    """

    order: float
    raw: np.ndarray = field(repr=False)
    shifted: np.ndarray = field(repr=False)

    @property
    def length(self) -> int:
        """Largest index ``n`` held by the table."""
        return len(self.raw) - 1


def weight_table(order: float, n: int) -> WeightTable:
    if not 0.0 < order < 1.0:
        raise ValueError(f"order must lie in (0, 1), got {order!r}")
    raw = gl_weights(order, n)
    return WeightTable(order=order, raw=_frozen(raw), shifted=_frozen(_shift(raw, order)))


@dataclass(frozen=True)
class CombinedWeights:
    """Scheme weights ``g^(alpha,beta)_l = mu_alpha g_l^(1-alpha) + mu_beta g_l^(1-beta)``.

    ``mu_alpha = tau**alpha * A / h**2`` and ``mu_beta = tau**beta * B / h**2``.
    """

    alpha: float
    beta: float
    mu_alpha: float
    mu_beta: float
    values: np.ndarray = field(repr=False)
    table_alpha: WeightTable = field(repr=False)
    table_beta: WeightTable = field(repr=False)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, ell):
        return self.values[ell]


def combined_weights(
    alpha: float,
    beta: float,
    A_coef: float,
    B_coef: float,
    tau: float,
    h: float,
    n: int,
) -> CombinedWeights:
    """Build the combined weights ``g_0..g_n`` for one ``(tau, h)`` pair.

    ``n = N + 1`` covers a run of ``N`` time steps.
    """
    for name, val in (("alpha", alpha), ("beta", beta)):
        if not 0.0 < val < 1.0:
            raise ValueError(f"{name} must lie in (0, 1), got {val!r}")
    for name, val in (("A_coef", A_coef), ("B_coef", B_coef), ("tau", tau), ("h", h)):
        if not val > 0.0:
            raise ValueError(f"{name} must be positive, got {val!r}")
    ta = weight_table(1.0 - alpha, n)
    tb = weight_table(1.0 - beta, n)
    mu_a = tau**alpha * A_coef / h**2
    mu_b = tau**beta * B_coef / h**2
    values = mu_a * ta.shifted + mu_b * tb.shifted
    return CombinedWeights(
        alpha=alpha,
        beta=beta,
        mu_alpha=mu_a,
        mu_beta=mu_b,
        values=_frozen(values),
        table_alpha=ta,
        table_beta=tb,
    )
