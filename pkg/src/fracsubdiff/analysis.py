"""Stability conditions, Fourier symbols, solvability spectra and error metrics.

All symbols are written in ``sigma = sin^2(theta/2)`` where ``theta`` is the
Fourier phase ``k h``. For the sixth-order pair

    Q = A(sigma) - g0 B(sigma),   P = A(sigma) + g1 B(sigma)

with ``A(sigma) = 1 - 8/45 sigma^2`` and ``B(sigma) = -4 sigma (1 + sigma/3)``;
the eighth-order pair uses ``1 - 4/35 sigma^3`` and
``-4 sigma (1 + sigma/3 + 8/45 sigma^2)``. One step multiplies a Fourier mode
by ``P/Q`` (ignoring the memory tail).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .fracweights import combined_weights
from .solver import SchemeKind, SolutionHistory

__all__ = [
    "StabilityReport",
    "SymbolPair",
    "STABILITY_BOUNDS",
    "UNCONDITIONAL_ORDER",
    "order_quadratic",
    "stability_condition",
    "max_stable_tau",
    "symbols",
    "amplification_sweep",
    "circulant_eigenvalues",
    "stability_report",
    "max_error",
    "temporal_order",
    "spatial_order",
]

STABILITY_BOUNDS = {
    SchemeKind.COMPACT6: Fraction(37, 120),
    SchemeKind.COMPACT8: Fraction(279, 952),
}

#: Largest order for which ``-gamma^2 + 4 gamma - 2 <= 0`` on (0, 1).
UNCONDITIONAL_ORDER = 2.0 - math.sqrt(2.0)

DEFAULT_SAMPLES = 1001


def order_quadratic(order: float) -> float:
    """``-order^2 + 4 order - 2``; twice the first shifted weight at ``1 - order``."""
    return -order * order + 4.0 * order - 2.0


@dataclass(frozen=True)
class SymbolPair:
    """Amplification denominator ``Q`` and numerator ``P`` at one ``sigma``."""

    sigma: float
    Q: float
    P: float

    @property
    def ratio(self) -> float:
        return self.P / self.Q


@dataclass(frozen=True)
class StabilityReport:
    """Stability verdicts for one parameter set.

    ``satisfied`` is the sufficient condition on ``condition_value``;
    ``worst_ratio`` and ``p_nonnegative`` come from the numeric sweep and are
    reported separately since the condition is not claimed to be necessary.
    """

    scheme: str
    alpha: float
    beta: float
    A_coef: float
    B_coef: float
    tau: float
    h: float
    condition_value: float
    bound: float
    satisfied: bool
    unconditional: bool
    worst_ratio: float | None = None
    p_nonnegative: bool | None = None
    min_eigenvalue: float | None = None
    max_stable_tau: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["max_stable_tau"] is not None and math.isinf(d["max_stable_tau"]):
            d["max_stable_tau"] = "inf"
        return d


def _check_orders(alpha: float, beta: float) -> None:
    for name, v in (("alpha", alpha), ("beta", beta)):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name} must lie in (0, 1), got {v!r}")


def _condition(alpha, beta, A_coef, B_coef, tau, h) -> float:
    return (
        tau**alpha * order_quadratic(alpha) * A_coef + tau**beta * order_quadratic(beta) * B_coef
    ) / h**2


def stability_condition(scheme, alpha, beta, A_coef, B_coef, tau, h) -> StabilityReport:
    """Evaluate the sufficient stability condition (condition fields only).

    ``condition_value = (tau^alpha q(alpha) A + tau^beta q(beta) B) / h^2``
    with ``q(g) = -g^2 + 4g - 2`` is compared to 37/120 (sixth order) or
    279/952 (eighth order). It equals twice the combined weight ``g1``.
    """
    scheme = SchemeKind.parse(scheme)
    _check_orders(alpha, beta)
    for name, v in (("A_coef", A_coef), ("B_coef", B_coef), ("tau", tau), ("h", h)):
        if not v > 0.0:
            raise ValueError(f"{name} must be positive, got {v!r}")
    value = _condition(alpha, beta, A_coef, B_coef, tau, h)
    bound = float(STABILITY_BOUNDS[scheme])
    return StabilityReport(
        scheme=scheme.value,
        alpha=alpha,
        beta=beta,
        A_coef=A_coef,
        B_coef=B_coef,
        tau=tau,
        h=h,
        condition_value=value,
        bound=bound,
        satisfied=bool(value <= bound),
        unconditional=bool(order_quadratic(alpha) <= 0.0 and order_quadratic(beta) <= 0.0),
    )


def max_stable_tau(scheme, alpha, beta, A_coef, B_coef, h, tau_max: float = 1e6) -> float:
    """Largest ``tau`` (up to ``tau_max``) for which the condition holds.

    Returns ``inf`` in the unconditional region. When the condition holds on
    all of ``(0, tau_max]`` but the parameters are not unconditional,
    ``tau_max`` is returned.
    """
    scheme = SchemeKind.parse(scheme)
    _check_orders(alpha, beta)
    bound = float(STABILITY_BOUNDS[scheme])
    if order_quadratic(alpha) <= 0.0 and order_quadratic(beta) <= 0.0:
        return math.inf

    def excess(tau):
        return _condition(alpha, beta, A_coef, B_coef, tau, h) - bound

    if excess(tau_max) <= 0.0:
        return tau_max
    # the condition value is a sum of two powers of tau; scan for the first crossing
    grid = np.geomspace(1e-12, tau_max, 2000)
    vals = np.array([excess(t) for t in grid])
    idx = int(np.argmax(vals > 0.0))
    if idx == 0:
        return 0.0
    return float(brentq(excess, grid[idx - 1], grid[idx], xtol=1e-300, rtol=1e-14))


def _symbol_parts(scheme: SchemeKind, sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if scheme is SchemeKind.COMPACT6:
        a = 1.0 - 8.0 / 45.0 * sigma**2
        b = -4.0 * sigma * (1.0 + sigma / 3.0)
    else:
        a = 1.0 - 4.0 / 35.0 * sigma**3
        b = -4.0 * sigma * (1.0 + sigma / 3.0 + 8.0 / 45.0 * sigma**2)
    return a, b


def symbols(scheme, g0: float, g1: float, sigma) -> tuple[np.ndarray, np.ndarray]:
    """``(Q, P)`` evaluated at ``sigma`` (scalar or array)."""
    scheme = SchemeKind.parse(scheme)
    sigma = np.asarray(sigma, dtype=np.float64)
    a, b = _symbol_parts(scheme, sigma)
    return a - g0 * b, a + g1 * b


def amplification_sweep(scheme, g0: float, g1: float, grid=None) -> tuple[float, bool, np.ndarray]:
    """Sweep ``|P/Q|`` over ``sigma`` samples in [0, 1].

    Returns
    -------
    worst : float
        ``max |P/Q|`` over the grid.
    p_nonnegative : bool
        Whether ``P >= -1e-12`` at every sample.
    table : numpy.ndarray
        Rows ``(sigma, Q, P, ratio)``.
    """
    if not g0 > 0.0:
        raise ValueError(f"g0 must be positive, got {g0!r}")
    sigma = np.linspace(0.0, 1.0, DEFAULT_SAMPLES) if grid is None else np.asarray(grid, dtype=np.float64)
    Q, P = symbols(scheme, g0, g1, sigma)
    ratio = P / Q
    table = np.column_stack([sigma, Q, P, ratio])
    return float(np.max(np.abs(ratio))), bool(np.all(P >= -1e-12)), table


def circulant_eigenvalues(scheme, M: int, g0: float) -> np.ndarray:
    """Closed-form eigenvalues of the circulant model of ``A - g0 B``.

    ``lambda_j = Q(sin^2(pi j / (M - 1)))`` for ``j = 1..M-1``; these are the
    eigenvalues of the order ``M - 1`` circulant whose first row is the
    stencil wrapped around.
    """
    if M < 3:
        raise ValueError(f"M must be at least 3, got {M}")
    if not g0 > 0.0:
        raise ValueError(f"g0 must be positive, got {g0!r}")
    j = np.arange(1, M)
    sigma = np.sin(np.pi * j / (M - 1)) ** 2
    Q, _ = symbols(scheme, g0, 0.0, sigma)
    return Q


def stability_report(scheme, alpha, beta, A_coef, B_coef, tau, h, samples: int = DEFAULT_SAMPLES) -> StabilityReport:
    """Condition verdict plus symbol sweep and circulant spectrum at ``M = round(1/h)``."""
    base = stability_condition(scheme, alpha, beta, A_coef, B_coef, tau, h)
    w = combined_weights(alpha, beta, A_coef, B_coef, tau, h, 1)
    g0, g1 = float(w.values[0]), float(w.values[1])
    worst, p_ok, _ = amplification_sweep(scheme, g0, g1, np.linspace(0.0, 1.0, samples))
    M = max(3, int(round(1.0 / h)))
    lam = circulant_eigenvalues(scheme, M, g0)
    fields = asdict(base)
    fields.update(
        worst_ratio=worst,
        p_nonnegative=p_ok,
        min_eigenvalue=float(lam.min()),
        max_stable_tau=max_stable_tau(scheme, alpha, beta, A_coef, B_coef, h),
    )
    return StabilityReport(**fields)


def max_error(history: SolutionHistory, exact) -> float:
    """``max |U^k_j - u(x_j, t_k)|`` over interior nodes and every stored level."""
    if exact is None:
        raise ValueError("max_error needs an exact solution")
    x = history.x[1:-1]
    t = history.t[:, None]
    diff = history.levels[:, 1:-1] - exact(x[None, :], t)
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def temporal_order(e_coarse: float, e_fine: float) -> float:
    """``log2(e_coarse / e_fine)`` for a halved time step."""
    if not (e_coarse > 0.0 and e_fine > 0.0):
        raise ValueError("errors must be positive")
    return math.log2(e_coarse / e_fine)


def spatial_order(e1: float, h1: float, e2: float, h2: float) -> float:
    """``ln(e1/e2) / ln(h1/h2)``."""
    if not (e1 > 0.0 and e2 > 0.0):
        raise ValueError("errors must be positive")
    if not (h1 > 0.0 and h2 > 0.0) or h1 == h2:
        raise ValueError("steps must be positive and distinct")
    return math.log(e1 / e2) / math.log(h1 / h2)
