"""Initial-boundary-value problems for the two-term subdiffusion equation.

The equation on ``0 < x < L``, ``0 < t <= T`` is::

    u_t = (A * D^{1-alpha} + B * D^{1-beta}) u_xx + f(x, t)

with Riemann-Liouville time derivatives, ``u(x, 0) = phi(x)`` and Dirichlet
data ``u(0, t) = phi1(t)``, ``u(L, t) = phi2(t)``.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .expr import ExpressionError, compile_expression

__all__ = [
    "ProblemSpec",
    "InvalidProblem",
    "PAPER_EXAMPLE",
    "example_exact",
    "example_source",
    "paper_example",
    "problem_violations",
    "validate",
    "problem_from_dict",
    "load_problem",
]

PAPER_EXAMPLE = "paper-example"

CORNER_TOL = 1e-12


class InvalidProblem(ValueError):
    """Raised by :func:`validate`; ``violations`` lists every failed check."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of the two-term subdiffusion problem.

    ``source`` must be evaluable slightly outside ``[0, length]``: the compact
    right-hand side samples it up to three grid steps beyond each boundary.
    All callables take and return numpy arrays.
    """

    alpha: float
    beta: float
    diff_a: float
    diff_b: float
    length: float
    horizon: float
    source: Callable
    initial: Callable
    boundary_left: Callable
    boundary_right: Callable
    exact: Callable | None = None
    name: str = "custom"

    def with_orders(self, alpha: float, beta: float) -> ProblemSpec:
        if self.name == PAPER_EXAMPLE:
            return paper_example(alpha, beta)
        raise ValueError(f"problem {self.name!r} cannot be re-parameterized")


def _profile(x):
    return x**12 * (1.0 - x) ** 12 * np.sin(np.pi * x)


def _profile_neg_d2(x):
    # equals -d^2/dx^2 of x^12 (1-x)^12 sin(pi x)
    return (x**10 * (1.0 - x) ** 10) * (
        np.sin(np.pi * x) * (np.pi**2 * x**2 * (1.0 - x) ** 2 - 552.0 * x**2 + 552.0 * x - 132.0)
        - 24.0 * np.pi * x * np.cos(np.pi * x) * (2.0 * x**2 - 3.0 * x + 1.0)
    )


def example_exact(x, t, alpha: float, beta: float):
    """``t^(alpha+beta+2) x^12 (1-x)^12 sin(pi x)``."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    return t ** (alpha + beta + 2.0) * _profile(x)


def example_source(x, t, alpha: float, beta: float):
    """Source term manufactured from :func:`example_exact` with ``A = B = 1``."""
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    s = alpha + beta
    g = math.gamma(s + 3.0)
    memory = g / math.gamma(2.0 * alpha + beta + 2.0) * t ** (2.0 * alpha + beta + 1.0) + g / math.gamma(
        2.0 * beta + alpha + 2.0
    ) * t ** (2.0 * beta + alpha + 1.0)
    return (s + 2.0) * t ** (s + 1.0) * _profile(x) + _profile_neg_d2(x) * memory


def _zero_t(t):
    return np.zeros_like(np.asarray(t, dtype=np.float64))


def paper_example(alpha: float, beta: float) -> ProblemSpec:
    """The manufactured benchmark on ``[0, 1] x (0, 1]`` with ``A = B = 1``."""

    def source(x, t):
        return example_source(x, t, alpha, beta)

    def initial(x):
        return example_exact(x, 0.0, alpha, beta)

    def exact(x, t):
        return example_exact(x, t, alpha, beta)

    return ProblemSpec(
        alpha=alpha,
        beta=beta,
        diff_a=1.0,
        diff_b=1.0,
        length=1.0,
        horizon=1.0,
        source=source,
        initial=initial,
        boundary_left=_zero_t,
        boundary_right=_zero_t,
        exact=exact,
        name=PAPER_EXAMPLE,
    )


def problem_violations(spec: ProblemSpec) -> list[str]:
    out = []
    for name in ("alpha", "beta"):
        v = getattr(spec, name)
        if not 0.0 < v < 1.0:
            out.append(f"{name}={v!r} outside the open interval (0, 1)")
    for name in ("diff_a", "diff_b", "length", "horizon"):
        v = getattr(spec, name)
        if not v > 0.0:
            out.append(f"{name}={v!r} must be strictly positive")
    if out:
        return out
    checks = (
        ("left", float(spec.initial(0.0)), float(spec.boundary_left(0.0))),
        ("right", float(spec.initial(spec.length)), float(spec.boundary_right(0.0))),
    )
    for side, a, b in checks:
        if not abs(a - b) <= CORNER_TOL:
            out.append(f"corner mismatch on the {side}: initial={a!r}, boundary={b!r}")
    return out


def validate(spec: ProblemSpec) -> ProblemSpec:
    violations = problem_violations(spec)
    if violations:
        raise InvalidProblem(violations)
    return spec


_REQUIRED = ("alpha", "beta", "source", "initial", "boundary_left", "boundary_right")


def problem_from_dict(data: dict, alpha: float | None = None, beta: float | None = None) -> ProblemSpec:
    """Build a problem from its JSON description.

    ``{"name": "paper-example", "alpha": .., "beta": ..}`` selects the built-in
    benchmark. Otherwise the expression fields ``source`` (in ``x, t``),
    ``initial`` (in ``x``), ``boundary_left``/``boundary_right`` (in ``t``) and
    optional ``exact`` (in ``x, t``) are compiled; they may refer to
    ``alpha``, ``beta``, ``A`` and ``B``. Explicit ``alpha``/``beta`` arguments
    override the file.
    """
    if not isinstance(data, dict):
        raise InvalidProblem(["problem description must be a JSON object"])
    a = float(alpha if alpha is not None else data.get("alpha", float("nan")))
    b = float(beta if beta is not None else data.get("beta", float("nan")))
    if data.get("name") == PAPER_EXAMPLE:
        return paper_example(a, b)
    missing = [k for k in _REQUIRED[2:] if k not in data]
    missing += [k for k, v in (("alpha", a), ("beta", b)) if math.isnan(v)]
    if missing:
        raise InvalidProblem([f"missing field {k!r}" for k in missing])
    diff_a = float(data.get("A", 1.0))
    diff_b = float(data.get("B", 1.0))
    consts = {"alpha": a, "beta": b, "A": diff_a, "B": diff_b}
    try:
        source = compile_expression(data["source"], ("x", "t"), consts)
        initial = compile_expression(data["initial"], ("x",), consts)
        left = compile_expression(data["boundary_left"], ("t",), consts)
        right = compile_expression(data["boundary_right"], ("t",), consts)
        exact = compile_expression(data["exact"], ("x", "t"), consts) if data.get("exact") is not None else None
    except ExpressionError as exc:
        raise InvalidProblem([str(exc)]) from None
    return ProblemSpec(
        alpha=a,
        beta=b,
        diff_a=diff_a,
        diff_b=diff_b,
        length=float(data.get("length", 1.0)),
        horizon=float(data.get("horizon", 1.0)),
        source=source,
        initial=initial,
        boundary_left=left,
        boundary_right=right,
        exact=exact,
        name=str(data.get("name", "custom")),
    )


def load_problem(ref: str, alpha: float | None = None, beta: float | None = None) -> ProblemSpec:
    """Resolve ``ref`` as the reserved benchmark name or a JSON file path."""
    if ref == PAPER_EXAMPLE:
        if alpha is None or beta is None:
            raise InvalidProblem(["paper-example needs alpha and beta"])
        return paper_example(float(alpha), float(beta))
    path = Path(ref)
    if not path.is_file():
        raise FileNotFoundError(f"problem file not found: {ref}")
    with path.open() as fh:
        data = json.load(fh)
    return problem_from_dict(data, alpha, beta)
