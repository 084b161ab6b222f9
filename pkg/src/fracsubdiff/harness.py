"""Refinement studies and profile extraction.

A study solves one problem for every ``(alpha, beta)`` pair at every step size
of a ladder, holding the other step fixed, and reports the max-norm error and
the observed order between consecutive rungs.
"""

from __future__ import annotations

import json
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from .analysis import max_error, spatial_order, temporal_order
from .problem import PAPER_EXAMPLE, load_problem
from .solver import GhostPolicy, SchemeKind, SolutionHistory, solve

__all__ = [
    "StudyConfig",
    "StudyRow",
    "StudyResult",
    "PRESETS",
    "WORKERS_ENV",
    "preset",
    "run_study",
    "run_temporal_study",
    "run_spatial_study",
    "write_study_csv",
    "write_study_json",
    "emit_profile",
    "write_profile_csv",
]

WORKERS_ENV = "FRACSUBDIFF_WORKERS"
STUDY_COLUMNS = ("alpha", "beta", "tau", "h", "e_inf", "order", "wall_seconds")
# rows whose error sits below this many unit roundoffs of max|u| are flagged
ROUNDOFF_FACTOR = 100.0


def _step_count(extent: float, step: float, what: str) -> int:
    n = int(round(extent / step))
    if n < 1 or abs(n * step - extent) > 1e-9 * extent:
        raise ValueError(f"{what}={step!r} does not divide the extent {extent!r}")
    return n


@dataclass(frozen=True)
class StudyConfig:
    """One refinement study.

    Exactly one of ``fixed_h`` (temporal study, ``varied`` are time steps)
    and ``fixed_tau`` (spatial study, ``varied`` are grid steps) is set.
    ``timing`` controls whether wall-clock seconds are written to the CSV;
    leaving it off keeps the output byte-reproducible.
    """

    scheme: SchemeKind
    pairs: tuple[tuple[float, float], ...]
    varied: tuple[float, ...]
    fixed_h: float | None = None
    fixed_tau: float | None = None
    problem: str = PAPER_EXAMPLE
    ghosts: GhostPolicy = GhostPolicy.EXTRAPOLATE
    timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", SchemeKind.parse(self.scheme))
        object.__setattr__(self, "ghosts", GhostPolicy(self.ghosts))
        object.__setattr__(self, "pairs", tuple((float(a), float(b)) for a, b in self.pairs))
        object.__setattr__(self, "varied", tuple(float(v) for v in self.varied))
        if (self.fixed_h is None) == (self.fixed_tau is None):
            raise ValueError("set exactly one of fixed_h and fixed_tau")
        if not self.pairs:
            raise ValueError("at least one (alpha, beta) pair is required")
        if not self.varied:
            raise ValueError("the varied step list is empty")
        d = np.diff(self.varied)
        if d.size and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("varied step list must be strictly monotone")
        if any(v <= 0 for v in self.varied):
            raise ValueError("step sizes must be positive")

    @property
    def kind(self) -> str:
        return "temporal" if self.fixed_h is not None else "spatial"

    def steps(self, value: float) -> tuple[float, float]:
        """``(tau, h)`` for one rung of the ladder."""
        return (value, self.fixed_h) if self.kind == "temporal" else (self.fixed_tau, value)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scheme"] = self.scheme.value
        d["ghosts"] = self.ghosts.value
        d["pairs"] = [list(p) for p in self.pairs]
        d["varied"] = list(self.varied)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> StudyConfig:
        data = dict(data)
        data["pairs"] = tuple(tuple(p) for p in data["pairs"])
        data["varied"] = tuple(data["varied"])
        return cls(**data)


def _ladder(*denominators: int) -> tuple[float, ...]:
    return tuple(float(Fraction(1, d)) for d in denominators)


PRESETS: dict[str, StudyConfig] = {
    "table1": StudyConfig(
        SchemeKind.COMPACT6,
        ((0.25, 0.15), (0.25, 0.35), (0.25, 0.55)),
        _ladder(4, 8, 16, 32),
        fixed_h=1 / 1000,
    ),
    "table2": StudyConfig(
        SchemeKind.COMPACT6,
        ((0.4, 0.1), (0.4, 0.3), (0.4, 0.5)),
        _ladder(12, 14, 16, 18),
        fixed_tau=1 / 200,
        ghosts=GhostPolicy.EXACT,
    ),
    "table3": StudyConfig(
        SchemeKind.COMPACT8,
        ((0.45, 0.15), (0.45, 0.35), (0.45, 0.55)),
        _ladder(4, 8, 16, 32),
        fixed_h=1 / 500,
    ),
    "table4": StudyConfig(
        SchemeKind.COMPACT8,
        ((0.2, 0.1), (0.2, 0.3), (0.2, 0.5)),
        _ladder(14, 16, 18, 20),
        fixed_tau=1 / 160,
        ghosts=GhostPolicy.EXACT,
    ),
}


def preset(name: str, **overrides) -> StudyConfig:
    """A built-in table configuration, optionally with fields replaced."""
    try:
        base = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    d = base.to_dict()
    d.update(overrides)
    return StudyConfig.from_dict(d)


@dataclass
class StudyRow:
    alpha: float
    beta: float
    tau: float
    h: float
    e_inf: float | None
    order: float | None = None
    wall_seconds: float | None = None
    roundoff_limited: bool = False
    error: str | None = None


@dataclass
class StudyResult:
    config: StudyConfig
    rows: list[StudyRow] = field(default_factory=list)

    def orders(self, pair=None) -> list[float]:
        return [
            r.order
            for r in self.rows
            if r.order is not None and (pair is None or (r.alpha, r.beta) == tuple(pair))
        ]

    def errors(self, pair=None) -> list[float | None]:
        return [r.e_inf for r in self.rows if pair is None or (r.alpha, r.beta) == tuple(pair)]


def _workers(requested: int | None) -> int:
    if requested is not None:
        return max(1, int(requested))
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _cell(config: StudyConfig, pair, value) -> StudyRow:
    alpha, beta = pair
    tau, h = config.steps(value)
    row = StudyRow(alpha=alpha, beta=beta, tau=tau, h=h, e_inf=None)
    try:
        spec = load_problem(config.problem, alpha, beta)
        if spec.exact is None:
            raise ValueError("studies need a problem with an exact solution")
        M = _step_count(spec.length, h, "h")
        N = _step_count(spec.horizon, tau, "tau")
        start = time.perf_counter()
        hist = solve(spec, config.scheme, M, N, config.ghosts)
        wall = time.perf_counter() - start
        row.e_inf = max_error(hist, spec.exact)
        scale = float(np.max(np.abs(hist.levels)))
        row.roundoff_limited = row.e_inf < ROUNDOFF_FACTOR * np.finfo(float).eps * scale
        if config.timing:
            row.wall_seconds = wall
    except Exception as exc:  # recorded per row; the study carries on
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def run_study(config: StudyConfig, workers: int | None = None) -> StudyResult:
    """Solve every ``(pair, step)`` cell and fill in the order column.

    Cells are independent and may run on a thread pool (size from the
    argument or the ``FRACSUBDIFF_WORKERS`` environment variable); the rows
    always come back in config order.
    """
    cells = [(pair, v) for pair in config.pairs for v in config.varied]
    n = _workers(workers)
    if n == 1:
        rows = [_cell(config, p, v) for p, v in cells]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(lambda c: _cell(config, *c), cells))
    per_pair = len(config.varied)
    for g in range(len(config.pairs)):
        group = rows[g * per_pair : (g + 1) * per_pair]
        for prev, cur in zip(group, group[1:]):
            if not (prev.e_inf and cur.e_inf):
                continue
            if config.kind == "temporal":
                if prev.tau == 2.0 * cur.tau:
                    cur.order = temporal_order(prev.e_inf, cur.e_inf)
                else:
                    cur.order = spatial_order(prev.e_inf, prev.tau, cur.e_inf, cur.tau)
            else:
                cur.order = spatial_order(prev.e_inf, prev.h, cur.e_inf, cur.h)
    return StudyResult(config=config, rows=rows)


def run_temporal_study(config: StudyConfig, workers: int | None = None) -> StudyResult:
    if config.kind != "temporal":
        raise ValueError("temporal study needs fixed_h")
    return run_study(config, workers)


def run_spatial_study(config: StudyConfig, workers: int | None = None) -> StudyResult:
    if config.kind != "spatial":
        raise ValueError("spatial study needs fixed_tau")
    return run_study(config, workers)


def _opt(v, fmt: str) -> str:
    return "" if v is None else format(v, fmt)


def study_csv_text(result: StudyResult) -> str:
    lines = [",".join(STUDY_COLUMNS)]
    for r in result.rows:
        lines.append(
            ",".join(
                (
                    format(r.alpha, "g"),
                    format(r.beta, "g"),
                    format(r.tau, ".10g"),
                    format(r.h, ".10g"),
                    _opt(r.e_inf, ".4e"),
                    _opt(r.order, ".4f"),
                    _opt(r.wall_seconds, ".3f"),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_study_csv(result: StudyResult, path) -> Path:
    path = Path(path)
    path.write_text(study_csv_text(result))
    return path


def environment_info() -> dict:
    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
        "workers": _workers(None),
    }


def write_study_json(result: StudyResult, path, extra: dict | None = None) -> Path:
    payload = {
        "study": result.config.to_dict(),
        "environment": environment_info(),
        "roundoff_limited": [
            {"alpha": r.alpha, "beta": r.beta, "tau": r.tau, "h": r.h}
            for r in result.rows
            if r.roundoff_limited
        ],
        "failures": [
            {"alpha": r.alpha, "beta": r.beta, "tau": r.tau, "h": r.h, "error": r.error}
            for r in result.rows
            if r.error
        ],
    }
    if extra:
        payload.update(extra)
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def emit_profile(history: SolutionHistory, mode: str, coordinate: float) -> tuple[np.ndarray, float, float]:
    """Slice the history at a fixed ``x`` or a fixed ``t``.

    The coordinate is snapped to the nearest stored node.

    Returns
    -------
    rows : numpy.ndarray
        ``(t, value)`` pairs for ``mode="fixed-x"``, ``(x, value)`` for
        ``mode="fixed-t"``.
    snapped : float
        The node actually used.
    distance : float
        ``|snapped - coordinate|``.
    """
    if mode == "fixed-x":
        axis = history.x
    elif mode == "fixed-t":
        axis = history.t
    else:
        raise ValueError(f"mode must be 'fixed-x' or 'fixed-t', got {mode!r}")
    lo, hi = float(axis[0]), float(axis[-1])
    span = max(hi - lo, 1.0)
    if not lo - 1e-12 * span <= coordinate <= hi + 1e-12 * span:
        raise ValueError(f"coordinate {coordinate!r} outside [{lo}, {hi}]")
    i = int(np.argmin(np.abs(axis - coordinate)))
    if mode == "fixed-x":
        rows = np.column_stack([history.t, history.levels[:, i]])
    else:
        rows = np.column_stack([history.x, history.levels[i]])
    return rows, float(axis[i]), float(abs(axis[i] - coordinate))


def write_profile_csv(rows: np.ndarray, mode: str, path) -> Path:
    head = "t,value" if mode == "fixed-x" else "x,value"
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(head + "\n")
        for a, b in rows:
            fh.write(f"{format(float(a), '.17g')},{format(float(b), '.17g')}\n")
    return path
