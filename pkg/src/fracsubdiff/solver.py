"""Time stepping for the sixth- and eighth-order compact schemes.

Each step solves

    (A - g0 B) U^{k+1} = (A + g1 B) U^k + sum_{l=2}^{k+1} g_l B U^{k+1-l} + tau A F^k + C_k

where ``A, B`` are the compact stencils of the chosen scheme, ``g_l`` the
combined fractional weights and ``F^k`` the source at ``t_{k+1/2}``. The
boundary vector ``C_k`` is never built explicitly: every level is stored on
an extended grid that carries the ghost nodes, and the stencils act on that
extended vector directly.

Ghost nodes are handled by one of two policies:

``extrapolate``
    Ghost values come from the one-sided polynomial extrapolation formulas
    (degree 5 for the sixth-order scheme, degree 7 for the eighth-order one).
    On the new level they are substituted into the first and last rows, so the
    left-hand matrix widens near the boundaries but the step stays implicit.
``exact``
    Ghost values are taken from the problem's exact solution. Only available
    for problems that ship one.
"""

from __future__ import annotations

import enum
import json
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.linalg import lapack

from .fracweights import CombinedWeights, combined_weights
from .operators import A6, A8, B6, B8, CompactStencil
from .problem import ProblemSpec, validate

__all__ = [
    "SchemeKind",
    "GhostPolicy",
    "SingularSystemError",
    "BandedSystem",
    "SolutionHistory",
    "CompactSolver",
    "MIN_INTERVALS",
    "ghost_extrapolate",
    "extension_matrix",
    "assemble_lhs",
    "assemble_rhs",
    "solve",
    "write_solution_csv",
    "write_levels_csv",
    "write_metadata",
]

MIN_INTERVALS = 12


class SchemeKind(enum.Enum):
    COMPACT6 = "compact6"
    COMPACT8 = "compact8"

    @classmethod
    def parse(cls, value) -> SchemeKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown scheme {value!r}; expected compact6 or compact8") from None

    @property
    def stencils(self) -> tuple[CompactStencil, CompactStencil]:
        return (A6, B6) if self is SchemeKind.COMPACT6 else (A8, B8)

    @property
    def ghosts(self) -> int:
        """Ghost nodes needed on each side of the grid."""
        return 1 if self is SchemeKind.COMPACT6 else 2

    @property
    def extrapolation(self) -> tuple[tuple[int, ...], ...]:
        """Coefficients on ``u_0, u_1, ...`` for the ghosts at distance 1, 2, ..."""
        return _EXTRAPOLATION[self]


_EXTRAPOLATION = {
    SchemeKind.COMPACT6: ((6, -15, 20, -15, 6, -1),),
    SchemeKind.COMPACT8: (
        (8, -28, 56, -70, 56, -28, 8, -1),
        (36, -168, 378, -504, 420, -216, 63, -8),
    ),
}


class GhostPolicy(enum.Enum):
    EXTRAPOLATE = "extrapolate"
    EXACT = "exact"


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(f"left-hand matrix is singular: zero pivot at row {pivot}")


def ghost_extrapolate(level, side: str, scheme) -> np.ndarray:
    """Ghost values next to one boundary, nearest ghost first.

    For the left side this returns ``[u_{-1}]`` (sixth order) or
    ``[u_{-1}, u_{-2}]`` (eighth order); the right side mirrors it.
    """
    scheme = SchemeKind.parse(scheme)
    level = np.asarray(level, dtype=np.float64)
    if level.ndim != 1 or level.size < 8:
        raise ValueError("ghost extrapolation needs a level with at least 8 points")
    if side == "left":
        src = level
    elif side == "right":
        src = level[::-1]
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return np.array([np.dot(np.asarray(c, dtype=np.float64), src[: len(c)]) for c in scheme.extrapolation])


def extension_matrix(scheme, M: int, ghosts=GhostPolicy.EXTRAPOLATE) -> sparse.csr_matrix:
    """Sparse map from ``u_0..u_M`` to the extended vector ``u_{-g}..u_{M+g}``.

    Under the ``exact`` policy the ghost rows are zero: the ghost values are
    then data, not functions of the unknowns.
    """
    scheme = SchemeKind.parse(scheme)
    ghosts = GhostPolicy(ghosts)
    g = scheme.ghosts
    E = sparse.lil_matrix((M + 1 + 2 * g, M + 1))
    for i in range(M + 1):
        E[g + i, i] = 1.0
    if ghosts is GhostPolicy.EXTRAPOLATE:
        for q, coeffs in enumerate(scheme.extrapolation, start=1):
            for m, c in enumerate(coeffs):
                E[g - q, m] = c
                E[g + M + q, M - m] = c
    return E.tocsr()


def _stencil_matrix(s: CompactStencil, M: int, g: int) -> sparse.csr_matrix:
    # row i is interior node j = i + 1, acting on the extended vector
    row = s.row
    return sparse.diags(list(row), list(range(row.size)), shape=(M - 1, M + 1 + 2 * g), format="csr")


@dataclass
class BandedSystem:
    """Banded matrix with its LAPACK partial-pivoting LU factors.

    ``band`` holds the unfactored matrix in LAPACK band layout
    (``band[ku + i - j, j] = a[i, j]``); ``lu`` and ``pivots`` are the
    ``dgbtrf`` output.
    """

    dimension: int
    kl: int
    ku: int
    band: np.ndarray = field(repr=False)
    lu: np.ndarray = field(repr=False)
    pivots: np.ndarray = field(repr=False)

    @property
    def half_bandwidth_effective(self) -> int:
        return max(self.kl, self.ku)

    @classmethod
    def from_matrix(cls, a) -> BandedSystem:
        a = sparse.coo_matrix(a)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError("matrix must be square")
        keep = a.data != 0.0
        rows, cols, vals = a.row[keep], a.col[keep], a.data[keep]
        kl = int(max(0, np.max(rows - cols, initial=0)))
        ku = int(max(0, np.max(cols - rows, initial=0)))
        band = np.zeros((kl + ku + 1, n))
        np.add.at(band, (ku + rows - cols, cols), vals)
        ab = np.zeros((2 * kl + ku + 1, n))
        ab[kl:, :] = band
        lu, piv, info = lapack.dgbtrf(ab, kl, ku)
        if info < 0:
            raise ValueError(f"dgbtrf: illegal argument {-info}")
        if info > 0:
            raise SingularSystemError(info - 1)
        return cls(dimension=n, kl=kl, ku=ku, band=band, lu=lu, pivots=piv)

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=np.float64)
        x, info = lapack.dgbtrs(self.lu, self.kl, self.ku, b, self.pivots)
        if info != 0:
            raise ValueError(f"dgbtrs failed with info={info}")
        return x

    def dense(self) -> np.ndarray:
        n, kl, ku = self.dimension, self.kl, self.ku
        out = np.zeros((n, n))
        for j in range(n):
            lo, hi = max(0, j - ku), min(n, j + kl + 1)
            out[lo:hi, j] = self.band[ku + np.arange(lo, hi) - j, j]
        return out

    def reconstruct(self) -> np.ndarray:
        """Multiply the stored factors back together (dense).

        ``dgbtrf`` leaves ``L`` as a sequence of elementary transforms with
        interleaved row swaps, so the product is rebuilt from ``U`` by applying
        them in reverse.
        """
        n, kl, ku = self.dimension, self.kl, self.ku
        top = kl + ku
        X = np.zeros((n, n))
        for j in range(n):
            lo = max(0, j - top)
            X[lo : j + 1, j] = self.lu[top + np.arange(lo, j + 1) - j, j]
        for j in range(n - 1, -1, -1):
            hi = min(n, j + kl + 1)
            if hi > j + 1:
                mult = self.lu[top + 1 : top + 1 + hi - j - 1, j]
                X[j + 1 : hi, :] += np.outer(mult, X[j, :])
            # scipy's wrapper returns 0-based pivot indices
            p = self.pivots[j]
            if p != j:
                X[[j, p], :] = X[[p, j], :]
        return X

    def factor_residual(self) -> float:
        """``||reconstructed - original||_inf / ||original||_inf``."""
        a = self.dense()
        return float(np.linalg.norm(self.reconstruct() - a, np.inf) / np.linalg.norm(a, np.inf))


def _full_operator(scheme: SchemeKind, M: int, g0: float, ghosts: GhostPolicy) -> sparse.csr_matrix:
    a, b = scheme.stencils
    g = scheme.ghosts
    S = _stencil_matrix(a, M, g) - g0 * _stencil_matrix(b, M, g)
    return (S @ extension_matrix(scheme, M, ghosts)).tocsr()


def assemble_lhs(scheme, M: int, g0_combined: float, ghosts=GhostPolicy.EXTRAPOLATE) -> BandedSystem:
    """Factor the time-independent matrix ``A - g0 B`` on the interior unknowns.

    Under the ``extrapolate`` policy the first/last rows absorb the new-level
    ghost formulas, which widens them to at most six entries off the diagonal.
    """
    scheme = SchemeKind.parse(scheme)
    if M < MIN_INTERVALS:
        raise ValueError(f"M must be at least {MIN_INTERVALS}, got {M}")
    if not g0_combined > 0.0:
        raise ValueError(f"g0 must be positive, got {g0_combined!r}")
    full = _full_operator(scheme, M, g0_combined, GhostPolicy(ghosts))
    return BandedSystem.from_matrix(full[:, 1:M])


@dataclass
class SolutionHistory:
    """All computed levels ``U^0..U^k`` including the boundary entries."""

    x: np.ndarray
    tau: float
    h: float
    levels: np.ndarray
    scheme: SchemeKind
    ghosts: GhostPolicy
    alpha: float
    beta: float
    problem: str = "custom"
    wall_seconds: float = 0.0

    @property
    def k(self) -> int:
        return self.levels.shape[0] - 1

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.k + 1) * self.tau

    @property
    def M(self) -> int:
        return self.x.size - 1


class _Grid:
    """Extended grid bookkeeping shared by the solver and :func:`assemble_rhs`."""

    def __init__(self, spec: ProblemSpec, scheme: SchemeKind, M: int, ghosts: GhostPolicy):
        if ghosts is GhostPolicy.EXACT and spec.exact is None:
            raise ValueError("ghost policy 'exact' needs a problem with an exact solution")
        self.spec = spec
        self.scheme = scheme
        self.ghosts = ghosts
        self.M = M
        self.g = scheme.ghosts
        L = spec.length
        self.h = L / M
        self.x = np.arange(M + 1) * L / M
        self.xe = np.arange(-self.g, M + self.g + 1) * L / M
        self.x_ghost_left = self.xe[: self.g][::-1]
        self.x_ghost_right = self.xe[M + self.g + 1 :]
        a, b = scheme.stencils
        self.a_row = a.row
        self.b_row = b.row

    def extend(self, u: np.ndarray, t: float) -> np.ndarray:
        g, M = self.g, self.M
        out = np.empty(M + 1 + 2 * g)
        out[g : g + M + 1] = u
        if self.ghosts is GhostPolicy.EXTRAPOLATE:
            out[:g] = ghost_extrapolate(u, "left", self.scheme)[::-1]
            out[g + M + 1 :] = ghost_extrapolate(u, "right", self.scheme)
        else:
            out[:g] = self.spec.exact(self.x_ghost_left, t)[::-1]
            out[g + M + 1 :] = self.spec.exact(self.x_ghost_right, t)
        return out

    def known_part(self, left: float, right: float, t: float) -> np.ndarray:
        """Extended new-level vector with every interior unknown set to zero."""
        u = np.zeros(self.M + 1)
        u[0], u[-1] = left, right
        return self.extend(u, t)

    def apply(self, row: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.convolve(v, row, mode="valid")


def _rhs(grid: _Grid, ext: np.ndarray, weights: CombinedWeights, k: int, tau: float) -> np.ndarray:
    """Right-hand side for the step ``k -> k+1`` from extended levels ``ext[0..k]``."""
    g = weights.values
    if g.size < k + 2:
        raise ValueError(f"weight table holds {g.size} entries, step {k} needs {k + 2}")
    spec = grid.spec
    acc = g[1] * ext[k]
    if k >= 1:
        acc = acc + g[2 : k + 2] @ ext[k - 1 :: -1]
    src = spec.source(grid.xe, (k + 0.5) * tau)
    t_new = (k + 1) * tau
    known = grid.known_part(
        float(spec.boundary_left(t_new)), float(spec.boundary_right(t_new)), t_new
    )
    a, b = grid.a_row, grid.b_row
    return (
        grid.apply(a, ext[k])
        + grid.apply(b, acc)
        + tau * grid.apply(a, src)
        - (grid.apply(a, known) - g[0] * grid.apply(b, known))
    )


def assemble_rhs(
    scheme,
    history: SolutionHistory | Sequence,
    weights: CombinedWeights,
    spec: ProblemSpec,
    k: int,
    ghosts=GhostPolicy.EXTRAPOLATE,
    tau: float | None = None,
) -> np.ndarray:
    """Right-hand side of the step ``k -> k+1`` given stored levels ``0..k``.

    ``history`` is a :class:`SolutionHistory` or a sequence of full levels
    ``u_0..u_M``; for a bare sequence ``tau`` must be given.
    """
    scheme = SchemeKind.parse(scheme)
    ghosts = GhostPolicy(ghosts)
    if isinstance(history, SolutionHistory):
        levels, tau = history.levels, history.tau
    else:
        levels = np.asarray(history, dtype=np.float64)
        if tau is None:
            raise ValueError("tau is required when history is a plain array")
    if levels.shape[0] < k + 1:
        raise ValueError(f"history holds {levels.shape[0]} levels, step {k} needs {k + 1}")
    grid = _Grid(spec, scheme, levels.shape[1] - 1, ghosts)
    ext = np.array([grid.extend(levels[i], i * tau) for i in range(k + 1)])
    return _rhs(grid, ext, weights, k, tau)


class CompactSolver:
    """Stateful stepper for one problem, scheme and grid.

    The left-hand matrix is factored once at construction; :meth:`step`
    appends one level per call.

    Parameters
    ----------
    spec : ProblemSpec
    scheme : SchemeKind or str
    M, N : int
        Number of spatial intervals and time steps.
    ghosts : GhostPolicy or str
        Ghost-node treatment; ``"extrapolate"`` by default.
    initial_level : array_like, optional
        Overrides sampling ``spec.initial`` on the grid.
    """

    def __init__(self, spec: ProblemSpec, scheme, M: int, N: int, ghosts=GhostPolicy.EXTRAPOLATE, initial_level=None):
        validate(spec)
        self.spec = spec
        self.scheme = SchemeKind.parse(scheme)
        self.ghosts = GhostPolicy(ghosts)
        if M < MIN_INTERVALS:
            raise ValueError(f"M must be at least {MIN_INTERVALS}, got {M}")
        if N < 0:
            raise ValueError(f"N must be non-negative, got {N}")
        self.M, self.N = int(M), int(N)
        self.grid = _Grid(spec, self.scheme, self.M, self.ghosts)
        self.h = self.grid.h
        self.tau = spec.horizon / N if N else spec.horizon
        self.weights = combined_weights(
            spec.alpha, spec.beta, spec.diff_a, spec.diff_b, self.tau, self.h, N + 1
        )
        self.lhs = assemble_lhs(self.scheme, self.M, float(self.weights.values[0]), self.ghosts)

        if initial_level is None:
            u0 = np.asarray(spec.initial(self.grid.x), dtype=np.float64) * np.ones(M + 1)
        else:
            u0 = np.array(initial_level, dtype=np.float64)
            if u0.shape != (M + 1,):
                raise ValueError(f"initial level must have {M + 1} entries")
        self._levels = np.zeros((N + 1, M + 1))
        self._ext = np.zeros((N + 1, M + 1 + 2 * self.grid.g))
        self._levels[0] = u0
        self._ext[0] = self.grid.extend(u0, 0.0)
        self.k = 0
        self.wall_seconds = 0.0

    def rhs(self, k: int | None = None) -> np.ndarray:
        k = self.k if k is None else k
        if k > self.k:
            raise ValueError(f"level {k} not computed yet")
        return _rhs(self.grid, self._ext, self.weights, k, self.tau)

    def step(self) -> CompactSolver:
        if self.k >= self.N:
            raise RuntimeError("all time steps already taken")
        k = self.k
        r = _rhs(self.grid, self._ext, self.weights, k, self.tau)
        t_new = (k + 1) * self.tau
        u = self._levels[k + 1]
        u[0] = float(self.spec.boundary_left(t_new))
        u[-1] = float(self.spec.boundary_right(t_new))
        u[1:-1] = self.lhs.solve(r)
        self._ext[k + 1] = self.grid.extend(u, t_new)
        self.k = k + 1
        return self

    def run(self) -> SolutionHistory:
        start = time.perf_counter()
        while self.k < self.N:
            self.step()
        self.wall_seconds += time.perf_counter() - start
        return self.history()

    def history(self) -> SolutionHistory:
        return SolutionHistory(
            x=self.grid.x,
            tau=self.tau,
            h=self.h,
            levels=self._levels[: self.k + 1],
            scheme=self.scheme,
            ghosts=self.ghosts,
            alpha=self.spec.alpha,
            beta=self.spec.beta,
            problem=self.spec.name,
            wall_seconds=self.wall_seconds,
        )


def solve(spec: ProblemSpec, scheme, M: int, N: int, ghosts=GhostPolicy.EXTRAPOLATE) -> SolutionHistory:
    """Run ``N`` steps on ``M`` intervals and return every level."""
    return CompactSolver(spec, scheme, M, N, ghosts).run()


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_solution_csv(history: SolutionHistory, path) -> Path:
    """Long format: one ``x,t,value`` row per grid node and level."""
    path = Path(path)
    t = history.t
    with path.open("w", newline="") as fh:
        fh.write("x,t,value\n")
        for k in range(history.k + 1):
            tk = _fmt(t[k])
            for xj, v in zip(history.x, history.levels[k]):
                fh.write(f"{_fmt(xj)},{tk},{_fmt(v)}\n")
    return path


def write_levels_csv(history: SolutionHistory, directory) -> list[Path]:
    """One ``x,value`` file per level, named ``level_00000.csv`` and so on."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for k in range(history.k + 1):
        p = directory / f"level_{k:05d}.csv"
        with p.open("w", newline="") as fh:
            fh.write("x,value\n")
            for xj, v in zip(history.x, history.levels[k]):
                fh.write(f"{_fmt(xj)},{_fmt(v)}\n")
        out.append(p)
    return out


def write_metadata(history: SolutionHistory, path, e_inf: float | None = None, extra: dict | None = None) -> Path:
    meta = {
        "scheme": history.scheme.value,
        "ghosts": history.ghosts.value,
        "problem": history.problem,
        "alpha": history.alpha,
        "beta": history.beta,
        "tau": history.tau,
        "h": history.h,
        "M": history.M,
        "N": history.k,
        "e_inf": e_inf,
        "wall_seconds": history.wall_seconds,
    }
    if extra:
        meta.update(extra)
    path = Path(path)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path
