"""Dense two-phase revised simplex for box-constrained linear programs.

Solves  minimize c.z  subject to  a_r.z (<=|=|>=) b_r  and  l <= z <= u,
with infinite bounds allowed.  Nonbasic variables sit at either their lower
or their upper bound (free variables sit at zero), which keeps vertices of
the box polytope representable without splitting variables.

Implementation notes:

* Every row is converted to an equality by a slack column whose bounds encode
  the relation; an artificial column per row gives the phase-1 starting basis.
* Phase 1 minimises the total artificial mass.  A positive optimum is the
  infeasibility certificate (reported via ``objective_value``).
* Pricing is by largest reduced-cost violation; after a stall of
  ``2 * n_rows`` consecutive degenerate pivots the pivot rule switches to
  smallest-index (Bland) until a nondegenerate step is made, which breaks
  cycling in practice.
* The basis is refactorised from scratch every iteration via LAPACK solves;
  at these problem shapes (tens of rows, possibly thousands of columns) the
  pricing pass dominates, so no incremental inverse is kept.

Everything is deterministic for a fixed problem and options: ties are broken
by first index.  Alternate optima may return different vertices; the
objective value is the reproducible quantity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NumericalBreakdown

__all__ = [
    "Relation",
    "LpRow",
    "LpProblem",
    "SolverOptions",
    "SolveStatus",
    "LpSolution",
    "solve_lp",
]


class Relation(enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="


def _as_relation(rel) -> Relation:
    if isinstance(rel, Relation):
        return rel
    try:
        return Relation(rel)
    except ValueError:
        raise DimensionMismatch(f"unknown row relation {rel!r}") from None


@dataclass(frozen=True)
class LpRow:
    coeffs: np.ndarray
    relation: Relation
    rhs: float

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float).ravel())
        object.__setattr__(self, "relation", _as_relation(self.relation))
        object.__setattr__(self, "rhs", float(self.rhs))


@dataclass(frozen=True)
class LpProblem:
    """minimize ``objective . z`` over rows and the box ``lower <= z <= upper``."""

    objective: np.ndarray
    rows: tuple[LpRow, ...]
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        if c.size < 1:
            raise DimensionMismatch("objective must have at least one entry")
        if not np.all(np.isfinite(c)):
            raise DimensionMismatch("objective entries must be finite")
        rows = tuple(
            r if isinstance(r, LpRow) else LpRow(*r) for r in self.rows
        )
        for i, r in enumerate(rows):
            if r.coeffs.size != c.size:
                raise DimensionMismatch(
                    f"row {i} has {r.coeffs.size} coefficients for {c.size} variables"
                )
            if not np.all(np.isfinite(r.coeffs)) or not np.isfinite(r.rhs):
                raise DimensionMismatch(f"row {i} has non-finite entries")
        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), c.shape).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), c.shape).copy()
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise DimensionMismatch("bounds may be infinite but not NaN")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class SolverOptions:
    feasibility_tolerance: float = 1e-9
    optimality_tolerance: float = 1e-9
    max_iterations: int | None = None  # default 50 * (n_vars + n_rows)


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class LpSolution:
    """Solver outcome.

    ``z`` is populated only for Optimal.  For Infeasible, ``objective_value``
    holds the phase-1 certificate: the smallest achievable total constraint
    violation.  ``max_residual`` is the worst row violation at the final
    iterate.
    """

    status: SolveStatus
    z: np.ndarray | None
    objective_value: float
    iterations: int
    max_residual: float


# nonbasic/basic variable states
_AT_LOWER = 0
_AT_UPPER = 1
_FREE = 2
_BASIC = 3

_PIVOT_TOL = 1e-10
_DEGEN_TOL = 1e-11
_RATIO_TIE = 1e-9


def solve_lp(problem: LpProblem, options: SolverOptions | None = None) -> LpSolution:
    """Solve the program, classifying the outcome rather than raising for it.

    Raises :class:`NumericalBreakdown` only when the basis becomes singular
    beyond repair, which is distinct from genuine infeasibility.
    """
    opts = options or SolverOptions()
    if np.any(problem.lower > problem.upper):
        return LpSolution(SolveStatus.INFEASIBLE, None, float("inf"), 0, float("inf"))
    if problem.n_rows == 0:
        return _solve_box_only(problem)
    return _Simplex(problem, opts).run()


def _solve_box_only(problem: LpProblem) -> LpSolution:
    c, l, u = problem.objective, problem.lower, problem.upper
    z = np.empty_like(c)
    for j in range(c.size):
        if c[j] > 0.0:
            if not np.isfinite(l[j]):
                return LpSolution(SolveStatus.UNBOUNDED, None, float("-inf"), 0, 0.0)
            z[j] = l[j]
        elif c[j] < 0.0:
            if not np.isfinite(u[j]):
                return LpSolution(SolveStatus.UNBOUNDED, None, float("-inf"), 0, 0.0)
            z[j] = u[j]
        else:
            z[j] = l[j] if np.isfinite(l[j]) else (u[j] if np.isfinite(u[j]) else 0.0)
    return LpSolution(SolveStatus.OPTIMAL, z, float(np.dot(c, z)), 0, 0.0)


class _Simplex:
    def __init__(self, problem: LpProblem, opts: SolverOptions):
        self.problem = problem
        self.opts = opts
        n, m = problem.n_vars, problem.n_rows
        self.n_struct = n
        self.m = m
        self.slack0 = n
        self.art0 = n + m
        total = n + 2 * m

        A = np.zeros((m, total))
        for r, row in enumerate(problem.rows):
            A[r, :n] = row.coeffs
        A[:, self.slack0:self.art0] = np.eye(m)
        self.b = np.array([row.rhs for row in problem.rows], dtype=float)

        lower = np.full(total, -np.inf)
        upper = np.full(total, np.inf)
        lower[:n] = problem.lower
        upper[:n] = problem.upper
        for r, row in enumerate(problem.rows):
            j = self.slack0 + r
            if row.relation is Relation.LE:
                lower[j], upper[j] = 0.0, np.inf
            elif row.relation is Relation.GE:
                lower[j], upper[j] = -np.inf, 0.0
            else:
                lower[j], upper[j] = 0.0, 0.0
        lower[self.art0:] = 0.0
        upper[self.art0:] = np.inf

        self.A = A
        self.lower = lower
        self.upper = upper
        self.total = total

        self.c_real = np.zeros(total)
        self.c_real[:n] = problem.objective

        self.state = np.empty(total, dtype=np.int8)
        self.x = np.zeros(total)
        for j in range(total):
            lo, hi = lower[j], upper[j]
            if np.isfinite(lo) and np.isfinite(hi):
                at_lower = self.c_real[j] >= 0.0
                self.state[j] = _AT_LOWER if at_lower else _AT_UPPER
                self.x[j] = lo if at_lower else hi
            elif np.isfinite(lo):
                self.state[j], self.x[j] = _AT_LOWER, lo
            elif np.isfinite(hi):
                self.state[j], self.x[j] = _AT_UPPER, hi
            else:
                self.state[j], self.x[j] = _FREE, 0.0

        # artificial basis: flip column signs so every artificial starts >= 0
        resid = self.b - A[:, :self.art0] @ self.x[:self.art0]
        signs = np.where(resid < 0.0, -1.0, 1.0)
        self.A[:, self.art0:] = np.diag(signs)
        self.basis = np.arange(self.art0, total)
        self.state[self.basis] = _BASIC
        self.x[self.basis] = np.abs(resid)

        max_it = opts.max_iterations
        self.max_iterations = max_it if max_it is not None else 50 * (n + m)
        self.iterations = 0
        self.feas_scale = 1.0 + float(np.max(np.abs(self.b))) if m else 1.0

    # -- linear algebra helpers -------------------------------------------

    def _solve_basis(self, rhs: np.ndarray, transpose: bool = False) -> np.ndarray:
        B = self.A[:, self.basis]
        try:
            return np.linalg.solve(B.T if transpose else B, rhs)
        except np.linalg.LinAlgError:
            raise NumericalBreakdown("singular basis matrix") from None

    def _refresh_basics(self) -> None:
        """Recompute basic values from the nonbasic point to shed drift."""
        x_nb = self.x.copy()
        x_nb[self.basis] = 0.0
        rhs = self.b - self.A @ x_nb
        self.x[self.basis] = self._solve_basis(rhs)

    # -- pivoting ----------------------------------------------------------

    def _movable(self) -> np.ndarray:
        gap = self.upper - self.lower
        return (self.state != _BASIC) & ~(gap <= 0.0)

    def _iterate(self, c: np.ndarray, phase_one: bool) -> SolveStatus:
        tau = self.opts.optimality_tolerance * np.maximum(1.0, np.abs(c))
        stall = 0
        bland = False
        since_refresh = 0
        while True:
            if self.iterations >= self.max_iterations:
                return SolveStatus.ITERATION_LIMIT
            self.iterations += 1
            since_refresh += 1
            if since_refresh >= 100:
                self._refresh_basics()
                since_refresh = 0

            y = self._solve_basis(c[self.basis], transpose=True)
            d = c - self.A.T @ y
            movable = self._movable()
            down = movable & (self.state != _AT_UPPER) & (d < -tau)   # increase var
            up = movable & (self.state != _AT_LOWER) & (d > tau)      # decrease var
            eligible = down | up
            if not eligible.any():
                return SolveStatus.OPTIMAL

            if bland:
                e = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                e = int(np.argmax(score))
            sigma = 1.0 if down[e] else -1.0

            w = self._solve_basis(self.A[:, e])
            aw = sigma * w
            xB = self.x[self.basis]
            lB = self.lower[self.basis]
            uB = self.upper[self.basis]

            with np.errstate(divide="ignore", invalid="ignore"):
                t_low = np.where(aw > _PIVOT_TOL, (xB - lB) / aw, np.inf)
                t_high = np.where(aw < -_PIVOT_TOL, (uB - xB) / (-aw), np.inf)
            t_low = np.maximum(t_low, 0.0)
            t_high = np.maximum(t_high, 0.0)
            t_rows = np.minimum(t_low, t_high)

            gap = self.upper[e] - self.lower[e]
            t_own = gap if np.isfinite(gap) and self.state[e] != _FREE else np.inf
            t_block = float(np.min(t_rows))

            if not np.isfinite(min(t_block, t_own)):
                if phase_one:
                    raise NumericalBreakdown("phase-1 objective claims to be unbounded")
                return SolveStatus.UNBOUNDED

            if t_own <= t_block:
                # entering variable runs to its opposite bound; basis unchanged
                t = t_own
                self.x[self.basis] = xB - t * aw
                if self.state[e] == _AT_LOWER:
                    self.state[e] = _AT_UPPER
                    self.x[e] = self.upper[e]
                else:
                    self.state[e] = _AT_LOWER
                    self.x[e] = self.lower[e]
            else:
                cut = t_block + _RATIO_TIE * (1.0 + t_block)
                candidates = np.flatnonzero(t_rows <= cut)
                if candidates.size == 0:
                    raise NumericalBreakdown("ratio test found no pivot row")
                if bland:
                    r = int(candidates[np.argmin(self.basis[candidates])])
                else:
                    r = int(candidates[np.argmax(np.abs(aw[candidates]))])
                t = float(t_rows[r])
                leave = int(self.basis[r])
                to_lower = t_low[r] <= t_high[r]

                self.x[self.basis] = xB - t * aw
                self.x[leave] = lB[r] if to_lower else uB[r]
                self.state[leave] = _AT_LOWER if to_lower else _AT_UPPER
                self.x[e] = self.x[e] + sigma * t
                self.state[e] = _BASIC
                self.basis[r] = e

            if t > _DEGEN_TOL:
                stall = 0
                bland = False
            else:
                stall += 1
                if stall > 2 * self.m:
                    bland = True

    # -- phases ------------------------------------------------------------

    def _drive_out_artificials(self) -> None:
        """Replace basic artificials by structural/slack columns where possible."""
        for r in range(self.m):
            if self.basis[r] < self.art0:
                continue
            unit = np.zeros(self.m)
            unit[r] = 1.0
            u = self._solve_basis(unit, transpose=True)
            v = self.A[:, :self.art0].T @ u
            v[self.state[:self.art0] == _BASIC] = 0.0
            v[(self.upper[:self.art0] - self.lower[:self.art0]) <= 0.0] = 0.0
            j = int(np.argmax(np.abs(v)))
            if abs(v[j]) <= 1e-8:
                continue  # redundant row; artificial stays pinned at zero
            leave = int(self.basis[r])
            self.state[leave] = _AT_LOWER
            self.x[leave] = 0.0
            self.state[j] = _BASIC
            self.basis[r] = j
        self._refresh_basics()

    def run(self) -> LpSolution:
        c_phase1 = np.zeros(self.total)
        c_phase1[self.art0:] = 1.0

        art_mass = float(np.sum(self.x[self.art0:]))
        if art_mass > self.opts.feasibility_tolerance * self.feas_scale:
            status = self._iterate(c_phase1, phase_one=True)
            if status is SolveStatus.ITERATION_LIMIT:
                return self._finish(status)
            art_mass = float(np.sum(np.abs(self.x[self.art0:])))
            if art_mass > self.opts.feasibility_tolerance * self.feas_scale:
                return LpSolution(
                    SolveStatus.INFEASIBLE,
                    None,
                    art_mass,
                    self.iterations,
                    self._max_row_violation(),
                )

        self.upper[self.art0:] = 0.0
        self.x[self.art0:][self.state[self.art0:] != _BASIC] = 0.0
        self._drive_out_artificials()

        status = self._iterate(self.c_real, phase_one=False)
        return self._finish(status)

    def _finish(self, status: SolveStatus) -> LpSolution:
        if status is SolveStatus.OPTIMAL:
            self._refresh_basics()
        z = self.x[:self.n_struct].copy()
        residual = self._max_row_violation()
        if status is SolveStatus.OPTIMAL:
            obj = float(np.dot(self.problem.objective, z))
            return LpSolution(status, z, obj, self.iterations, residual)
        if status is SolveStatus.UNBOUNDED:
            return LpSolution(status, None, float("-inf"), self.iterations, residual)
        obj = float(np.dot(self.problem.objective, z))
        return LpSolution(status, None, obj, self.iterations, residual)

    def _max_row_violation(self) -> float:
        z = self.x[:self.n_struct]
        worst = 0.0
        for row in self.problem.rows:
            lhs = float(np.dot(row.coeffs, z))
            if row.relation is Relation.LE:
                worst = max(worst, lhs - row.rhs)
            elif row.relation is Relation.GE:
                worst = max(worst, row.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - row.rhs))
        return worst
