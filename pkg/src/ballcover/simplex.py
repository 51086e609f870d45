"""Dense two-phase tableau simplex for small inequality-form LPs.

Solves   maximize c.x   subject to   A x <= b,  x >= 0.

Bland's smallest-index rule is used for both the entering and the leaving
choice, which rules out cycling on degenerate instances; an iteration cap
of 50 * (rows + columns) backstops numerical stalls.  Rows with negative
right-hand sides get artificial variables and a phase-1 feasibility solve.
Everything is dense numpy; intended for desk-scale problems, not large or
sparse ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = ["LPStatus", "LPResult", "solve_lp"]

_PIVOT_TOL = 1e-9


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: np.ndarray | None
    objective: float | None
    iterations: int


def _pivot(tableau: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    pivot_row = tableau[row] / tableau[row, col]
    tableau -= np.outer(tableau[:, col], pivot_row)
    tableau[row] = pivot_row
    basis[row] = col


def _bland_iterate(tableau, basis, candidate_cols, budget, tol):
    """Run Bland pivots until optimal or unbounded, within an iteration budget.

    Returns (status, iterations_used); ITERATION_LIMIT means the budget ran
    out with improving columns still present.
    """
    used = 0
    while True:
        objective_row = tableau[-1, candidate_cols]
        improving = np.where(objective_row < -tol)[0]
        if improving.size == 0:
            return LPStatus.OPTIMAL, used
        if used >= budget:
            return LPStatus.ITERATION_LIMIT, used
        col = int(candidate_cols[improving[0]])
        column = tableau[:-1, col]
        eligible = np.where(column > tol)[0]
        if eligible.size == 0:
            return LPStatus.UNBOUNDED, used
        ratios = tableau[eligible, -1] / column[eligible]
        best = float(ratios.min())
        ties = eligible[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(ties[np.argmin(basis[ties])])
        _pivot(tableau, basis, row, col)
        used += 1


def solve_lp(c, A, b, *, tol: float = _PIVOT_TOL, max_iterations: int | None = None) -> LPResult:
    """Maximize c.x subject to A x <= b and x >= 0."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.size == 0:
        A = A.reshape(0, c.size)
    if c.ndim != 1 or A.ndim != 2 or A.shape[1] != c.size or b.shape != (A.shape[0],):
        raise ValueError(f"incompatible shapes: c {c.shape}, A {A.shape}, b {b.shape}")
    m, n = A.shape

    flip = b < 0
    rows = np.where(flip[:, np.newaxis], -A, A)
    rhs = np.where(flip, -b, b)
    art_rows = np.where(flip)[0]
    n_art = int(art_rows.size)
    n_cols = n + m + n_art
    if max_iterations is None:
        max_iterations = 50 * (m + n_cols)

    tableau = np.zeros((m + 1, n_cols + 1))
    tableau[:m, :n] = rows
    tableau[:m, n : n + m] = np.diag(np.where(flip, -1.0, 1.0))
    for j, i in enumerate(art_rows):
        tableau[i, n + m + j] = 1.0
    tableau[:m, -1] = rhs
    basis = n + np.arange(m)
    basis[art_rows] = n + m + np.arange(n_art)
    structural_cols = np.arange(n + m)

    iterations = 0
    if n_art:
        # Phase 1: maximize -(sum of artificials); feasible iff it reaches 0.
        # Objective row starts as +1 on artificial columns (the z - c form
        # for cost -1), then basic artificial rows are priced out.
        tableau[-1, :] = 0.0
        tableau[-1, n + m : n + m + n_art] = 1.0
        for i in art_rows:
            tableau[-1, :] -= tableau[i, :]
        # Artificials never re-enter once they leave the basis.
        status, used = _bland_iterate(tableau, basis, structural_cols, max_iterations, tol)
        iterations += used
        if status is LPStatus.UNBOUNDED:
            raise RuntimeError("phase-1 objective cannot be unbounded; numerical breakdown")
        if status is LPStatus.ITERATION_LIMIT:
            return LPResult(LPStatus.ITERATION_LIMIT, None, None, iterations)
        if tableau[-1, -1] < -tol * max(1.0, float(np.abs(rhs).max(initial=0.0))):
            return LPResult(LPStatus.INFEASIBLE, None, None, iterations)
        # Drive any artificial still basic (at value 0) out of the basis.
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] < n + m:
                continue
            pivot_candidates = np.where(np.abs(tableau[i, : n + m]) > tol)[0]
            if pivot_candidates.size:
                _pivot(tableau, basis, i, int(pivot_candidates[0]))
            else:
                keep[i] = False  # redundant constraint row
        if not np.all(keep):
            tableau = np.vstack([tableau[:m][keep], tableau[-1:]])
            basis = basis[keep]
            m = int(keep.sum())
        # Drop artificial columns entirely.
        tableau = np.hstack([tableau[:, : n + m], tableau[:, -1:]])

    # Phase 2 objective row: start from -c and price out the basic columns.
    cost = np.zeros(n + m)
    cost[:n] = c
    tableau[-1, :-1] = -cost
    tableau[-1, -1] = 0.0
    for i in range(m):
        coeff = cost[basis[i]]
        if coeff != 0.0:
            tableau[-1, :] += coeff * tableau[i, :]
    status, used = _bland_iterate(
        tableau, basis, structural_cols, max_iterations - iterations, tol
    )
    iterations += used
    if status is not LPStatus.OPTIMAL:
        return LPResult(status, None, None, iterations)

    full = np.zeros(n + m)
    full[basis] = tableau[:m, -1]
    x = np.where(np.abs(full[:n]) < 1e-12, 0.0, full[:n])
    x = np.maximum(x, 0.0)
    return LPResult(LPStatus.OPTIMAL, x, float(c @ x), iterations)
