"""Robust linear programs over union-of-balls uncertainty sets.

A model maximizes ``c . x`` subject to ordinary rows ``a . x <= b`` and
robust rows requiring ``x . u <= b`` for every ``u`` in an
:class:`~ballcover.geometry.UncertaintySet`.  Each robust row is
equivalent to one deterministic constraint per ball center,

    x . center_i + radius * ||x||_*  <=  b,

where ``||.||_*`` is the dual of the ball norm.  For L1 and LINF balls
the dual norm is polyhedral, so the whole model collapses to a single
LP through epigraph variables and is solved exactly.  L2 balls keep a
genuine Euclidean term; those rows are outer-approximated by cutting
planes around the same LP core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DimensionError,
    Norm,
    UncertaintySet,
    dual_achieving_direction,
    dual_norm_eval,
    member,
    worst_case_linear,
)
from .simplex import LPStatus, solve_lp

__all__ = [
    "ModelError",
    "LinearRow",
    "RobustRow",
    "CenterTerm",
    "RobustLinearProgram",
    "SolveReport",
    "reformulate",
    "solve",
    "simplex_solve",
    "pessimize",
    "bundled_example",
]

FEASIBILITY_TOL = 1e-7
CUT_TOL = 1e-7
MAX_CUTS = 500

# The cutting-plane path boxes |x_j| so every relaxation stays bounded;
# a converged iterate pinned to the box is reported as unbounded.  Models
# whose genuine optimum has coordinates near this magnitude are out of
# scope.
_TRUST_BOX = 1e6


class ModelError(ValueError):
    """Raised when the pieces of a robust LP do not fit together."""


def _row_vector(a, length: int | None, what: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ModelError(f"{what} must be a nonempty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{what} must be finite")
    if length is not None and arr.size != length:
        raise ModelError(f"{what} has {arr.size} entries, expected {length}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


def _finite_scalar(b, what: str) -> float:
    value = float(b)
    if not math.isfinite(value):
        raise ModelError(f"{what} must be finite")
    return value


@dataclass(frozen=True)
class LinearRow:
    """One deterministic constraint ``a . x <= b``."""

    a: np.ndarray
    b: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _row_vector(self.a, None, "row coefficients"))
        object.__setattr__(self, "b", _finite_scalar(self.b, "row bound"))


@dataclass(frozen=True)
class RobustRow:
    """One robust constraint ``x . u <= b`` for all u in the set."""

    uncertainty_set: UncertaintySet
    b: float

    def __post_init__(self) -> None:
        if not isinstance(self.uncertainty_set, UncertaintySet):
            raise ModelError("robust row needs an UncertaintySet")
        object.__setattr__(self, "b", _finite_scalar(self.b, "row bound"))


@dataclass(frozen=True)
class CenterTerm:
    """One reformulated constraint ``x . center + radius * ||x||_* <= bound``.

    ``norm`` is the ball norm of the originating set; the term applies its
    dual to ``x``.  With ``radius == 0`` the term is an ordinary linear row.
    """

    center: np.ndarray
    radius: float
    norm: Norm
    bound: float

    @property
    def is_linear(self) -> bool:
        return self.radius == 0.0

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != self.center.shape:
            raise DimensionError(
                f"x has shape {x.shape}, expected {self.center.shape}"
            )
        return float(self.center @ x) + self.radius * dual_norm_eval(x, self.norm)


def reformulate(row: RobustRow) -> list[CenterTerm]:
    """Expand a robust row into one convex constraint per ball center."""
    if not isinstance(row, RobustRow):
        row = RobustRow(*row)
    uset = row.uncertainty_set
    return [
        CenterTerm(center=c, radius=uset.radius, norm=uset.norm, bound=row.b)
        for c in uset.centers
    ]


def _normalize_bounds(bounds, dim: int):
    if bounds is None:
        return None
    pairs = list(bounds)
    if len(pairs) != dim:
        raise ModelError(f"bounds has {len(pairs)} pairs, expected {dim}")
    out = []
    for j, pair in enumerate(pairs):
        lo, hi = pair
        for name, value in (("lower", lo), ("upper", hi)):
            if value is not None and not math.isfinite(float(value)):
                raise ModelError(f"{name} bound for variable {j} must be finite or None")
        out.append((None if lo is None else float(lo), None if hi is None else float(hi)))
    return tuple(out)


@dataclass(frozen=True)
class RobustLinearProgram:
    """Maximize ``objective . x`` under deterministic and robust rows.

    ``bounds`` is None (all variables free) or one ``(lower, upper)`` pair
    per variable with None marking an absent side.
    """

    objective: np.ndarray
    deterministic_rows: tuple[LinearRow, ...] = ()
    robust_rows: tuple[RobustRow, ...] = ()
    bounds: tuple[tuple[float | None, float | None], ...] | None = None

    def __post_init__(self) -> None:
        obj = _row_vector(self.objective, None, "objective")
        object.__setattr__(self, "objective", obj)
        det = tuple(
            row if isinstance(row, LinearRow) else LinearRow(*row)
            for row in self.deterministic_rows
        )
        for row in det:
            if row.a.size != obj.size:
                raise ModelError(
                    f"deterministic row is {row.a.size}-D, model is {obj.size}-D"
                )
        object.__setattr__(self, "deterministic_rows", det)
        rob = tuple(
            row if isinstance(row, RobustRow) else RobustRow(*row)
            for row in self.robust_rows
        )
        for row in rob:
            if row.uncertainty_set.dimension != obj.size:
                raise ModelError(
                    f"robust row set is {row.uncertainty_set.dimension}-D, "
                    f"model is {obj.size}-D"
                )
        object.__setattr__(self, "robust_rows", rob)
        object.__setattr__(self, "bounds", _normalize_bounds(self.bounds, obj.size))

    @property
    def num_variables(self) -> int:
        return int(self.objective.size)

    def to_dict(self) -> dict:
        return {
            "objective": [float(v) for v in self.objective],
            "rows": [
                {"a": [float(v) for v in row.a], "b": row.b}
                for row in self.deterministic_rows
            ],
            "robust_rows": [
                {"set": row.uncertainty_set.to_dict(), "b": row.b}
                for row in self.robust_rows
            ],
            "bounds": None
            if self.bounds is None
            else [[lo, hi] for lo, hi in self.bounds],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RobustLinearProgram":
        bounds = data.get("bounds")
        return cls(
            objective=data["objective"],
            deterministic_rows=tuple(
                LinearRow(row["a"], row["b"]) for row in data.get("rows", ())
            ),
            robust_rows=tuple(
                RobustRow(UncertaintySet.from_dict(row["set"]), row["b"])
                for row in data.get("robust_rows", ())
            ),
            bounds=None if bounds is None else [tuple(pair) for pair in bounds],
        )


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a robust (or plain) LP solve.

    ``max_violation`` is the largest constraint residual at ``x_star``
    (deterministic rows and robust worst cases alike; negative values mean
    slack) and is 0.0 when no point is reported.  The tolerances and cut
    cap that governed the solve are recorded for reproducibility.
    """

    status: LPStatus
    x_star: np.ndarray | None
    objective_value: float | None
    cuts_added: int
    max_violation: float
    feasibility_tol: float = FEASIBILITY_TOL
    cut_tol: float = CUT_TOL
    max_cuts: int = MAX_CUTS

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "x_star": None if self.x_star is None else [float(v) for v in self.x_star],
            "objective_value": self.objective_value,
            "cuts_added": self.cuts_added,
            "max_violation": self.max_violation,
            "feasibility_tol": self.feasibility_tol,
            "cut_tol": self.cut_tol,
            "max_cuts": self.max_cuts,
        }


@dataclass(frozen=True)
class _VariableMap:
    """Affine change of variables x = matrix @ y + shift with y >= 0.

    ``range_rows`` carries the extra ``y_p <= upper - lower`` rows needed
    by two-sided bounds (indices into y, right-hand sides).
    """

    matrix: np.ndarray
    shift: np.ndarray
    range_rows: tuple[tuple[int, float], ...]

    @property
    def num_columns(self) -> int:
        return self.matrix.shape[1]


def _variable_map(bounds, dim: int) -> _VariableMap:
    entries: list[tuple[int, float]] = []
    shift = np.zeros(dim)
    ranges: list[tuple[int, float]] = []
    for j in range(dim):
        lo, hi = (None, None) if bounds is None else bounds[j]
        if lo is None and hi is None:
            entries.append((j, 1.0))
            entries.append((j, -1.0))
        elif hi is None:
            shift[j] = lo
            entries.append((j, 1.0))
        elif lo is None:
            shift[j] = hi
            entries.append((j, -1.0))
        else:
            shift[j] = lo
            entries.append((j, 1.0))
            ranges.append((len(entries) - 1, hi - lo))
    matrix = np.zeros((dim, len(entries)))
    for p, (j, sign) in enumerate(entries):
        matrix[j, p] = sign
    return _VariableMap(matrix=matrix, shift=shift, range_rows=tuple(ranges))


class _RelaxationBuilder:
    """Accumulates LP rows over the columns [y | epigraph auxiliaries]."""

    def __init__(self, vmap: _VariableMap, num_aux: int) -> None:
        self.vmap = vmap
        self.n_y = vmap.num_columns
        self.n_cols = self.n_y + num_aux
        self.rows: list[np.ndarray] = []
        self.rhs: list[float] = []

    def add_x_row(self, vec: np.ndarray, bound: float, aux=()) -> None:
        """Add ``vec . x + sum(coef * aux_col) <= bound`` rewritten over y."""
        row = np.zeros(self.n_cols)
        row[: self.n_y] = vec @ self.vmap.matrix
        for col, coef in aux:
            row[col] = coef
        self.rows.append(row)
        self.rhs.append(bound - float(vec @ self.vmap.shift))

    def add_y_row(self, col: int, bound: float) -> None:
        row = np.zeros(self.n_cols)
        row[col] = 1.0
        self.rows.append(row)
        self.rhs.append(bound)

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.rows:
            return np.zeros((0, self.n_cols)), np.zeros(0)
        return np.vstack(self.rows), np.asarray(self.rhs)


def _needs_cuts(row: RobustRow) -> bool:
    uset = row.uncertainty_set
    return uset.norm is Norm.L2 and uset.radius > 0.0


def _assemble(rlp: RobustLinearProgram, vmap: _VariableMap) -> _RelaxationBuilder:
    """Base relaxation: exact epigraph blocks for polyhedral-dual rows,
    scenario rows only for rows that will be tightened by cuts."""
    dim = rlp.num_variables
    num_aux = 0
    for row in rlp.robust_rows:
        if _needs_cuts(row) or row.uncertainty_set.radius == 0.0:
            continue
        num_aux += 1 if row.uncertainty_set.norm is Norm.L1 else dim
    builder = _RelaxationBuilder(vmap, num_aux)
    identity = np.eye(dim)

    for row in rlp.deterministic_rows:
        builder.add_x_row(row.a, row.b)
    for col, bound in vmap.range_rows:
        builder.add_y_row(col, bound)

    aux_next = builder.n_y
    for row in rlp.robust_rows:
        uset = row.uncertainty_set
        radius = uset.radius
        if radius == 0.0 or _needs_cuts(row):
            for center in uset.centers:
                builder.add_x_row(center, row.b)
            continue
        if uset.norm is Norm.L1:
            # Dual is the max norm: one auxiliary t with t >= |x_j|.
            t_col = aux_next
            aux_next += 1
            for j in range(dim):
                builder.add_x_row(identity[j], 0.0, aux=[(t_col, -1.0)])
                builder.add_x_row(-identity[j], 0.0, aux=[(t_col, -1.0)])
            for center in uset.centers:
                builder.add_x_row(center, row.b, aux=[(t_col, radius)])
        else:
            # LINF ball, dual is the sum norm: s_j >= |x_j| per coordinate.
            s_cols = list(range(aux_next, aux_next + dim))
            aux_next += dim
            for j in range(dim):
                builder.add_x_row(identity[j], 0.0, aux=[(s_cols[j], -1.0)])
                builder.add_x_row(-identity[j], 0.0, aux=[(s_cols[j], -1.0)])
            for center in uset.centers:
                builder.add_x_row(
                    center, row.b, aux=[(col, radius) for col in s_cols]
                )

    return builder


def _certificate(rlp: RobustLinearProgram, x: np.ndarray) -> float:
    residuals = [float(row.a @ x) - row.b for row in rlp.deterministic_rows]
    residuals += [
        worst_case_linear(row.uncertainty_set, x) - row.b for row in rlp.robust_rows
    ]
    return max(residuals, default=0.0)


def _report(
    status: LPStatus,
    x,
    objective,
    cuts: int,
    violation: float,
    feasibility_tol: float,
    cut_tol: float,
    max_cuts: int,
) -> SolveReport:
    return SolveReport(
        status=status,
        x_star=x,
        objective_value=objective,
        cuts_added=cuts,
        max_violation=violation,
        feasibility_tol=feasibility_tol,
        cut_tol=cut_tol,
        max_cuts=max_cuts,
    )


def solve(
    rlp: RobustLinearProgram,
    *,
    feasibility_tol: float = FEASIBILITY_TOL,
    cut_tol: float = CUT_TOL,
    max_cuts: int = MAX_CUTS,
) -> SolveReport:
    """Solve a robust LP and certify the returned point.

    Rows whose ball norm has a polyhedral dual (L1, LINF) and all
    radius-zero rows are folded exactly into one LP.  L2 rows with a
    positive radius are tightened by cutting planes: each round adds, per
    violated row, the scenario point ``center* + radius * x/||x||_2`` of
    the current iterate (first basis vector at x = 0).
    """
    dim = rlp.num_variables
    if rlp.bounds is not None:
        for lo, hi in rlp.bounds:
            if lo is not None and hi is not None and hi < lo:
                return _report(
                    LPStatus.INFEASIBLE, None, None, 0, 0.0,
                    feasibility_tol, cut_tol, max_cuts,
                )

    vmap = _variable_map(rlp.bounds, dim)
    builder = _assemble(rlp, vmap)
    cut_rows = [row for row in rlp.robust_rows if _needs_cuts(row)]
    if cut_rows:
        identity = np.eye(dim)
        for j in range(dim):
            builder.add_x_row(identity[j], _TRUST_BOX)
            builder.add_x_row(-identity[j], _TRUST_BOX)

    cost = np.zeros(builder.n_cols)
    cost[: builder.n_y] = rlp.objective @ vmap.matrix
    threshold = min(cut_tol, feasibility_tol)
    cuts_added = 0

    while True:
        a_mat, b_vec = builder.matrices()
        result = solve_lp(cost, a_mat, b_vec)
        if result.status is not LPStatus.OPTIMAL:
            return _report(
                result.status, None, None, cuts_added, 0.0,
                feasibility_tol, cut_tol, max_cuts,
            )
        x_hat = vmap.matrix @ result.x[: builder.n_y] + vmap.shift
        objective = float(rlp.objective @ x_hat)
        if not cut_rows:
            return _report(
                LPStatus.OPTIMAL, x_hat, objective, cuts_added,
                _certificate(rlp, x_hat), feasibility_tol, cut_tol, max_cuts,
            )

        violations = [
            worst_case_linear(row.uncertainty_set, x_hat) - row.b for row in cut_rows
        ]
        if max(violations) <= threshold:
            if np.max(np.abs(x_hat)) >= _TRUST_BOX * (1.0 - 1e-9):
                return _report(
                    LPStatus.UNBOUNDED, None, None, cuts_added, 0.0,
                    feasibility_tol, cut_tol, max_cuts,
                )
            return _report(
                LPStatus.OPTIMAL, x_hat, objective, cuts_added,
                _certificate(rlp, x_hat), feasibility_tol, cut_tol, max_cuts,
            )

        pending = [i for i, v in enumerate(violations) if v > threshold]
        if cuts_added + len(pending) > max_cuts:
            return _report(
                LPStatus.ITERATION_LIMIT, x_hat, objective, cuts_added,
                _certificate(rlp, x_hat), feasibility_tol, cut_tol, max_cuts,
            )
        direction = dual_achieving_direction(x_hat, Norm.L2)
        for i in pending:
            uset = cut_rows[i].uncertainty_set
            i_star = int(np.argmax(uset.centers @ x_hat))
            cut_point = uset.centers[i_star] + uset.radius * direction
            builder.add_x_row(cut_point, cut_rows[i].b)
        cuts_added += len(pending)


def simplex_solve(c, a_ub, b_ub, *, max_iterations: int | None = None) -> SolveReport:
    """Solve ``max c . x  s.t.  a_ub x <= b_ub, x >= 0`` and wrap the result."""
    result = solve_lp(
        np.asarray(c, dtype=float),
        np.asarray(a_ub, dtype=float),
        np.asarray(b_ub, dtype=float),
        max_iterations=max_iterations,
    )
    if result.status is LPStatus.OPTIMAL:
        residuals = np.asarray(a_ub, dtype=float) @ result.x - np.asarray(
            b_ub, dtype=float
        )
        violation = float(residuals.max()) if residuals.size else 0.0
        return _report(
            result.status, result.x, result.objective, 0, violation,
            FEASIBILITY_TOL, CUT_TOL, MAX_CUTS,
        )
    return _report(
        result.status, None, None, 0, 0.0, FEASIBILITY_TOL, CUT_TOL, MAX_CUTS
    )


def pessimize(
    rlp: RobustLinearProgram, x
) -> tuple[float, tuple[int, np.ndarray] | None]:
    """Worst violation over the robust rows at ``x`` and a witness point.

    Returns ``(max_violation, (row_index, u))`` where ``u`` lies in the
    offending row's set and attains its worst case; with no robust rows
    the result is ``(-inf, None)``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != rlp.num_variables:
        raise DimensionError(
            f"x has shape {x.shape}, expected ({rlp.num_variables},)"
        )
    if not rlp.robust_rows:
        return float("-inf"), None

    best_violation = float("-inf")
    best_index = 0
    for index, row in enumerate(rlp.robust_rows):
        violation = worst_case_linear(row.uncertainty_set, x) - row.b
        if violation > best_violation:
            best_violation = violation
            best_index = index

    uset = rlp.robust_rows[best_index].uncertainty_set
    center = uset.centers[int(np.argmax(uset.centers @ x))]
    step = uset.radius * dual_achieving_direction(x, uset.norm)
    witness = center + step
    # An L2 direction can overshoot the radius by an ulp; shave it back in.
    scale = 1.0
    for _ in range(16):
        if member(uset, witness):
            break
        scale = np.nextafter(scale, 0.0)
        witness = center + scale * step
    return best_violation, (best_index, witness)


def bundled_example() -> RobustLinearProgram:
    """Two-variable demo: maximize x1 + x2 against one L2 ball row."""
    uset = UncertaintySet(centers=[[0.5, 0.5]], radius=0.1, norm=Norm.L2)
    return RobustLinearProgram(
        objective=[1.0, 1.0],
        robust_rows=(RobustRow(uset, 1.0),),
        bounds=[(0.0, None), (0.0, None)],
    )
