"""Norm geometry for union-of-ball uncertainty sets.

An uncertainty set here is a finite union of closed p-norm balls that share
one radius.  Everything reduces to the nearest-center distance function

    phi(u) = min_i ||u - center_i||_p

whose sublevel set at level r is exactly the union of balls of radius r.
Membership tests, batch score evaluation, and the closed-form worst case of
a linear function over the set all live in this module.  Only p in
{1, 2, inf} is supported; those are the orders with simple duals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionError",
    "Norm",
    "UncertaintySet",
    "norm_eval",
    "dual_norm_eval",
    "dual_achieving_direction",
    "shape_value",
    "shape_values",
    "member",
    "member_batch",
    "worst_case_linear",
]

# Keep pairwise-distance work chunks below ~32M floats (~256 MB) so batch
# scoring of large samples against many centers cannot exhaust memory.
_CHUNK_BUDGET = 32_000_000


class DimensionError(ValueError):
    """A vector or matrix argument has an empty or mismatched shape."""


class Norm(enum.Enum):
    """Supported p-norm orders."""

    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def dual(self) -> "Norm":
        """Dual order under the Hoelder pairing: L1 <-> LINF, L2 <-> L2."""
        return _DUAL[self]


_DUAL = {Norm.L1: Norm.LINF, Norm.L2: Norm.L2, Norm.LINF: Norm.L1}


def _vector(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must be non-empty")
    return arr


def _matrix(points, name: str = "points") -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1 and arr.size > 0:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionError(f"{name} must be a non-empty (n, d) array, got shape {arr.shape}")
    return arr


def _reduce(diffs: np.ndarray, norm: Norm) -> np.ndarray:
    # Norm along the last axis of a difference array.
    if norm is Norm.L1:
        return np.abs(diffs).sum(axis=-1)
    if norm is Norm.L2:
        return np.sqrt(np.square(diffs).sum(axis=-1))
    return np.abs(diffs).max(axis=-1)


def norm_eval(x, norm: Norm) -> float:
    """Evaluate ||x||_p for p in {1, 2, inf}."""
    return float(_reduce(_vector(x), norm))


def dual_norm_eval(x, norm: Norm) -> float:
    """Evaluate the dual norm of ``norm`` at x (L1 <-> LINF, L2 self-dual)."""
    return float(_reduce(_vector(x), norm.dual))


def dual_achieving_direction(x, norm: Norm) -> np.ndarray:
    """A direction g with ||g||_p <= 1 and g . x = dual_norm_eval(x, norm).

    This is the maximizer of ``x . g`` over the unit ``norm`` ball.  At
    x = 0 every direction is a maximizer; the first standard basis vector
    is returned so callers get a deterministic witness.
    """
    x = _vector(x)
    g = np.zeros_like(x)
    if not np.any(x):
        g[0] = 1.0
        return g
    if norm is Norm.L2:
        return x / np.sqrt(np.dot(x, x))
    if norm is Norm.L1:
        j = int(np.argmax(np.abs(x)))
        g[j] = 1.0 if x[j] >= 0 else -1.0
        return g
    # LINF ball: the sign vector (zeros may take either sign; use +1).
    return np.where(x >= 0, 1.0, -1.0)


def shape_values(centers, norm: Norm, points) -> np.ndarray:
    """Nearest-center distances for a batch of points.

    Parameters
    ----------
    centers : (m, d) array of ball centers.
    norm : Norm order used for the distance.
    points : (n, d) array of query points.

    Returns
    -------
    (n,) array with entry j equal to min_i ||points[j] - centers[i]||_p.
    """
    centers = _matrix(centers, "centers")
    points = _matrix(points, "points")
    if centers.shape[1] != points.shape[1]:
        raise DimensionError(
            f"dimension mismatch: centers are {centers.shape[1]}-D, "
            f"points are {points.shape[1]}-D"
        )
    m, d = centers.shape
    out = np.empty(points.shape[0])
    chunk = max(1, _CHUNK_BUDGET // (m * d))
    for start in range(0, points.shape[0], chunk):
        block = points[start : start + chunk]
        diffs = block[:, np.newaxis, :] - centers[np.newaxis, :, :]
        out[start : start + block.shape[0]] = _reduce(diffs, norm).min(axis=1)
    return out


def shape_value(centers, norm: Norm, u) -> float:
    """Distance from a single point u to its nearest center."""
    u = _vector(u, "u")
    return float(shape_values(centers, norm, u[np.newaxis, :])[0])


@dataclass(frozen=True)
class UncertaintySet:
    """A union of closed p-norm balls with one shared radius.

    ``centers`` is an (m, d) array; a single d-vector is promoted to one
    center.  The array is made read-only so a set cannot drift after
    construction.
    """

    centers: np.ndarray
    radius: float
    norm: Norm

    def __post_init__(self) -> None:
        centers = _matrix(self.centers, "centers").copy()
        centers.setflags(write=False)
        radius = float(self.radius)
        if not np.isfinite(radius) or radius < 0:
            raise ValueError(f"radius must be finite and >= 0, got {radius}")
        if not isinstance(self.norm, Norm):
            raise TypeError(f"norm must be a Norm, got {type(self.norm).__name__}")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radius", radius)

    @property
    def num_balls(self) -> int:
        return self.centers.shape[0]

    @property
    def dimension(self) -> int:
        return self.centers.shape[1]

    def to_dict(self) -> dict:
        """JSON-ready form: {"norm": "l2", "radius": r, "centers": [[...], ...]}."""
        return {
            "norm": self.norm.value,
            "radius": self.radius,
            "centers": [[float(v) for v in row] for row in self.centers],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UncertaintySet":
        try:
            norm = Norm(data["norm"])
            return cls(np.asarray(data["centers"], dtype=float), float(data["radius"]), norm)
        except KeyError as exc:
            raise ValueError(f"uncertainty-set dict is missing key {exc}") from exc


def member(uset: UncertaintySet, u) -> bool:
    """True iff u lies in the union (nearest-center distance <= radius).

    The comparison is a direct float <=, so boundary points are members;
    no tolerance is folded in.
    """
    return bool(shape_value(uset.centers, uset.norm, u) <= uset.radius)


def member_batch(uset: UncertaintySet, points) -> np.ndarray:
    """Boolean membership for each row of an (n, d) array."""
    return shape_values(uset.centers, uset.norm, points) <= uset.radius


def worst_case_linear(uset: UncertaintySet, x) -> float:
    """max_{u in set} x . u in closed form.

    Over a single ball the maximum is x . center + radius * ||x||_dual;
    over the union it is the best center plus the same radius term.
    """
    x = _vector(x)
    if x.size != uset.dimension:
        raise DimensionError(
            f"dimension mismatch: x is {x.size}-D, set is {uset.dimension}-D"
        )
    return float(np.max(uset.centers @ x) + uset.radius * dual_norm_eval(x, uset.norm))
