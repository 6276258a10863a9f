"""Integer-lattice vectors and box constraints.

Lattice vectors are plain read-only ``int64`` numpy arrays indexed by dense
element ids ``0..n-1``.  The helpers here validate and combine them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


def check_lattice_vector(v, n: int | None = None, name: str = "v") -> np.ndarray:
    """Validate ``v`` as a point of the non-negative integer lattice.

    Returns a read-only ``int64`` copy.  Raises ``ValueError`` for negative,
    non-integral or wrongly-sized input.
    """
    arr = np.asarray(v)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise ValueError(f"{name} must contain integers")
    elif arr.dtype.kind not in "iub":
        raise ValueError(f"{name} must contain integers, got dtype {arr.dtype}")
    out = arr.astype(np.int64, copy=True)
    if np.any(out < 0):
        raise ValueError(f"{name} must be non-negative")
    if n is not None and out.shape[0] != n:
        raise ValueError(f"{name} has dimension {out.shape[0]}, expected {n}")
    out.flags.writeable = False
    return out


def zeros(n: int) -> np.ndarray:
    return check_lattice_vector(np.zeros(n, dtype=np.int64))


def unit(n: int, s: int, scale: int = 1) -> np.ndarray:
    """``scale`` copies of element ``s`` as a lattice vector."""
    if not 0 <= s < n:
        raise IndexError(f"element {s} outside ground set of size {n}")
    v = np.zeros(n, dtype=np.int64)
    v[s] = scale
    return check_lattice_vector(v)


def l1_norm(v) -> int:
    return int(np.asarray(v, dtype=np.int64).sum())


def _pair(v, w):
    a = np.asarray(v, dtype=np.int64)
    b = np.asarray(w, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def join(v, w) -> np.ndarray:
    """Coordinate-wise maximum."""
    a, b = _pair(v, w)
    return check_lattice_vector(np.maximum(a, b))


def meet(v, w) -> np.ndarray:
    """Coordinate-wise minimum."""
    a, b = _pair(v, w)
    return check_lattice_vector(np.minimum(a, b))


def leq(v, w) -> bool:
    a, b = _pair(v, w)
    return bool(np.all(a <= b))


def multiset(v) -> list[int]:
    """Element ids of ``v`` with repetition, ascending."""
    a = np.asarray(v, dtype=np.int64)
    return [int(s) for s in np.repeat(np.arange(a.shape[0]), a)]


@dataclass(frozen=True)
class BoxConstraint:
    """Per-element multiplicity bounds together with the cardinality budget.

    Unbounded coordinates (``None`` or a value above ``budget``) are clamped to
    ``budget``; no feasible solution can exceed it there anyway.
    """

    bounds: np.ndarray
    budget: int

    def __init__(self, bounds: Sequence[int | None] | np.ndarray, budget: int):
        budget = int(budget)
        if budget < 0:
            raise ValueError("budget must be non-negative")
        raw = [budget if b is None else int(b) for b in bounds]
        if any(b < 0 for b in raw):
            raise ValueError("box bounds must be non-negative")
        arr = np.minimum(np.asarray(raw, dtype=np.int64), budget)
        arr.flags.writeable = False
        object.__setattr__(self, "bounds", arr)
        object.__setattr__(self, "budget", budget)

    @classmethod
    def uniform(cls, n: int, bound: int | None, budget: int) -> "BoxConstraint":
        return cls([bound] * n, budget)

    @property
    def n(self) -> int:
        return int(self.bounds.shape[0])

    def contains(self, v) -> bool:
        a = np.asarray(v, dtype=np.int64)
        return a.shape == self.bounds.shape and bool(np.all(a <= self.bounds))

    def feasible(self, v) -> bool:
        return self.contains(v) and l1_norm(v) <= self.budget

    def slack(self, v) -> np.ndarray:
        return self.bounds - np.asarray(v, dtype=np.int64)


def iter_box(bounds) -> Iterator[tuple[int, ...]]:
    """All lattice points ``0 <= v <= bounds`` in C order."""
    yield from np.ndindex(*(int(b) + 1 for b in bounds))


def box_points(bounds) -> np.ndarray:
    """All lattice points of the box as an ``(P, n)`` array in C order."""
    shape = tuple(int(b) + 1 for b in bounds)
    grids = np.indices(shape).reshape(len(shape), -1)
    return grids.T.astype(np.int64)


def budget_points(lower, bounds, budget: int) -> np.ndarray:
    """Points ``w`` with ``lower <= w <= bounds`` and ``|w - lower|_1 <= budget``."""
    lower = np.asarray(lower, dtype=np.int64)
    slack = np.minimum(np.asarray(bounds, dtype=np.int64) - lower, budget)
    if np.any(slack < 0):
        raise ValueError("lower corner lies outside the box")
    # grow one coordinate at a time so only budget-feasible prefixes exist
    pts = np.zeros((1, 0), dtype=np.int64)
    used = np.zeros(1, dtype=np.int64)
    for cap in slack:
        room = np.minimum(budget - used, cap)
        reps = room + 1
        rows = np.repeat(np.arange(pts.shape[0]), reps)
        vals = np.arange(reps.sum()) - np.repeat(np.cumsum(reps) - reps, reps)
        pts = np.column_stack([pts[rows], vals])
        used = used[rows] + vals
    return pts + lower
