"""Objective oracles over the integer lattice.

Every objective is non-negative, monotone and zero at the origin.  Algorithms
talk to an objective only through :meth:`Objective.marginal_gain` (or its
``l * unit(s)`` shortcut :meth:`Objective.gain`); each such call is one query.
Raw :meth:`Objective.evaluate` calls are free and meant for reporting and for
the enumeration diagnostics.
"""
from __future__ import annotations

import threading
from typing import Any, Mapping

import numpy as np

from .lattice import check_lattice_vector, iter_box


class ContractViolation(RuntimeError):
    """The oracle broke its monotonicity or normalization contract."""


class BoxViolation(ValueError):
    """A query left the domain of the objective."""


class Objective:
    """Base class for lattice objectives with query accounting.

    Subclasses implement :meth:`_evaluate`; they may override :meth:`_gain`
    when a marginal gain is cheaper than two evaluations.

    Parameters
    ----------
    n : int
        Size of the ground set.
    bounds : array-like or None
        Domain box of the objective; ``None`` means unbounded.
    """

    #: whether marginal_gain may be called from several threads at once
    concurrent_safe = False

    def __init__(self, n: int, bounds=None):
        if n < 1:
            raise ValueError("ground set must contain at least one element")
        self.n = int(n)
        self.bounds = None if bounds is None else check_lattice_vector(bounds, self.n, "bounds")
        self._n_queries = 0
        self._lock = threading.Lock()

    # -- accounting -------------------------------------------------------
    @property
    def n_queries(self) -> int:
        return self._n_queries

    def reset_queries(self) -> None:
        with self._lock:
            self._n_queries = 0

    def _count(self) -> None:
        with self._lock:
            self._n_queries += 1

    # -- evaluation -------------------------------------------------------
    def _check_domain(self, v: np.ndarray, what: str) -> None:
        if self.bounds is not None and np.any(v > self.bounds):
            raise BoxViolation(f"{what} {v.tolist()} exceeds domain {self.bounds.tolist()}")

    def _evaluate(self, v: np.ndarray) -> float:
        raise NotImplementedError

    def evaluate(self, v) -> float:
        v = check_lattice_vector(v, self.n)
        self._check_domain(v, "point")
        return float(self._evaluate(v))

    def evaluate_many(self, points) -> np.ndarray:
        """Evaluate every row of ``points``; subclasses may vectorize."""
        pts = np.asarray(points, dtype=np.int64)
        return np.array([self.evaluate(p) for p in pts], dtype=float)

    def _gain(self, base: np.ndarray, step: np.ndarray) -> float:
        return self._evaluate(base + step) - self._evaluate(base)

    def _checked(self, value: float, base, step) -> float:
        if value < 0:
            raise ContractViolation(
                f"negative marginal gain {value!r} for step {np.asarray(step).tolist()} "
                f"at {np.asarray(base).tolist()}: objective is not monotone"
            )
        return float(value)

    def marginal_gain(self, step, base) -> float:
        """``f(base + step) - f(base)``; counts as one query."""
        step = check_lattice_vector(step, self.n, "step")
        base = check_lattice_vector(base, self.n, "base")
        self._check_domain(base + step, "base + step")
        self._count()
        return self._checked(self._gain(base, step), base, step)

    def gain(self, base, s: int, l: int = 1) -> float:
        """Marginal gain of ``l`` copies of element ``s`` at ``base`` (one query)."""
        step = np.zeros(self.n, dtype=np.int64)
        step[s] = l
        return self.marginal_gain(step, base)

    def __call__(self, v) -> float:
        return self.evaluate(v)


def _weighted_rows(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Row-wise ``points @ weights`` summed in a fixed left-to-right order.

    BLAS kernels round differently for one row and for many, which would let
    ``evaluate`` and ``evaluate_many`` disagree in the last bit.
    """
    out = np.zeros(points.shape[0])
    for j in range(points.shape[1]):
        out = out + points[:, j] * weights[j]
    return out


class ModularObjective(Objective):
    """``f(v) = <weights, v>``."""

    concurrent_safe = True

    def __init__(self, weights, bounds=None):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("modular weights must be finite and non-negative")
        super().__init__(w.shape[0], bounds)
        self.weights = w

    def _evaluate(self, v):
        return float(self.evaluate_many(v[None, :])[0])

    def _gain(self, base, step):
        return float(self.evaluate_many(step[None, :])[0])

    def evaluate_many(self, points):
        return _weighted_rows(np.asarray(points, dtype=np.int64), self.weights)


class BudgetSaturatedObjective(Objective):
    """``f(v) = min(cap, <weights, v>)``, a DR-submodular saturating objective."""

    concurrent_safe = True

    def __init__(self, weights, cap: float, bounds=None):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if not cap > 0:
            raise ValueError("cap must be positive")
        super().__init__(w.shape[0], bounds)
        self.weights = w
        self.cap = float(cap)

    def _evaluate(self, v):
        return float(self.evaluate_many(v[None, :])[0])

    def evaluate_many(self, points):
        return np.minimum(self.cap, _weighted_rows(np.asarray(points, dtype=np.int64), self.weights))


class PerturbedCoverageObjective(Objective):
    """Probabilistic coverage plus a small supermodular quadratic term.

    ``f(v) = sum_j u_j (1 - prod_s (1 - q_sj)^v_s) + epsilon * (<c, v>)^2``

    The coverage part is DR-submodular; any ``epsilon > 0`` adds increasing
    returns, so the sum is monotone but generally not DR-submodular.  Powers
    are tabulated by repeated multiplication, which keeps the float evaluation
    exactly monotone.
    """

    concurrent_safe = True

    def __init__(self, q, item_weights, linear, epsilon: float, bounds=None):
        q = np.asarray(q, dtype=float)
        u = np.asarray(item_weights, dtype=float)
        c = np.asarray(linear, dtype=float)
        if q.ndim != 2 or q.shape[1] != u.shape[0] or c.shape != (q.shape[0],):
            raise ValueError("inconsistent coverage parameter shapes")
        if np.any((q < 0) | (q > 1)) or np.any(u < 0) or np.any(c < 0) or epsilon < 0:
            raise ValueError("coverage parameters out of range")
        super().__init__(q.shape[0], bounds)
        self.q, self.item_weights, self.linear = q, u, c
        self.epsilon = float(epsilon)
        self._keep = 1.0 - q
        self._powers = np.ones((q.shape[0], q.shape[1], 1))
        cap = 16 if self.bounds is None else int(self.bounds.max())
        self._grow(cap)

    def _grow(self, top: int) -> None:
        if top <= self._powers.shape[2] - 1:
            return
        with self._lock:
            table = self._powers
            have = table.shape[2] - 1
            if top <= have:
                return
            extra = np.empty(table.shape[:2] + (top - have,))
            prev = table[:, :, -1]
            for t in range(top - have):
                prev = prev * self._keep
                extra[:, :, t] = prev
            self._powers = np.concatenate([table, extra], axis=2)

    def _evaluate(self, v):
        return float(self.evaluate_many(v[None, :])[0])

    def evaluate_many(self, points):
        pts = np.asarray(points, dtype=np.int64)
        self._grow(int(pts.max(initial=0)))
        uncovered = np.ones((pts.shape[0], self.q.shape[1]))
        for s in range(self.n):
            uncovered = uncovered * self._powers[s][:, pts[:, s]].T
        cover = _weighted_rows(1.0 - uncovered, self.item_weights)
        lin = _weighted_rows(pts, self.linear)
        return cover + self.epsilon * lin * lin


class TabulatedObjective(Objective):
    """Objective given by an explicit table over its whole box.

    ``table[v]`` is ``f(v)``; the table shape fixes the domain ``bounds``.
    """

    concurrent_safe = True

    def __init__(self, table, check: bool = True):
        t = np.asarray(table, dtype=float)
        if t.ndim < 1:
            raise ValueError("table needs at least one dimension")
        super().__init__(t.ndim, np.array(t.shape) - 1)
        if check:
            if t.flat[0] != 0:
                raise ContractViolation("tabulated objective must vanish at the origin")
            for axis in range(t.ndim):
                if np.any(np.diff(t, axis=axis) < 0):
                    raise ContractViolation("tabulated objective is not monotone")
        self.table = t

    def _evaluate(self, v):
        return float(self.table[tuple(v)])

    def evaluate_many(self, points):
        pts = np.asarray(points, dtype=np.int64)
        return self.table[tuple(pts.T)]


def random_monotone_table(bounds, rng: np.random.Generator, zero_prob: float = 0.3,
                          scale_spread: float = 3.0) -> np.ndarray:
    """Random monotone table with ``f(0) = 0`` over the box ``0..bounds``.

    Each point takes the maximum over its lower neighbours plus a random
    non-negative increment (zero with probability ``zero_prob``); gains along
    a coordinate are therefore erratic, which makes the table non-submodular
    in general.
    """
    shape = tuple(int(b) + 1 for b in bounds)
    table = np.zeros(shape)
    scales = rng.uniform(1.0, scale_spread, size=len(shape))
    for idx in iter_box(bounds):
        if not any(idx):
            continue
        best = 0.0
        for s, c in enumerate(idx):
            if c:
                prev = idx[:s] + (c - 1,) + idx[s + 1:]
                best = max(best, table[prev])
        if rng.random() < zero_prob:
            inc = 0.0
        else:
            s_max = max(range(len(idx)), key=lambda s: idx[s])
            inc = rng.exponential(scales[s_max])
        table[idx] = best + inc
    return table


SYNTHETIC_KINDS = ("modular", "budget-saturated", "epsilon-perturbed-coverage", "random-monotone")


def make_synthetic_objective(kind: str, params: Mapping[str, Any] | None, n: int,
                             seed: int = 0) -> Objective:
    """Build a seeded synthetic objective.

    ``params`` per kind:

    modular
        ``weights`` (length ``n``); default uniform draws in ``[0.5, 1.5)``.
    budget-saturated
        ``weights`` as above, ``cap`` (default the weight sum).
    epsilon-perturbed-coverage
        ``epsilon`` (default 0.05), ``items`` (default ``2n``), ``density``
        (default 0.5), ``bounds``.
    random-monotone
        ``bounds`` (required), ``zero_prob``.
    """
    params = dict(params or {})
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    bounds = params.pop("bounds", None)

    def weights():
        w = params.pop("weights", None)
        if w is None:
            return rng.uniform(0.5, 1.5, size=n)
        w = np.asarray(w, dtype=float)
        if w.shape != (n,):
            raise ValueError(f"weights must have length {n}")
        return w

    if kind == "modular":
        obj = ModularObjective(weights(), bounds)
    elif kind == "budget-saturated":
        w = weights()
        cap = float(params.pop("cap", w.sum()))
        obj = BudgetSaturatedObjective(w, cap, bounds)
    elif kind == "epsilon-perturbed-coverage":
        eps = float(params.pop("epsilon", 0.05))
        items = int(params.pop("items", 2 * n))
        density = float(params.pop("density", 0.5))
        if items < 1 or not 0 < density <= 1 or eps < 0:
            raise ValueError("invalid coverage parameters")
        mask = rng.random((n, items)) < density
        q = np.where(mask, rng.uniform(0.2, 0.7, size=(n, items)), 0.0)
        u = rng.uniform(0.5, 1.5, size=items)
        c = rng.uniform(0.5, 1.5, size=n)
        obj = PerturbedCoverageObjective(q, u, c, eps, bounds)
    elif kind == "random-monotone":
        if bounds is None:
            raise ValueError("random-monotone objectives need explicit bounds")
        zp = float(params.pop("zero_prob", 0.3))
        obj = TabulatedObjective(random_monotone_table(bounds, rng, zp))
        if obj.n != n:
            raise ValueError("bounds length must equal n")
    else:
        raise ValueError(f"unknown synthetic objective kind {kind!r}; expected one of {SYNTHETIC_KINDS}")
    if params:
        raise ValueError(f"unused parameters for {kind}: {sorted(params)}")
    return obj
