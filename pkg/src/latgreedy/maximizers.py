"""Cardinality-constrained greedy maximizers on the integer lattice.

Four algorithms share one result type:

* :func:`standard_greedy` adds one unit of the best element per round;
* :func:`threshold_greedy` sweeps geometrically decreasing thresholds and adds,
  per element, a *pivot* multiplicity found by :func:`binary_search_pivot`;
* :func:`fast_greedy` ties each threshold to the current best marginal gain and
  shrinks a DR-ratio estimate ``beta`` whenever that gain jumps up;
* :func:`threshold_greedy_parallel` evaluates all pivots of one threshold
  against a snapshot, optionally on a thread pool.

The estimator classes at the bottom wrap them behind ``fit(objective)``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .lattice import BoxConstraint, check_lattice_vector
from .objectives import BoxViolation, Objective

logger = logging.getLogger(__name__)


@dataclass
class Addition:
    """One accepted pivot: ``multiplicity`` copies of ``element``."""

    iteration: int
    threshold: float
    element: int
    multiplicity: int
    gain: float
    l1_after: int


@dataclass
class Iteration:
    """One threshold level (ThresholdGreedy) or while-iteration (FastGreedy).

    ``after_element[s]`` is the solution right after element ``s`` was
    considered; it is filled only when snapshots are kept, and may be shorter
    than ``n`` for the iteration in which the budget ran out.
    """

    threshold: float
    start: np.ndarray
    max_gain: float | None = None
    prev_max_gain: float | None = None
    beta: float | None = None
    after_element: list[np.ndarray] | None = None
    completed: bool = False


@dataclass
class GreedyTrace:
    additions: list[Addition] = field(default_factory=list)
    iterations: list[Iteration] = field(default_factory=list)
    stopped_early: bool = False
    snapshots: bool = False

    @property
    def thresholds(self) -> list[float]:
        return [it.threshold for it in self.iterations]

    def total_added(self) -> int:
        return sum(a.multiplicity for a in self.additions)

    def solutions(self) -> list[np.ndarray]:
        """Every value the solution took, starting from the zero vector."""
        if not self.iterations:
            return []
        g = self.iterations[0].start.copy()
        out = [g.copy()]
        for a in self.additions:
            g[a.element] += a.multiplicity
            out.append(g.copy())
        return out


@dataclass
class GreedyResult:
    algorithm: str
    solution: np.ndarray
    value: float
    queries: int
    k: int
    trace: GreedyTrace
    beta_star: float | None = None
    # False when the run stopped before spending the budget: beta_star is then
    # only an upper bound on the final FastGreedy DR ratio
    beta_exact: bool | None = None


def eta_parameters(eta: float) -> tuple[float, float]:
    """Map a single accuracy knob ``eta`` to ``(kappa, epsilon)``."""
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    return 1.0 - eta / 2.0, eta / 2.0


def resolve_bounds(f: Objective, k: int, box=None) -> np.ndarray:
    """Per-element bounds clamped to ``k`` and to the objective's domain."""
    if isinstance(box, BoxConstraint):
        bounds = box.bounds
    elif box is None:
        bounds = f.bounds if f.bounds is not None else np.full(f.n, k, dtype=np.int64)
    else:
        bounds = check_lattice_vector(box, f.n, "box")
    if bounds.shape[0] != f.n:
        raise ValueError(f"box has dimension {bounds.shape[0]}, objective has {f.n}")
    if f.bounds is not None and np.any(bounds > f.bounds):
        raise BoxViolation(f"box {bounds.tolist()} exceeds objective domain {f.bounds.tolist()}")
    return np.minimum(bounds, k).astype(np.int64)


def _check_budget(k, allow_zero=True):
    if int(k) != k or k < 0 or (k == 0 and not allow_zero):
        raise ValueError(f"budget must be a {'non-negative' if allow_zero else 'positive'} integer, got {k!r}")
    return int(k)


def _unit_prob(name, value, closed_low=False):
    lo_ok = value >= 0 if closed_low else value > 0
    if not (lo_ok and value < 1):
        raise ValueError(f"{name} must lie in {'[0, 1)' if closed_low else '(0, 1)'}, got {value!r}")
    return float(value)


# -- pivot search ---------------------------------------------------------

def _pivot(f: Objective, g: np.ndarray, s: int, lmax: int, tau: float) -> tuple[int, float]:
    """Pivot multiplicity and its block gain ``delta_{l s}(g)`` (0 for ``l = 0``)."""
    if lmax <= 0:
        return 0, 0.0
    top = f.gain(g, s, lmax)
    if top >= lmax * tau:
        return lmax, top
    if lmax == 1:
        # delta_s(g) is exactly the query just made
        return 0, 0.0
    one = f.gain(g, s, 1)
    if one < tau:
        return 0, 0.0
    lo, hi, lo_gain = 1, lmax, one
    # invariant: delta_{lo s}(g) >= lo tau and delta_{hi s}(g) < hi tau
    while hi != lo + 1:
        mid = (lo + hi) // 2
        v = f.gain(g, s, mid)
        if v >= mid * tau:
            lo, lo_gain = mid, v
        else:
            hi = mid
    return lo, lo_gain


def binary_search_pivot(f: Objective, g, b, s: int, k: int, tau: float) -> int:
    """Return a pivot ``l`` for ``(g, s, tau)``.

    ``l`` lies in ``0..l_max`` with ``l_max = min(b_s - g_s, k - |g|_1)`` and
    satisfies ``delta_{l s}(g) >= l tau`` and ``delta_s(g + l s) < tau``
    (``l = l_max`` only needs the first).  Uses at most
    ``2 + ceil(log2 l_max)`` queries and none when ``l_max = 0``.
    """
    if not tau > 0:
        raise ValueError(f"threshold must be positive, got {tau!r}")
    g = check_lattice_vector(g, f.n, "g")
    bounds = check_lattice_vector(b, f.n, "b")
    if np.any(g > bounds):
        raise BoxViolation("g lies outside the box")
    lmax = min(int(bounds[s] - g[s]), int(k) - int(g.sum()))
    if lmax < 0:
        raise ValueError("g already exceeds the budget")
    return _pivot(f, g, s, lmax, tau)[0]


# -- algorithms -----------------------------------------------------------

def _finish(name, f, g, k, trace, q0, beta=None, beta_exact=None) -> GreedyResult:
    sol = check_lattice_vector(g, f.n, "solution")
    return GreedyResult(
        algorithm=name, solution=sol, value=f.evaluate(sol), queries=f.n_queries - q0,
        k=k, trace=trace, beta_star=beta, beta_exact=beta_exact,
    )


def _singletons(f, bounds, g):
    """Marginal gain of one copy of every element with slack (one query each)."""
    gains = np.full(f.n, -np.inf)
    for s in range(f.n):
        if bounds[s] > g[s]:
            gains[s] = f.gain(g, s, 1)
    return gains


def standard_greedy(f: Objective, k: int, b=None) -> GreedyResult:
    """Add one unit of a best element per round for ``k`` rounds.

    Ties go to the lowest element id.  The run stops early when no element
    has slack or the best gain is zero (recorded as ``trace.stopped_early``).
    """
    k = _check_budget(k)
    bounds = resolve_bounds(f, k, b)
    q0 = f.n_queries
    g = np.zeros(f.n, dtype=np.int64)
    trace = GreedyTrace()
    trace.iterations.append(Iteration(threshold=math.nan, start=g.copy()))
    for rnd in range(k):
        gains = _singletons(f, bounds, g)
        s = int(np.argmax(gains))
        if not gains[s] > 0:
            trace.stopped_early = True
            break
        g[s] += 1
        trace.additions.append(Addition(rnd, math.nan, s, 1, float(gains[s]), int(g.sum())))
    trace.iterations[0].completed = True
    return _finish("standard", f, g, k, trace, q0)


def _consider(f, g, s, bounds, k, total, tau, it_idx, trace, it, keep):
    lmax = min(int(bounds[s] - g[s]), k - total)
    l, gain = _pivot(f, g, s, lmax, tau)
    if l:
        g[s] += l
        total += l
        trace.additions.append(Addition(it_idx, tau, s, l, gain, total))
    if keep:
        it.after_element.append(g.copy())
    return total


def threshold_greedy(f: Objective, k: int, b=None, kappa: float = 0.95, epsilon: float = 0.05,
                     keep_snapshots: bool = False) -> GreedyResult:
    """Threshold sweep ``tau = M, kappa M, ...`` down to ``kappa eps^2 M / k``.

    ``M`` is the best singleton value (``n`` queries).  Returns as soon as the
    budget is spent.
    """
    k = _check_budget(k, allow_zero=False)
    kappa = _unit_prob("kappa", kappa)
    epsilon = _unit_prob("epsilon", epsilon)
    bounds = resolve_bounds(f, k, b)
    q0 = f.n_queries
    g = np.zeros(f.n, dtype=np.int64)
    trace = GreedyTrace(snapshots=keep_snapshots)
    top = _singletons(f, bounds, g).max(initial=0.0)
    if not top > 0:
        return _finish("threshold", f, g, k, trace, q0)
    floor = kappa * epsilon ** 2 * top / k
    tau, total = top, 0
    while tau >= floor:
        it = Iteration(threshold=tau, start=g.copy(), after_element=[] if keep_snapshots else None)
        trace.iterations.append(it)
        idx = len(trace.iterations) - 1
        for s in range(f.n):
            total = _consider(f, g, s, bounds, k, total, tau, idx, trace, it, keep_snapshots)
            if total == k:
                return _finish("threshold", f, g, k, trace, q0)
        it.completed = True
        if np.all(g >= bounds):
            break
        tau *= kappa
    return _finish("threshold", f, g, k, trace, q0)


def fast_greedy(f: Objective, k: int, b=None, kappa: float = 0.95, delta: float = 0.9,
                epsilon: float = 0.05, keep_snapshots: bool = False) -> GreedyResult:
    """Thresholds tied to the current best gain ``m``: ``tau = beta kappa m``.

    ``beta`` starts at 1 and is multiplied by ``delta`` whenever ``m`` exceeds
    ``kappa`` times its previous value.  ``epsilon = 0`` runs until the budget
    is spent or no element has positive gain.  The result's ``beta_star`` is
    exact when ``|g|_1 = k`` and an upper bound otherwise (``beta_exact``).
    """
    k = _check_budget(k, allow_zero=False)
    kappa = _unit_prob("kappa", kappa)
    delta = _unit_prob("delta", delta)
    epsilon = _unit_prob("epsilon", epsilon, closed_low=True)
    bounds = resolve_bounds(f, k, b)
    q0 = f.n_queries
    g = np.zeros(f.n, dtype=np.int64)
    trace = GreedyTrace(snapshots=keep_snapshots)
    singles = _singletons(f, bounds, g)
    top = singles.max(initial=0.0)
    beta = 1.0
    if not top > 0:
        return _finish("fast", f, g, k, trace, q0, beta, False)
    floor = top * epsilon ** 2 / k
    m, m_prev, total = top, top / kappa, 0
    while m >= floor and m > 0:
        # at g = 0 the singleton gains are already known
        gains = singles if not trace.iterations else _singletons(f, bounds, g)
        m = float(gains.max(initial=0.0))
        if not m > 0:
            break
        if m > kappa * m_prev:
            beta *= delta
        it = Iteration(threshold=beta * kappa * m, start=g.copy(), max_gain=m, prev_max_gain=m_prev,
                       beta=beta, after_element=[] if keep_snapshots else None)
        m_prev = m
        trace.iterations.append(it)
        idx = len(trace.iterations) - 1
        for s in range(f.n):
            total = _consider(f, g, s, bounds, k, total, it.threshold, idx, trace, it, keep_snapshots)
            if total == k:
                return _finish("fast", f, g, k, trace, q0, beta, True)
        it.completed = True
    return _finish("fast", f, g, k, trace, q0, beta, False)


def threshold_greedy_parallel(f: Objective, k: int, b=None, kappa: float = 0.95,
                              epsilon: float = 0.05, workers: int = 1,
                              keep_snapshots: bool = False) -> GreedyResult:
    """ThresholdGreedy with all pivots of a threshold taken against one snapshot.

    Pivots are committed in ascending element order and the last one is cut
    to the remaining budget.  The outcome does not depend on ``workers``.
    """
    k = _check_budget(k, allow_zero=False)
    kappa = _unit_prob("kappa", kappa)
    epsilon = _unit_prob("epsilon", epsilon)
    if int(workers) != workers or workers < 1:
        raise ValueError("workers must be a positive integer")
    if workers > 1 and not f.concurrent_safe:
        raise ValueError(f"{type(f).__name__} does not allow concurrent marginal-gain calls")
    bounds = resolve_bounds(f, k, b)
    q0 = f.n_queries
    g = np.zeros(f.n, dtype=np.int64)
    trace = GreedyTrace(snapshots=keep_snapshots)
    top = _singletons(f, bounds, g).max(initial=0.0)
    if not top > 0:
        return _finish("parallel", f, g, k, trace, q0)
    floor = kappa * epsilon ** 2 * top / k
    tau, total = top, 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while tau >= floor:
            snap = g.copy()
            snap.flags.writeable = False
            room = k - total
            lmaxes = [min(int(bounds[s] - snap[s]), room) for s in range(f.n)]
            jobs = [(s, lmaxes[s]) for s in range(f.n)]
            run = (lambda job, _tau=tau: _pivot(f, snap, job[0], job[1], _tau))
            pivots = list(pool.map(run, jobs)) if pool else [run(j) for j in jobs]
            it = Iteration(threshold=tau, start=snap.copy(), after_element=[] if keep_snapshots else None)
            trace.iterations.append(it)
            idx = len(trace.iterations) - 1
            for s, (l, gain) in enumerate(pivots):
                l = min(l, k - total)
                if l:
                    g[s] += l
                    total += l
                    trace.additions.append(Addition(idx, tau, s, l, gain, total))
                if keep_snapshots:
                    it.after_element.append(g.copy())
                if total == k:
                    return _finish("parallel", f, g, k, trace, q0)
            it.completed = True
            if np.all(g >= bounds):
                break
            tau *= kappa
    finally:
        if pool:
            pool.shutdown()
    return _finish("parallel", f, g, k, trace, q0)


ALGORITHMS = {
    "standard": standard_greedy,
    "threshold": threshold_greedy,
    "fast": fast_greedy,
    "parallel": threshold_greedy_parallel,
}


# -- estimator interface --------------------------------------------------

class _LatticeGreedy(BaseEstimator):
    """Shared ``fit`` / ``score`` plumbing; subclasses implement ``_run``."""

    def fit(self, objective: Objective, y=None, box=None):
        """Maximize ``objective`` and store the outcome in fitted attributes.

        ``y`` is ignored and exists for pipeline compatibility.
        """
        if not isinstance(objective, Objective):
            raise TypeError(f"expected an Objective, got {type(objective).__name__}")
        result = self._run(objective, box)
        self.result_ = result
        self.solution_ = result.solution
        self.value_ = result.value
        self.n_queries_ = result.queries
        self.trace_ = result.trace
        return self

    def score(self, objective: Objective, y=None) -> float:
        """Value of the fitted solution under ``objective`` (e.g. a fresh estimate)."""
        check_is_fitted(self, "solution_")
        return objective.evaluate(self.solution_)


class StandardGreedy(_LatticeGreedy):
    def __init__(self, k: int = 1):
        self.k = k

    def _run(self, f, box):
        return standard_greedy(f, self.k, box)


class ThresholdGreedy(_LatticeGreedy):
    def __init__(self, k: int = 1, kappa: float = 0.95, epsilon: float = 0.05, keep_snapshots: bool = False):
        self.k = k
        self.kappa = kappa
        self.epsilon = epsilon
        self.keep_snapshots = keep_snapshots

    @classmethod
    def from_eta(cls, k: int, eta: float, **kw):
        kappa, epsilon = eta_parameters(eta)
        return cls(k=k, kappa=kappa, epsilon=epsilon, **kw)

    def _run(self, f, box):
        return threshold_greedy(f, self.k, box, self.kappa, self.epsilon, self.keep_snapshots)


class FastGreedy(_LatticeGreedy):
    """FastGreedy estimator; after ``fit`` also exposes ``beta_star_``."""

    def __init__(self, k: int = 1, kappa: float = 0.95, delta: float = 0.9, epsilon: float = 0.05,
                 keep_snapshots: bool = False):
        self.k = k
        self.kappa = kappa
        self.delta = delta
        self.epsilon = epsilon
        self.keep_snapshots = keep_snapshots

    @classmethod
    def from_eta(cls, k: int, eta: float, delta: float = 0.9, **kw):
        kappa, epsilon = eta_parameters(eta)
        return cls(k=k, kappa=kappa, delta=delta, epsilon=epsilon, **kw)

    def _run(self, f, box):
        return fast_greedy(f, self.k, box, self.kappa, self.delta, self.epsilon, self.keep_snapshots)

    def fit(self, objective, y=None, box=None):
        super().fit(objective, y, box)
        self.beta_star_ = self.result_.beta_star
        return self


class ParallelThresholdGreedy(_LatticeGreedy):
    def __init__(self, k: int = 1, kappa: float = 0.95, epsilon: float = 0.05, n_jobs: int = 1,
                 keep_snapshots: bool = False):
        self.k = k
        self.kappa = kappa
        self.epsilon = epsilon
        self.n_jobs = n_jobs
        self.keep_snapshots = keep_snapshots

    def _run(self, f, box):
        return threshold_greedy_parallel(f, self.k, box, self.kappa, self.epsilon, self.n_jobs,
                                         self.keep_snapshots)
