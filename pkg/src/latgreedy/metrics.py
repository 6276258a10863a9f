"""Exact non-submodularity parameters by enumeration.

All functions here are correctness oracles for small boxes: they enumerate
the lattice exhaustively and refuse (``EnumerationCapExceeded``) rather than
sample when the box is too large.  Objective evaluations made here use the
free :meth:`Objective.evaluate` path and never touch the query counter.

Ratios whose denominator vanishes are skipped; if every pair is skipped the
ratio is 1 (the curvature is then 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from sklearn.base import BaseEstimator

from .lattice import box_points, budget_points, check_lattice_vector
from .maximizers import GreedyResult, GreedyTrace, resolve_bounds
from .objectives import Objective

DEFAULT_POINT_CAP = 200_000
DEFAULT_PAIR_CAP = 50_000_000


class EnumerationCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Certificate:
    """Witness of an extremal ratio: ``w``, optionally ``v`` and element ``s``."""

    ratio: float
    v: tuple[int, ...]
    w: tuple[int, ...]
    s: int | None = None


def _box(f: Objective, b) -> np.ndarray:
    if b is None:
        if f.bounds is None:
            raise ValueError("an explicit box is needed for an unbounded objective")
        return f.bounds
    return check_lattice_vector(b, f.n, "b")


def _table(f: Objective, bounds: np.ndarray, cap: int) -> np.ndarray:
    size = math.prod(int(x) + 1 for x in bounds)
    if size > cap:
        raise EnumerationCapExceeded(f"box has {size} points, cap is {cap}")
    shape = tuple(int(x) + 1 for x in bounds)
    return np.asarray(f.evaluate_many(box_points(bounds)), dtype=float).reshape(shape)


def _cummin(a: np.ndarray, reverse: bool = False) -> np.ndarray:
    """Minimum over the lower set (or upper set if ``reverse``) of every point."""
    out = a
    for axis in range(a.ndim):
        if reverse:
            out = np.flip(np.minimum.accumulate(np.flip(out, axis), axis=axis), axis)
        else:
            out = np.minimum.accumulate(out, axis=axis)
    return out


def _locate(block: np.ndarray, value: float, lo, hi) -> tuple[int, ...]:
    """First index in C order inside ``lo..hi`` where ``block`` equals ``value``."""
    sl = tuple(slice(a, b + 1) for a, b in zip(lo, hi))
    hits = np.argwhere(block[sl] == value)
    return tuple(int(x) for x in hits[0] + np.asarray(lo))


def _unit_gains(table: np.ndarray):
    """``(s, D_s)`` with ``D_s[v] = f(v + e_s) - f(v)`` over ``v_s < b_s``."""
    for s in range(table.ndim):
        if table.shape[s] > 1:
            yield s, np.diff(table, axis=s)


def exact_dr_ratio(f: Objective, b=None, cap: int = DEFAULT_POINT_CAP) -> tuple[float, Certificate | None]:
    """Largest ``gamma`` with ``gamma delta_s(w) <= delta_s(v)`` for all ``v <= w``, ``w + s <= b``."""
    table = _table(f, _box(f, b), cap)
    best, cert = 1.0, None
    for s, d in _unit_gains(table):
        low = _cummin(d)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0, low / d, np.inf)
        idx = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
        r = float(ratio[idx])
        if r < best:
            v = _locate(d, low[idx], (0,) * d.ndim, idx)
            best, cert = r, Certificate(r, v, tuple(int(x) for x in idx), s)
    return best, cert


def exact_curvature(f: Objective, b=None, cap: int = DEFAULT_POINT_CAP) -> tuple[float, Certificate | None]:
    """Smallest ``alpha`` in [0, 1] with ``delta_s(w) >= (1 - alpha) delta_s(v)`` for all ``v <= w``.

    The certificate carries the minimizing ratio ``delta_s(w) / delta_s(v)``.
    """
    table = _table(f, _box(f, b), cap)
    low_ratio, cert = 1.0, None
    for s, d in _unit_gains(table):
        up = _cummin(d, reverse=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0, up / d, np.inf)
        idx = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
        r = float(ratio[idx])
        if r < low_ratio:
            w = _locate(d, up[idx], idx, tuple(x - 1 for x in d.shape))
            low_ratio, cert = r, Certificate(r, tuple(int(x) for x in idx), w, s)
    return min(1.0, max(0.0, 1.0 - low_ratio)), cert


def _unit_gain_rows(points: np.ndarray, values: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """``D[i, s] = f(p_i + e_s) - f(p_i)`` over box points in C order (0 at the boundary)."""
    shape = tuple(int(x) + 1 for x in bounds)
    table = values.reshape(shape)
    out = np.zeros(points.shape)
    for s, d in _unit_gains(table):
        pad = [(0, 0)] * table.ndim
        pad[s] = (0, 1)
        out[:, s] = np.pad(d, pad).reshape(-1)
    return out


def _ratio_min(num: np.ndarray, den: np.ndarray) -> tuple[float, int]:
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0, num / den, np.inf)
    i = int(np.argmin(r)) if r.size else -1
    return (float(r[i]) if i >= 0 else math.inf), i


def exact_submodularity_ratio(f: Objective, b=None, cap: int = DEFAULT_PAIR_CAP
                              ) -> tuple[float, Certificate | None]:
    """Largest ``gamma`` in [0, 1] with ``gamma (f(w) - f(v)) <= sum_{s in w - v} delta_s(v)``.

    Enumerates every pair ``v <= w`` of the box; ``cap`` bounds the squared
    number of box points.
    """
    bounds = _box(f, b)
    size = math.prod(int(x) + 1 for x in bounds)
    if size * size > cap:
        raise EnumerationCapExceeded(f"{size}^2 point pairs exceed cap {cap}")
    pts = box_points(bounds)
    vals = np.asarray(f.evaluate_many(pts), dtype=float)
    unit = _unit_gain_rows(pts, vals, bounds)
    best, cert = 1.0, None
    for i in range(pts.shape[0]):
        v = pts[i]
        above = np.flatnonzero(np.all(pts >= v, axis=1))
        diff = pts[above] - v
        r, j = _ratio_min(diff @ unit[i], vals[above] - vals[i])
        if r < best:
            best = r
            cert = Certificate(r, tuple(int(x) for x in v), tuple(int(x) for x in pts[above[j]]))
    return best, cert


def certificate_ratio(f: Objective, kind: str, cert: Certificate) -> float:
    """Recompute a certificate's ratio from raw evaluations."""
    v = np.array(cert.v, dtype=np.int64)
    w = np.array(cert.w, dtype=np.int64)

    def unit_gain(x, s):
        e = np.zeros_like(x)
        e[s] = 1
        return f.evaluate(x + e) - f.evaluate(x)

    if kind == "gamma_d":
        return unit_gain(v, cert.s) / unit_gain(w, cert.s)
    if kind == "alpha":
        return unit_gain(w, cert.s) / unit_gain(v, cert.s)
    if kind == "gamma_s":
        num = sum(int(w[s] - v[s]) * unit_gain(v, s) for s in range(f.n) if w[s] > v[s])
        return num / (f.evaluate(w) - f.evaluate(v))
    raise ValueError(f"unknown ratio kind {kind!r}")


# -- trace-restricted ratios ---------------------------------------------

VARIANTS = ("standard", "threshold", "fast", "parallel")


def _variant_of(trace: GreedyTrace) -> str:
    its = trace.iterations
    if its and its[0].beta is not None:
        return "fast"
    if its and math.isnan(its[0].threshold):
        return "standard"
    return "threshold"


def greedy_vectors(trace: GreedyTrace, variant: str) -> list[np.ndarray]:
    """The greedy vectors a trace-restricted submodularity ratio ranges over.

    Standard and threshold variants use every value the solution took; the
    fast variant uses the solution at the start of every while-iteration,
    including a final partial one.
    """
    if variant == "fast":
        out = [it.start for it in trace.iterations]
    else:
        out = trace.solutions()
    if not out:
        out = [np.zeros(0, dtype=np.int64)]
    seen, uniq = set(), []
    for g in out:
        key = tuple(int(x) for x in g)
        if key not in seen:
            seen.add(key)
            uniq.append(np.array(key, dtype=np.int64))
    return uniq


@dataclass
class GreedyRatioReport:
    variant: str
    gamma_s_greedy: float
    certificate: Certificate | None
    vectors: int
    gamma_d_tg: float | None = None
    includes_partial_iteration: bool = False


def greedy_submodularity_ratio(f: Objective, trace, k: int, b=None, variant: str | None = None,
                               cap: int = DEFAULT_POINT_CAP) -> GreedyRatioReport:
    """Submodularity ratio restricted to the greedy vectors ``g^i`` of a run.

    For every ``g^i`` all ``w`` with ``g^i <= w <= b`` and ``|w - g^i|_1 <= k``
    are enumerated; ``cap`` bounds the number of such ``w`` per ``g^i``.
    ``trace`` may be a :class:`GreedyResult` or its :class:`GreedyTrace`.
    """
    if isinstance(trace, GreedyResult):
        if variant is not None and variant != trace.algorithm:
            raise ValueError(f"trace comes from {trace.algorithm!r}, not {variant!r}")
        variant = trace.algorithm
        trace = trace.trace
    found = _variant_of(trace)
    variant = variant or found
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if (variant == "fast") != (found == "fast") or (variant == "standard") != (found == "standard"):
        raise ValueError(f"trace was produced by a {found!r}-type run, not {variant!r}")
    bounds = resolve_bounds(f, k, b) if b is not None or f.bounds is not None else None
    if bounds is None:
        raise ValueError("an explicit box is needed for an unbounded objective")
    vectors = greedy_vectors(trace, variant)
    if vectors[0].shape[0] == 0:
        vectors = [np.zeros(f.n, dtype=np.int64)]
    best, cert = 1.0, None
    for g in vectors:
        ws = budget_points(g, bounds, k)
        if ws.shape[0] > cap:
            raise EnumerationCapExceeded(f"{ws.shape[0]} candidate vectors above {g.tolist()}, cap is {cap}")
        fg = f.evaluate(g)
        unit = np.zeros(f.n)
        for s in range(f.n):
            if g[s] < bounds[s]:
                e = g.copy()
                e[s] += 1
                unit[s] = f.evaluate(e) - fg
        vals = np.asarray(f.evaluate_many(ws), dtype=float)
        r, j = _ratio_min((ws - g) @ unit, vals - fg)
        if r < best:
            best = r
            cert = Certificate(r, tuple(int(x) for x in g), tuple(int(x) for x in ws[j]))
    report = GreedyRatioReport(variant, best, cert, len(vectors),
                               includes_partial_iteration=variant == "fast" and bool(trace.iterations)
                               and not trace.iterations[-1].completed)
    if variant in ("threshold", "parallel") and trace.snapshots:
        report.gamma_d_tg = threshold_greedy_dr_ratio(f, trace, bounds)
    return report


def threshold_greedy_dr_ratio(f: Objective, trace, b=None) -> float:
    """ThresholdGreedy version of the DR ratio from a trace with snapshots.

    Every vector current during threshold iteration ``t`` is compared, element
    by element, with the solution right after that element was considered in
    iteration ``t - 1`` (the zero vector for ``t = 0``).
    """
    if isinstance(trace, GreedyResult):
        trace = trace.trace
    if not trace.snapshots:
        raise ValueError("trace lacks per-element snapshots; rerun with keep_snapshots=True")
    if not trace.iterations:
        return 1.0
    n = trace.iterations[0].start.shape[0]
    bounds = _box(f, b) if (b is not None or f.bounds is not None) else None
    cache: dict[tuple[int, ...], float] = {}

    def value(x):
        key = tuple(int(c) for c in x)
        if key not in cache:
            cache[key] = f.evaluate(np.array(key, dtype=np.int64))
        return cache[key]

    def unit_gain(x, s):
        if bounds is not None and x[s] >= bounds[s]:
            return None
        e = np.array(x, dtype=np.int64)
        e[s] += 1
        return value(e) - value(x)

    zero = np.zeros(n, dtype=np.int64)
    best = 1.0
    for t, it in enumerate(trace.iterations):
        current = [it.start] + list(it.after_element or [])
        prev = trace.iterations[t - 1].after_element if t else None
        for x in {tuple(int(c) for c in y): None for y in current}:
            x = np.array(x, dtype=np.int64)
            for s in range(n):
                den = unit_gain(x, s)
                if den is None or not den > 0:
                    continue
                h = zero if prev is None else prev[s]
                num = unit_gain(h, s)
                best = min(best, num / den)
    return max(0.0, best)


# -- bounds --------------------------------------------------------------

def performance_bound(kappa: float, beta: float, gamma_s: float, epsilon: float) -> float:
    """``1 - exp(-kappa * beta * gamma_s) - epsilon``; pass gamma_d for ``beta`` for ThresholdGreedy."""
    for name, x in (("kappa", kappa), ("beta", beta), ("gamma_s", gamma_s), ("epsilon", epsilon)):
        if not 0 <= x <= 1:
            raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return 1.0 - math.exp(-kappa * beta * gamma_s) - epsilon


def standard_greedy_bound(alpha: float, gamma_s: float) -> float:
    """``(1 / alpha) (1 - exp(-alpha gamma_s))``, tending to ``gamma_s`` as alpha -> 0."""
    if alpha <= 0:
        return gamma_s
    return (1.0 - math.exp(-alpha * gamma_s)) / alpha


def parallel_bound(alpha: float, gamma_d: float, gamma_s: float, epsilon: float) -> float:
    return 1.0 - math.exp(-(1.0 - alpha) * gamma_d * gamma_s) - epsilon


# -- reports ---------------------------------------------------------------

@dataclass
class NonSubmodReport:
    gamma_d: float
    gamma_s: float
    alpha: float
    certificates: dict[str, Certificate | None] = field(default_factory=dict)
    bounds: tuple[int, ...] = ()
    caps: dict[str, int] = field(default_factory=dict)
    greedy: list[GreedyRatioReport] = field(default_factory=list)

    def to_text(self) -> str:
        """Flat ``key = value`` lines, one fact per line."""
        lines = [
            f"gamma_d = {self.gamma_d!r}",
            f"gamma_s = {self.gamma_s!r}",
            f"alpha = {self.alpha!r}",
            f"box = {','.join(map(str, self.bounds))}",
        ]
        for name, cap in sorted(self.caps.items()):
            lines.append(f"cap.{name} = {cap}")
        for name, c in self.certificates.items():
            if c is None:
                lines.append(f"certificate.{name} = none")
                continue
            lines.append(f"certificate.{name}.ratio = {c.ratio!r}")
            lines.append(f"certificate.{name}.v = {','.join(map(str, c.v))}")
            lines.append(f"certificate.{name}.w = {','.join(map(str, c.w))}")
            if c.s is not None:
                lines.append(f"certificate.{name}.s = {c.s}")
        for i, g in enumerate(self.greedy):
            p = f"greedy.{i}"
            lines.append(f"{p}.variant = {g.variant}")
            lines.append(f"{p}.gamma_s = {g.gamma_s_greedy!r}")
            lines.append(f"{p}.vectors = {g.vectors}")
            if g.gamma_d_tg is not None:
                lines.append(f"{p}.gamma_d_tg = {g.gamma_d_tg!r}")
            if g.variant == "fast":
                lines.append(f"{p}.includes_partial_iteration = {str(g.includes_partial_iteration).lower()}")
        return "\n".join(lines) + "\n"


def parse_report_text(text: str) -> dict[str, str]:
    out = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"malformed report line: {raw!r}")
        out[key.strip()] = val.strip()
    return out


def nonsubmodularity_report(f: Objective, b=None, point_cap: int = DEFAULT_POINT_CAP,
                            pair_cap: int = DEFAULT_PAIR_CAP,
                            runs: Iterable[GreedyResult] = ()) -> NonSubmodReport:
    bounds = _box(f, b)
    gd, cd = exact_dr_ratio(f, bounds, point_cap)
    al, ca = exact_curvature(f, bounds, point_cap)
    gs, cs = exact_submodularity_ratio(f, bounds, pair_cap)
    report = NonSubmodReport(gd, gs, al, {"gamma_d": cd, "gamma_s": cs, "alpha": ca},
                             tuple(int(x) for x in bounds), {"points": point_cap, "pairs": pair_cap})
    for run in runs:
        report.greedy.append(greedy_submodularity_ratio(f, run, run.k, np.minimum(bounds, run.k)))
    return report


class NonSubmodularityProfile(BaseEstimator):
    """Estimator front-end: ``fit(objective)`` fills ``gamma_d_``, ``gamma_s_``, ``alpha_``."""

    def __init__(self, point_cap: int = DEFAULT_POINT_CAP, pair_cap: int = DEFAULT_PAIR_CAP):
        self.point_cap = point_cap
        self.pair_cap = pair_cap

    def fit(self, objective: Objective, y=None, box=None):
        self.report_ = nonsubmodularity_report(objective, box, self.point_cap, self.pair_cap)
        self.gamma_d_ = self.report_.gamma_d
        self.gamma_s_ = self.report_.gamma_s
        self.alpha_ = self.report_.alpha
        return self
