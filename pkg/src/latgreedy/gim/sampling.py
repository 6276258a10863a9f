"""Monte Carlo activation with per-sample thresholds.

Each sample draws one uniform threshold per node and per edge.  A node seeds
itself when its threshold is below its seeding probability, and an edge is
live when its threshold is below its edge probability.  Samples are stored
bit-parallel: row ``v`` of an ``(n, words)`` ``uint64`` array holds one bit
per sample, so a graph search handles all samples at once.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, replace

import numpy as np

from .._seeding import derive_seed
from ..objectives import Objective
from .model import GimInstance

logger = logging.getLogger(__name__)

WORD = 64
DEFAULT_SAMPLES = 10_000


def _pack(bits: np.ndarray) -> np.ndarray:
    """``(m, 64*q)`` booleans to ``(m, q)`` words, sample ``j`` at bit ``j % 64``."""
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def _unpack_counts(words: np.ndarray, n_samples: int) -> np.ndarray:
    """Per-sample number of set rows."""
    bits = np.unpackbits(np.ascontiguousarray(words).view(np.uint8), axis=-1, bitorder="little")
    return bits.sum(axis=0, dtype=np.int64)[:n_samples]


def _popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum(dtype=np.int64))


def _draw_thresholds(n_nodes: int, n_edges: int, n_samples: int, seed: int):
    """Thresholds padded to whole words; padding uses 1.0 and never fires.

    Sample ``j`` comes from the generator for ``(seed, j // 64)``, so it does
    not depend on how many samples were requested.
    """
    n_words = -(-n_samples // WORD)
    width = n_nodes + n_edges
    out = np.empty((n_words * WORD, width))
    for b in range(n_words):
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(b,)))
        out[b * WORD:(b + 1) * WORD] = rng.random((WORD, width))
    out[n_samples:] = 1.0
    return np.ascontiguousarray(out[:, :n_nodes].T), np.ascontiguousarray(out[:, n_nodes:].T)


class _Topology:
    """CSR views of the edge arrays, grouped by tail and by head."""

    def __init__(self, instance: GimInstance):
        n = instance.n_nodes
        self.src, self.dst = instance.src, instance.dst
        self.out_order = np.argsort(self.src, kind="stable")
        self.out_ptr = np.concatenate([[0], np.cumsum(np.bincount(self.src, minlength=n))])
        self.in_order = np.argsort(self.dst, kind="stable")
        self.in_ptr = np.concatenate([[0], np.cumsum(np.bincount(self.dst, minlength=n))])

    def out_edges(self, nodes: np.ndarray) -> np.ndarray:
        lo, hi = self.out_ptr[nodes], self.out_ptr[nodes + 1]
        lens = hi - lo
        if lens.sum() == 0:
            return np.empty(0, dtype=np.int64)
        offs = np.repeat(lo - np.cumsum(lens) + lens, lens) + np.arange(lens.sum())
        return self.out_order[offs]

    def in_edges(self, v: int) -> np.ndarray:
        return self.in_order[self.in_ptr[v]:self.in_ptr[v + 1]]


def _spread(topo: _Topology, start: np.ndarray, blocked: np.ndarray, live: np.ndarray) -> np.ndarray:
    """Bits reachable from ``start`` through ``live`` edges, avoiding ``blocked``.

    The result includes ``start`` itself.
    """
    reached = start.copy()
    front = start
    while True:
        nodes = np.flatnonzero(front.any(axis=1))
        if nodes.size == 0:
            return reached
        edges = topo.out_edges(nodes)
        if edges.size == 0:
            return reached
        cand = front[topo.src[edges]] & live[edges]
        heads = topo.dst[edges]
        order = np.argsort(heads, kind="stable")
        heads = heads[order]
        uniq, starts = np.unique(heads, return_index=True)
        hit = np.bitwise_or.reduceat(cand[order], starts, axis=0)
        hit &= ~(blocked[uniq] | reached[uniq])
        reached[uniq] |= hit
        front = np.zeros_like(reached)
        front[uniq] = hit


@dataclass(frozen=True)
class GimSampleSet:
    """Thresholds for ``n_samples`` cascades plus the closure at ``committed``.

    ``active[v]`` has bit ``j`` set when node ``v`` is active in sample ``j``
    under the committed incentive vector; ``live`` is the matching edge state.
    """

    n_samples: int
    master_seed: int
    commit_index: int
    seed: int
    node_thresholds: np.ndarray
    edge_thresholds: np.ndarray
    committed: np.ndarray
    active: np.ndarray
    live: np.ndarray

    @property
    def n_words(self) -> int:
        return self.active.shape[1]

    def thresholds(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        return self.node_thresholds[:, j].copy(), self.edge_thresholds[:, j].copy()

    def active_sets(self) -> list[frozenset[int]]:
        bits = np.unpackbits(self.active.view(np.uint8), axis=-1, bitorder="little")[:, :self.n_samples]
        return [frozenset(np.flatnonzero(bits[:, j]).tolist()) for j in range(self.n_samples)]

    def mean_active(self) -> float:
        return _popcount(self.active) / self.n_samples


def _topology(instance: GimInstance) -> _Topology:
    topo = instance.__dict__.get("_topology")
    if topo is None:
        topo = _Topology(instance)
        instance.__dict__["_topology"] = topo
    return topo


def _closure(instance: GimInstance, node_thr, edge_thr, g) -> tuple[np.ndarray, np.ndarray]:
    seeds = _pack(node_thr < instance.seed_probs(g)[:, None])
    live = _pack(edge_thr < instance.live_probs(g)[:, None])
    return _spread(_topology(instance), seeds, np.zeros_like(seeds), live), live


def sample_thresholds(instance: GimInstance, n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> GimSampleSet:
    """Fresh sample set for master ``seed``, committed at the zero vector."""
    if int(n_samples) < 1:
        raise ValueError("need at least one sample")
    n_samples = int(n_samples)
    node_thr, edge_thr = _draw_thresholds(instance.n_nodes, instance.n_edges, n_samples, seed)
    g = np.zeros(instance.n_nodes, dtype=np.int64)
    active, live = _closure(instance, node_thr, edge_thr, g)
    return GimSampleSet(n_samples, int(seed), 0, int(seed), node_thr, edge_thr, g, active, live)


def recompute_active_sets(instance: GimInstance, samples: GimSampleSet, g, resample: bool = True) -> GimSampleSet:
    """Commit ``g``: redraw every threshold from the next derived seed, then rebuild closures.

    With ``resample=False`` the thresholds are kept and only the closures move.
    """
    g = instance.check_levels(g).copy()
    if resample:
        idx = samples.commit_index + 1
        seed = derive_seed(samples.master_seed, idx)
        node_thr, edge_thr = _draw_thresholds(instance.n_nodes, instance.n_edges, samples.n_samples, seed)
    else:
        idx, seed = samples.commit_index, samples.seed
        node_thr, edge_thr = samples.node_thresholds, samples.edge_thresholds
    active, live = _closure(instance, node_thr, edge_thr, g)
    return replace(samples, commit_index=idx, seed=seed, node_thresholds=node_thr,
                   edge_thresholds=edge_thr, committed=g, active=active, live=live)


def _gain_bits(instance: GimInstance, samples: GimSampleSet, g: np.ndarray, s: int, l: int) -> np.ndarray:
    if l < 1:
        raise ValueError("the step multiplicity must be at least 1")
    if not 0 <= s < instance.n_nodes:
        raise ValueError(f"node {s} out of range")
    g = instance.check_levels(g)
    level = int(g[s]) + int(l)
    if level > instance.levels:
        raise ValueError(f"level {level} for node {s} exceeds the maximum {instance.levels}")
    if np.array_equal(g, samples.committed):
        active, live = samples.active, samples.live
    else:
        active, live = _closure(instance, samples.node_thresholds, samples.edge_thresholds, g)
    topo = _topology(instance)
    trig = _pack(samples.node_thresholds[s][None, :] < instance.node_probs[s, level])[0]
    ins = topo.in_edges(s)
    if ins.size:
        raised = _pack(samples.edge_thresholds[ins] < instance.edge_probs[ins, level][:, None])
        trig |= np.bitwise_or.reduce(active[instance.src[ins]] & raised, axis=0)
    trig &= ~active[s]
    start = np.zeros_like(active)
    start[s] = trig
    if not trig.any():
        return start
    return _spread(topo, start, active, live)


def estimate_marginal_gain(instance: GimInstance, samples: GimSampleSet, g, s: int, l: int = 1,
                           return_stderr: bool = False):
    """Average number of nodes newly activated by raising node ``s`` by ``l`` levels.

    Read-only with respect to ``samples``.  With ``return_stderr`` the
    standard error of the mean is returned as well.
    """
    new = _gain_bits(instance, samples, g, s, l)
    mean = _popcount(new) / samples.n_samples
    if not return_stderr:
        return mean
    counts = _unpack_counts(new, samples.n_samples)
    se = float(counts.std(ddof=1) / np.sqrt(samples.n_samples)) if samples.n_samples > 1 else float("inf")
    return mean, se


def sample_activation(instance: GimInstance, samples: GimSampleSet, x) -> float:
    """Sample-average activation of ``x`` over the zero vector, on the current thresholds."""
    x = instance.check_levels(x)
    zero = np.zeros(instance.n_nodes, dtype=np.int64)
    hi, _ = _closure(instance, samples.node_thresholds, samples.edge_thresholds, x)
    lo, _ = _closure(instance, samples.node_thresholds, samples.edge_thresholds, zero)
    return (_popcount(hi) - _popcount(lo)) / samples.n_samples


class GimOracleAdapter(Objective):
    """Monte Carlo activation as a lattice objective.

    Marginal-gain queries must have the form ``l * unit(s)``.  A query at a
    base other than the committed vector commits that base first, which
    redraws all thresholds from a seed derived from ``(seed, commit count)``.
    Estimation itself never changes the samples.
    """

    concurrent_safe = True

    def __init__(self, instance: GimInstance, n_samples: int = DEFAULT_SAMPLES, seed: int = 0):
        super().__init__(instance.n_nodes, instance.box)
        self.instance = instance
        self.samples = sample_thresholds(instance, n_samples, seed)
        self._commit_lock = threading.Lock()

    @property
    def n_commits(self) -> int:
        return self.samples.commit_index

    def commit(self, g) -> GimSampleSet:
        g = np.asarray(g, dtype=np.int64)
        with self._commit_lock:
            if not np.array_equal(self.samples.committed, g):
                self.samples = recompute_active_sets(self.instance, self.samples, g)
            return self.samples

    def marginal_gain(self, step, base) -> float:
        if np.count_nonzero(np.asarray(step)) != 1:
            # rejected before the query counter moves
            raise ValueError("influence queries are restricted to steps l * unit(s)")
        return super().marginal_gain(step, base)

    def _gain(self, base, step):
        nz = np.flatnonzero(step)
        samples = self.samples
        if not np.array_equal(samples.committed, base):
            samples = self.commit(base)
        s = int(nz[0])
        return estimate_marginal_gain(self.instance, samples, base, s, int(step[s]))

    def _checked(self, value, base, step):
        if -1e-9 < value < 0:
            logger.debug("clamped negative estimate %g to 0", value)
            value = 0.0
        return super()._checked(value, base, step)

    def _evaluate(self, v):
        return sample_activation(self.instance, self.samples, v)


class FixedSampleActivation(Objective):
    """Activation averaged over one fixed set of samples.

    Deterministic, monotone and exactly zero at the origin, so it suits the
    enumeration diagnostics.  Per-level masks are precomputed, which limits
    it to small graphs.
    """

    concurrent_safe = True

    def __init__(self, instance: GimInstance, n_samples: int = 1024, seed: int = 0, chunk: int = 4096):
        super().__init__(instance.n_nodes, instance.box)
        self.instance = instance
        self.n_samples = int(n_samples)
        self.chunk = int(chunk)
        node_thr, edge_thr = _draw_thresholds(instance.n_nodes, instance.n_edges, self.n_samples, seed)
        self._node_masks = np.stack(
            [_pack(node_thr < instance.node_probs[:, [i]]) for i in range(instance.levels + 1)], axis=1)
        self._edge_masks = np.stack(
            [_pack(edge_thr < instance.edge_probs[:, [i]]) for i in range(instance.levels + 1)], axis=1)
        self._zero_count = int(self._counts(np.zeros((1, self.n), dtype=np.int64))[0])

    def _counts(self, points: np.ndarray) -> np.ndarray:
        inst = self.instance
        src, dst = inst.src, inst.dst
        active = self._node_masks[np.arange(self.n)[None, :], points]
        live = self._edge_masks[np.arange(inst.n_edges)[None, :], points[:, dst]]
        while True:
            before = active.copy()
            for e in range(inst.n_edges):
                active[:, dst[e]] |= active[:, src[e]] & live[:, e]
            if np.array_equal(before, active):
                break
        return np.bitwise_count(active).sum(axis=(1, 2), dtype=np.int64)

    def evaluate_many(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64).reshape(-1, self.n)
        if np.any(pts < 0) or np.any(pts > self.bounds):
            raise ValueError("points must lie inside the level box")
        out = np.empty(pts.shape[0])
        for lo in range(0, pts.shape[0], self.chunk):
            part = pts[lo:lo + self.chunk]
            out[lo:lo + part.shape[0]] = (self._counts(part) - self._zero_count) / self.n_samples
        return out

    def _evaluate(self, v):
        return float(self.evaluate_many(v[None, :])[0])
