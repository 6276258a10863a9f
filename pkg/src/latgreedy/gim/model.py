"""Generalized influence instances: per-level seeding and edge probabilities."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import DiGraph


class ModelSpecError(ValueError):
    pass


def _check_table(table: np.ndarray, rows: int, levels: int, what: str) -> np.ndarray:
    t = np.asarray(table, dtype=float)
    if t.shape != (rows, levels + 1):
        raise ModelSpecError(f"{what} table must have shape {(rows, levels + 1)}, got {t.shape}")
    if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
        raise ModelSpecError(f"{what} probabilities must lie in [0, 1]")
    if np.any(np.diff(t, axis=1) < 0):
        raise ModelSpecError(f"{what} probabilities must be non-decreasing in the level")
    t = t.copy()
    t.flags.writeable = False
    return t


@dataclass
class GimInstance:
    """A graph with level-dependent seeding and edge probabilities.

    ``node_probs[u, i]`` is the chance that node ``u`` seeds itself at
    incentive level ``i``.  ``edge_probs[e, i]`` is the chance that edge ``e``
    is live when its head node ``dst[e]`` sits at level ``i``: incentives act
    on a node's incoming edges.
    """

    graph: DiGraph
    levels: int
    node_probs: np.ndarray
    edge_probs: np.ndarray
    budget: int = 1
    max_in_degree: int = field(init=False)

    def __post_init__(self):
        if int(self.levels) < 1:
            raise ModelSpecError("need at least one incentive level")
        self.levels = int(self.levels)
        if int(self.budget) < 0:
            raise ModelSpecError("budget must be non-negative")
        self.budget = int(self.budget)
        self.node_probs = _check_table(self.node_probs, self.graph.n_nodes, self.levels, "node")
        self.edge_probs = _check_table(self.edge_probs, self.graph.n_edges, self.levels, "edge")
        self.max_in_degree = self.graph.max_in_degree()

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes

    @property
    def n_edges(self) -> int:
        return self.graph.n_edges

    @property
    def src(self) -> np.ndarray:
        return self.graph.src

    @property
    def dst(self) -> np.ndarray:
        return self.graph.dst

    @property
    def box(self) -> np.ndarray:
        return np.full(self.n_nodes, self.levels, dtype=np.int64)

    def check_levels(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        if x.shape != (self.n_nodes,) or np.any(x < 0) or np.any(x > self.levels):
            raise ValueError(f"incentive vector must have {self.n_nodes} entries in 0..{self.levels}")
        return x

    def seed_probs(self, x) -> np.ndarray:
        x = self.check_levels(x)
        return self.node_probs[np.arange(self.n_nodes), x]

    def live_probs(self, x) -> np.ndarray:
        x = self.check_levels(x)
        return self.edge_probs[np.arange(self.n_edges), x[self.dst]]


NodeSpec = str | Callable[[int, int, int], float] | np.ndarray
EdgeSpec = str | Callable[[float, int, int], float] | np.ndarray


def weighted_cascade(graph: DiGraph) -> np.ndarray:
    """Base weight ``1 / in-degree(head)`` for every edge."""
    indeg = graph.in_degree()
    return 1.0 / indeg[graph.dst]


def _node_table(graph: DiGraph, levels: int, spec) -> np.ndarray:
    lv = np.arange(levels + 1)
    if isinstance(spec, str):
        if spec == "linear":
            return np.tile(lv / levels, (graph.n_nodes, 1))
        if spec == "max-only":
            return np.tile((lv == levels).astype(float), (graph.n_nodes, 1))
        raise ModelSpecError(f"unknown node model {spec!r}")
    if callable(spec):
        return np.array([[spec(u, i, levels) for i in lv] for u in range(graph.n_nodes)], dtype=float)
    return np.asarray(spec, dtype=float)


def _edge_table(graph: DiGraph, levels: int, spec) -> np.ndarray:
    lv = np.arange(levels + 1)
    base = graph.weight if graph.weight is not None else weighted_cascade(graph)
    if isinstance(spec, str):
        if spec == "linear":
            return np.minimum(1.0, base[:, None] * (1.0 + lv[None, :] / levels))
        if spec == "constant":
            return np.tile(base[:, None], (1, levels + 1))
        raise ModelSpecError(f"unknown edge model {spec!r}")
    if callable(spec):
        return np.array([[spec(w, i, levels) for i in lv] for w in base.tolist()], dtype=float)
    return np.asarray(spec, dtype=float)


def build_gim(graph: DiGraph, levels: int, node_model: NodeSpec = "linear",
              edge_model: EdgeSpec = "linear", k: int = 1) -> GimInstance:
    """Attach level models to ``graph``.

    The linear defaults are ``p(u, i) = i / L`` and
    ``p(u, v, i) = min(1, w(u, v) * (1 + i / L))`` where ``w`` is the graph's
    own edge weight, or ``1 / in-degree(v)`` when the graph is unweighted.
    A model may also be given as a callable or as an explicit table.
    """
    if int(levels) < 1:
        raise ModelSpecError("need at least one incentive level")
    levels = int(levels)
    return GimInstance(graph, levels, _node_table(graph, levels, node_model),
                       _edge_table(graph, levels, edge_model), budget=k)


def reduce_from_ic_im(graph: DiGraph, k: int) -> GimInstance:
    """Classical influence maximization as a two-level instance.

    Level 1 seeds a node outright; edge probabilities ignore the level.
    """
    if graph.weight is None:
        raise ModelSpecError("the independent-cascade reduction needs edge weights")
    n = graph.n_nodes
    nodes = np.tile([0.0, 1.0], (n, 1))
    edges = np.tile(graph.weight[:, None], (1, 2))
    return GimInstance(graph, 1, nodes, edges, budget=k)


def reduce_from_boosting(graph: DiGraph, base_weights, boosted_weights, seeds, k: int) -> GimInstance:
    """Influence boosting as a two-level instance.

    The fixed seed set is always active and nobody else ever self-seeds;
    raising a node to level 1 swaps its incoming edges to the boosted weights.
    """
    p0 = np.asarray(base_weights, dtype=float)
    p1 = np.asarray(boosted_weights, dtype=float)
    if p0.shape != (graph.n_edges,) or p1.shape != (graph.n_edges,):
        raise ModelSpecError("one base and one boosted weight per edge expected")
    seeds = sorted(set(int(s) for s in seeds))
    if any(s < 0 or s >= graph.n_nodes for s in seeds):
        raise ModelSpecError(f"seed set {seeds} is not a subset of 0..{graph.n_nodes - 1}")
    nodes = np.zeros((graph.n_nodes, 2))
    nodes[seeds] = 1.0
    return GimInstance(graph, 1, nodes, np.column_stack([p0, p1]), budget=k)


def _max_step_ratio(table: np.ndarray) -> float | None:
    lo, hi = table[:, :-1], table[:, 1:]
    ok = lo > 0
    if not np.any(ok):
        return None
    return float(np.max(hi[ok] / lo[ok]))


def level_ratio_constants(instance: GimInstance) -> tuple[float, float]:
    """Largest consecutive-level growth factor of edge and of node probabilities.

    Steps out of a zero probability are ignored.  A table with no usable step
    contributes 1.
    """
    ce = _max_step_ratio(instance.edge_probs)
    cn = _max_step_ratio(instance.node_probs)
    if ce is None and cn is None:
        raise ModelSpecError("every level probability is zero; growth ratios are undefined")
    return (1.0 if ce is None else ce), (1.0 if cn is None else cn)


def dr_lower_bound(instance: GimInstance, k: int | None = None) -> float:
    """``c_e ** (-k * max_in_degree) * c_n ** (-k)`` for the instance's growth constants."""
    k = instance.budget if k is None else int(k)
    ce, cn = level_ratio_constants(instance)
    return float(ce ** (-k * instance.max_in_degree) * cn ** (-k))
