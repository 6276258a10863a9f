"""Directed graphs for the influence objective, and SNAP edge-list ingestion."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np

logger = logging.getLogger(__name__)


class EdgeListError(ValueError):
    pass


@dataclass
class DiGraph:
    """Edge arrays over dense node ids ``0..n_nodes-1``.

    ``weight`` holds optional base edge weights in [0, 1]; ``node_ids`` maps a
    dense id back to the id used in the source file.
    """

    n_nodes: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray | None = None
    node_ids: np.ndarray | None = None

    def __post_init__(self):
        self.src = np.asarray(self.src, dtype=np.int64)
        self.dst = np.asarray(self.dst, dtype=np.int64)
        if self.src.shape != self.dst.shape or self.src.ndim != 1:
            raise ValueError("src and dst must be equal-length 1-d arrays")
        if self.src.size and (min(self.src.min(), self.dst.min()) < 0
                              or max(self.src.max(), self.dst.max()) >= self.n_nodes):
            raise ValueError("edge endpoint outside 0..n_nodes-1")
        if self.weight is not None:
            self.weight = np.asarray(self.weight, dtype=float)
            if self.weight.shape != self.src.shape:
                raise ValueError("one weight per edge expected")
            if np.any((self.weight < 0) | (self.weight > 1)):
                raise ValueError("edge weights must lie in [0, 1]")
        if self.node_ids is None:
            self.node_ids = np.arange(self.n_nodes, dtype=np.int64)

    @property
    def n_edges(self) -> int:
        return int(self.src.shape[0])

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n_nodes)

    def max_in_degree(self) -> int:
        return int(self.in_degree().max(initial=0))

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    def save_id_map(self, path) -> None:
        """Write ``dense_id original_id`` lines."""
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            for i, orig in enumerate(self.node_ids.tolist()):
                fh.write(f"{i} {orig}\n")


def from_edges(edges, n_nodes: int | None = None, weights=None) -> DiGraph:
    arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if n_nodes is None:
        n_nodes = int(arr.max()) + 1 if arr.size else 0
    return DiGraph(n_nodes, arr[:, 0], arr[:, 1], weights)


def load_edge_list(path, directed: bool = True) -> DiGraph:
    """Parse a SNAP-style edge list.

    Lines hold two whitespace-separated decimal node ids; blank lines and
    lines starting with ``#`` are skipped.  Undirected input contributes both
    ``u -> v`` and ``v -> u``.  Self-loops and repeated edges are dropped, and
    node ids are compacted to ``0..n-1`` in ascending order of the original id.
    """
    pairs = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise EdgeListError(f"{path}:{lineno}: expected two non-negative integer ids, got {raw.rstrip()!r}")
            pairs.append((int(parts[0]), int(parts[1])))
    if not pairs:
        raise EdgeListError(f"{path}: no edges found")
    raw_edges = np.array(pairs, dtype=np.int64)
    ids, dense = np.unique(raw_edges, return_inverse=True)
    dense = dense.reshape(-1, 2)
    if not directed:
        dense = np.vstack([dense, dense[:, ::-1]])
    loops = dense[:, 0] == dense[:, 1]
    dense = dense[~loops]
    uniq = np.unique(dense, axis=0)
    dropped = len(pairs) * (1 if directed else 2) - uniq.shape[0]
    if dropped:
        logger.info("%s: dropped %d self-loop or duplicate edges", Path(path).name, dropped)
    if uniq.shape[0] == 0:
        raise EdgeListError(f"{path}: graph has no edges after removing self-loops")
    return DiGraph(int(ids.shape[0]), uniq[:, 0], uniq[:, 1], node_ids=ids)


def scale_free_graph(n: int, m: int = 2, seed: int = 0) -> DiGraph:
    """Barabasi-Albert graph with every undirected edge replaced by two arcs."""
    g = nx.barabasi_albert_graph(n, m, seed=seed)
    und = np.array(sorted(g.edges()), dtype=np.int64).reshape(-1, 2)
    both = np.vstack([und, und[:, ::-1]])
    both = both[np.lexsort((both[:, 1], both[:, 0]))]
    return DiGraph(n, both[:, 0], both[:, 1])
