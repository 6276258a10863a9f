"""Run every (budget, algorithm, repetition) cell of an experiment."""
from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .._seeding import derive_seed
from ..gim.graph import load_edge_list, scale_free_graph
from ..gim.model import GimInstance, build_gim
from ..gim.sampling import GimOracleAdapter
from ..maximizers import ALGORITHMS, GreedyResult
from ..metrics import parallel_bound, performance_bound, standard_greedy_bound
from ..objectives import Objective, make_synthetic_objective
from .config import ExperimentConfig
from .records import RunRecord, csv_header_line, csv_line, record_json

logger = logging.getLogger(__name__)

RECORDS_FILE = "records.jsonl"
CSV_FILE = "runs.csv"
FAILURES_FILE = "failures.jsonl"

# seed paths below the master seed
_INSTANCE_KEY = 0
_REPETITION_KEY = 1


@dataclass
class ExperimentOutcome:
    records: list[RunRecord] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0


def build_gim_instance(cfg: ExperimentConfig) -> GimInstance:
    if cfg.gim_graph is not None:
        graph = load_edge_list(cfg.gim_graph, directed=cfg.gim_directed)
    else:
        nodes, m = cfg.gim_generator
        graph = scale_free_graph(nodes, m, seed=derive_seed(cfg.seed, _INSTANCE_KEY) % (2 ** 32))
    return build_gim(graph, cfg.gim_levels, cfg.gim_node_model, cfg.gim_edge_model, k=max(cfg.budgets))


class ObjectiveFactory:
    """Fresh objectives for each cell, sharing one underlying instance."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.instance = build_gim_instance(cfg) if cfg.objective == "gim" else None

    def __call__(self, cell_seed: int) -> Objective:
        cfg = self.cfg
        if self.instance is not None:
            return GimOracleAdapter(self.instance, cfg.gim_samples, cell_seed)
        return make_synthetic_objective(cfg.synthetic_kind, cfg.synthetic_params, cfg.synthetic_n,
                                        seed=derive_seed(cfg.seed, _INSTANCE_KEY))


def run_algorithm(name: str, f: Objective, k: int, cfg: ExperimentConfig) -> GreedyResult:
    if name == "standard":
        return ALGORITHMS[name](f, k)
    if name == "threshold":
        return ALGORITHMS[name](f, k, kappa=cfg.kappa, epsilon=cfg.epsilon)
    if name == "fast":
        return ALGORITHMS[name](f, k, kappa=cfg.kappa, delta=cfg.delta, epsilon=cfg.epsilon)
    if name == "parallel":
        return ALGORITHMS[name](f, k, kappa=cfg.kappa, epsilon=cfg.epsilon, workers=cfg.workers)
    raise ValueError(f"unknown algorithm {name!r}")


def bound_for(name: str, cfg: ExperimentConfig, beta_star: float | None) -> float | None:
    """Guarantee implied by the supplied ratios, or None when one is missing."""
    gd, gs, al = cfg.gamma_d, cfg.gamma_s, cfg.alpha
    if gs is None:
        return None
    if name == "standard":
        return None if al is None else standard_greedy_bound(al, gs)
    if name == "threshold":
        return None if gd is None else performance_bound(cfg.kappa, gd, gs, cfg.epsilon)
    if name == "fast":
        return None if beta_star is None else performance_bound(cfg.kappa, beta_star, gs, cfg.epsilon)
    if name == "parallel":
        return None if gd is None or al is None else parallel_bound(al, gd, gs, cfg.epsilon)
    return None


class _AppendWriter:
    """Single writer: every record is flushed and synced before the next cell runs."""

    def __init__(self, out_dir: Path):
        out_dir.mkdir(parents=True, exist_ok=True)
        self._jsonl = open(out_dir / RECORDS_FILE, "w", encoding="utf-8", newline="\n")
        self._csv = open(out_dir / CSV_FILE, "w", encoding="ascii", newline="")
        self._fail = open(out_dir / FAILURES_FILE, "w", encoding="utf-8", newline="\n")
        self._csv.write(csv_header_line())
        self._sync(self._csv)

    @staticmethod
    def _sync(fh):
        fh.flush()
        os.fsync(fh.fileno())

    def record(self, rec: RunRecord):
        self._jsonl.write(record_json(rec))
        self._csv.write(csv_line(rec))
        self._sync(self._jsonl)
        self._sync(self._csv)

    def failure(self, info: dict):
        self._fail.write(json.dumps(info, sort_keys=True) + "\n")
        self._sync(self._fail)

    def close(self):
        for fh in (self._jsonl, self._csv, self._fail):
            fh.close()


def run_experiment(cfg: ExperimentConfig) -> ExperimentOutcome:
    """Execute the schedule, appending results under ``cfg.output_dir``.

    Repetition ``r`` uses the seed derived from ``(seed, 1, r)`` for every
    algorithm and budget, so algorithms are compared on common randomness.
    A failing cell is logged to ``failures.jsonl`` and skipped.
    """
    outcome = ExperimentOutcome()
    factory = ObjectiveFactory(cfg)
    writer = _AppendWriter(Path(cfg.output_dir))
    try:
        for k in cfg.budgets:
            for name in cfg.algorithms:
                for rep in range(cfg.repetitions):
                    cell_seed = derive_seed(cfg.seed, _REPETITION_KEY, rep)
                    try:
                        f = factory(cell_seed)
                        t0 = time.perf_counter()
                        res = run_algorithm(name, f, k, cfg)
                        elapsed = time.perf_counter() - t0
                    except Exception as exc:  # a broken cell must not sink the schedule
                        logger.exception("cell %s k=%d rep=%d failed", name, k, rep)
                        info = {"algorithm": name, "k": k, "rep": rep, "seed": cell_seed,
                                "error": f"{type(exc).__name__}: {exc}"}
                        outcome.failures.append(info)
                        writer.failure(info)
                        continue
                    rec = RunRecord(
                        algorithm=name, k=int(k), rep=rep, value=float(res.value),
                        queries=int(res.queries), seconds=elapsed if cfg.timing else None,
                        beta_star=None if res.beta_star is None else float(res.beta_star),
                        bound=bound_for(name, cfg, res.beta_star), seed=cell_seed)
                    outcome.records.append(rec)
                    writer.record(rec)
                    logger.info("%s k=%d rep=%d value=%.6g queries=%d", name, k, rep, rec.value, rec.queries)
    finally:
        writer.close()
    return outcome


def experiment_objective(cfg: ExperimentConfig) -> Objective:
    """The objective of repetition 0, used by the diagnostics subcommand."""
    return ObjectiveFactory(cfg)(derive_seed(cfg.seed, _REPETITION_KEY, 0))


def experiment_box(cfg: ExperimentConfig, f: Objective) -> np.ndarray:
    k = max(cfg.budgets)
    if f.bounds is None:
        return np.full(f.n, k, dtype=np.int64)
    return np.minimum(f.bounds, k)
