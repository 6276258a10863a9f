"""``latgreedy`` command-line entry point."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .._seeding import derive_seed
from ..gim.sampling import FixedSampleActivation
from ..metrics import EnumerationCapExceeded, nonsubmodularity_report
from ..objectives import Objective
from .config import ConfigError, ExperimentConfig, load_config
from .records import PLOT_METRICS, emit_csv, emit_plot_data, load_records
from .runner import ObjectiveFactory, experiment_box, run_experiment

LOG_ENV = "LATGREEDY_LOG_LEVEL"
logger = logging.getLogger("latgreedy")


def _configure_logging():
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, output_dir=args.out_dir, workers=args.workers)


def _cmd_run(args) -> int:
    cfg = _load(args)
    outcome = run_experiment(cfg)
    print(f"{len(outcome.records)} records, {len(outcome.failures)} failed cells -> {cfg.output_dir}")
    return outcome.exit_code


def _cmd_csv(args) -> int:
    emit_csv(load_records(args.records), args.out)
    return 0


def _cmd_plotdata(args) -> int:
    emit_plot_data(load_records(args.records), args.metric, args.out, levels=args.levels)
    return 0


def _diagnostic_objective(cfg: ExperimentConfig) -> Objective:
    factory = ObjectiveFactory(cfg)
    if factory.instance is not None:
        # Ratios of a resampling estimator are meaningless; use one fixed sample set.
        return FixedSampleActivation(factory.instance, cfg.gim_samples, derive_seed(cfg.seed, 1, 0))
    return factory(0)


def _cmd_metrics(args) -> int:
    cfg = _load(args)
    f = _diagnostic_objective(cfg)
    try:
        report = nonsubmodularity_report(f, experiment_box(cfg, f), cfg.point_cap, cfg.pair_cap)
    except EnumerationCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = report.to_text()
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "metrics.txt").write_text(text, encoding="ascii")
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latgreedy", description="Lattice greedy maximization benchmarks.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_overrides(sp):
        sp.add_argument("config", type=Path)
        sp.add_argument("--seed", type=int, default=None, help="override the master seed")
        sp.add_argument("--out-dir", type=Path, default=None, help="override output.dir")
        sp.add_argument("--workers", type=int, default=None, help="threads for the parallel variant")

    sp = sub.add_parser("run", help="run an experiment config")
    with_overrides(sp)
    sp.set_defaults(func=_cmd_run)

    sp = sub.add_parser("csv", help="convert records (.jsonl or .csv) to CSV")
    sp.add_argument("records", type=Path)
    sp.add_argument("out", type=Path)
    sp.set_defaults(func=_cmd_csv)

    sp = sub.add_parser("plotdata", help="aggregate a metric into algorithm,k,mean,stddev")
    sp.add_argument("records", type=Path)
    sp.add_argument("metric", choices=PLOT_METRICS)
    sp.add_argument("out", type=Path)
    sp.add_argument("--levels", type=int, default=None, help="divide k by this level count")
    sp.set_defaults(func=_cmd_plotdata)

    sp = sub.add_parser("metrics", help="enumerate non-submodularity ratios of a small instance")
    with_overrides(sp)
    sp.set_defaults(func=_cmd_metrics)
    return p


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
