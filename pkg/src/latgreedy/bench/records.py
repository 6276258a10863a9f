"""Run records and their CSV / JSON-lines encodings."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable

CSV_FIELDS = ("algorithm", "k", "rep", "value", "queries", "seconds", "beta_star", "bound", "seed")
PLOT_METRICS = ("value", "queries", "seconds", "beta_star")


@dataclass(frozen=True)
class RunRecord:
    algorithm: str
    k: int
    rep: int
    value: float
    queries: int
    seconds: float | None = None
    beta_star: float | None = None
    bound: float | None = None
    seed: int = 0


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def record_row(rec: RunRecord) -> list[str]:
    return [_fmt(getattr(rec, f)) for f in CSV_FIELDS]


def csv_header_line() -> str:
    return ",".join(CSV_FIELDS) + "\n"


def csv_line(rec: RunRecord) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(record_row(rec))
    return buf.getvalue()


def emit_csv(records: Iterable[RunRecord], path) -> None:
    """Header plus one row per record; missing values are empty fields."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(csv_header_line())
        for rec in records:
            fh.write(csv_line(rec))


def _opt_float(s: str) -> float | None:
    return None if s == "" else float(s)


def parse_csv(path) -> list[RunRecord]:
    with open(path, "r", encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_FIELDS:
            raise ValueError(f"{path}: unexpected header {header}")
        out = []
        for row in reader:
            if len(row) != len(CSV_FIELDS):
                raise ValueError(f"{path}: row has {len(row)} fields")
            a, k, rep, value, queries, seconds, beta, bound, seed = row
            out.append(RunRecord(a, int(k), int(rep), float(value), int(queries),
                                 _opt_float(seconds), _opt_float(beta), _opt_float(bound), int(seed)))
        return out


def record_json(rec: RunRecord) -> str:
    return json.dumps(asdict(rec), sort_keys=True) + "\n"


def parse_jsonl(path) -> list[RunRecord]:
    names = {f.name for f in fields(RunRecord)}
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                # an interrupted append can leave a torn final line
                raise ValueError(f"{path}:{lineno}: not a JSON record") from None
            if set(obj) != names:
                raise ValueError(f"{path}:{lineno}: fields {sorted(obj)} do not match a run record")
            out.append(RunRecord(**obj))
    return out


def load_records(path) -> list[RunRecord]:
    """Read records from ``.jsonl`` or ``.csv``."""
    path = Path(path)
    if path.suffix == ".jsonl":
        return parse_jsonl(path)
    return parse_csv(path)


def _fmt_k(k: int, levels: int | None) -> str:
    if not levels:
        return str(k)
    return str(k // levels) if k % levels == 0 else repr(k / levels)


def emit_plot_data(records: Iterable[RunRecord], metric: str, path, levels: int | None = None) -> None:
    """Long-format ``algorithm,k,mean,stddev`` over repetitions.

    ``stddev`` is the population standard deviation over repetitions, so
    repetitions {3, 5} give mean 4 and stddev 1.
    Groups where the metric is never recorded get empty mean and stddev.
    ``levels`` divides ``k`` to give per-level budgets.
    """
    if metric not in PLOT_METRICS:
        raise ValueError(f"metric must be one of {PLOT_METRICS}, got {metric!r}")
    groups: dict[tuple[str, int], list] = {}
    for rec in records:
        groups.setdefault((rec.algorithm, rec.k), []).append(getattr(rec, metric))
    with open(path, "w", encoding="ascii", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "k", "mean", "stddev"])
        for (alg, k) in sorted(groups):
            vals = [float(v) for v in groups[(alg, k)] if v is not None]
            if not vals:
                w.writerow([alg, _fmt_k(k, levels), "", ""])
                continue
            mean = math.fsum(vals) / len(vals)
            sd = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / len(vals))
            w.writerow([alg, _fmt_k(k, levels), repr(mean), repr(sd)])
