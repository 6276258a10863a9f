"""Experiment configuration: a flat ``key = value`` file with dotted keys.

Recognized keys (anything else is an error)::

    objective            synthetic | gim
    synthetic.kind       modular | budget-saturated | epsilon-perturbed-coverage | random-monotone
    synthetic.n          ground set size
    synthetic.bound      uniform per-element bound (optional)
    synthetic.weights    comma-separated weights (modular, budget-saturated)
    synthetic.cap        saturation cap (budget-saturated)
    synthetic.epsilon    perturbation size (epsilon-perturbed-coverage)
    synthetic.items      number of covered items (epsilon-perturbed-coverage)
    synthetic.density    element/item incidence density (epsilon-perturbed-coverage)
    synthetic.zero_prob  flat-step probability (random-monotone)
    gim.graph            edge-list path, relative to the config file
    gim.generator        ba:<nodes>:<edges per new node>, used instead of gim.graph
    gim.directed         true | false (edge-list input only)
    gim.levels           number of incentive levels L
    gim.samples          Monte Carlo samples per estimate
    gim.node_model       linear | max-only
    gim.edge_model       linear | constant
    algorithms           comma-separated subset of standard, threshold, fast, parallel
    params.kappa         threshold decay (default 0.95)
    params.delta         FastGreedy uptick factor (default 0.9)
    params.epsilon       accuracy parameter (default 0.05)
    params.workers       worker threads for the parallel variant (default 1)
    budget.k             comma-separated budgets
    budget.K             comma-separated budgets in units of L (gim only)
    repetitions          repetitions per (algorithm, budget) cell
    seed                 master seed
    output.dir           output directory, relative to the config file
    output.timing        record wall-clock seconds (default true)
    bound.gamma_d        DR ratio used to fill the bound column
    bound.gamma_s        submodularity ratio used to fill the bound column
    bound.alpha          curvature used to fill the bound column
    metrics.point_cap    point cap for the enumeration diagnostics
    metrics.pair_cap     pair cap for the enumeration diagnostics
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from ..maximizers import ALGORITHMS
from ..metrics import DEFAULT_PAIR_CAP, DEFAULT_POINT_CAP
from ..objectives import SYNTHETIC_KINDS


class ConfigError(ValueError):
    pass


KNOWN_KEYS = frozenset({
    "objective",
    "synthetic.kind", "synthetic.n", "synthetic.bound", "synthetic.weights", "synthetic.cap",
    "synthetic.epsilon", "synthetic.items", "synthetic.density", "synthetic.zero_prob",
    "gim.graph", "gim.generator", "gim.directed", "gim.levels", "gim.samples",
    "gim.node_model", "gim.edge_model",
    "algorithms", "params.kappa", "params.delta", "params.epsilon", "params.workers",
    "budget.k", "budget.K", "repetitions", "seed", "output.dir", "output.timing",
    "bound.gamma_d", "bound.gamma_s", "bound.alpha", "metrics.point_cap", "metrics.pair_cap",
})


@dataclass(frozen=True)
class ExperimentConfig:
    objective: str = "synthetic"
    synthetic_kind: str = "modular"
    synthetic_n: int = 10
    synthetic_params: dict = field(default_factory=dict)
    gim_graph: Path | None = None
    gim_generator: tuple[int, int] | None = None
    gim_directed: bool = False
    gim_levels: int = 10
    gim_samples: int = 1000
    gim_node_model: str = "linear"
    gim_edge_model: str = "linear"
    algorithms: tuple[str, ...] = ("standard", "threshold", "fast")
    kappa: float = 0.95
    delta: float = 0.9
    epsilon: float = 0.05
    workers: int = 1
    budgets: tuple[int, ...] = (1,)
    repetitions: int = 1
    seed: int = 0
    output_dir: Path = Path("out")
    timing: bool = True
    gamma_d: float | None = None
    gamma_s: float | None = None
    alpha: float | None = None
    point_cap: int = DEFAULT_POINT_CAP
    pair_cap: int = DEFAULT_PAIR_CAP

    def with_overrides(self, seed=None, output_dir=None, workers=None) -> "ExperimentConfig":
        kw = {}
        if seed is not None:
            kw["seed"] = int(seed)
        if output_dir is not None:
            kw["output_dir"] = Path(output_dir)
        if workers is not None:
            if int(workers) < 1:
                raise ConfigError("workers must be at least 1")
            kw["workers"] = int(workers)
        return replace(self, **kw)


def parse_key_values(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _int(raw: dict, key: str, default=None, low: int | None = None):
    if key not in raw:
        return default
    try:
        v = int(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw[key]!r}") from None
    if low is not None and v < low:
        raise ConfigError(f"{key}: must be at least {low}")
    return v


def _float(raw: dict, key: str, default=None):
    if key not in raw:
        return default
    try:
        return float(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw[key]!r}") from None


def _bool(raw: dict, key: str, default: bool) -> bool:
    if key not in raw:
        return default
    v = raw[key].lower()
    if v not in ("true", "false"):
        raise ConfigError(f"{key}: expected true or false")
    return v == "true"


def _int_list(raw: dict, key: str, low: int = 1) -> tuple[int, ...]:
    try:
        vals = tuple(int(p) for p in raw[key].split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated integers") from None
    if not vals or any(v < low for v in vals):
        raise ConfigError(f"{key}: need at least one value, each >= {low}")
    return vals


def config_from_mapping(raw: dict[str, str], base_dir: Path = Path(".")) -> ExperimentConfig:
    kw: dict = {}
    objective = raw.get("objective", "synthetic")
    if objective not in ("synthetic", "gim"):
        raise ConfigError(f"objective must be synthetic or gim, got {objective!r}")
    kw["objective"] = objective
    prefix_other = "gim." if objective == "synthetic" else "synthetic."
    stray = sorted(k for k in raw if k.startswith(prefix_other))
    if stray:
        raise ConfigError(f"keys {stray} do not apply to objective {objective!r}")

    if objective == "synthetic":
        kind = raw.get("synthetic.kind", "modular")
        if kind not in SYNTHETIC_KINDS:
            raise ConfigError(f"synthetic.kind must be one of {SYNTHETIC_KINDS}")
        kw["synthetic_kind"] = kind
        kw["synthetic_n"] = _int(raw, "synthetic.n", 10, low=1)
        params: dict = {}
        if "synthetic.bound" in raw:
            params["bounds"] = [_int(raw, "synthetic.bound", low=0)] * kw["synthetic_n"]
        if "synthetic.weights" in raw:
            try:
                params["weights"] = [float(p) for p in raw["synthetic.weights"].split(",")]
            except ValueError:
                raise ConfigError("synthetic.weights: expected comma-separated numbers") from None
        for name in ("cap", "epsilon", "density", "zero_prob"):
            if f"synthetic.{name}" in raw:
                params[name] = _float(raw, f"synthetic.{name}")
        if "synthetic.items" in raw:
            params["items"] = _int(raw, "synthetic.items", low=1)
        kw["synthetic_params"] = params
    else:
        if ("gim.graph" in raw) == ("gim.generator" in raw):
            raise ConfigError("give exactly one of gim.graph and gim.generator")
        if "gim.graph" in raw:
            kw["gim_graph"] = (base_dir / raw["gim.graph"]).resolve()
        else:
            parts = raw["gim.generator"].split(":")
            if len(parts) != 3 or parts[0] != "ba" or not all(p.isdigit() for p in parts[1:]):
                raise ConfigError("gim.generator must look like ba:<nodes>:<edges per node>")
            kw["gim_generator"] = (int(parts[1]), int(parts[2]))
        kw["gim_directed"] = _bool(raw, "gim.directed", False)
        kw["gim_levels"] = _int(raw, "gim.levels", 10, low=1)
        kw["gim_samples"] = _int(raw, "gim.samples", 1000, low=1)
        kw["gim_node_model"] = raw.get("gim.node_model", "linear")
        kw["gim_edge_model"] = raw.get("gim.edge_model", "linear")

    if "algorithms" in raw:
        algs = tuple(a.strip() for a in raw["algorithms"].split(",") if a.strip())
        unknown = [a for a in algs if a not in ALGORITHMS]
        if unknown or not algs:
            raise ConfigError(f"algorithms: unknown {unknown}; choose from {sorted(ALGORITHMS)}")
        kw["algorithms"] = algs
    for name in ("kappa", "delta", "epsilon"):
        v = _float(raw, f"params.{name}")
        if v is not None:
            kw[name] = v
    kw["workers"] = _int(raw, "params.workers", 1, low=1)

    if ("budget.k" in raw) == ("budget.K" in raw):
        raise ConfigError("give exactly one of budget.k and budget.K")
    if "budget.k" in raw:
        kw["budgets"] = _int_list(raw, "budget.k")
    else:
        if objective != "gim":
            raise ConfigError("budget.K is only meaningful for gim objectives")
        kw["budgets"] = tuple(K * kw["gim_levels"] for K in _int_list(raw, "budget.K"))

    kw["repetitions"] = _int(raw, "repetitions", 1, low=0)
    kw["seed"] = _int(raw, "seed", 0, low=0)
    kw["output_dir"] = (base_dir / raw.get("output.dir", "out")).resolve()
    kw["timing"] = _bool(raw, "output.timing", True)
    for name in ("gamma_d", "gamma_s", "alpha"):
        v = _float(raw, f"bound.{name}")
        if v is not None and not 0 <= v <= 1:
            raise ConfigError(f"bound.{name} must lie in [0, 1]")
        kw[name] = v
    kw["point_cap"] = _int(raw, "metrics.point_cap", DEFAULT_POINT_CAP, low=1)
    kw["pair_cap"] = _int(raw, "metrics.pair_cap", DEFAULT_PAIR_CAP, low=1)
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return config_from_mapping(parse_key_values(text, str(path)), path.parent)
