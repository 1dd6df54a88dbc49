"""Parameter sweeps over built-in scenarios with per-trial CSV output.

Each trial uses seed ``base_seed + trial``, the same at every sweep point
(common random numbers), so differences between points come from the
swept parameter and not from fresh random draws.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .approx import find_beta_psne
from .costs import social_welfare
from .equilibrium import find_psne_state_graph
from .errors import CachingError, ScenarioError, SearchLimitError
from .metrics import brute_force_optimum, lp_upper_bound
from .scenarios import build

__all__ = ["ExperimentConfig", "TrialResult", "run_experiment", "write_csv", "summarize",
           "write_summary_csv", "CSV_HEADER"]

CSV_HEADER = ("sweep", "trial", "seed", "G_ne", "G_opt", "L_upper", "ratio", "status")
SWEEPS = ("capacity", "n_type2", "extra_nodes", "total_capacity")
METRICS = ("G_ne", "G_opt_exact", "L_upper", "ratio", "poa_bounds")


@dataclass
class ExperimentConfig:
    """What to sweep and what to measure.

    ``ratio_denominator`` picks the ``ratio`` column: ``"upper"`` divides
    the equilibrium welfare by the LP bound (a ratio that understates the
    price of anarchy), ``"exact"`` by the brute-force optimum.
    """

    sweep: str
    values: list
    scenario: str = "abilene"
    params: dict = field(default_factory=dict)
    trials: int = 10
    base_seed: int = 0
    metrics: list = field(default_factory=lambda: ["G_ne", "L_upper", "ratio"])
    ratio_denominator: str = "upper"
    opt_limit: int = 10**6
    workers: int = 1

    def __post_init__(self):
        if self.sweep not in SWEEPS:
            raise ValueError(f"sweep must be one of {SWEEPS}")
        if not self.values:
            raise ValueError("sweep values must be nonempty")
        if int(self.trials) < 1:
            raise ValueError("trials must be >= 1")
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}")
        if self.ratio_denominator not in ("upper", "exact"):
            raise ValueError("ratio_denominator must be 'upper' or 'exact'")
        if "ratio" in self.metrics and "G_ne" not in self.metrics:
            raise ValueError("ratio needs G_ne")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(**d)


@dataclass
class TrialResult:
    sweep: object
    trial: int
    seed: int
    G_ne: float | None = None
    G_opt: float | None = None
    L_upper: float | None = None
    ratio: float | None = None
    status: str = "ok"


def _instance(cfg, value, seed):
    params = dict(cfg.params, seed=seed)
    if cfg.sweep == "total_capacity":
        net = build(cfg.scenario, **dict(params, capacity=0))
        # one extra unit per step, node 1 first, wrapping around
        caps = np.zeros(net.n_nodes)
        for k in range(int(value)):
            caps[k % net.n_nodes] += 1
        return net.with_capacities(caps)
    net = build(cfg.scenario, **dict(params, **{cfg.sweep: value}))
    if isinstance(net, tuple):
        raise ScenarioError("experiments need a single-network scenario")
    return net


def _run_trial(cfg, value, trial):
    seed = cfg.base_seed + trial
    res = TrialResult(value, trial, seed)
    try:
        net = _instance(cfg, value, seed)
        if "G_ne" in cfg.metrics:
            eq = find_psne_state_graph(net, seed=seed) if net.equal_sizes else find_beta_psne(net)
            res.G_ne = social_welfare(net, eq.profile)
        need_exact = "G_opt_exact" in cfg.metrics or (
            "ratio" in cfg.metrics and cfg.ratio_denominator == "exact")
        if need_exact:
            res.G_opt = brute_force_optimum(net, cfg.opt_limit)[1]
        if "L_upper" in cfg.metrics or ("ratio" in cfg.metrics and cfg.ratio_denominator == "upper"):
            res.L_upper = lp_upper_bound(net)[1]
        if "ratio" in cfg.metrics:
            den = res.G_opt if cfg.ratio_denominator == "exact" else res.L_upper
            res.ratio = 1.0 if den <= 1e-12 else res.G_ne / den
    except (CachingError, SearchLimitError) as exc:
        res.status = f"failed:{type(exc).__name__}"
    return res


def run_experiment(cfg: ExperimentConfig) -> list:
    """All trials, ordered by (sweep point, trial index).

    Library errors inside a trial (non-termination, search limits, invalid
    scenario parameters) mark that trial as failed; the sweep continues.
    """
    jobs = [(cfg, v, t) for v in cfg.values for t in range(int(cfg.trials))]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            return list(pool.map(_run_trial, *zip(*jobs)))
    return [_run_trial(*job) for job in jobs]


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(round(x, 10))
    return str(x)


def write_csv(results, out=None) -> str:
    """Per-trial CSV; returns the text and writes it to ``out`` if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text


def summarize(results, ratio_denominator: str = "upper") -> list:
    """Mean and standard deviation per sweep point over successful trials.

    The ratio is reported as ``ratio_upper`` when its denominator is the LP
    bound and as ``poa`` when it is the exact optimum.
    """
    label = "ratio_upper" if ratio_denominator == "upper" else "poa"
    points = {}
    for r in results:
        points.setdefault(r.sweep, []).append(r)
    rows = []
    for value, rs in points.items():
        ok = [r for r in rs if r.status == "ok"]
        row = {"sweep": value, "n_ok": len(ok), "n_failed": len(rs) - len(ok)}
        for key, name in (("G_ne", "G_ne"), ("G_opt", "G_opt"), ("L_upper", "L_upper"), ("ratio", label)):
            vals = [getattr(r, key) for r in ok if getattr(r, key) is not None]
            row[f"{name}_mean"] = float(np.mean(vals)) if vals else math.nan
            row[f"{name}_std"] = float(np.std(vals)) if vals else math.nan
        rows.append(row)
    return rows


def write_summary_csv(rows, out=None) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if isinstance(v, float) and math.isnan(v) else _fmt(v))
                        for k, v in row.items()})
    text = buf.getvalue()
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text
