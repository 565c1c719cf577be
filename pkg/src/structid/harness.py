"""Config-driven experiment runner: noise sweeps over the four
identification configurations with repeated trials, CSV/JSON reports, and
TPR boxplot figures.

Per-trial noise seeds derive from (base seed, system, noise level, trial)
only, so all four configurations within a trial see the identical noise
realization and differences isolate the method, not the draw.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .benchmarks import (
    CONFIGURATIONS,
    Benchmark,
    benchmark,
    libraries_for,
    resimulation_error,
    run_configuration,
)
from .data import GridDataset
from .dictionary import truth_model
from .noise import add_noise, coeff_error, tpr, trial_seed
from .simulate import simulate


@dataclass(frozen=True)
class ExperimentConfig:
    system: str
    configurations: tuple[str, ...] = CONFIGURATIONS
    noise_levels: tuple[float, ...] | None = None  # None: the system's grid
    trials: int = 20
    base_seed: int = 0
    sigma_mode: str = "rms"
    resimulate_state_error: bool = False  # trial 0 of each (config, noise) cell
    full_scale: bool = False
    threads: int = 1
    sim_overrides: tuple[tuple[str, float], ...] = ()
    pipeline_overrides: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("need at least one trial")
        for conf in self.configurations:
            if conf not in CONFIGURATIONS:
                raise ValueError(f"unknown configuration {conf!r}")
        if self.noise_levels is not None:
            for nsr in self.noise_levels:
                if not 0.0 <= nsr <= 1.0:
                    raise ValueError("noise levels must lie in [0, 1]")


@dataclass(frozen=True)
class TrialRecord:
    system: str
    config: str
    nsr: float
    trial: int
    tpr: float = math.nan
    theta_star: int = -1
    coeff_error: float = math.nan
    state_error: float = math.nan
    support: tuple[str, ...] = ()
    coefficients: tuple[float, ...] = ()
    failure: str = ""


@dataclass(frozen=True)
class ExperimentReport:
    system: str
    noise_levels: tuple[float, ...]
    configurations: tuple[str, ...]
    trials: int
    base_seed: int
    records: tuple[TrialRecord, ...]

    def cell(self, config: str, nsr: float) -> list[TrialRecord]:
        return [r for r in self.records if r.config == config and r.nsr == nsr]

    def median_tpr(self, config: str, nsr: float) -> float:
        vals = [r.tpr for r in self.cell(config, nsr) if not math.isnan(r.tpr)]
        return float(np.median(vals)) if vals else math.nan

    def aggregates(self) -> list[dict]:
        out = []
        for config in self.configurations:
            for nsr in self.noise_levels:
                vals = [r.tpr for r in self.cell(config, nsr) if not math.isnan(r.tpr)]
                if vals:
                    q1, q2, q3 = np.percentile(vals, [25, 50, 75])
                    out.append({"config": config, "nsr": nsr, "n": len(vals),
                                "tpr_q1": float(q1), "tpr_median": float(q2),
                                "tpr_q3": float(q3), "tpr_mean": float(np.mean(vals))})
                else:
                    out.append({"config": config, "nsr": nsr, "n": 0})
        return out


def _run_cell(bench: Benchmark, libs, clean: GridDataset, cfg: ExperimentConfig,
              nsr: float, trial: int) -> list[TrialRecord]:
    seed = trial_seed(cfg.base_seed, cfg.system, nsr, trial)
    noisy = add_noise(clean, nsr, seed, cfg.sigma_mode)
    records = []
    for conf in cfg.configurations:
        try:
            model, dictionary = run_configuration(bench, noisy, conf, libs)
            truth = truth_model(dictionary)
            st_err = math.nan
            if cfg.resimulate_state_error and trial == 0:
                try:
                    st_err = resimulation_error(bench, model, dictionary, clean).total
                except Exception:
                    st_err = math.inf  # identified model not integrable
            records.append(TrialRecord(
                system=cfg.system, config=conf, nsr=nsr, trial=trial,
                tpr=tpr(truth, model),
                theta_star=model.trace.theta_star if model.trace else model.sparsity,
                coeff_error=coeff_error(truth, model, dictionary.n_terms),
                state_error=st_err,
                support=tuple(dictionary.terms[j].name for j in model.support),
                coefficients=tuple(float(c) for c in model.coefficients),
            ))
        except Exception as exc:  # keep the sweep alive, mark the cell
            records.append(TrialRecord(system=cfg.system, config=conf, nsr=nsr,
                                       trial=trial, failure=str(exc)))
    return records


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    bench = benchmark(cfg.system, full_scale=cfg.full_scale,
                      **dict(cfg.sim_overrides))
    if cfg.pipeline_overrides:
        bench = replace(bench, pipeline=replace(bench.pipeline,
                                                **dict(cfg.pipeline_overrides)))
    noise_levels = tuple(cfg.noise_levels) if cfg.noise_levels is not None else bench.noise_levels
    clean = simulate(bench.sim)
    libs = libraries_for(bench)

    cells = [(nsr, trial) for nsr in noise_levels for trial in range(cfg.trials)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            per_cell = list(pool.map(
                lambda c: _run_cell(bench, libs, clean, cfg, c[0], c[1]), cells))
    else:
        per_cell = [_run_cell(bench, libs, clean, cfg, nsr, trial) for nsr, trial in cells]

    by_key = {}
    for recs in per_cell:
        for r in recs:
            by_key[(r.config, r.nsr, r.trial)] = r
    ordered = [by_key[(conf, nsr, trial)]
               for conf in cfg.configurations
               for nsr in noise_levels
               for trial in range(cfg.trials)]
    return ExperimentReport(system=cfg.system, noise_levels=noise_levels,
                            configurations=tuple(cfg.configurations),
                            trials=cfg.trials, base_seed=cfg.base_seed,
                            records=tuple(ordered))


# --------------------------------------------------------------------------
# Report emission
# --------------------------------------------------------------------------

CSV_COLUMNS = ("system", "config", "nsr", "trial", "tpr", "theta_star",
               "coeff_error", "state_error", "support")


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return ""
    return repr(float(x))


def emit_csv(report: ExperimentReport, path) -> None:
    """One row per (configuration, noise, trial); byte-stable across reruns."""
    tmp = str(path) + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in report.records:
            w.writerow([r.system, r.config, _fmt(r.nsr), r.trial, _fmt(r.tpr),
                        r.theta_star, _fmt(r.coeff_error), _fmt(r.state_error),
                        "|".join(r.support) if not r.failure else f"FAILED:{r.failure}"])
    os.replace(tmp, path)


def report_to_json(report: ExperimentReport) -> str:
    doc = {
        "system": report.system,
        "noise_levels": list(report.noise_levels),
        "configurations": list(report.configurations),
        "trials": report.trials,
        "base_seed": report.base_seed,
        "aggregates": report.aggregates(),
        "records": [
            {
                "system": r.system, "config": r.config, "nsr": r.nsr, "trial": r.trial,
                "tpr": None if math.isnan(r.tpr) else r.tpr,
                "theta_star": r.theta_star,
                "coeff_error": None if math.isnan(r.coeff_error) else r.coeff_error,
                "state_error": None if math.isnan(r.state_error) else r.state_error,
                "support": list(r.support),
                "coefficients": list(r.coefficients),
                "failure": r.failure,
            }
            for r in report.records
        ],
    }
    return json.dumps(doc, indent=2)


def report_from_json(text: str) -> ExperimentReport:
    doc = json.loads(text)
    records = tuple(
        TrialRecord(
            system=r["system"], config=r["config"], nsr=r["nsr"], trial=r["trial"],
            tpr=math.nan if r["tpr"] is None else r["tpr"],
            theta_star=r["theta_star"],
            coeff_error=math.nan if r["coeff_error"] is None else r["coeff_error"],
            state_error=math.nan if r["state_error"] is None else r["state_error"],
            support=tuple(r["support"]),
            coefficients=tuple(r["coefficients"]),
            failure=r["failure"],
        )
        for r in doc["records"]
    )
    return ExperimentReport(system=doc["system"], noise_levels=tuple(doc["noise_levels"]),
                            configurations=tuple(doc["configurations"]),
                            trials=doc["trials"], base_seed=doc["base_seed"],
                            records=records)


def save_report(report: ExperimentReport, directory, stem: str | None = None) -> dict:
    os.makedirs(directory, exist_ok=True)
    stem = stem or report.system
    csv_path = os.path.join(directory, f"{stem}.csv")
    json_path = os.path.join(directory, f"{stem}.json")
    emit_csv(report, csv_path)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(report_to_json(report))
    os.replace(tmp, json_path)
    return {"csv": csv_path, "json": json_path}


_CONF_TITLES = {
    "conf1": "separate / strong form",
    "conf2": "separate / weak form",
    "conf3": "structured / strong form",
    "conf4": "structured / weak form",
}


def emit_plots(report: ExperimentReport, directory) -> list[str]:
    """TPR-vs-noise boxplots, one panel per configuration."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(directory, exist_ok=True)
    paths = []
    n = len(report.configurations)
    ncols = 2 if n > 1 else 1
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(5.5 * ncols, 4.0 * nrows),
                             squeeze=False)
    for i, conf in enumerate(report.configurations):
        ax = axes[i // ncols][i % ncols]
        data = []
        for nsr in report.noise_levels:
            vals = [r.tpr for r in report.cell(conf, nsr) if not math.isnan(r.tpr)]
            data.append(vals if vals else [0.0])
        ax.boxplot(data, tick_labels=[f"{int(round(100*s))}%" for s in report.noise_levels])
        ax.set_title(f"{report.system}: {_CONF_TITLES.get(conf, conf)}")
        ax.set_xlabel("noise-to-signal ratio")
        ax.set_ylabel("TPR")
        ax.set_ylim(-0.05, 1.05)
        ax.grid(True, alpha=0.3)
    for j in range(n, nrows * ncols):
        axes[j // ncols][j % ncols].axis("off")
    fig.tight_layout()
    out = os.path.join(directory, f"{report.system}_tpr.png")
    fig.savefig(out, dpi=120)
    plt.close(fig)
    paths.append(out)
    return paths
