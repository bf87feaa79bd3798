"""Experiment driver: single runs, Monte Carlo batches, and result files.

Run ``i`` of an experiment derives its random stream from the pair
``(master_seed, i)`` through numpy's SeedSequence hash expansion, so adding
runs never perturbs earlier ones and runs may execute in any order.
Results are written as one CSV per run plus a per-step median summary CSV,
with a JSON sidecar recording the fully resolved configuration.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .birth import BirthConfig
from .metrics import OspaParams, ospa, solve_assignment
from .phd import FilterConfig, FilterState, ModelSet, iterated_corrector_scan
from .sim import Scenario, generate_measurements, generate_truth

CSV_COLUMNS = [
    "step",
    "ospa_total",
    "ospa_loc",
    "ospa_card",
    "est_cardinality",
    "true_cardinality",
    "n_estimates",
]

FILTER_KINDS = ("phdf-m", "phdf-u")


class ConfigError(ValueError):
    """A configuration or scenario file failed validation."""


def builtin_scenario_path(name: str) -> Path:
    path = resources.files("passivetrack").joinpath("data", f"{name}.json")
    if not path.is_file():
        raise ConfigError(f"scenario: unknown builtin scenario '{name}'")
    return Path(str(path))


def load_scenario(ref: str) -> Scenario:
    """Load a scenario from a file path or a builtin name."""
    path = Path(ref)
    if not path.is_file():
        path = builtin_scenario_path(ref)
    try:
        return Scenario.load(path)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"scenario '{ref}': {exc}") from exc


@dataclass
class ExperimentConfig:
    """Resolved experiment setup driving one or more Monte Carlo runs."""

    scenario_ref: str
    scenario: Scenario
    filter_kind: str = "phdf-m"
    filter_config: FilterConfig = None
    ospa_params: OspaParams = field(default_factory=OspaParams)
    mc_runs: int = 1
    master_seed: int = 0
    out_dir: str = "results"

    def __post_init__(self):
        if self.filter_kind not in FILTER_KINDS:
            raise ConfigError(f"filter: must be one of {FILTER_KINDS}, got '{self.filter_kind}'")
        if self.mc_runs < 1:
            raise ConfigError("mc_runs: must be at least 1")
        if self.filter_config is None:
            self.filter_config = default_filter_config(self.scenario, self.filter_kind)

    def to_dict(self) -> dict:
        fc = self.filter_config
        return {
            "scenario_ref": self.scenario_ref,
            "scenario": self.scenario.to_dict(),
            "filter": self.filter_kind,
            "filter_config": {
                "m_p": fc.m_p,
                "m_b": fc.birth.m_b,
                "nu_b": fc.birth.nu_b,
                "r_max": fc.birth.r_max,
                "v_max": fc.birth.v_max,
                "sensor_order": fc.sensor_order,
                "extraction_threshold": fc.extraction_threshold,
                "merge_radius": fc.merge_radius,
            },
            "ospa": {"cutoff": self.ospa_params.cutoff, "order": self.ospa_params.order},
            "mc_runs": self.mc_runs,
            "master_seed": self.master_seed,
            "out_dir": str(self.out_dir),
        }


def default_filter_config(scenario: Scenario, filter_kind: str) -> FilterConfig:
    birth = BirthConfig(r_max=2000.0, v_max=25.0, m_b=500, nu_b=1e-4)
    return FilterConfig(
        birth=birth,
        m_p=500,
        birth_mode="adaptive" if filter_kind == "phdf-m" else "uniform",
        aoi=scenario.aoi.as_tuple(),
    )


def load_experiment(path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse an experiment config JSON file, applying CLI overrides."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON ({exc})") from exc
    overrides = overrides or {}

    def pick(key, default=None):
        if key in overrides and overrides[key] is not None:
            return overrides[key]
        return raw.get(key, default)

    scenario_ref = pick("scenario")
    if scenario_ref is None:
        raise ConfigError("scenario: missing from config file")
    scenario = load_scenario(str(scenario_ref))

    filter_kind = pick("filter", "phdf-m")
    fc_raw = raw.get("filter_config", {})
    try:
        birth = BirthConfig(
            r_max=float(fc_raw.get("r_max", 2000.0)),
            v_max=float(fc_raw.get("v_max", 25.0)),
            m_b=int(fc_raw.get("m_b", 500)),
            nu_b=float(fc_raw.get("nu_b", 1e-4)),
        )
        filter_config = FilterConfig(
            birth=birth,
            m_p=int(fc_raw.get("m_p", 500)),
            sensor_order=fc_raw.get("sensor_order", "fixed"),
            extraction_threshold=float(fc_raw.get("extraction_threshold", 0.5)),
            merge_radius=float(fc_raw.get("merge_radius", 20.0)),
            birth_mode="adaptive" if filter_kind == "phdf-m" else "uniform",
            aoi=scenario.aoi.as_tuple(),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"filter_config: {exc}") from exc

    ospa_raw = raw.get("ospa", {})
    try:
        ospa_params = OspaParams(
            cutoff=float(ospa_raw.get("cutoff", 20.0)),
            order=float(ospa_raw.get("order", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"ospa: {exc}") from exc

    out_dir = os.environ.get("TRACK_OUT_DIR") or pick("out_dir", "results")
    if overrides.get("out_dir"):
        out_dir = overrides["out_dir"]
    try:
        return ExperimentConfig(
            scenario_ref=str(scenario_ref),
            scenario=scenario,
            filter_kind=str(filter_kind),
            filter_config=filter_config,
            ospa_params=ospa_params,
            mc_runs=int(pick("mc_runs", 1)),
            master_seed=int(pick("master_seed", 0)),
            out_dir=str(out_dir),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


@dataclass
class RunResult:
    """Per-step series for one run, plus run-level summaries.

    ``matched_distance`` holds the mean distance of confidently matched
    truth/estimate pairs (closer than half the miss-distance cutoff, so
    cut-off ghost matches are excluded); NaN where nothing matched
    confidently. It is diagnostic only and not part of the CSV schema.
    """

    steps: np.ndarray
    ospa_total: np.ndarray
    ospa_loc: np.ndarray
    ospa_card: np.ndarray
    est_cardinality: np.ndarray
    true_cardinality: np.ndarray
    n_estimates: np.ndarray
    matched_distance: np.ndarray = None
    wall_time: float = 0.0
    mean_newborn_mass: float = 0.0

    def rows(self):
        for i in range(self.steps.size):
            yield [
                int(self.steps[i]),
                float(self.ospa_total[i]),
                float(self.ospa_loc[i]),
                float(self.ospa_card[i]),
                float(self.est_cardinality[i]),
                int(self.true_cardinality[i]),
                int(self.n_estimates[i]),
            ]


def run_rng(master_seed: int, run_index: int) -> np.random.Generator:
    """Independent generator for run ``run_index``; order-insensitive."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(run_index)]))


def _confident_match_mean(truth, estimates, params: OspaParams):
    """Mean distance of matched pairs closer than half the cutoff (NaN if none)."""
    if truth.shape[0] == 0 or estimates.shape[0] == 0:
        return np.nan
    tp = truth[:, [0, 2]]
    ep = estimates[:, [0, 2]]
    dist = np.hypot(tp[:, None, 0] - ep[None, :, 0], tp[:, None, 1] - ep[None, :, 1])
    c, p = params.cutoff, params.order
    rows, cols = solve_assignment(np.minimum(dist, c) ** p)
    matched = dist[rows, cols]
    confident = matched[matched < 0.5 * c]
    return float(confident.mean()) if confident.size else np.nan


def run_single(config: ExperimentConfig, run_index: int) -> RunResult:
    """Simulate and track one realization; deterministic in (seed, index)."""
    scenario = config.scenario
    rng = run_rng(config.master_seed, run_index)
    truth = generate_truth(scenario)
    models = ModelSet(
        motion=scenario.motion,
        measurement=scenario.measurement,
        pairs=scenario.sensor_pairs(),
        clutter=scenario.clutter_models(),
    )
    state = FilterState.cold_start()
    n = scenario.steps
    out = RunResult(
        steps=np.arange(n),
        ospa_total=np.zeros(n),
        ospa_loc=np.zeros(n),
        ospa_card=np.zeros(n),
        est_cardinality=np.zeros(n),
        true_cardinality=np.zeros(n, dtype=int),
        n_estimates=np.zeros(n, dtype=int),
        matched_distance=np.full(n, np.nan),
    )
    newborn_masses = np.zeros(n)
    started = time.perf_counter()
    for k in range(n):
        scan = generate_measurements(truth[k], scenario, rng, step=k)
        state = iterated_corrector_scan(state, scan.per_pair, models, config.filter_config, rng)
        result = ospa(truth[k], state.extracted, config.ospa_params)
        out.ospa_total[k] = result.total
        out.ospa_loc[k] = result.localization
        out.ospa_card[k] = result.cardinality
        out.est_cardinality[k] = state.nu_hat_p
        out.true_cardinality[k] = truth[k].shape[0]
        out.n_estimates[k] = state.extracted.shape[0]
        out.matched_distance[k] = _confident_match_mean(
            truth[k], state.extracted, config.ospa_params
        )
        newborn_masses[k] = state.nu_hat_b
    out.wall_time = time.perf_counter() - started
    out.mean_newborn_mass = float(newborn_masses.mean())
    return out


def aggregate_medians(results) -> dict:
    """Per-step median across runs for every CSV column."""
    stack = lambda name: np.stack([getattr(r, name) for r in results])
    return {
        "step": results[0].steps,
        "ospa_total": np.median(stack("ospa_total"), axis=0),
        "ospa_loc": np.median(stack("ospa_loc"), axis=0),
        "ospa_card": np.median(stack("ospa_card"), axis=0),
        "est_cardinality": np.median(stack("est_cardinality"), axis=0),
        "true_cardinality": np.median(stack("true_cardinality"), axis=0),
        "n_estimates": np.median(stack("n_estimates"), axis=0),
    }


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([str(v) for v in row])


def write_run_csv(path, result: RunResult):
    _write_csv(path, result.rows())


def write_summary_csv(path, medians: dict):
    rows = []
    for i in range(medians["step"].size):
        rows.append(
            [int(medians["step"][i])]
            + [float(medians[c][i]) for c in CSV_COLUMNS[1:]]
        )
    _write_csv(path, rows)


def run_monte_carlo(config: ExperimentConfig, out_dir=None):
    """Run all realizations and write result files.

    Returns ``(medians, results)``: the per-step median dict and the list
    of per-run RunResult objects. Writes ``run_NNNN.csv`` per run,
    ``summary.csv`` with medians, ``config.json`` with the resolved
    configuration, and ``runs_meta.json`` with per-run wall time and mean
    newborn mass.
    """
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = [run_single(config, i) for i in range(config.mc_runs)]
    for i, result in enumerate(results):
        write_run_csv(out / f"run_{i:04d}.csv", result)
    medians = aggregate_medians(results)
    write_summary_csv(out / "summary.csv", medians)
    with open(out / "config.json", "w") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")
    with open(out / "runs_meta.json", "w") as fh:
        json.dump(
            {
                "runs": [
                    {
                        "run": i,
                        "wall_time_s": r.wall_time,
                        "mean_newborn_mass": r.mean_newborn_mass,
                    }
                    for i, r in enumerate(results)
                ]
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    return medians, results
