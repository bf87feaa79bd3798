"""Command line interface: experiment runs, metric evaluation, reports."""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import click
import numpy as np

from .birth import BirthConfig, sample_birth_particles
from .geometry import SensorPair
from .harness import ConfigError, load_experiment, run_monte_carlo
from .metrics import OspaParams, ospa
from .models import MeasurementModel, PairMeasurement
from .report import render_report


@click.group()
def main():
    """Passive multi-target tracking toolkit."""


@main.command(name="run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="Experiment config JSON.")
@click.option("--runs", type=int, default=None, help="Override Monte Carlo run count.")
@click.option("--seed", type=int, default=None, help="Override master seed.")
@click.option("--filter", "filter_kind", type=click.Choice(["phdf-m", "phdf-u"]),
              default=None, help="Override filter kind.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Override output directory.")
def run_cmd(config_path, runs, seed, filter_kind, out_dir):
    """Run a single- or multi-run tracking experiment and write result CSVs."""
    overrides = {
        "mc_runs": runs,
        "master_seed": seed,
        "filter": filter_kind,
        "out_dir": out_dir,
    }
    try:
        config = load_experiment(config_path, overrides)
        run_monte_carlo(config)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {config.mc_runs} run(s) to {config.out_dir}")


def _read_state_sets(path):
    """Per-step state sets from a CSV with columns step,x,y[,vx,vy]."""
    sets: dict[int, list] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"step", "x", "y"} <= set(reader.fieldnames):
            raise ConfigError(f"{path}: need columns step,x,y")
        for row in reader:
            sets.setdefault(int(row["step"]), []).append([float(row["x"]), float(row["y"])])
    return {k: np.array(v) for k, v in sets.items()}


@main.command(name="ospa")
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True))
@click.option("--estimates", "est_path", required=True, type=click.Path(exists=True))
@click.option("--cutoff", type=float, default=20.0, show_default=True)
@click.option("--order", type=float, default=1.0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write CSV here instead of stdout.")
def ospa_cmd(truth_path, est_path, cutoff, order, out_path):
    """Per-step miss distance between two step-indexed state-set CSVs."""
    try:
        params = OspaParams(cutoff=cutoff, order=order)
        truth = _read_state_sets(truth_path)
        estimates = _read_state_sets(est_path)
    except (ConfigError, ValueError) as exc:
        raise click.ClickException(str(exc))
    steps = sorted(set(truth) | set(estimates))
    empty = np.empty((0, 2))
    sink = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["step", "ospa_total", "ospa_loc", "ospa_card"])
        for step in steps:
            result = ospa(truth.get(step, empty), estimates.get(step, empty), params)
            writer.writerow([step, str(result.total), str(result.localization),
                             str(result.cardinality)])
    finally:
        if out_path:
            sink.close()


@main.command(name="sample-birth")
@click.option("--pair", "pair_spec", required=True,
              help="Sensor pair as X1,Y1,X2,Y2 in meters.")
@click.option("--tdoa", required=True, type=float, help="Time difference, seconds.")
@click.option("--fdoa", required=True, type=float, help="Frequency difference, Hz.")
@click.option("-n", "count", type=int, default=500, show_default=True)
@click.option("--sigma-dt", type=float, default=2e-8, show_default=True)
@click.option("--sigma-df", type=float, default=2.5, show_default=True)
@click.option("--fc", type=float, default=2.4e9, show_default=True)
@click.option("--r-max", type=float, default=2000.0, show_default=True)
@click.option("--v-max", type=float, default=25.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
def sample_birth_cmd(pair_spec, tdoa, fdoa, count, sigma_dt, sigma_df, fc,
                     r_max, v_max, seed, out_path):
    """Draw newborn particles for one measurement and emit them as CSV."""
    try:
        coords = [float(v) for v in pair_spec.split(",")]
        if len(coords) != 4:
            raise ValueError("expected four comma-separated numbers")
        pair = SensorPair.from_positions(coords[:2], coords[2:])
        model = MeasurementModel(sigma_dt=sigma_dt, sigma_df=sigma_df, pd=1.0, fc=fc)
        cfg = BirthConfig(r_max=r_max, v_max=v_max, m_b=count)
        rng = np.random.default_rng(seed)
        draw = sample_birth_particles(pair, PairMeasurement(tdoa, fdoa), model, cfg, rng)
    except ValueError as exc:
        raise click.ClickException(f"--pair/--tdoa/--fdoa: {exc}")
    sink = open(out_path, "w", newline="") if out_path else sys.stdout
    try:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["x", "vx", "y", "vy", "delta_r", "r1", "alpha",
                         "delta_rr", "theta", "speed"])
        for i in range(len(draw)):
            writer.writerow(
                [str(v) for v in draw.states[i]]
                + [str(draw.delta_r[i]), str(draw.r1[i]), str(draw.alpha[i]),
                   str(draw.delta_rr[i]), str(draw.theta[i]), str(draw.speed[i])]
            )
    finally:
        if out_path:
            sink.close()


@main.command(name="plot")
@click.option("--results", "result_dirs", multiple=True, required=True,
              type=click.Path(exists=True), help="Result directory (repeatable).")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Figure directory (defaults to the first results dir).")
def plot_cmd(result_dirs, out_dir):
    """Render figures from experiment result CSVs."""
    target = Path(out_dir) if out_dir else Path(result_dirs[0])
    try:
        written = render_report(list(result_dirs), target)
    except (OSError, ValueError, KeyError) as exc:
        raise click.ClickException(f"could not render figures: {exc}")
    for path in written:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
