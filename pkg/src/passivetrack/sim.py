"""Scenario truth generation and measurement synthesis.

Targets follow noiseless straight-line motion between their configured
birth and death steps. Each scan, every present target is detected on each
sensor pair independently with the configured probability; a detection is a
joint (dt, df) value with Gaussian errors, and each pair also receives a
Poisson number of uniform clutter points. Scenario files are JSON and
round-trip losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import SensorPair, predict_measurement
from .models import ClutterModel, MeasurementModel, MotionModel, PairMeasurement


@dataclass(frozen=True)
class Aoi:
    """Axis-aligned rectangular area of interest, meters."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if self.xmax <= self.xmin or self.ymax <= self.ymin:
            raise ValueError("aoi must have positive extent")

    def contains(self, x, y) -> bool:
        return bool(
            np.all((x >= self.xmin) & (x <= self.xmax))
            and np.all((y >= self.ymin) & (y <= self.ymax))
        )

    @property
    def center(self):
        return 0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax)

    def as_tuple(self):
        return (self.xmin, self.xmax, self.ymin, self.ymax)


@dataclass(frozen=True)
class TargetSpec:
    """Initial state plus lifetime: present for steps in [birth, death)."""

    state: np.ndarray
    birth: int
    death: int

    def __post_init__(self):
        object.__setattr__(self, "state", np.asarray(self.state, dtype=float))
        if self.state.shape != (4,):
            raise ValueError("target state must be a 4-vector [x, vx, y, vy]")


@dataclass
class Scenario:
    """Everything needed to simulate one tracking experiment."""

    aoi: Aoi
    sensors: list
    pairs: list
    targets: list
    steps: int
    motion: MotionModel
    measurement: MeasurementModel
    clutter_lambda: float
    clutter_v_max: float

    def __post_init__(self):
        self.sensors = [np.asarray(s, dtype=float) for s in self.sensors]
        self.validate()

    def validate(self):
        if self.steps < 1:
            raise ValueError("scenario.steps: must be at least 1")
        if len(self.sensors) < 2:
            raise ValueError("scenario.sensors: need at least two sensors")
        if len(self.pairs) < 1:
            raise ValueError("scenario.pairs: need at least one sensor pair")
        for k, (i, j) in enumerate(self.pairs):
            if not (0 <= i < len(self.sensors) and 0 <= j < len(self.sensors)) or i == j:
                raise ValueError(f"scenario.pairs[{k}]: invalid sensor indices ({i}, {j})")
        for k, t in enumerate(self.targets):
            if not 0 <= t.birth < t.death <= self.steps:
                raise ValueError(
                    f"scenario.targets[{k}]: require 0 <= birth < death <= steps, "
                    f"got birth={t.birth}, death={t.death}"
                )
            if not self.aoi.contains(t.state[0], t.state[2]):
                raise ValueError(f"scenario.targets[{k}]: initial position outside aoi")
        if self.clutter_lambda < 0.0:
            raise ValueError("scenario.clutter_lambda: must be nonnegative")
        if self.clutter_v_max <= 0.0:
            raise ValueError("scenario.clutter_v_max: must be positive")

    def sensor_pairs(self) -> list:
        return [SensorPair.from_positions(self.sensors[i], self.sensors[j]) for i, j in self.pairs]

    def clutter_models(self) -> list:
        return [
            ClutterModel.for_pair(
                self.clutter_lambda, self.clutter_v_max,
                self.measurement.fc, self.measurement.c, pair,
            )
            for pair in self.sensor_pairs()
        ]

    def to_dict(self) -> dict:
        return {
            "aoi": {
                "xmin": self.aoi.xmin, "xmax": self.aoi.xmax,
                "ymin": self.aoi.ymin, "ymax": self.aoi.ymax,
            },
            "sensors": [list(map(float, s)) for s in self.sensors],
            "pairs": [list(p) for p in self.pairs],
            "targets": [
                {"state": list(map(float, t.state)), "birth": t.birth, "death": t.death}
                for t in self.targets
            ],
            "steps": self.steps,
            "motion": {"T": self.motion.T, "q": self.motion.q, "ps": self.motion.ps},
            "measurement": {
                "sigma_dt": self.measurement.sigma_dt,
                "sigma_df": self.measurement.sigma_df,
                "pd": self.measurement.pd,
                "fc": self.measurement.fc,
                "c": self.measurement.c,
            },
            "clutter": {"lambda": self.clutter_lambda, "v_max": self.clutter_v_max},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        def need(mapping, key, where):
            if key not in mapping:
                raise ValueError(f"scenario file missing field: {where}{key}")
            return mapping[key]

        aoi = need(data, "aoi", "")
        motion = need(data, "motion", "")
        meas = need(data, "measurement", "")
        clutter = need(data, "clutter", "")
        return cls(
            aoi=Aoi(
                need(aoi, "xmin", "aoi."), need(aoi, "xmax", "aoi."),
                need(aoi, "ymin", "aoi."), need(aoi, "ymax", "aoi."),
            ),
            sensors=need(data, "sensors", ""),
            pairs=[tuple(p) for p in need(data, "pairs", "")],
            targets=[
                TargetSpec(
                    need(t, "state", f"targets[{k}]."),
                    need(t, "birth", f"targets[{k}]."),
                    need(t, "death", f"targets[{k}]."),
                )
                for k, t in enumerate(need(data, "targets", ""))
            ],
            steps=need(data, "steps", ""),
            motion=MotionModel(
                need(motion, "T", "motion."), need(motion, "q", "motion."),
                need(motion, "ps", "motion."),
            ),
            measurement=MeasurementModel(
                need(meas, "sigma_dt", "measurement."),
                need(meas, "sigma_df", "measurement."),
                need(meas, "pd", "measurement."),
                need(meas, "fc", "measurement."),
                need(meas, "c", "measurement."),
            ),
            clutter_lambda=need(clutter, "lambda", "clutter."),
            clutter_v_max=need(clutter, "v_max", "clutter."),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class ScanMeasurements:
    """One scan: per-pair measurement lists plus hidden origin labels.

    ``per_pair[k]`` is the filter-facing list of measurements for pair k.
    ``truth_labels[k]`` holds, for diagnostics only, the originating target
    index of each measurement (-1 for clutter); it carries no information
    the filter is allowed to use.
    """

    step: int
    per_pair: list
    truth_labels: list = field(default_factory=list)


def generate_truth(scenario: Scenario, rng: np.random.Generator | None = None):
    """Per-step arrays of true target states, shape (n_k, 4).

    Truth follows noiseless straight-line motion from each target's initial
    state; ``rng`` is accepted for signature symmetry but unused.
    """
    T = scenario.motion.T
    out = []
    for k in range(scenario.steps):
        states = [
            t.state + np.array([t.state[1], 0.0, t.state[3], 0.0]) * (T * (k - t.birth))
            for t in scenario.targets
            if t.birth <= k < t.death
        ]
        out.append(np.array(states).reshape(-1, 4))
    return out


def generate_measurements(
    truth_states,
    scenario: Scenario,
    rng: np.random.Generator,
    step: int = 0,
) -> ScanMeasurements:
    """Synthesize one scan of detections and clutter for every pair."""
    truth_states = np.asarray(truth_states, dtype=float).reshape(-1, 4)
    meas = scenario.measurement
    per_pair, labels = [], []
    for pair, clutter in zip(scenario.sensor_pairs(), scenario.clutter_models()):
        zs, ids = [], []
        n = truth_states.shape[0]
        if n:
            detected = rng.random(n) < meas.pd
            if detected.any():
                dt, df = predict_measurement(pair, truth_states[detected], meas.fc, meas.c)
                dt = dt + rng.normal(0.0, meas.sigma_dt, dt.shape)
                df = df + rng.normal(0.0, meas.sigma_df, df.shape)
                for tid, a, b in zip(np.flatnonzero(detected), dt, df):
                    zs.append(PairMeasurement(float(a), float(b)))
                    ids.append(int(tid))
        for z in clutter.sample(rng):
            zs.append(z)
            ids.append(-1)
        order = rng.permutation(len(zs))
        per_pair.append([zs[i] for i in order])
        labels.append([ids[i] for i in order])
    return ScanMeasurements(step=step, per_pair=per_pair, truth_labels=labels)
