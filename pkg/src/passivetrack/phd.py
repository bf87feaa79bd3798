"""Particle intensity filter with measurement-driven births.

The filter maintains two weighted particle clouds approximating the target
intensity surface: a *persistent* cloud for targets carried over from
earlier steps and a *newborn* cloud for targets hypothesized from the
current measurements. Each scan runs one predict pass and then applies the
single-sensor update once per sensor pair in sequence; after each pair but
the last, that pair's updated newborn particles are promoted into the
persistent cloud so the next pair sees them. The persistent cloud is
resampled once per scan, after the final pair.

The weight sum of a cloud estimates the expected number of targets it
represents.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .birth import (
    BirthConfig,
    BirthSamplingError,
    sample_birth_particles,
    sample_uniform_birth,
)
from .geometry import SensorPair, TargetState
from .models import ClutterModel, MeasurementModel, MotionModel, measurements_to_array

PERSISTENT = "persistent"
NEWBORN = "newborn"


@dataclass(frozen=True)
class WeightedParticle:
    """One state hypothesis with its nonnegative weight."""

    state: TargetState
    weight: float

    def __post_init__(self):
        if not np.isfinite(self.weight) or self.weight < 0.0:
            raise ValueError("particle weight must be finite and nonnegative")


class ParticleSystem:
    """A weighted particle cloud tagged persistent or newborn.

    States are stored as an (N, 4) array and weights as an (N,) array so
    the filter arithmetic stays vectorized.
    """

    def __init__(self, states, weights, kind: str):
        if kind not in (PERSISTENT, NEWBORN):
            raise ValueError(f"kind must be '{PERSISTENT}' or '{NEWBORN}'")
        states = np.asarray(states, dtype=float).reshape(-1, 4)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if states.shape[0] != weights.shape[0]:
            raise ValueError("states and weights must have matching length")
        if weights.size and (not np.all(np.isfinite(weights)) or weights.min() < 0.0):
            raise ValueError("weights must be finite and nonnegative")
        self.states = states
        self.weights = weights
        self.kind = kind

    @classmethod
    def empty(cls, kind: str) -> "ParticleSystem":
        return cls(np.empty((0, 4)), np.empty(0), kind)

    @classmethod
    def from_particles(cls, particles, kind: str) -> "ParticleSystem":
        states = [p.state.as_array() for p in particles]
        weights = [p.weight for p in particles]
        return cls(np.array(states).reshape(-1, 4), np.array(weights), kind)

    def __len__(self):
        return self.states.shape[0]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def particle(self, i: int) -> WeightedParticle:
        return WeightedParticle(TargetState.from_array(self.states[i]), float(self.weights[i]))


@dataclass
class FilterConfig:
    """Configuration of the multi-pair intensity filter.

    ``m_p`` sets the resampled particle budget per unit of persistent mass.
    ``birth_mode`` selects measurement-driven ('adaptive') or area-uniform
    ('uniform') newborn sampling; uniform mode requires ``aoi`` as
    ``(xmin, xmax, ymin, ymax)``.
    """

    birth: BirthConfig
    m_p: int = 500
    sensor_order: str = "fixed"  # or "shuffled" per scan
    extraction_threshold: float = 0.5
    merge_radius: float = 20.0
    mass_floor: float = 1e-6
    likelihood_floor: float = 1e-30
    birth_mode: str = "adaptive"
    aoi: tuple | None = None

    def __post_init__(self):
        if self.m_p < 1:
            raise ValueError("m_p must be at least 1")
        if self.sensor_order not in ("fixed", "shuffled"):
            raise ValueError("sensor_order must be 'fixed' or 'shuffled'")
        if not 0.0 < self.extraction_threshold < 1.0:
            raise ValueError("extraction_threshold must lie in (0, 1)")
        if self.birth_mode not in ("adaptive", "uniform"):
            raise ValueError("birth_mode must be 'adaptive' or 'uniform'")
        if self.birth_mode == "uniform" and self.aoi is None:
            raise ValueError("uniform birth mode requires an aoi")


@dataclass
class ModelSet:
    """Everything the filter needs to interpret one scan."""

    motion: MotionModel
    measurement: MeasurementModel
    pairs: list
    clutter: list

    def __post_init__(self):
        if len(self.pairs) == 0:
            raise ValueError("at least one sensor pair is required")
        if len(self.pairs) != len(self.clutter):
            raise ValueError("one clutter model per sensor pair is required")


@dataclass
class FilterState:
    """Filter output for one step: the two particle clouds plus summaries.

    ``nu_hat_p`` is the persistent weight sum after the final update and
    before resampling; ``nu_hat_b`` the final newborn weight sum;
    ``extracted`` the (k, 4) array of extracted target states.
    """

    persistent: ParticleSystem
    newborn: ParticleSystem
    nu_hat_p: float = 0.0
    nu_hat_b: float = 0.0
    extracted: np.ndarray = field(default_factory=lambda: np.empty((0, 4)))

    @classmethod
    def cold_start(cls) -> "FilterState":
        return cls(ParticleSystem.empty(PERSISTENT), ParticleSystem.empty(NEWBORN))


def predict(state: FilterState, motion: MotionModel, rng: np.random.Generator) -> ParticleSystem:
    """Propagate the combined persistent+newborn cloud one step forward.

    Every particle is moved through the motion model and its weight scaled
    by the survival probability (bootstrap proposal, so the transition
    density ratio cancels).
    """
    states = np.vstack([state.persistent.states, state.newborn.states])
    weights = np.concatenate([state.persistent.weights, state.newborn.weights])
    if states.shape[0] == 0:
        return ParticleSystem.empty(PERSISTENT)
    propagated = motion.propagate(states, rng)
    return ParticleSystem(propagated, motion.ps * weights, PERSISTENT)


def update_weights(w_persistent, w_newborn, likelihoods, kappa, pd, floor=1e-30):
    """Reweight both clouds against one pair's measurement set.

    ``likelihoods`` is the (m, Np) matrix of measurement densities against
    the persistent states and ``kappa`` the (m,) clutter intensity at each
    measurement. Returns the updated persistent and newborn weight arrays.
    Each measurement's normalizer is the clutter intensity plus the total
    newborn weight plus the detection-weighted persistent likelihood mass.
    """
    w_persistent = np.asarray(w_persistent, dtype=float)
    w_newborn = np.asarray(w_newborn, dtype=float)
    likelihoods = np.asarray(likelihoods, dtype=float)
    if not np.all(np.isfinite(likelihoods)):
        raise ValueError("non-finite likelihood in update")
    assoc = pd * likelihoods * w_persistent[None, :]
    per_z = assoc.sum(axis=1)
    norm = np.maximum(np.asarray(kappa, float) + w_newborn.sum() + per_z, floor)
    new_wp = (1.0 - pd) * w_persistent
    if per_z.size:
        new_wp = new_wp + (assoc / norm[:, None]).sum(axis=0)
        new_wb = w_newborn * float(np.sum(1.0 / norm))
    else:
        new_wb = np.zeros_like(w_newborn)
    return new_wp, new_wb


def update_single_sensor(
    persistent: ParticleSystem,
    newborn: ParticleSystem,
    measurements,
    pair: SensorPair,
    meas_model: MeasurementModel,
    clutter_model: ClutterModel,
    floor: float = 1e-30,
):
    """Single-pair update; returns (persistent weights, newborn weights)."""
    zs = measurements_to_array(measurements)
    likelihoods = meas_model.likelihood_matrix(pair, persistent.states, zs)
    kappa = clutter_model.intensity(zs) if zs.size else np.empty(0)
    return update_weights(
        persistent.weights, newborn.weights, likelihoods, kappa, meas_model.pd, floor
    )


def _systematic_indices(weights, n, rng):
    cumulative = np.cumsum(weights)
    cumulative /= cumulative[-1]
    positions = (rng.random() + np.arange(n)) / n
    return np.searchsorted(cumulative, positions)


def resample(
    system: ParticleSystem,
    m_p: int,
    rng: np.random.Generator,
    mass_floor: float = 1e-6,
) -> ParticleSystem:
    """Systematic resampling that conserves the cloud's weight sum.

    The output holds ``max(1, round(m_p * mass))`` equally weighted
    particles; a cloud whose mass falls below ``mass_floor`` is dropped.
    """
    nu = system.mass
    if len(system) == 0 or nu < mass_floor:
        return ParticleSystem.empty(system.kind)
    n_out = max(1, int(round(m_p * nu)))
    idx = _systematic_indices(system.weights, n_out, rng)
    return ParticleSystem(
        system.states[idx], np.full(n_out, nu / n_out), system.kind
    )


def estimate_cardinality(system: ParticleSystem) -> float:
    """Expected target count represented by the cloud: its weight sum."""
    return system.mass


def extract_states(
    persistent: ParticleSystem,
    measurements,
    pair: SensorPair,
    meas_model: MeasurementModel,
    clutter_model: ClutterModel,
    birth_mass: float,
    cfg: FilterConfig,
) -> np.ndarray:
    """Extract target state estimates from per-measurement association mass.

    ``persistent`` must be the cloud as it entered the final pair's update
    (before reweighting and resampling); ``birth_mass`` the total prior
    newborn weight in that update. For each measurement whose association
    mass exceeds the extraction threshold, the estimate is the
    association-weighted mean of the persistent states; estimates closer
    than the merge radius are merged by weighted mean.
    """
    zs = measurements_to_array(measurements)
    if zs.shape[0] == 0 or len(persistent) == 0:
        return np.empty((0, 4))
    likelihoods = meas_model.likelihood_matrix(pair, persistent.states, zs)
    assoc = meas_model.pd * likelihoods * persistent.weights[None, :]
    per_z = assoc.sum(axis=1)
    norm = np.maximum(
        clutter_model.intensity(zs) + birth_mass + per_z, cfg.likelihood_floor
    )
    mass = per_z / norm

    keep = np.flatnonzero(mass > cfg.extraction_threshold)
    if keep.size == 0:
        return np.empty((0, 4))
    means = assoc[keep] @ persistent.states / per_z[keep, None]

    # Greedy merge of near-duplicate estimates, strongest first.
    order = keep[np.argsort(-mass[keep])]
    rank = {j: i for i, j in enumerate(keep)}
    merged_states, merged_mass = [], []
    for j in order:
        candidate = means[rank[j]]
        w = mass[j]
        for i, existing in enumerate(merged_states):
            d = np.hypot(candidate[0] - existing[0], candidate[2] - existing[2])
            if d < cfg.merge_radius:
                total = merged_mass[i] + w
                merged_states[i] = (merged_mass[i] * existing + w * candidate) / total
                merged_mass[i] = total
                break
        else:
            merged_states.append(candidate)
            merged_mass.append(w)
    return np.array(merged_states).reshape(-1, 4)


def _sample_scan_births(pair, measurements, meas_model, cfg, rng):
    """Newborn states for one pair's measurement set (weights by caller)."""
    if len(measurements) == 0:
        return np.empty((0, 4))
    if cfg.birth_mode == "uniform":
        return sample_uniform_birth(
            cfg.aoi, cfg.birth, cfg.birth.m_b * len(measurements), rng
        )
    blocks = []
    for z in measurements:
        try:
            blocks.append(sample_birth_particles(pair, z, meas_model, cfg.birth, rng).states)
        except BirthSamplingError:
            # Geometrically inconsistent measurement: no births, but it
            # still participates in the weight update.
            continue
    if not blocks:
        return np.empty((0, 4))
    return np.vstack(blocks)


def iterated_corrector_scan(
    state: FilterState,
    scan,
    models: ModelSet,
    cfg: FilterConfig,
    rng: np.random.Generator,
) -> FilterState:
    """Run one full time step: predict, per-pair updates, resample, extract.

    ``scan`` is a sequence of per-pair measurement lists aligned with
    ``models.pairs``. Pairs are processed in configured order; after each
    pair but the last, its updated newborn particles are promoted into the
    persistent cloud. State extraction uses the persistent cloud as it
    entered the final pair's update, together with that pair's
    measurements.
    """
    if len(scan) != len(models.pairs):
        raise ValueError("scan must provide one measurement list per pair")
    persistent = predict(state, models.motion, rng)

    order = np.arange(len(models.pairs))
    if cfg.sensor_order == "shuffled":
        order = rng.permutation(order)

    newborn = ParticleSystem.empty(NEWBORN)
    extract_args = None
    for pass_idx, j in enumerate(order):
        pair = models.pairs[j]
        clutter = models.clutter[j]
        measurements = scan[j]
        birth_states = _sample_scan_births(pair, measurements, models.measurement, cfg, rng)
        n_b = birth_states.shape[0]
        birth_weights = np.full(n_b, cfg.birth.nu_b / n_b) if n_b else np.empty(0)
        newborn = ParticleSystem(birth_states, birth_weights, NEWBORN)

        last = pass_idx == len(order) - 1
        if last:
            extract_args = (persistent, measurements, pair, clutter, float(birth_weights.sum()))
        new_wp, new_wb = update_single_sensor(
            persistent, newborn, measurements, pair,
            models.measurement, clutter, cfg.likelihood_floor,
        )
        if last:
            persistent = ParticleSystem(persistent.states, new_wp, PERSISTENT)
            newborn = ParticleSystem(newborn.states, new_wb, NEWBORN)
        else:
            persistent = ParticleSystem(
                np.vstack([persistent.states, newborn.states]),
                np.concatenate([new_wp, new_wb]),
                PERSISTENT,
            )

    nu_hat_p = persistent.mass
    extracted = extract_states(
        extract_args[0], extract_args[1], extract_args[2],
        models.measurement, extract_args[3], extract_args[4], cfg,
    )
    resampled = resample(persistent, cfg.m_p, rng, cfg.mass_floor)
    return FilterState(resampled, newborn, nu_hat_p, newborn.mass, extracted)
