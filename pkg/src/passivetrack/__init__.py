"""Passive multi-target tracking with measurement-driven birth particles.

A toolkit for tracking a time-varying number of emitters from joint
TDOA/FDOA detections collected by pairs of stationary sensors: geometry and
measurement models, exact birth-particle samplers on the measurement
constraint sets, a multi-pair particle intensity filter, a scenario
simulator, an OSPA evaluation metric, and a Monte Carlo experiment harness.
"""

from .birth import (
    BirthConfig,
    BirthDraw,
    BirthSamplingError,
    sample_birth_particles,
    sample_position_from_tdoa,
    sample_uniform_birth,
    sample_velocity_from_fdoa,
)
from .geometry import (
    SPEED_OF_LIGHT,
    SensorPair,
    SensorPose,
    TargetState,
    interior_angles,
    predict_measurement,
    range_rate,
    range_to,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    RunResult,
    load_experiment,
    load_scenario,
    run_monte_carlo,
    run_single,
)
from .metrics import OspaParams, OspaResult, ospa, solve_assignment
from .models import ClutterModel, MeasurementModel, MotionModel, PairMeasurement
from .phd import (
    NEWBORN,
    PERSISTENT,
    FilterConfig,
    FilterState,
    ModelSet,
    ParticleSystem,
    WeightedParticle,
    estimate_cardinality,
    extract_states,
    iterated_corrector_scan,
    predict,
    resample,
    update_single_sensor,
    update_weights,
)
from .sim import Aoi, ScanMeasurements, Scenario, TargetSpec, generate_measurements, generate_truth

__version__ = "0.1.0"
