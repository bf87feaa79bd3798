"""Measurement-driven samplers for newborn target particles.

A joint (dt, df) detection from one sensor pair constrains a target to a
hyperbola branch in position (through the range difference ``dr = c*dt``)
and, given a position, to a one-parameter family of velocities (through the
signed range-rate difference ``drr = c*df/fc``). The samplers below draw
particles exactly on those constraint sets:

* position: sample ``dr`` from its measurement-error Gaussian, draw the
  range to the first sensor uniformly over its admissible interval, recover
  the law-of-cosines angle, and mirror across the baseline with
  probability 1/2 to cover both halves of the hyperbola;
* velocity: sample ``drr`` from its Gaussian, draw a speed uniformly
  between the smallest speed that can produce ``drr`` at that position and
  the configured maximum, then solve for the heading, choosing between the
  two admissible headings with probability 1/2.

Every returned particle reproduces its sampled ``dr`` and ``drr`` when the
range and range-rate differences are recomputed from the state; tests lean
on that round trip, which pins down all sign and branch conventions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SensorPair
from .models import MeasurementModel, PairMeasurement


class BirthSamplingError(ValueError):
    """A measurement could not be reconciled with the pair geometry."""


@dataclass(frozen=True)
class BirthConfig:
    """Knobs for the newborn particle samplers.

    Attributes
    ----------
    r_max : float
        Maximum sampled range from the first sensor, meters.
    v_max : float
        Maximum sampled target speed, m/s.
    m_b : int
        Particles drawn per measurement.
    nu_b : float
        Expected number of target births per predict step (total newborn
        weight handed out each time births are sampled).
    max_retries : int
        Redraw budget for rejected range / range-rate difference samples.
    eps_angle : float
        Below this value of ``sin((alpha - beta)/2)`` the pair carries no
        heading information (target on the baseline extension) and the
        velocity sampler falls back to an uninformative draw.
    """

    r_max: float
    v_max: float
    m_b: int = 500
    nu_b: float = 1e-4
    max_retries: int = 100
    eps_angle: float = 1e-9

    def __post_init__(self):
        if self.r_max <= 0.0 or self.v_max <= 0.0:
            raise ValueError("r_max and v_max must be positive")
        if self.m_b < 1:
            raise ValueError("m_b must be at least 1")
        if self.nu_b <= 0.0:
            raise ValueError("nu_b must be positive")


@dataclass(frozen=True)
class BirthDraw:
    """Newborn particles for one measurement, intermediates retained.

    ``states`` has shape (n, 4); the remaining arrays have shape (n,) and
    hold, per particle, the sampled range difference, range to the first
    sensor, law-of-cosines angle at the first sensor, sampled range-rate
    difference, heading parameter, and speed.
    """

    states: np.ndarray
    delta_r: np.ndarray
    r1: np.ndarray
    alpha: np.ndarray
    delta_rr: np.ndarray
    theta: np.ndarray
    speed: np.ndarray

    def __len__(self):
        return self.states.shape[0]


def _draw_range_difference(dt, model, pair, cfg, rng, n):
    """Gaussian range-difference samples restricted to feasible geometry."""
    b = pair.baseline_length
    mean = model.c * dt
    sigma = model.c * model.sigma_dt
    dr = rng.normal(mean, sigma, n)
    bad = (np.abs(dr) >= b) | ((dr + b) / 2.0 >= cfg.r_max)
    retries = 0
    while bad.any():
        retries += 1
        if retries > cfg.max_retries:
            raise BirthSamplingError(
                "range difference sample inconsistent with pair geometry "
                f"(|dr| < {b:.3g} m required, measurement dt = {dt:.3g} s)"
            )
        dr[bad] = rng.normal(mean, sigma, int(bad.sum()))
        bad = (np.abs(dr) >= b) | ((dr + b) / 2.0 >= cfg.r_max)
    return dr


def sample_position_from_tdoa(
    pair: SensorPair,
    dt: float,
    model: MeasurementModel,
    cfg: BirthConfig,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Sample position(s) on the hyperbola implied by a time difference.

    Returns ``(position, delta_r, r1, alpha)``. With ``size=None`` the
    entries are a (2,) position and three floats; otherwise arrays with
    leading dimension ``size``. Each position reproduces its sampled range
    difference: ``range_to(first) - range_to(second) == delta_r``.
    """
    n = 1 if size is None else int(size)
    b = pair.baseline_length
    u = pair.unit_along()
    nvec = pair.unit_normal()
    s1 = pair.first.position

    dr = _draw_range_difference(dt, model, pair, cfg, rng, n)
    lo = (dr + b) / 2.0
    r1 = rng.uniform(lo, cfg.r_max)
    cos_alpha = np.clip((dr * dr - b * b - 2.0 * dr * r1) / (2.0 * b * r1), -1.0, 1.0)
    alpha = np.arccos(cos_alpha)
    # Mirror across the baseline with probability 1/2: both hyperbola
    # halves carry the same (dr, r1, alpha).
    side = rng.integers(0, 2, n) * 2 - 1
    direction = -cos_alpha[:, None] * u + (side * np.sin(alpha))[:, None] * nvec
    position = s1 + r1[:, None] * direction
    if size is None:
        return position[0], float(dr[0]), float(r1[0]), float(alpha[0])
    return position, dr, r1, alpha


def _pair_view_geometry(pair, pos):
    """Apex angle, baseline side, and second-sensor bearing at positions."""
    d1 = pos - pair.first.position
    d2 = pos - pair.second.position
    r1 = np.hypot(d1[:, 0], d1[:, 1])
    r2 = np.hypot(d2[:, 0], d2[:, 1])
    if np.any(r1 == 0.0) or np.any(r2 == 0.0):
        raise ValueError("velocity sampling undefined at a sensor position")
    d1 /= r1[:, None]
    d2 /= r2[:, None]
    # atan2 avoids the cancellation the pure law-of-cosines form suffers
    # near the baseline line.
    cross = d2[:, 0] * d1[:, 1] - d2[:, 1] * d1[:, 0]
    apex = np.arctan2(np.abs(cross), np.einsum("ij,ij->i", d1, d2))
    side = np.where(cross > 0.0, -1.0, 1.0)
    bearing2 = np.arctan2(d2[:, 1], d2[:, 0])
    return apex, side, bearing2


def _velocity_attempt(pair, pos, df, model, cfg, rng):
    """One range-rate-difference draw per position.

    Returns ``(velocity, drr, theta, speed, feasible)``; entries that are
    not feasible (required speed above v_max) carry meaningless values and
    must be redrawn by the caller.
    """
    n = pos.shape[0]
    apex, side, bearing2 = _pair_view_geometry(pair, pos)
    sin_half = np.sin(0.5 * apex)

    mean = model.c * df / model.fc
    sigma = model.c * model.sigma_df / model.fc
    drr = rng.normal(mean, sigma, n)

    # On the baseline extension the pair is blind to heading: any velocity
    # gives a (near-)zero range-rate difference, so only a near-zero draw
    # is consistent, and the heading is then drawn uniformly.
    uninformative = (sin_half < cfg.eps_angle) & (np.abs(drr) <= 3.0 * sigma)
    feasible = uninformative | (np.abs(drr) <= 2.0 * sin_half * cfg.v_max)

    with np.errstate(divide="ignore", invalid="ignore"):
        s_min = np.where(uninformative | (drr == 0.0), 0.0,
                         np.abs(drr) / (2.0 * sin_half))
    s_min = np.minimum(np.where(feasible, s_min, 0.0), cfg.v_max)
    speed = rng.uniform(s_min, cfg.v_max)

    denom = 2.0 * speed * sin_half
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = np.where(denom > 0.0, -drr / denom, 0.0)
    arg = np.clip(arg, -1.0, 1.0)
    psi = np.arcsin(arg)
    # Two headings solve the constraint (sin is symmetric about pi/2);
    # pick each with probability 1/2.
    branch = rng.integers(0, 2, n).astype(bool)
    psi = np.where(branch, np.pi - psi, psi)
    theta = psi - 0.5 * apex

    heading = bearing2 + side * theta
    heading = np.where(uninformative, rng.uniform(0.0, 2.0 * np.pi, n), heading)
    velocity = speed[:, None] * np.column_stack([np.cos(heading), np.sin(heading)])
    return velocity, drr, theta, speed, feasible


def sample_velocity_from_fdoa(
    pair: SensorPair,
    position,
    df: float,
    model: MeasurementModel,
    cfg: BirthConfig,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Sample velocity(ies) consistent with a frequency difference.

    ``position`` is a (2,) vector or an (n, 2) array of positions already
    drawn for this measurement. Returns ``(velocity, delta_rr, theta,
    speed)`` where each velocity reproduces its sampled signed range-rate
    difference at its position. Range-rate draws that would demand a speed
    above ``v_max`` at the given (fixed) position are redrawn; if the
    budget runs out a ``BirthSamplingError`` is raised. On degenerate
    geometry (target on the baseline extension, where the pair carries no
    heading information) the heading is drawn uniformly instead.
    """
    pos = np.asarray(position, dtype=float)
    scalar = size is None and pos.ndim == 1
    pos = np.atleast_2d(pos)
    n = pos.shape[0] if size is None else int(size)
    if pos.shape[0] == 1 and n > 1:
        pos = np.broadcast_to(pos, (n, 2))

    velocity, drr, theta, speed, ok = _velocity_attempt(pair, pos, df, model, cfg, rng)
    retries = 0
    while not ok.all():
        retries += 1
        if retries > cfg.max_retries:
            raise BirthSamplingError(
                "range-rate difference sample needs speed above v_max "
                f"(measurement df = {df:.3g} Hz)"
            )
        redo = ~ok
        v2, d2, t2, s2, ok2 = _velocity_attempt(pair, pos[redo], df, model, cfg, rng)
        accept = np.flatnonzero(redo)[ok2]
        velocity[accept] = v2[ok2]
        drr[accept] = d2[ok2]
        theta[accept] = t2[ok2]
        speed[accept] = s2[ok2]
        ok[accept] = True
    if scalar:
        return velocity[0], float(drr[0]), float(theta[0]), float(speed[0])
    return velocity, drr, theta, speed


def sample_birth_particles(
    pair: SensorPair,
    z: PairMeasurement,
    model: MeasurementModel,
    cfg: BirthConfig,
    rng: np.random.Generator,
) -> BirthDraw:
    """Draw ``cfg.m_b`` newborn particles for one joint measurement.

    Weights are not assigned here; the caller spreads the configured birth
    mass uniformly over all particles born in the same pass. A particle
    whose position cannot support the sampled range-rate difference at any
    admissible speed is redrawn from scratch (position included); a
    measurement that exhausts the retry budget raises
    ``BirthSamplingError``.
    """
    n = cfg.m_b
    states = np.empty((n, 4))
    dr_out = np.empty(n)
    r1_out = np.empty(n)
    alpha_out = np.empty(n)
    drr_out = np.empty(n)
    theta_out = np.empty(n)
    speed_out = np.empty(n)

    filled = 0
    rejected_run = 0  # candidates drawn since the last acceptance
    oversample = 2
    while filled < n:
        if rejected_run > cfg.max_retries * n:
            raise BirthSamplingError(
                "measurement cannot be reconciled with the pair geometry "
                f"(dt = {z.dt:.3g} s, df = {z.df:.3g} Hz)"
            )
        want = n - filled
        n_draw = min(max(64, oversample * want), 200_000)
        position, dr, r1, alpha = sample_position_from_tdoa(
            pair, z.dt, model, cfg, rng, size=n_draw
        )
        velocity, drr, theta, speed, ok = _velocity_attempt(
            pair, position, z.df, model, cfg, rng
        )
        accept = np.flatnonzero(ok)[:want]
        taken = accept.size
        if taken == 0:
            rejected_run += n_draw
            oversample = min(512, oversample * 4)
        else:
            rejected_run = 0
            oversample = min(512, max(2, (2 * n_draw) // max(int(ok.sum()), 1)))
        sl = slice(filled, filled + taken)
        states[sl, 0] = position[accept, 0]
        states[sl, 1] = velocity[accept, 0]
        states[sl, 2] = position[accept, 1]
        states[sl, 3] = velocity[accept, 1]
        dr_out[sl] = dr[accept]
        r1_out[sl] = r1[accept]
        alpha_out[sl] = alpha[accept]
        drr_out[sl] = drr[accept]
        theta_out[sl] = theta[accept]
        speed_out[sl] = speed[accept]
        filled += taken
    return BirthDraw(states, dr_out, r1_out, alpha_out, drr_out, theta_out, speed_out)


def sample_uniform_birth(aoi, cfg: BirthConfig, count: int, rng: np.random.Generator):
    """Measurement-agnostic newborn states uniform over an area of interest.

    ``aoi`` is ``(xmin, xmax, ymin, ymax)`` or any object with those
    attributes. Headings are uniform on [0, 2*pi) and speeds uniform on
    [0, v_max]. Returns a ``(count, 4)`` state array.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if hasattr(aoi, "xmin"):
        xmin, xmax, ymin, ymax = aoi.xmin, aoi.xmax, aoi.ymin, aoi.ymax
    else:
        xmin, xmax, ymin, ymax = aoi
    x = rng.uniform(xmin, xmax, count)
    y = rng.uniform(ymin, ymax, count)
    heading = rng.uniform(0.0, 2.0 * np.pi, count)
    speed = rng.uniform(0.0, cfg.v_max, count)
    return np.column_stack(
        [x, speed * np.cos(heading), y, speed * np.sin(heading)]
    )
