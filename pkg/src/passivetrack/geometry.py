"""Sensor-pair geometry for passive TDOA/FDOA tracking.

Positions are planar Cartesian coordinates in meters, velocities in m/s.
Target states are length-4 vectors ordered [x, vx, y, vy]. Every function
broadcasts over a leading axis, so a single state (shape ``(4,)``) and a
batch (shape ``(N, 4)``) both work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s

# Column indices of position and velocity inside a state vector.
POS = (0, 2)
VEL = (1, 3)


@dataclass(frozen=True)
class TargetState:
    """Single-target kinematic state: planar position and velocity."""

    px: float
    vx: float
    py: float
    vy: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.px, self.vx, self.py, self.vy])):
            raise ValueError("target state components must be finite")

    @classmethod
    def from_array(cls, vec) -> "TargetState":
        vec = np.asarray(vec, dtype=float)
        return cls(vec[0], vec[1], vec[2], vec[3])

    def as_array(self) -> np.ndarray:
        return np.array([self.px, self.vx, self.py, self.vy], dtype=float)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.px, self.py], dtype=float)

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.vx, self.vy], dtype=float)


@dataclass(frozen=True)
class SensorPose:
    """A stationary sensor at a fixed planar position."""

    position: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (2,) or not np.all(np.isfinite(pos)):
            raise ValueError("sensor position must be a finite 2-vector")
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class SensorPair:
    """An ordered pair of stationary sensors with derived baseline geometry.

    Difference measurements are taken as (first minus second).

    Attributes
    ----------
    first, second : SensorPose
        Reference sensor and its partner.
    baseline_length : float
        Straight-line distance between the sensors, meters (> 0).
    baseline_bearing : float
        Bearing of the first-to-second baseline from the +x axis,
        radians in (-pi, pi].
    """

    first: SensorPose
    second: SensorPose
    baseline_length: float
    baseline_bearing: float

    @classmethod
    def from_positions(cls, first, second) -> "SensorPair":
        a = first if isinstance(first, SensorPose) else SensorPose(first)
        b = second if isinstance(second, SensorPose) else SensorPose(second)
        delta = b.position - a.position
        length = float(np.hypot(delta[0], delta[1]))
        if length <= 0.0:
            raise ValueError("sensor pair requires two distinct positions")
        bearing = float(np.arctan2(delta[1], delta[0]))
        if bearing == -np.pi:
            bearing = np.pi
        return cls(a, b, length, bearing)

    def unit_along(self) -> np.ndarray:
        """Unit vector pointing from the first sensor to the second."""
        delta = self.second.position - self.first.position
        return delta / self.baseline_length

    def unit_normal(self) -> np.ndarray:
        """Unit left normal of the baseline (90 deg CCW from unit_along)."""
        u = self.unit_along()
        return np.array([-u[1], u[0]])


def _position_of(sensor) -> np.ndarray:
    if isinstance(sensor, SensorPose):
        return sensor.position
    return np.asarray(sensor, dtype=float)


def _state_array(state) -> np.ndarray:
    if isinstance(state, TargetState):
        return state.as_array()
    return np.asarray(state, dtype=float)


def range_to(sensor, state):
    """Euclidean distance from a sensor to the target position(s), meters.

    Parameters
    ----------
    sensor : SensorPose or array_like
        Sensor position.
    state : TargetState or array_like
        State vector(s) ``[x, vx, y, vy]``, shape ``(4,)`` or ``(N, 4)``.

    Returns
    -------
    float or numpy.ndarray
        Nonnegative range(s).
    """
    pos = _position_of(sensor)
    x = _state_array(state)
    dx = x[..., POS[0]] - pos[0]
    dy = x[..., POS[1]] - pos[1]
    return np.hypot(dx, dy)


def range_rate(sensor, state):
    """Signed time derivative of the sensor-to-target range, m/s.

    Positive when the target recedes from the sensor. Raises ``ValueError``
    if any target position coincides with the sensor (the radial direction
    is undefined there).
    """
    pos = _position_of(sensor)
    x = _state_array(state)
    dx = x[..., POS[0]] - pos[0]
    dy = x[..., POS[1]] - pos[1]
    r = np.hypot(dx, dy)
    if np.any(r == 0.0):
        raise ValueError("range rate undefined: target coincident with sensor")
    return (dx * x[..., VEL[0]] + dy * x[..., VEL[1]]) / r


def predict_measurement(pair: SensorPair, state, fc: float, c: float = SPEED_OF_LIGHT):
    """Noise-free joint (time difference, frequency difference) for a pair.

    Parameters
    ----------
    pair : SensorPair
        Ordered sensor pair; differences are (first minus second).
    state : TargetState or array_like
        Target state(s).
    fc : float
        Carrier frequency, Hz.
    c : float
        Propagation speed, m/s.

    Returns
    -------
    (dt, df)
        Time difference in seconds and frequency difference in Hz. The time
        difference always satisfies ``|dt| <= baseline_length / c``.
    """
    r1 = range_to(pair.first, state)
    r2 = range_to(pair.second, state)
    if np.any(r1 == 0.0) or np.any(r2 == 0.0):
        raise ValueError("measurement undefined: target coincident with a sensor")
    bound = pair.baseline_length / c
    dt = np.clip((r1 - r2) / c, -bound, bound)
    df = (fc / c) * (range_rate(pair.first, state) - range_rate(pair.second, state))
    return dt, df


def interior_angles(pair: SensorPair, position):
    """Law-of-cosines angles of the sensor/sensor/target triangle.

    ``alpha`` is the angle at the first sensor measured from the *outward*
    extension of the baseline, so that ``alpha = pi`` places the target on
    the ray from the first sensor through the second, and

        r2**2 == r1**2 + B**2 + 2*B*r1*cos(alpha)

    holds exactly. ``beta`` is the interior triangle angle at the second
    sensor. Both lie in [0, pi], and ``alpha - beta`` equals the angle
    subtended at the target between the two sensor-to-target directions.

    Parameters
    ----------
    pair : SensorPair
    position : array_like
        Target position(s), shape ``(2,)`` or ``(N, 2)``.

    Returns
    -------
    (alpha, beta)
        Angles in radians, scalars or arrays matching the input.
    """
    p = np.asarray(position, dtype=float)
    d1 = p - pair.first.position
    d2 = p - pair.second.position
    r1 = np.hypot(d1[..., 0], d1[..., 1])
    r2 = np.hypot(d2[..., 0], d2[..., 1])
    if np.any(r1 == 0.0) or np.any(r2 == 0.0):
        raise ValueError("angles undefined: target coincident with a sensor")
    b = pair.baseline_length
    cos_alpha = np.clip((r2**2 - r1**2 - b**2) / (2.0 * b * r1), -1.0, 1.0)
    cos_beta = np.clip((r2**2 + b**2 - r1**2) / (2.0 * b * r2), -1.0, 1.0)
    return np.arccos(cos_alpha), np.arccos(cos_beta)
