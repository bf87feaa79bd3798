"""Probabilistic kernels consumed by the tracker.

Covers constant-velocity target motion, the joint TDOA/FDOA measurement
likelihood, and the detection/clutter models. Model objects are immutable
after construction; random number generators are always passed in
explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import SPEED_OF_LIGHT, SensorPair, TargetState, predict_measurement


@dataclass(frozen=True)
class PairMeasurement:
    """Joint detection for one ordered sensor pair: (dt seconds, df Hz)."""

    dt: float
    df: float

    def __post_init__(self):
        if not (np.isfinite(self.dt) and np.isfinite(self.df)):
            raise ValueError("measurement components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.dt, self.df], dtype=float)


def measurements_to_array(measurements) -> np.ndarray:
    """Stack a sequence of PairMeasurement into an (m, 2) array."""
    if len(measurements) == 0:
        return np.empty((0, 2))
    return np.array([[z.dt, z.df] for z in measurements], dtype=float)


class MotionModel:
    """Nearly constant velocity motion with white acceleration noise.

    Parameters
    ----------
    T : float
        Sampling interval, seconds (> 0).
    q : float
        Process noise intensity, m^2/s^3 (>= 0). ``q = 0`` degenerates to
        deterministic straight-line motion.
    ps : float
        Per-step survival probability in [0, 1].
    """

    def __init__(self, T: float, q: float, ps: float):
        if T <= 0.0:
            raise ValueError("sampling interval T must be positive")
        if q < 0.0:
            raise ValueError("process noise intensity q must be nonnegative")
        if not 0.0 <= ps <= 1.0:
            raise ValueError("survival probability ps must lie in [0, 1]")
        self.T = float(T)
        self.q = float(q)
        self.ps = float(ps)

        block_f = np.array([[1.0, T], [0.0, 1.0]])
        block_q = q * np.array([[T**3 / 3.0, T**2 / 2.0], [T**2 / 2.0, T]])
        self.F = np.kron(np.eye(2), block_f)
        self.Q = np.kron(np.eye(2), block_q)
        if q > 0.0:
            self._chol = np.linalg.cholesky(self.Q)
            self._q_inv = np.linalg.inv(self.Q)
            self._norm = 1.0 / ((2.0 * np.pi) ** 2 * np.sqrt(np.linalg.det(self.Q)))
        else:
            self._chol = None
            self._q_inv = None
            self._norm = None

    def propagate(self, state, rng: np.random.Generator):
        """Draw the next state(s): F @ x plus zero-mean noise with cov Q."""
        single = isinstance(state, TargetState)
        x = state.as_array() if single else np.asarray(state, dtype=float)
        out = x @ self.F.T
        if self._chol is not None:
            noise = rng.standard_normal(out.shape if out.ndim > 1 else (4,))
            out = out + noise @ self._chol.T
        return TargetState.from_array(out) if single else out

    def transition_density(self, x, x_prev):
        """Gaussian transition density N(x; F x_prev, Q). Requires q > 0."""
        if self._q_inv is None:
            raise ValueError("transition density degenerate for q = 0")
        xa = x.as_array() if isinstance(x, TargetState) else np.asarray(x, float)
        xp = (
            x_prev.as_array()
            if isinstance(x_prev, TargetState)
            else np.asarray(x_prev, float)
        )
        diff = xa - xp @ self.F.T
        maha = np.einsum("...i,ij,...j->...", diff, self._q_inv, diff)
        return self._norm * np.exp(-0.5 * maha)


class MeasurementModel:
    """Joint TDOA/FDOA detection model with independent Gaussian errors.

    Parameters
    ----------
    sigma_dt : float
        Time-difference standard deviation, seconds (> 0).
    sigma_df : float
        Frequency-difference standard deviation, Hz (> 0).
    pd : float
        Detection probability in [0, 1].
    fc : float
        Carrier frequency, Hz (> 0).
    c : float
        Propagation speed, m/s.
    """

    def __init__(self, sigma_dt, sigma_df, pd, fc, c=SPEED_OF_LIGHT):
        if sigma_dt <= 0.0 or sigma_df <= 0.0:
            raise ValueError("measurement sigmas must be positive")
        if not 0.0 <= pd <= 1.0:
            raise ValueError("detection probability pd must lie in [0, 1]")
        if fc <= 0.0:
            raise ValueError("carrier frequency fc must be positive")
        self.sigma_dt = float(sigma_dt)
        self.sigma_df = float(sigma_df)
        self.pd = float(pd)
        self.fc = float(fc)
        self.c = float(c)
        self._peak = 1.0 / (2.0 * np.pi * self.sigma_dt * self.sigma_df)

    def predict(self, pair: SensorPair, state):
        """Noise-free (dt, df) for the given state(s)."""
        return predict_measurement(pair, state, self.fc, self.c)

    def likelihood(self, z, pair: SensorPair, state):
        """Bivariate Gaussian density of measurement z given the state(s)."""
        za = z.as_array() if isinstance(z, PairMeasurement) else np.asarray(z, float)
        dt, df = self.predict(pair, state)
        et = (za[0] - dt) / self.sigma_dt
        ef = (za[1] - df) / self.sigma_df
        return self._peak * np.exp(-0.5 * (et * et + ef * ef))

    def likelihood_matrix(self, pair: SensorPair, states, zs) -> np.ndarray:
        """Densities of each measurement against each state, shape (m, N).

        ``states`` is an (N, 4) array and ``zs`` an (m, 2) array of
        (dt, df) rows.
        """
        states = np.asarray(states, dtype=float)
        zs = np.asarray(zs, dtype=float).reshape(-1, 2)
        if states.shape[0] == 0 or zs.shape[0] == 0:
            return np.zeros((zs.shape[0], states.shape[0]))
        dt, df = self.predict(pair, states)
        et = (zs[:, 0, None] - dt[None, :]) / self.sigma_dt
        ef = (zs[:, 1, None] - df[None, :]) / self.sigma_df
        return self._peak * np.exp(-0.5 * (et * et + ef * ef))


@dataclass(frozen=True)
class ClutterModel:
    """False alarms: Poisson count, uniform over a (dt, df) support box.

    The intensity integrates exactly to ``lam`` over the box
    ``[-dt_halfwidth, dt_halfwidth] x [-df_halfwidth, df_halfwidth]``.
    """

    lam: float
    dt_halfwidth: float
    df_halfwidth: float

    def __post_init__(self):
        if self.lam < 0.0:
            raise ValueError("clutter rate lam must be nonnegative")
        if self.dt_halfwidth <= 0.0 or self.df_halfwidth <= 0.0:
            raise ValueError("clutter support halfwidths must be positive")

    @classmethod
    def for_pair(cls, lam, v_max, fc, c, pair: SensorPair) -> "ClutterModel":
        """Support box for a pair: reachable time differences and the
        frequency differences of targets up to speed ``v_max``."""
        return cls(
            lam=lam,
            dt_halfwidth=pair.baseline_length / c,
            df_halfwidth=2.0 * v_max * fc / c,
        )

    @property
    def density(self) -> float:
        return self.lam / (4.0 * self.dt_halfwidth * self.df_halfwidth)

    def intensity(self, z):
        """Clutter intensity at measurement(s) z; zero off the support box."""
        za = z.as_array() if isinstance(z, PairMeasurement) else np.asarray(z, float)
        inside = (np.abs(za[..., 0]) <= self.dt_halfwidth) & (
            np.abs(za[..., 1]) <= self.df_halfwidth
        )
        return np.where(inside, self.density, 0.0)

    def sample(self, rng: np.random.Generator):
        """Draw one scan of clutter: Poisson(lam) points uniform on the box."""
        n = rng.poisson(self.lam)
        dts = rng.uniform(-self.dt_halfwidth, self.dt_halfwidth, n)
        dfs = rng.uniform(-self.df_halfwidth, self.df_halfwidth, n)
        return [PairMeasurement(dt, df) for dt, df in zip(dts, dfs)]
