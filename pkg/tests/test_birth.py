import numpy as np
import pytest
from scipy.stats import kstest

from passivetrack.birth import (
    BirthConfig,
    BirthSamplingError,
    sample_birth_particles,
    sample_position_from_tdoa,
    sample_uniform_birth,
    sample_velocity_from_fdoa,
)
from passivetrack.geometry import (
    SPEED_OF_LIGHT,
    SensorPair,
    interior_angles,
    range_rate,
    range_to,
)
from passivetrack.models import MeasurementModel, PairMeasurement


@pytest.fixture
def pair():
    return SensorPair.from_positions([0.0, 0.0], [1000.0, 0.0])


@pytest.fixture
def meas():
    return MeasurementModel(sigma_dt=20e-9, sigma_df=2.5, pd=0.99, fc=2.4e9)


@pytest.fixture
def cfg():
    return BirthConfig(r_max=2000.0, v_max=25.0, m_b=500, nu_b=1e-4)


def exact_meas(sigma_dt=1e-30, sigma_df=1e-30):
    """Model whose sampling noise is negligible, for pinned-value tests."""
    return MeasurementModel(sigma_dt=sigma_dt, sigma_df=sigma_df, pd=0.99, fc=2.4e9)


def random_pair_and_measurement(rng, meas):
    """A feasible (pair, measurement) drawn from a random true target."""
    while True:
        s1 = rng.uniform(-2000.0, 2000.0, 2)
        s2 = s1 + rng.uniform(-1500.0, 1500.0, 2)
        if np.hypot(*(s2 - s1)) < 200.0:
            continue
        pair = SensorPair.from_positions(s1, s2)
        bearing = rng.uniform(0.0, 2.0 * np.pi)
        radius = rng.uniform(100.0, 1500.0)
        position = s1 + radius * np.array([np.cos(bearing), np.sin(bearing)])
        speed = rng.uniform(0.0, 25.0)
        heading = rng.uniform(0.0, 2.0 * np.pi)
        state = np.array(
            [position[0], speed * np.cos(heading), position[1], speed * np.sin(heading)]
        )
        dt, df = meas.predict(pair, state)
        return pair, PairMeasurement(
            float(dt + rng.normal(0.0, meas.sigma_dt)),
            float(df + rng.normal(0.0, meas.sigma_df)),
        )


class TestPositionSampler:
    def test_zero_dt_lands_on_bisector(self, pair, cfg):
        rng = np.random.default_rng(0)
        pos, dr, r1, alpha = sample_position_from_tdoa(
            pair, 0.0, exact_meas(), cfg, rng, size=2000
        )
        assert np.all(np.abs(pos[:, 0] - 500.0) < 1e-6)
        assert r1.min() >= 500.0
        assert np.all(np.abs(dr) < 1e-15)

    def test_range_lower_bound_puts_target_between_sensors(self, pair):
        # pin r1 at its lower bound by shrinking r_max onto it: the angle
        # hits pi and the position falls on the segment joining the sensors
        dt = 200.0 / SPEED_OF_LIGHT
        cfg = BirthConfig(r_max=600.0001, v_max=25.0)
        rng = np.random.default_rng(1)
        pos, dr, r1, alpha = sample_position_from_tdoa(
            pair, dt, exact_meas(), cfg, rng, size=500
        )
        assert np.all(alpha > np.pi - 1e-2)
        assert np.all(np.abs(pos[:, 1]) < 0.5)
        assert np.all((pos[:, 0] > 0.0) & (pos[:, 0] < 1000.0))

    def test_roundtrip_over_random_geometry(self, meas, cfg):
        rng = np.random.default_rng(2)
        worst = 0.0
        for _ in range(20):
            pair, z = random_pair_and_measurement(rng, meas)
            pos, dr, r1, alpha = sample_position_from_tdoa(
                pair, z.dt, meas, cfg, rng, size=500
            )
            states = np.column_stack(
                [pos[:, 0], np.zeros(500), pos[:, 1], np.zeros(500)]
            )
            recomputed = range_to(pair.first, states) - range_to(pair.second, states)
            worst = max(worst, np.abs(recomputed - dr).max())
            assert np.all(np.abs(range_to(pair.first, states) - r1) < 1e-9)
        assert worst < 1e-6

    def test_single_draw_shape(self, pair, meas, cfg):
        rng = np.random.default_rng(3)
        pos, dr, r1, alpha = sample_position_from_tdoa(pair, 1e-7, meas, cfg, rng)
        assert pos.shape == (2,)
        assert isinstance(dr, float) and isinstance(r1, float) and isinstance(alpha, float)

    def test_infeasible_dt_raises(self, pair, cfg):
        # range difference far beyond the baseline, with no noise to save it
        with pytest.raises(BirthSamplingError):
            sample_position_from_tdoa(
                pair, 5e-6, exact_meas(), cfg, np.random.default_rng(0), size=10
            )


class TestVelocitySampler:
    def test_zero_df_gives_equal_range_rates(self, pair, cfg, meas):
        rng = np.random.default_rng(4)
        pos, _, _, _ = sample_position_from_tdoa(pair, 2e-7, meas, cfg, rng, size=1000)
        vel, drr, theta, speed = sample_velocity_from_fdoa(
            pair, pos, 0.0, exact_meas(sigma_dt=meas.sigma_dt), cfg, rng
        )
        states = np.column_stack([pos[:, 0], vel[:, 0], pos[:, 1], vel[:, 1]])
        diff = range_rate(pair.first, states) - range_rate(pair.second, states)
        assert np.all(np.abs(diff) < 1e-9)
        assert np.all(np.abs(drr) < 1e-15)

    def test_speed_at_bound_pins_heading(self, pair):
        # when the sampled speed equals its lower bound, theta + apex/2 is
        # exactly a right angle
        position = np.array([300.0, -400.0])
        alpha, beta = interior_angles(pair, position)
        sin_half = np.sin(0.5 * (alpha - beta))
        v_max = 20.0
        # just inside the feasibility boundary, so the lower bound sits a
        # hair below v_max and the sampled speed is pinned there
        drr_target = -2.0 * sin_half * v_max * (1.0 - 1e-9)
        df = drr_target * 2.4e9 / SPEED_OF_LIGHT
        cfg = BirthConfig(r_max=2000.0, v_max=v_max)
        rng = np.random.default_rng(5)
        vel, drr, theta, speed = sample_velocity_from_fdoa(
            pair, position, df, exact_meas(), cfg, rng, size=200
        )
        assert np.all(np.abs(speed - v_max) < 1e-6)
        assert np.all(np.abs(theta + 0.5 * (alpha - beta) - np.pi / 2.0) < 1e-3)

    def test_roundtrip_over_random_geometry(self, meas, cfg):
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(20):
            pair, z = random_pair_and_measurement(rng, meas)
            draw = sample_birth_particles(pair, z, meas, cfg, rng)
            diff = range_rate(pair.first, draw.states) - range_rate(pair.second, draw.states)
            worst = max(worst, np.abs(diff - draw.delta_rr).max())
        assert worst < 1e-9

    def test_infeasible_df_raises(self, pair):
        # demands ~50 m/s of range-rate difference with v_max = 1 m/s
        cfg = BirthConfig(r_max=2000.0, v_max=1.0, m_b=50, max_retries=10)
        with pytest.raises(BirthSamplingError):
            sample_velocity_from_fdoa(
                pair, np.array([500.0, -400.0]), -400.0, exact_meas(),
                cfg, np.random.default_rng(0), size=10,
            )


class TestBirthParticles:
    def test_particle_count_per_measurement(self, pair, meas, cfg):
        rng = np.random.default_rng(7)
        draw = sample_birth_particles(pair, PairMeasurement(5e-7, 30.0), meas, cfg, rng)
        assert len(draw) == 500
        assert draw.states.shape == (500, 4)

    def test_speed_and_range_limits(self, meas, cfg):
        rng = np.random.default_rng(8)
        for _ in range(10):
            pair, z = random_pair_and_measurement(rng, meas)
            draw = sample_birth_particles(pair, z, meas, cfg, rng)
            speeds = np.hypot(draw.states[:, 1], draw.states[:, 3])
            assert np.all(speeds <= cfg.v_max + 1e-9)
            assert np.all(range_to(pair.first, draw.states) <= cfg.r_max + 1e-9)
            assert np.all(draw.r1 >= (draw.delta_r + pair.baseline_length) / 2.0 - 1e-9)

    def test_both_roundtrips_for_every_particle(self, meas, cfg):
        rng = np.random.default_rng(9)
        pair, z = random_pair_and_measurement(rng, meas)
        draw = sample_birth_particles(pair, z, meas, cfg, rng)
        dr = range_to(pair.first, draw.states) - range_to(pair.second, draw.states)
        drr = range_rate(pair.first, draw.states) - range_rate(pair.second, draw.states)
        assert np.abs(dr - draw.delta_r).max() < 1e-6
        assert np.abs(drr - draw.delta_rr).max() < 1e-9


class TestBranchBalance:
    def test_hyperbola_halves_balanced(self, pair, meas, cfg):
        rng = np.random.default_rng(10)
        pos, _, _, _ = sample_position_from_tdoa(pair, 3e-7, meas, cfg, rng, size=10_000)
        upper = (pos[:, 1] > 0.0).mean()
        assert abs(upper - 0.5) <= 0.02

    def test_heading_branches_balanced(self, pair, cfg):
        # with df = 0 the two admissible headings are theta = -apex/2 and
        # theta = pi - apex/2; both should appear half the time
        rng = np.random.default_rng(11)
        position = np.array([700.0, 900.0])
        _, _, theta, _ = sample_velocity_from_fdoa(
            pair, position, 0.0, exact_meas(), cfg, rng, size=10_000
        )
        frac = (theta > np.pi / 4.0).mean()
        assert abs(frac - 0.5) <= 0.02

    def test_r1_uniform_conditional_on_dr(self, pair, cfg):
        # freeze dr by sampling with negligible noise; r1 must then be
        # uniform on [(dr + B)/2, r_max]
        rng = np.random.default_rng(12)
        dt = 1e-6
        _, dr, r1, _ = sample_position_from_tdoa(
            pair, dt, exact_meas(), cfg, rng, size=10_000
        )
        lo = (dr[0] + pair.baseline_length) / 2.0
        stat = kstest(r1, "uniform", args=(lo, cfg.r_max - lo))
        assert stat.pvalue > 0.01


class TestUniformBirth:
    def test_positions_inside_aoi(self, cfg):
        rng = np.random.default_rng(13)
        aoi = (0.0, 2000.0, 0.0, 2000.0)
        states = sample_uniform_birth(aoi, cfg, 5000, rng)
        assert np.all((states[:, 0] >= 0.0) & (states[:, 0] <= 2000.0))
        assert np.all((states[:, 2] >= 0.0) & (states[:, 2] <= 2000.0))
        speeds = np.hypot(states[:, 1], states[:, 3])
        assert np.all(speeds <= cfg.v_max)

    def test_mean_near_center(self, cfg):
        rng = np.random.default_rng(14)
        n = 20_000
        states = sample_uniform_birth((0.0, 2000.0, 0.0, 2000.0), cfg, n, rng)
        sigma = 2000.0 / np.sqrt(12.0) / np.sqrt(n)
        assert abs(states[:, 0].mean() - 1000.0) < 3.0 * sigma
        assert abs(states[:, 2].mean() - 1000.0) < 3.0 * sigma

    def test_count_zero_empty(self, cfg):
        states = sample_uniform_birth((0.0, 1.0, 0.0, 1.0), cfg, 0, np.random.default_rng(0))
        assert states.shape == (0, 4)


class TestConfig:
    def test_invariants(self):
        with pytest.raises(ValueError):
            BirthConfig(r_max=0.0, v_max=25.0)
        with pytest.raises(ValueError):
            BirthConfig(r_max=2000.0, v_max=25.0, m_b=0)
        with pytest.raises(ValueError):
            BirthConfig(r_max=2000.0, v_max=25.0, nu_b=0.0)
