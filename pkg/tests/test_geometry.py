import numpy as np
import pytest

from passivetrack.geometry import (
    SPEED_OF_LIGHT,
    SensorPair,
    SensorPose,
    TargetState,
    interior_angles,
    predict_measurement,
    range_rate,
    range_to,
)


@pytest.fixture
def pair():
    return SensorPair.from_positions([0.0, 0.0], [1000.0, 0.0])


def random_states(rng, n, speed=25.0, span=3000.0):
    out = np.empty((n, 4))
    out[:, 0] = rng.uniform(-span, span, n)
    out[:, 2] = rng.uniform(-span, span, n)
    heading = rng.uniform(0.0, 2.0 * np.pi, n)
    s = rng.uniform(0.0, speed, n)
    out[:, 1] = s * np.cos(heading)
    out[:, 3] = s * np.sin(heading)
    return out


class TestRange:
    def test_three_four_five(self):
        assert range_to(SensorPose([0.0, 0.0]), TargetState(3.0, 0.0, 4.0, 0.0)) == 5.0

    def test_coincident_is_zero(self):
        assert range_to([2.0, -7.0], [2.0, 0.0, -7.0, 0.0]) == 0.0

    def test_matches_high_precision_recomputation(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 50
        rng = np.random.default_rng(11)
        for _ in range(200):
            sensor = rng.uniform(-5000.0, 5000.0, 2)
            state = random_states(rng, 1)[0]
            got = range_to(sensor, state)
            exact = mpmath.sqrt(
                (mpmath.mpf(state[0]) - mpmath.mpf(sensor[0])) ** 2
                + (mpmath.mpf(state[2]) - mpmath.mpf(sensor[1])) ** 2
            )
            assert abs(got - float(exact)) <= 1e-12 * float(exact)


class TestRangeRate:
    def test_radial_recession(self):
        assert range_rate([0.0, 0.0], [100.0, 10.0, 0.0, 0.0]) == pytest.approx(10.0, abs=1e-15)

    def test_tangential_motion(self):
        assert range_rate([0.0, 0.0], [100.0, 0.0, 0.0, 10.0]) == 0.0

    def test_coincident_raises(self):
        with pytest.raises(ValueError):
            range_rate([1.0, 1.0], [1.0, 5.0, 1.0, 5.0])

    def test_finite_difference_oracle(self):
        rng = np.random.default_rng(5)
        h = 1e-6
        for _ in range(100):
            sensor = rng.uniform(-2000.0, 2000.0, 2)
            state = random_states(rng, 1)[0]
            if range_to(sensor, state) < 1.0:
                continue
            ahead = state.copy()
            ahead[0] += state[1] * h
            ahead[2] += state[3] * h
            behind = state.copy()
            behind[0] -= state[1] * h
            behind[2] -= state[3] * h
            numeric = (range_to(sensor, ahead) - range_to(sensor, behind)) / (2.0 * h)
            assert range_rate(sensor, state) == pytest.approx(numeric, abs=1e-4)


class TestPredictMeasurement:
    def test_bisector_gives_zero_dt(self, pair):
        rng = np.random.default_rng(1)
        for y in (-800.0, -3.0, 42.0, 1500.0):
            vx, vy = rng.uniform(-25.0, 25.0, 2)
            dt, _ = predict_measurement(pair, [500.0, vx, y, vy], fc=2.4e9)
            assert dt == 0.0

    def test_collinear_limits(self, pair):
        bound = pair.baseline_length / SPEED_OF_LIGHT
        # beyond the second sensor the range difference saturates at +B
        dt, _ = predict_measurement(pair, [1500.0, 1.0, 0.0, 0.0], fc=2.4e9)
        assert dt == pytest.approx(bound, rel=1e-12)
        # beyond the first sensor it saturates at -B
        dt, _ = predict_measurement(pair, [-500.0, 1.0, 0.0, 0.0], fc=2.4e9)
        assert dt == pytest.approx(-bound, rel=1e-12)

    def test_range_difference_roundtrip(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            pair = SensorPair.from_positions(
                rng.uniform(-2000.0, 2000.0, 2), rng.uniform(-2000.0, 2000.0, 2)
            )
            state = random_states(rng, 1)[0]
            dt, _ = predict_measurement(pair, state, fc=2.4e9)
            recomputed = range_to(pair.first, state) - range_to(pair.second, state)
            assert abs(dt * SPEED_OF_LIGHT - recomputed) < 1e-9

    def test_dt_bounded_by_baseline(self):
        rng = np.random.default_rng(4)
        pair = SensorPair.from_positions([-300.0, 200.0], [700.0, -100.0])
        states = random_states(rng, 1000)
        dt, _ = predict_measurement(pair, states, fc=2.4e9)
        assert np.all(np.abs(dt) <= pair.baseline_length / SPEED_OF_LIGHT)

    def test_coincident_raises(self, pair):
        with pytest.raises(ValueError):
            predict_measurement(pair, [0.0, 1.0, 0.0, 0.0], fc=2.4e9)


class TestInteriorAngles:
    def test_law_of_cosines_example(self, pair):
        # cos(alpha) = -B / (2 r1) for the equidistant target below the baseline
        alpha, beta = interior_angles(pair, [500.0, -500.0])
        assert alpha == pytest.approx(3.0 * np.pi / 4.0, rel=1e-12)
        assert beta == pytest.approx(np.pi / 4.0, rel=1e-12)

    def test_law_of_cosines_reproduces_r2(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            pair = SensorPair.from_positions(
                rng.uniform(-1000.0, 1000.0, 2), rng.uniform(-1000.0, 1000.0, 2)
            )
            pos = rng.uniform(-3000.0, 3000.0, 2)
            r1 = np.hypot(*(pos - pair.first.position))
            r2 = np.hypot(*(pos - pair.second.position))
            if r1 < 1.0 or r2 < 1.0:
                continue
            alpha, _ = interior_angles(pair, pos)
            b = pair.baseline_length
            recon = np.sqrt(r1**2 + b**2 + 2.0 * b * r1 * np.cos(alpha))
            assert recon == pytest.approx(r2, rel=1e-6)

    def test_triangle_angle_sum(self):
        # Re-expressed as interior triangle angles, the three angles sum to
        # pi: the apex angle between the two lines of sight is alpha - beta.
        rng = np.random.default_rng(10)
        for _ in range(200):
            pair = SensorPair.from_positions(
                rng.uniform(-1000.0, 1000.0, 2), rng.uniform(-1000.0, 1000.0, 2)
            )
            pos = rng.uniform(-2500.0, 2500.0, 2)
            d1 = pos - pair.first.position
            d2 = pos - pair.second.position
            if np.hypot(*d1) < 1.0 or np.hypot(*d2) < 1.0:
                continue
            alpha, beta = interior_angles(pair, pos)
            apex = np.arccos(
                np.clip(
                    np.dot(d1, d2) / (np.hypot(*d1) * np.hypot(*d2)), -1.0, 1.0
                )
            )
            assert (np.pi - alpha) + beta + apex == pytest.approx(np.pi, abs=1e-9)
            assert alpha - beta == pytest.approx(apex, abs=1e-9)

    def test_angles_in_range(self):
        rng = np.random.default_rng(12)
        pair = SensorPair.from_positions([0.0, 0.0], [800.0, 600.0])
        pos = rng.uniform(-2000.0, 2000.0, (500, 2))
        alpha, beta = interior_angles(pair, pos)
        assert np.all((alpha >= 0.0) & (alpha <= np.pi))
        assert np.all((beta >= 0.0) & (beta <= np.pi))

    def test_coincident_raises(self, pair):
        with pytest.raises(ValueError):
            interior_angles(pair, [1000.0, 0.0])


class TestTypes:
    def test_pair_requires_distinct_sensors(self):
        with pytest.raises(ValueError):
            SensorPair.from_positions([1.0, 2.0], [1.0, 2.0])

    def test_pair_baseline_fields(self):
        pair = SensorPair.from_positions([0.0, 0.0], [300.0, 400.0])
        assert pair.baseline_length == pytest.approx(500.0)
        assert pair.baseline_bearing == pytest.approx(np.arctan2(400.0, 300.0))
        assert -np.pi < pair.baseline_bearing <= np.pi

    def test_sensor_pose_validates(self):
        with pytest.raises(ValueError):
            SensorPose([np.nan, 0.0])

    def test_target_state_roundtrip(self):
        state = TargetState(1.0, 2.0, 3.0, 4.0)
        assert np.array_equal(state.as_array(), [1.0, 2.0, 3.0, 4.0])
        assert TargetState.from_array(state.as_array()) == state

    def test_target_state_validates(self):
        with pytest.raises(ValueError):
            TargetState(np.inf, 0.0, 0.0, 0.0)
