import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softgrip.errors import DegenerateDataError, InsufficientDataError, SaturationError
from softgrip.kinematics import JointAngles, forward_kinematics
from softgrip.pressure import (
    DEFAULT_MAPS,
    CalibrationSample,
    ChannelMaps,
    LinearMap,
    PressureVector,
    angles_from_pressures,
    fit_linear_map,
    fk_from_pressures,
    pressures_from_angles,
)

MAPS = ChannelMaps(
    distal=LinearMap(k=0.01, b=0.05),
    root=LinearMap(k=0.02, b=-0.1),
    lateral=LinearMap(k=0.005, b=0.0),
)
ZERO_MAPS = ChannelMaps(LinearMap(0.01), LinearMap(0.02), LinearMap(0.005))


def normal_equations_oracle(x, y):
    """Brute-force OLS through the 2x2 normal equations."""
    n = len(x)
    sx, sy = np.sum(x), np.sum(y)
    sxx, sxy = np.sum(x * x), np.sum(x * y)
    det = n * sxx - sx * sx
    k = (n * sxy - sx * sy) / det
    b = (sxx * sy - sx * sxy) / det
    return k, b


class TestAnglesFromPressures:
    def test_zero_pressures_zero_intercepts(self):
        a = angles_from_pressures(PressureVector(0, 0, 0, 0), ZERO_MAPS)
        assert a.as_tuple() == (0.0, 0.0, 0.0)

    def test_balanced_lateral_pair(self):
        a = angles_from_pressures(PressureVector(0, 23.5, 0, 23.5), ZERO_MAPS)
        assert a.phi == 0.0

    def test_hand_computed_affine(self):
        a = angles_from_pressures(PressureVector(50, 30, 40, 10), MAPS)
        assert a.theta1 == pytest.approx(0.55, abs=1e-12)
        assert a.theta2 == pytest.approx(0.7, abs=1e-12)
        assert a.phi == pytest.approx(0.1, abs=1e-12)

    def test_range_check(self):
        with pytest.raises(SaturationError):
            angles_from_pressures(PressureVector(100, 0, 0, 0), MAPS, p_max=60.0)

    @given(
        p=st.tuples(*[st.floats(0, 60)] * 4),
        q=st.tuples(*[st.floats(0, 60)] * 4),
        alpha=st.floats(0, 1),
    )
    @settings(deadline=None)
    def test_affine_in_pressures(self, p, q, alpha):
        mix = PressureVector(*(alpha * a + (1 - alpha) * b for a, b in zip(p, q)))
        fa = angles_from_pressures(PressureVector(*p), MAPS)
        fb = angles_from_pressures(PressureVector(*q), MAPS)
        fm = angles_from_pressures(mix, MAPS)
        for name in ("theta1", "theta2", "phi"):
            blended = alpha * getattr(fa, name) + (1 - alpha) * getattr(fb, name)
            assert getattr(fm, name) == pytest.approx(blended, abs=1e-9)

    @given(p1=st.floats(0, 40), p3=st.floats(0, 40), off=st.floats(0, 20))
    @settings(deadline=None)
    def test_lateral_depends_on_difference_only(self, p1, p3, off):
        a = angles_from_pressures(PressureVector(0, p1, 0, p3), MAPS)
        b = angles_from_pressures(PressureVector(0, p1 + off, 0, p3 + off), MAPS)
        assert a.phi == pytest.approx(b.phi, abs=1e-12)


class TestPressuresFromAngles:
    def test_zero_angles_zero_intercepts(self):
        p = pressures_from_angles(JointAngles(0, 0, 0), ZERO_MAPS, lateral_bias=30.0)
        assert p.as_tuple() == (0.0, 30.0, 0.0, 30.0)

    def test_roundtrip_identity(self, rng):
        for _ in range(200):
            a = JointAngles(
                theta1=rng.uniform(0.05, 0.55),
                theta2=rng.uniform(-0.1, 1.0),
                phi=rng.uniform(-0.1, 0.1),
            )
            p = pressures_from_angles(a, MAPS, lateral_bias=30.0)
            back = angles_from_pressures(p, MAPS)
            assert back.theta1 == pytest.approx(a.theta1, abs=1e-12)
            assert back.theta2 == pytest.approx(a.theta2, abs=1e-12)
            assert back.phi == pytest.approx(a.phi, abs=1e-12)

    def test_lateral_headroom_saturation(self):
        # bias 10 kPa but the demanded split is 15 kPa per side
        maps = ChannelMaps(LinearMap(0.01), LinearMap(0.02), LinearMap(0.005))
        with pytest.raises(SaturationError) as exc:
            pressures_from_angles(JointAngles(0, 0, 0.15), maps, lateral_bias=10.0)
        assert exc.value.feasible_range is not None

    def test_flexion_saturation_reports_feasible_range(self):
        with pytest.raises(SaturationError) as exc:
            pressures_from_angles(JointAngles(2.0, 0, 0), MAPS, p_max=60.0)
        lo, hi = exc.value.feasible_range
        assert lo == pytest.approx(0.05)
        assert hi == pytest.approx(0.65)


class TestFitLinearMap:
    def test_exact_line(self):
        samples = [CalibrationSample(p, 0.01 * p + 0.2) for p in np.linspace(0, 60, 20)]
        m, rmse = fit_linear_map(samples)
        assert m.k == pytest.approx(0.01, abs=1e-12)
        assert m.b == pytest.approx(0.2, abs=1e-12)
        assert rmse == pytest.approx(0.0, abs=1e-12)

    @given(k=st.floats(-0.05, 0.05).filter(lambda v: abs(v) > 1e-4), b=st.floats(-1, 1))
    @settings(deadline=None)
    def test_two_point_exact_recovery(self, k, b):
        samples = [CalibrationSample(0.0, b), CalibrationSample(100.0, b + 100.0 * k)]
        m, rmse = fit_linear_map(samples)
        assert m.k == pytest.approx(k, rel=1e-9, abs=1e-12)
        assert m.b == pytest.approx(b, rel=1e-9, abs=1e-12)

    def test_noisy_fit_against_normal_equations_oracle(self, rng):
        sigma, k, b, n = 0.02, 0.01, 0.2, 50
        x = rng.uniform(0, 60, n)
        y = k * x + b + rng.normal(0, sigma, n)
        m, rmse = fit_linear_map([CalibrationSample(p, a) for p, a in zip(x, y)])
        ko, bo = normal_equations_oracle(x, y)
        assert m.k == pytest.approx(ko, rel=1e-9)
        assert m.b == pytest.approx(bo, rel=1e-9)
        # estimator lands within 4 true standard errors
        sxx = np.sum((x - x.mean()) ** 2)
        se_k = sigma / np.sqrt(sxx)
        se_b = sigma * np.sqrt(1 / n + x.mean() ** 2 / sxx)
        assert abs(m.k - k) < 4 * se_k
        assert abs(m.b - b) < 4 * se_b
        assert rmse == pytest.approx(sigma, rel=0.3)

    def test_permutation_invariance(self, rng):
        samples = [
            CalibrationSample(p, 0.01 * p + rng.normal(0, 0.01)) for p in range(10)
        ]
        m1, r1 = fit_linear_map(samples)
        shuffled = list(samples)
        rng.shuffle(shuffled)
        m2, r2 = fit_linear_map(shuffled)
        assert m1.k == pytest.approx(m2.k, rel=1e-12)
        assert m1.b == pytest.approx(m2.b, rel=1e-12)
        assert r1 == pytest.approx(r2, rel=1e-12)

    def test_degenerate_and_insufficient(self):
        with pytest.raises(InsufficientDataError):
            fit_linear_map([CalibrationSample(1.0, 0.1)])
        with pytest.raises(DegenerateDataError):
            fit_linear_map([CalibrationSample(5.0, 0.1), CalibrationSample(5.0, 0.2)])


class TestFkFromPressures:
    def test_zero_pressures_full_extension(self):
        tip = fk_from_pressures(PressureVector(0, 0, 0, 0), ZERO_MAPS)
        np.testing.assert_allclose(tip, [114.0, 0.0, 0.0], atol=1e-12)

    def test_equals_composition(self, rng):
        for _ in range(100):
            p = PressureVector(*rng.uniform(5, 55, 4))
            direct = fk_from_pressures(p, DEFAULT_MAPS)
            composed = forward_kinematics(angles_from_pressures(p, DEFAULT_MAPS))
            np.testing.assert_allclose(direct, composed, rtol=1e-12)

    def test_p2_sweep_keeps_lateral_ratio(self):
        # with a fixed lateral difference and b3 = 0 the tip stays on a plane
        # through the x-axis: z/y constant
        p1, p3 = 40.0, 20.0
        ratios = []
        for p2 in np.linspace(0, 50, 11):
            tip = fk_from_pressures(PressureVector(10.0, p1, p2, p3), DEFAULT_MAPS)
            ratios.append(tip[2] / tip[1])
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-9)
