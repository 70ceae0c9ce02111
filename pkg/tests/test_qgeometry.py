import cmath
import math

import numpy as np
import pytest

from qgevrey import (ChartBase, ContinuousBase, DomainError, QBase,
                     in_continuous_spiral, in_discrete_spiral, in_theta_safe,
                     qpow, spiral_coordinates, spiral_min_distance)


class TestQBase:
    def test_rejects_small_modulus(self):
        with pytest.raises(ValueError):
            QBase(0.5)
        with pytest.raises(ValueError):
            QBase(cmath.exp(0.3j))  # modulus one

    def test_log_branch_consistent(self):
        b = QBase(2.0 * cmath.exp(0.4j))
        assert abs(cmath.exp(b.log_q) - b.q) < 1e-14 * abs(b.q)


class TestQpow:
    def test_identity_cases(self, base2):
        assert qpow(base2, 0.0) == 1.0
        assert qpow(base2, 1.0) == 2.0
        assert abs(qpow(base2, 0.5) - math.sqrt(2.0)) < 1e-15

    def test_additivity(self, bases, rng):
        for b in bases:
            for _ in range(50):
                s, t = rng.uniform(-5, 5, 2)
                lhs = qpow(b, s + t)
                rhs = qpow(b, s) * qpow(b, t)
                assert abs(lhs - rhs) <= 1e-12 * abs(lhs)

    def test_array_argument(self, base2):
        t = np.array([0.0, 1.0, 2.0])
        np.testing.assert_allclose(qpow(base2, t), [1.0, 2.0, 4.0])


class TestSpiralCoordinates:
    def test_roundtrip(self, bases, rng):
        for b in bases:
            for _ in range(30):
                u = rng.uniform(0, 1)
                v = rng.uniform(-4, 2)
                pt = cmath.exp(2j * math.pi * u) * qpow(b, v)
                uu, vv = spiral_coordinates(pt, b)
                assert abs(vv - v) < 1e-10
                assert min(abs(uu - u), 1 - abs(uu - u)) < 1e-10

    def test_origin_rejected(self, base2):
        with pytest.raises(DomainError):
            spiral_coordinates(0.0, base2)


class TestDiscreteSpiral:
    CHART = ChartBase(i1=(0.1, 0.3), i2=(-0.4, -0.2))

    def _point(self, b, u, v):
        return cmath.exp(2j * math.pi * u) * qpow(b, v)

    def test_direct_membership(self, base2):
        pt = self._point(base2, 0.2, -0.3)
        assert in_discrete_spiral(pt, self.CHART, base2)

    def test_depth_three(self, base2):
        pt = self._point(base2, 0.2, -0.3) * qpow(base2, -3.0)
        assert in_discrete_spiral(pt, self.CHART, base2)

    def test_large_modulus_excluded(self, base2):
        # |eps| above every chart point: eps q^n only grows
        pt = self._point(base2, 0.2, 0.5)
        assert not in_discrete_spiral(pt, self.CHART, base2)

    def test_wrong_angle_excluded(self, base2):
        pt = self._point(base2, 0.6, -0.3)
        assert not in_discrete_spiral(pt, self.CHART, base2)

    def test_monotone_under_division(self, bases, rng):
        chart = self.CHART
        for b in bases:
            for _ in range(20):
                pt = self._point(b, rng.uniform(0.1, 0.3),
                                 rng.uniform(-0.4, -0.2))
                pt *= qpow(b, -float(rng.integers(0, 4)))
                if in_discrete_spiral(pt, chart, b):
                    assert in_discrete_spiral(pt / b.q, chart, b)

    def test_u_wraps_modulo_one(self, base2):
        chart = ChartBase(i1=(0.95, 1.15), i2=(-0.4, -0.2))
        pt = self._point(base2, 0.05, -0.3)
        assert in_discrete_spiral(pt, chart, base2)


class TestContinuousSpiral:
    VSET = ContinuousBase(mod=(1.1, 1.4), arg=(0.1, 0.3))

    def test_base_membership(self, base2):
        assert in_continuous_spiral(1.2 * cmath.exp(0.2j), self.VSET, base2)

    def test_level_five_point_seven(self, base2):
        pt = 1.2 * cmath.exp(0.2j) * qpow(base2, 5.7)
        assert in_continuous_spiral(pt, self.VSET, base2)

    def test_below_dist0_excluded(self, base2):
        assert self.VSET.dist0 == 1.1
        assert not in_continuous_spiral(0.9 * cmath.exp(0.2j), self.VSET,
                                        base2)

    def test_monotone_under_growth(self, bases, rng):
        for b in bases:
            for _ in range(20):
                pt = (rng.uniform(1.1, 1.4)
                      * cmath.exp(1j * rng.uniform(0.1, 0.3))
                      * qpow(b, rng.uniform(0, 3)))
                if in_continuous_spiral(pt, self.VSET, b):
                    assert in_continuous_spiral(pt * qpow(b, 2.5),
                                                self.VSET, b)

    def test_two_sided_flag(self, base2):
        pt = 1.2 * cmath.exp(0.2j) * qpow(base2, -2.0)
        assert not in_continuous_spiral(pt, self.VSET, base2)
        assert in_continuous_spiral(pt, self.VSET, base2, two_sided=True)

    def test_complex_base_argument_drift(self):
        # with complex q the argument rotates along the spiral
        b = QBase(1.5 * cmath.exp(0.5j))
        pt = 1.2 * cmath.exp(0.2j) * qpow(b, 3.3)
        assert in_continuous_spiral(pt, self.VSET, b)
        assert not in_continuous_spiral(1.2 * cmath.exp(1.2j), self.VSET,
                                        QBase(2.0))


def brute_force_min_distance(w, base, k_lo=-80.0, k_hi=80.0, step=1e-4):
    ks = np.arange(k_lo, k_hi, step)
    return float(np.min(np.abs(1.0 + w * np.exp(-ks * base.log_q))))


class TestThetaSafe:
    def test_positive_ray_safe(self, base2):
        # lam/z positive real: |1 + positive| >= 1
        assert in_theta_safe(2.0, 1.0, base2, 0.5)

    def test_ratio_minus_one_unsafe(self, base2):
        assert not in_theta_safe(-1.0, 1.0, base2, 0.5)

    def test_against_brute_force_scan(self, rng):
        b = QBase(2.0 * cmath.exp(0.1j))
        # includes the near-critical spiral point -q^0.31
        ws = [-qpow(b, 0.31)]
        for _ in range(25):
            ws.append(rng.uniform(0.3, 3.0)
                      * cmath.exp(1j * rng.uniform(0, 2 * math.pi)))
        for w in ws:
            oracle = brute_force_min_distance(w, b)
            fast = spiral_min_distance(w, b, 0.5)
            # both must land on the same side of delta = 0.5
            assert (oracle > 0.5) == (fast > 0.5)
            # the scan is a certified lower bound, exact below the
            # outside-band floor (0.75 at delta = 0.5)
            assert fast <= oracle + 1e-6
            if 0.05 < oracle < 0.7:
                assert abs(oracle - fast) < 1e-6

    def test_invariant_under_q_shift(self, bases, rng):
        for b in bases:
            for _ in range(10):
                z = rng.uniform(0.5, 2.0) * cmath.exp(1j * rng.uniform(0, 6))
                lam = rng.uniform(1.0, 1.5) * cmath.exp(1j * rng.uniform(0, 6))
                s = rng.uniform(-3, 3)
                assert in_theta_safe(z, lam, b, 0.3) == \
                    in_theta_safe(z * qpow(b, s), lam, b, 0.3)

    def test_preconditions(self, base2):
        with pytest.raises(DomainError):
            in_theta_safe(0.0, 1.0, base2, 0.3)
        with pytest.raises(ValueError):
            in_theta_safe(1.0, 1.0, base2, 1.5)


class TestChartBase:
    def test_interval_length_cap(self):
        with pytest.raises(ValueError):
            ChartBase(i1=(0.0, 0.3), i2=(0.0, 0.1))
        with pytest.raises(ValueError):
            ChartBase(i1=(0.0, 0.1), i2=(0.0, 0.25))

    def test_continuous_base_validation(self):
        with pytest.raises(ValueError):
            ContinuousBase(mod=(0.0, 1.0), arg=(0.0, 0.1))
        with pytest.raises(ValueError):
            ContinuousBase(mod=(1.0, 2.0), arg=(0.0, 7.0))
