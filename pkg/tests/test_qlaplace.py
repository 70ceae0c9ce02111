import cmath

import numpy as np
import pytest

from qgevrey import (DomainError, GrowthCertificate, QBase, QuadSettings,
                     log_theta, pi_q, q_laplace, q_laplace_split,
                     truncation_window)
from qgevrey.qlaplace import majorant

CERT = GrowthCertificate(c1=2.0, mbar=0.1)
TIGHT = QuadSettings(abs_tol=1e-12)


def reference_transform(F, lam, z, base, s_lo=-45.0, s_hi=45.0, step=1e-4):
    """Independent oracle: one-shot fine-step Simpson over a padded window."""
    n = int(round((s_hi - s_lo) / step))
    if n % 2 == 1:
        n += 1
    s = np.linspace(s_lo, s_hi, n + 1)
    pts = np.exp(s * base.log_q) * lam
    vals = F(pts) * np.exp(-log_theta(pts / z, base))
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    h = s[1] - s[0]
    return base.log_q / pi_q(base) * (h / 3.0) * complex(np.dot(w, vals))


class TestTruncationWindow:
    def test_halving_tolerance_grows_window_slightly(self, base2):
        w1 = truncation_window(CERT, 1.0, 2.0, base2, 0.8, 1e-8)
        w2 = truncation_window(CERT, 1.0, 2.0, base2, 0.8, 5e-9)
        assert w2[0] <= w1[0] and w2[1] >= w1[1]
        assert (w1[0] - w2[0]) + (w2[1] - w1[1]) < 2.0

    def test_inadmissible_growth_rejected(self, base2):
        # decay rate vanishes at mbar = xi / (2 log|q|)
        xi = 0.8
        bad = GrowthCertificate(c1=1.0, mbar=xi / (2.0 * base2.log_abs_q))
        with pytest.raises(ValueError):
            truncation_window(bad, 1.0, 2.0, base2, xi, 1e-8)
        with pytest.raises(ValueError):
            q_laplace(lambda x: np.ones_like(x), 1.0, 2.0, base2,
                      GrowthCertificate(c1=1.0, mbar=1.0))

    def test_majorant_integral_outside_window(self, base2):
        # the defining property: the majorant mass beyond the window is
        # below the requested tolerance (summed numerically)
        cert = GrowthCertificate(c1=1.0, mbar=0.1)
        tol = 1e-10
        s_lo, s_hi = truncation_window(cert, 1.0, 2.0, base2, 0.8, tol)
        s = np.arange(s_hi, s_hi + 40.0, 1e-3)
        right = float(np.trapezoid(majorant(cert, 1.0, 2.0, base2, 0.8, s), s))
        s = np.arange(s_lo - 40.0, s_lo, 1e-3)
        left = float(np.trapezoid(majorant(cert, 1.0, 2.0, base2, 0.8, s), s))
        assert right + left < tol


class TestQLaplace:
    def test_zero_function(self, base2):
        val = q_laplace(lambda x: np.zeros_like(x), 1.0, 2.0, base2, CERT,
                        TIGHT)
        assert val == 0.0

    def test_linearity(self, base2):
        F = lambda x: 1.0 / (1.0 + x)
        G = lambda x: x / (1.0 + x) ** 2
        a, b = 2.0 - 1.0j, 0.5 + 0.25j
        sab = q_laplace(lambda x: a * F(x) + b * G(x), 1.0, 2.0, base2, CERT,
                        TIGHT)
        s1 = q_laplace(F, 1.0, 2.0, base2, CERT, TIGHT)
        s2 = q_laplace(G, 1.0, 2.0, base2, CERT, TIGHT)
        assert abs(sab - (a * s1 + b * s2)) <= 2.0 * TIGHT.abs_tol * (
            1.0 + abs(a) + abs(b))

    def test_constant_against_fine_oracle(self, base2):
        oracle = reference_transform(lambda x: np.ones_like(x), 1.0, 2.0,
                                     base2)
        val = q_laplace(lambda x: np.ones_like(x), 1.0, 2.0, base2, CERT,
                        TIGHT)
        assert abs(val - oracle) < 1e-11

    def test_unsafe_point_rejected(self, base2):
        # lam/z on the negative ray meets the kernel zero spiral: the
        # stated domain precondition fails and must be reported before
        # any integration happens
        with pytest.raises(DomainError) as err:
            q_laplace(lambda x: np.ones_like(x), 1.0, -2.0, base2, CERT,
                      TIGHT)
        assert err.value.membership == "theta_safe"

    def test_scalar_function_fallback(self, base2):
        val = q_laplace(lambda x: 1.0 / (1.0 + x), 1.0, 2.0, base2, CERT,
                        TIGHT)
        ref = q_laplace(lambda x: np.ones_like(x) / (1.0 + x), 1.0, 2.0,
                        base2, CERT, TIGHT)
        assert abs(val - ref) < 1e-13


class TestSplit:
    def test_zero_function(self, base2):
        p, m = q_laplace_split(lambda x: np.zeros_like(x), 1.0, 2.0, base2,
                               CERT, TIGHT)
        assert p == 0.0 and m == 0.0

    def test_sum_matches_unsplit(self, base2):
        F = lambda x: 1.0 / (1.0 + x)
        p, m = q_laplace_split(F, 1.0, 2.0, base2, CERT, TIGHT)
        total = q_laplace(F, 1.0, 2.0, base2, CERT, TIGHT)
        assert abs((p + m) - total) <= 2.0 * TIGHT.abs_tol

    def test_branches_against_fine_oracle(self, base2):
        F = lambda x: np.ones_like(x)
        p, m = q_laplace_split(F, 1.0, 2.0, base2, CERT, TIGHT)
        p_ref = reference_transform(F, 1.0, 2.0, base2, s_lo=0.0)
        m_ref = reference_transform(F, 1.0, 2.0, base2, s_hi=0.0)
        assert abs(p - p_ref) < 1e-10
        assert abs(m - m_ref) < 1e-10


class TestCommutation:
    def test_polynomial_family(self, base2):
        # multiplication by the integration variable trades for a dilation
        # of the evaluation point: T(tau phi)(t) = t T(phi)(q t)
        settings = QuadSettings(abs_tol=1e-10)
        t0 = 1.7
        for j, r in ((0, 1), (1, 2), (2, 3), (0, 2), (3, 4)):
            phi = (lambda jj, rr: lambda x: x**jj / (1.0 + x) ** rr)(j, r)
            mphi = (lambda jj, rr: lambda x: x ** (jj + 1)
                    / (1.0 + x) ** rr)(j, r)
            lhs = q_laplace(mphi, 1.0, t0, base2, CERT, settings)
            rhs = t0 * q_laplace(phi, 1.0, 2.0 * t0, base2, CERT, settings)
            assert abs(lhs - rhs) <= 1e-6 * max(abs(lhs), 1e-12)


class TestDirectionRobustness:
    def test_same_ray_reparameterization(self, base2):
        # directions on one q-ray parameterize the same path
        F = lambda x: 1.0 / (1.0 + x)
        lam = 1.2 * cmath.exp(0.3j)
        v1 = q_laplace(F, lam, 2.0 * cmath.exp(0.3j), base2, CERT, TIGHT)
        v2 = q_laplace(F, lam * qpow_half(base2), 2.0 * cmath.exp(0.3j),
                       base2, CERT, TIGHT)
        assert abs(v1 - v2) <= 20.0 * TIGHT.abs_tol


def qpow_half(base: QBase) -> complex:
    return cmath.exp(0.5 * base.log_q)


class TestStepHalvingConvergence:
    def test_tightening_tolerance_is_cauchy(self, base2):
        F = lambda x: x / (1.0 + x) ** 2
        vals = [q_laplace(F, 1.0, 2.0, base2, CERT,
                          QuadSettings(abs_tol=tol))
                for tol in (1e-6, 1e-8, 1e-10, 1e-12)]
        diffs = [abs(a - b) for a, b in zip(vals, vals[1:])]
        assert diffs[0] <= 1e-6
        assert diffs[-1] <= 1e-8

    def test_non_convergence_reported(self, base2):
        from qgevrey import ConvergenceError

        def wild(x):
            # oscillates on a scale the coarse refinement levels alias
            return np.cos(57.0 * np.log(x) / base2.log_q) ** 2 / (1.0 + x)

        with pytest.raises(ConvergenceError) as err:
            q_laplace(wild, 1.0, 2.0, base2, CERT,
                      QuadSettings(abs_tol=1e-15, max_halvings=3))
        assert err.value.last is not None
        assert err.value.previous is not None


class TestQuadSettings:
    def test_validation(self):
        with pytest.raises(ValueError):
            QuadSettings(abs_tol=0.0)
        with pytest.raises(ValueError):
            QuadSettings(initial_step=0.75)
        with pytest.raises(ValueError):
            QuadSettings(max_halvings=2)
        with pytest.raises(ValueError):
            GrowthCertificate(c1=-1.0, mbar=0.1)
