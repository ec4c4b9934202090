import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylschur.errors import DomainError, NonConvergent
from cylschur.specfun import (Accuracy, airy_ai, bessel_i, bessel_i_log, bessel_j, check_nome,
                              dedekind_eta, fermi_factor, log_pochhammer_qq, pochhammer_inf,
                              theta1, theta3, theta_mult)

# frozen with mpmath at 30 digits
POCH_HALF = 0.288788095086602421278899721929
THETA3_QUARTER = 2.12893682721187715866945854854
J0_2 = 0.22389077914123566805182745465
I0_2 = 2.27958530233606726743720444081
AI_0 = 0.355028053887817239260063186004
ETA_03 = 0.582672491345496260169854456726


class TestAccuracy:
    def test_defaults(self):
        acc = Accuracy()
        assert acc.rel_tol == 1e-12 and acc.max_terms == 10**6

    @pytest.mark.parametrize("kw", [{"rel_tol": 0.0}, {"rel_tol": 1e-3}, {"max_terms": 10}])
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            Accuracy(**kw)

    @pytest.mark.parametrize("q", [-0.1, 1.0, 1.5])
    def test_nome_range(self, q):
        with pytest.raises(DomainError):
            check_nome(q)


class TestPochhammer:
    def test_zero_argument(self):
        assert pochhammer_inf(0, 0.7) == 1

    def test_half_half(self):
        assert abs(pochhammer_inf(0.5, 0.5) - POCH_HALF) < 1e-14

    def test_vanishing_first_factor(self):
        assert pochhammer_inf(1, 0.0) == 0

    def test_log_form(self):
        assert math.isclose(log_pochhammer_qq(0.5), math.log(POCH_HALF), rel_tol=1e-13)
        # far past underflow of the product itself
        assert math.isclose(log_pochhammer_qq(0.999), float(mp.log(mp.qp(0.999, 0.999))), rel_tol=1e-10)

    def test_max_terms(self):
        with pytest.raises(NonConvergent):
            pochhammer_inf(1.0, 0.9999, Accuracy(max_terms=100))

    def test_vectorized(self):
        z = np.array([0.1, 0.2j, -0.3])
        out = pochhammer_inf(z, 0.4)
        for zi, oi in zip(z, out):
            assert abs(oi - complex(mp.qp(zi, 0.4))) < 1e-14


class TestTheta:
    def test_theta_mult_zero(self):
        assert theta_mult(1, 0.5) == 0

    def test_theta_mult_q0(self):
        assert theta_mult(-1, 0.0) == 2

    def test_theta_mult_quasi_periodicity(self):
        z, q = 0.3 + 0.1j, 0.4
        assert abs(theta_mult(q * z, q) + theta_mult(z, q) / z) < 1e-13

    def test_theta_mult_mpmath(self):
        z = 0.3 + 0.1j
        ref = complex(mp.qp(z, 0.4) * mp.qp(0.4 / mp.mpc(z), 0.4))
        assert abs(theta_mult(z, 0.4) - ref) < 1e-14

    def test_theta_mult_rejects_zero(self):
        with pytest.raises(DomainError):
            theta_mult(0, 0.3)

    def test_theta3_values(self):
        assert theta3(1, 0.0) == 1
        assert abs(theta3(1, 0.25) - THETA3_QUARTER) < 1e-13

    def test_triple_product_example(self):
        z, q = 0.8, 0.3
        rhs = pochhammer_inf(q, q) * theta_mult(-math.sqrt(q) * z, q)
        assert abs(theta3(z, q) - rhs) < 1e-12

    def test_theta1_real_on_circle(self):
        phi = np.linspace(0.1, 3.0, 7)
        vals = theta1(np.exp(1j * phi), 0.3)
        assert np.max(np.abs(vals.imag)) < 1e-13

    def test_theta1_against_jacobi(self):
        # theta1(e^{2iv}; q) = 2 sum (-1)^n p^{(n+1/2)^2} sin((2n+1)v), p = q^{1/2}
        q, v = 0.3, 0.7
        ref = float(mp.jtheta(1, v, mp.sqrt(q)))
        assert abs(theta1(np.exp(2j * v), q).real - ref) < 1e-13

    def test_eta(self):
        assert abs(dedekind_eta(0.3) - ETA_03) < 1e-14
        assert dedekind_eta(0.0) == 0.0


class TestBessel:
    def test_j_values(self):
        assert bessel_j(0, 0.0) == 1.0
        assert abs(bessel_j(0, 2.0) - J0_2) < 1e-15
        assert abs(bessel_j(7, 3.5) - 0.00674300031563839859338043656971) < 1e-16
        assert abs(bessel_j(300, 290.0) - 0.00767703425614125285769366126576) < 1e-14

    def test_j_negative_order(self):
        assert abs(bessel_j(-3, 10.0) - (-0.0583793793051868123429354784103)) < 1e-15
        assert bessel_j(-4, 3.0) == pytest.approx(bessel_j(4, 3.0), abs=1e-16)

    def test_j_series_oracle(self):
        x = 2.0
        series = sum((-1) ** k * (x / 2) ** (2 * k) / math.factorial(k) ** 2 for k in range(30))
        assert abs(bessel_j(0, x) - series) < 1e-15

    def test_generating_series(self):
        L, z = 3.0, np.exp(1j * np.pi / 5)
        n = np.arange(-60, 61)
        lhs = np.sum(bessel_j(n, 2 * L) * z**n)
        assert abs(lhs - np.exp(L * (z - 1 / z))) < 1e-12

    @pytest.mark.parametrize("x", [1.0, 10.0, 100.0])
    def test_neumann_normalization(self, x):
        n = np.arange(1, int(x) + 80)
        total = bessel_j(0, x) ** 2 + 2 * np.sum(bessel_j(n, x) ** 2)
        assert abs(total - 1) < 1e-12

    def test_recurrence_large_order(self):
        n, x = 20000, 20000.0
        j = bessel_j(np.array([n - 1, n, n + 1]), x)
        assert abs(j[0] + j[2] - 2 * n / x * j[1]) < 1e-10 * abs(j[1])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 400), st.floats(0.5, 500.0))
    def test_recurrence_property(self, n, x):
        j = bessel_j(np.array([n - 1, n, n + 1]), x)
        scale = max(abs(j[0]), abs(j[2]), abs(j[1]) * 2 * n / x)
        assert abs(j[0] + j[2] - 2 * n / x * j[1]) <= 1e-10 * scale + 1e-300

    def test_nicholson(self):
        L = 1e4
        c = L ** (1 / 3)
        n = np.floor(2 * L + np.arange(-2, 2.01, 0.5) * c).astype(int)
        assert np.max(np.abs(c * bessel_j(n, 2 * L) - airy_ai((n - 2 * L) / c))) < 1e-2

    def test_rejects_bad_input(self):
        with pytest.raises(DomainError):
            bessel_j(0.5, 1.0)
        with pytest.raises(DomainError):
            bessel_j(1, -1.0)

    def test_i_values(self):
        assert bessel_i(0, 0.0) == 1.0
        assert bessel_i(5, 0.0) == 0.0
        assert abs(bessel_i(0, 2.0) - I0_2) < 1e-14
        assert math.isclose(bessel_i(12, 30.0), 70361879442.4102027022232262932, rel_tol=1e-13)

    def test_i_defining_integral(self):
        # I_n(x) = (1/pi) int_0^pi e^{x cos t} cos(n t) dt, trapezoid on the periodic integrand
        t = np.linspace(0, 2 * np.pi, 257)[:-1]
        for n, x in [(0, 2.0), (3, 1.5), (7, 12.0)]:
            quad = np.mean(np.exp(x * np.cos(t)) * np.cos(n * t))
            assert math.isclose(bessel_i(n, x), quad, rel_tol=1e-12)

    def test_i_overflow_and_log(self):
        with pytest.raises(OverflowError):
            bessel_i(0, 1000.0)
        assert abs(bessel_i_log(0, 1000.0) - 995.627308889869464671467764481) < 1e-10
        assert abs(bessel_i_log(40, 2000.0) - 1994.88058605020403591041663887) < 1e-10

    def test_i_log_debye_branch(self):
        # ive underflows here; the asymptotic branch must still be close
        ref = float(mp.log(mp.besseli(2000, 10.0)))
        assert abs(bessel_i_log(2000, 10.0) - ref) < 1e-3 * abs(ref)


class TestAiry:
    def test_value_at_zero(self):
        assert abs(airy_ai(0.0) - AI_0) < 1e-15

    def test_contour_oracle(self):
        # Ai(x) = (1/2pi) int exp((1 + i s)^3 / 3 - x (1 + i s)) ds on Re zeta = 1
        s = np.linspace(-12, 12, 4001)
        zeta = 1 + 1j * s
        for x in (-2.0, 0.0, 1.5):
            f = np.exp(zeta**3 / 3 - x * zeta)
            val = np.trapezoid(f, s).real / (2 * np.pi)
            assert abs(airy_ai(x) - val) < 1e-12

    @pytest.mark.parametrize("x", [-2.0, 0.0, 2.0])
    def test_ode_residual(self, x):
        h = 1e-3
        d2 = (airy_ai(x + h) - 2 * airy_ai(x) + airy_ai(x - h)) / h**2
        assert abs(d2 - x * airy_ai(x)) < 1e-6

    def test_far_values(self):
        assert abs(airy_ai(-5.0) - 0.350761009024114319788016327697) < 1e-14
        assert 0 < airy_ai(20.0) < 1e-17
        assert math.isclose(airy_ai(20.0), 1.69167286867054031355356021251e-27, rel_tol=1e-12)

    def test_window(self):
        with pytest.raises(DomainError):
            airy_ai(-41.0)
        with pytest.raises(DomainError):
            airy_ai(201.0)


class TestFermi:
    def test_values(self):
        assert fermi_factor(0.0, 3.0) == 0.5
        assert fermi_factor(1.0, math.inf) == 1.0
        assert fermi_factor(0.0, math.inf) == 0.5
        assert fermi_factor(-1.0, math.inf) == 0.0

    def test_overflow_safe(self):
        assert fermi_factor(1e6, 5.0) == 1.0
        assert fermi_factor(-1e6, 5.0) == 0.0

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-50, 50), st.floats(0.01, 50))
    def test_complementarity(self, v, alpha):
        assert abs(fermi_factor(v, alpha) + fermi_factor(-v, alpha) - 1) < 1e-15

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(DomainError):
            fermi_factor(0.3, 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 0.95), st.floats(-0.75, 0.75), st.floats(-math.pi, math.pi))
def test_triple_product_property(q, e, phi):
    z = q**e * np.exp(1j * phi)
    rhs = pochhammer_inf(q, q) * theta_mult(-math.sqrt(q) * z, q)
    # accuracy is relative to the size of the summed terms, theta3(|z|)
    assert abs(theta3(z, q) - rhs) <= 1e-12 * abs(theta3(abs(z), q))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.01, 0.9))
def test_fermion_boson_product(t, q):
    sq = math.sqrt(q)
    lhs = pochhammer_inf(-t * sq, q) * pochhammer_inf(-sq / t, q)
    assert math.isclose(lhs.real, (theta3(t, q) / pochhammer_inf(q, q)).real, rel_tol=1e-12)
