import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylschur.errors import DomainError, LimitExceeded
from cylschur.partitions import (MayaDiagram, Partition, Specialization, StrictPartition,
                                 StrictSpecialization, cauchy_pairing, charge, charged_from_maya,
                                 contains, energy, enumerate_partitions, h_coeffs, interlaces,
                                 maya_from_charged, q_coeffs, skew_schur, skew_schur_matrix,
                                 skew_schur_p, skew_schur_q, skew_schur_q_matrix)


def hook_dim(lam):
    """Number of standard Young tableaux by the hook length formula (independent of Jacobi-Trudi)."""
    conj = Partition(lam).conjugate()
    hooks = 1
    for i, row in enumerate(lam):
        for j in range(row):
            hooks *= (row - j - 1) + (conj[j] - i - 1) + 1
    return math.factorial(sum(lam)) // hooks


def bialternant(lam, xs):
    """s_lambda(x_1..x_n) = det(x_i^{lam_j + n - j}) / det(x_i^{n - j})."""
    n = len(xs)
    lam = list(lam) + [0] * (n - len(lam))
    num = np.array([[x ** (lam[j] + n - 1 - j) for j in range(n)] for x in xs])
    den = np.array([[x ** (n - 1 - j) for j in range(n)] for x in xs])
    return np.linalg.det(num) / np.linalg.det(den)


def schur_p_symmetrized(lam, xs):
    """Schur P by symmetrizing x^lam prod_{i <= l, i < j} (x_i + x_j)/(x_i - x_j) over S_n."""
    n, ell = len(xs), len(lam)
    total = 0.0
    for w in itertools.permutations(range(n)):
        y = [xs[k] for k in w]
        term = math.prod(y[i] ** lam[i] for i in range(ell))
        for i in range(ell):
            for j in range(i + 1, n):
                term *= (y[i] + y[j]) / (y[i] - y[j])
        total += term
    return total / math.factorial(n - ell)


partitions_st = st.lists(st.integers(1, 8), max_size=6).map(lambda xs: Partition(sorted(xs, reverse=True)))


class TestPartitionTypes:
    def test_validation(self):
        assert Partition([3, 1, 0, 0]) == (3, 1)
        with pytest.raises(DomainError):
            Partition([1, 2])
        with pytest.raises(DomainError):
            StrictPartition([2, 2])

    def test_accessors(self):
        lam = Partition([4, 2, 1])
        assert lam.size() == 7 and lam.length() == 3
        assert lam.part(1) == 4 and lam.part(5) == 0
        assert lam.conjugate() == (3, 2, 1, 1)

    @given(partitions_st)
    def test_conjugate_involution(self, lam):
        assert lam.conjugate().conjugate() == lam
        assert lam.conjugate().size() == lam.size()

    def test_containment(self):
        assert contains((3, 1), (2, 1)) and not contains((3,), (1, 1))
        assert interlaces((3, 1), (2,)) and interlaces((3, 1), (1, 1))
        assert not interlaces((3, 3), (2,))


class TestMaya:
    def test_vacuum(self):
        m = maya_from_charged((), 0)
        assert m.is_vacuum() and (charge(m), energy(m)) == (0, 0)

    def test_single_particle(self):
        m = MayaDiagram(particles=frozenset({1}))
        assert (charge(m), energy(m)) == (1, 0.5)

    def test_figure_configuration(self):
        m = maya_from_charged((4, 2, 1), 2)
        assert charge(m) == 2 and energy(m) == 9
        assert charged_from_maya(m) == ((4, 2, 1), 2)

    def test_uncharged_particles(self):
        # particles at 7/2, 1/2, -3/2 are stored as 4, 1, -1
        m = maya_from_charged((4, 2, 1), 0)
        assert m.particles == {4, 1}
        assert m.holes == {0, -2}
        assert m.occupied(-1) and not m.occupied(0)

    def test_invariant_sites(self):
        with pytest.raises(DomainError):
            MayaDiagram(particles=frozenset({0}))
        with pytest.raises(DomainError):
            MayaDiagram(holes=frozenset({1}))

    @settings(max_examples=300)
    @given(partitions_st, st.integers(-5, 5))
    def test_round_trip(self, lam, c):
        m = maya_from_charged(lam, c)
        assert charged_from_maya(m) == (lam, c)
        assert charge(m) == c
        assert energy(m) == lam.size() + c * c / 2

    @given(partitions_st, st.integers(-5, 5))
    def test_from_occupied_matches(self, lam, c):
        m = maya_from_charged(lam, c)
        lo, hi = -20, 20
        assert MayaDiagram.from_occupied(m.occupied_sites(lo, hi), lo, hi) == m


class TestCoefficients:
    def test_exponential(self):
        h = h_coeffs(Specialization.exponential(2.0), 3)
        assert h[0] == 1 and abs(h[3] - 4 / 3) < 1e-15

    def test_single(self):
        assert np.allclose(h_coeffs(Specialization.single(0.3), 5), 0.3 ** np.arange(6), rtol=1e-15)

    def test_mixed(self):
        h = h_coeffs(Specialization(0.0, (0.5,), (0.25,)), 4)
        # (1 + z/4)/(1 - z/2) = 1 + sum_{n>=1} (2^{-n} + 2^{-n-1}) z^n
        assert np.allclose(h, [1, 0.75, 0.375, 0.1875, 0.09375], rtol=1e-15)

    def test_q_coeffs(self):
        q = q_coeffs(StrictSpecialization.single(0.3), 4)
        assert q[0] == 1 and np.allclose(q[1:], 2 * 0.3 ** np.arange(1, 5), rtol=1e-15)
        assert abs(q[2] - 0.18) < 1e-15
        g = q_coeffs(StrictSpecialization(gamma=1.5), 5)
        assert np.allclose(g, [1.5**n / math.factorial(n) for n in range(6)], rtol=1e-14)

    def test_generating_function_values(self):
        rho = Specialization(0.7, (0.3, 0.1), (0.2,))
        h = h_coeffs(rho, 60)
        z = 0.9
        assert abs(np.polyval(h[::-1], z) - rho.h(z).real) < 1e-13


class TestSkewSchur:
    def test_examples(self):
        assert abs(skew_schur((1,), (), Specialization.exponential(1.7)) - 1.7) < 1e-15
        assert abs(skew_schur((2, 1), (), Specialization.exponential(1.0)) - 1 / 3) < 1e-15
        q = Specialization.single(0.4)
        assert abs(skew_schur((3, 1), (2,), q) - 0.4**2) < 1e-15
        assert abs(skew_schur((3, 1), (1, 1), q) - 0.4**2) < 1e-15
        assert abs(skew_schur((2, 2), (1,), q)) < 1e-15

    def test_not_contained(self):
        assert skew_schur((2,), (3,), Specialization.exponential(1.0)) == 0

    @pytest.mark.parametrize("lam", [(1,), (2, 1), (3, 2, 1), (4, 2, 2, 1), (5, 3)])
    def test_exponential_hook(self, lam):
        g = 1.3
        n = sum(lam)
        ref = g**n * hook_dim(lam) / math.factorial(n)
        assert math.isclose(skew_schur(lam, (), Specialization.exponential(g)), ref, rel_tol=1e-12)

    @pytest.mark.parametrize("lam", [(2,), (2, 1), (3, 1, 1), (4, 2)])
    def test_finite_alphabet(self, lam):
        xs = [0.5, 0.3, 0.2]
        ref = bialternant(lam, xs)
        assert math.isclose(skew_schur(lam, (), Specialization(alphas=tuple(xs))), ref, rel_tol=1e-10)

    def test_dual_alphabet(self):
        # betas give s_{lambda'}(beta): omega-involution
        lam = (3, 1)
        xs = [0.5, 0.3, 0.2]
        assert math.isclose(skew_schur(lam, (), Specialization(betas=tuple(xs))),
                            bialternant(Partition(lam).conjugate(), xs), rel_tol=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(partitions_st, partitions_st, st.floats(0.0, 2.0), st.floats(0.0, 0.8))
    def test_nonnegative(self, lam, mu, g, a):
        v = skew_schur(lam, mu, Specialization(g, (a,)))
        assert v >= -1e-12
        if not contains(lam, mu):
            assert v == 0

    def test_branching(self):
        rho = Specialization(0.6, (0.3,), (0.1,))
        rho2 = Specialization(0.4, (0.2,))
        both = rho.union(rho2)
        for lam in enumerate_partitions(8):
            total = sum(skew_schur(lam, mu, rho) * skew_schur(mu, (), rho2)
                        for mu in enumerate_partitions(lam.size()) if contains(lam, mu))
            assert math.isclose(total, skew_schur(lam, (), both), rel_tol=1e-10, abs_tol=1e-14)

    def test_cauchy(self):
        rho = Specialization(0.5, (0.2,), (0.1,))
        rho2 = Specialization(0.4, (0.3,))
        total = sum(skew_schur(lam, (), rho) * skew_schur(lam, (), rho2) for lam in enumerate_partitions(18))
        assert abs(total - cauchy_pairing(rho, rho2)) < 1e-10

    def test_matrix_agrees(self):
        parts = list(enumerate_partitions(5))
        rho = Specialization(0.8, (0.2,))
        mat = skew_schur_matrix(parts, rho).toarray()
        for i, lam in enumerate(parts):
            for j, mu in enumerate(parts):
                assert abs(mat[j, i] - skew_schur(lam, mu, rho)) < 1e-13


class TestSchurQ:
    def test_examples(self):
        a = 0.35
        rho = StrictSpecialization.single(a)
        assert abs(skew_schur_q((1,), (), rho) - 2 * a) < 1e-15
        assert abs(skew_schur_q((2, 1), (), rho)) < 1e-15

    @pytest.mark.parametrize("lam", [(1,), (2,), (2, 1), (3, 1), (4, 2, 1), (3, 2)])
    def test_symmetrization_oracle(self, lam):
        xs = [0.4, 0.25, 0.1]
        rho = StrictSpecialization(alphas=tuple(xs))
        ref = schur_p_symmetrized(lam, xs)
        assert math.isclose(skew_schur_p(lam, (), rho), ref, rel_tol=1e-10)
        assert math.isclose(skew_schur_q(lam, (), rho), 2 ** len(lam) * ref, rel_tol=1e-10)

    def test_cauchy_value(self):
        a = StrictSpecialization.single(0.3)
        total = sum(skew_schur_q(lam, (), a) * skew_schur_p(lam, (), a)
                    for lam in enumerate_partitions(25, strict=True))
        # (1 + ab)/(1 - ab) with ab = 0.09
        assert abs(total - 1.09 / 0.91) < 1e-8
        assert abs(1.09 / 0.91 - 1.197802) < 1e-6

    def test_duality(self):
        rho = StrictSpecialization(0.5, (0.2,))
        for lam in enumerate_partitions(7, strict=True):
            for mu in enumerate_partitions(lam.size(), strict=True):
                q = skew_schur_q(lam, mu, rho)
                p = skew_schur_p(lam, mu, rho)
                assert math.isclose(q, 2.0 ** (len(lam) - len(mu)) * p, rel_tol=1e-12, abs_tol=1e-15)

    def test_branching(self):
        rho = StrictSpecialization(0.3, (0.2,))
        rho2 = StrictSpecialization(0.5, (0.1,))
        both = rho.union(rho2)
        for lam in enumerate_partitions(8, strict=True):
            total = sum(skew_schur_q(lam, mu, rho) * skew_schur_q(mu, (), rho2)
                        for mu in enumerate_partitions(lam.size(), strict=True))
            assert math.isclose(total, skew_schur_q(lam, (), both), rel_tol=1e-10, abs_tol=1e-14)

    def test_matrix_kinds(self):
        parts = list(enumerate_partitions(6, strict=True))
        rho = StrictSpecialization(0.4, (0.3,))
        qm = skew_schur_q_matrix(parts, rho).toarray()
        pm = skew_schur_q_matrix(parts, rho, kind="P").toarray()
        for i, lam in enumerate(parts):
            for j, mu in enumerate(parts):
                assert abs(qm[j, i] - skew_schur_q(lam, mu, rho)) < 1e-13
                assert abs(pm[j, i] - skew_schur_p(lam, mu, rho)) < 1e-13
        with pytest.raises(DomainError):
            skew_schur_q_matrix(parts, rho, kind="S")


class TestEnumerate:
    def test_counts(self):
        assert list(enumerate_partitions(0)) == [()]
        assert len(list(enumerate_partitions(4))) == 12
        assert len(list(enumerate_partitions(4, strict=True))) == 7
        # p(0..10) summed, a classic table
        assert len(list(enumerate_partitions(10))) == sum([1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42])

    def test_unique_and_typed(self):
        ps = list(enumerate_partitions(9, strict=True))
        assert len(set(ps)) == len(ps)
        assert all(isinstance(p, StrictPartition) for p in ps)

    def test_limit(self):
        with pytest.raises(LimitExceeded):
            list(enumerate_partitions(41))


def test_specialization_json_round_trip():
    rho = Specialization(0.5, (0.1, 0.3), (0.2,))
    assert Specialization.from_json(rho.to_json()) == rho
    assert rho.alphas == (0.3, 0.1)
    assert rho.radius == pytest.approx(1 / 0.3)
    srho = StrictSpecialization(0.2, (0.4,))
    assert StrictSpecialization.from_json(srho.to_json()) == srho
    with pytest.raises(DomainError):
        Specialization(-1.0)


def test_hook_formula_oracle_itself():
    # dim(3,2,1) = 16 standard tableaux
    assert hook_dim((3, 2, 1)) == 16
    assert Fraction(hook_dim((2, 1)), 6) == Fraction(1, 3)
