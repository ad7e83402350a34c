"""Star-product exactness, transport, and the cubic-model metrics."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiametric.errors import OutOfRange
from adiametric.moyal import (
    ANSATZ_NAMES,
    ONE,
    P,
    PhasePolynomial,
    Q,
    cubic_linear_switch_evolve,
    cubic_static_first_order,
    harmonic_transport_check,
    linear_switch_closed_form,
    moyal_product,
    star_flow_rhs,
)

H0 = PhasePolynomial({(2, 0): 1, (0, 2): 1})


def dyadic_polynomials(max_degree=4):
    """Random polynomials with small dyadic coefficients (exact in floats)."""
    coeff = st.tuples(
        st.integers(min_value=-8, max_value=8),
        st.integers(min_value=-8, max_value=8),
    ).map(lambda ab: complex(ab[0], ab[1]) / 2)
    exponents = st.tuples(
        st.integers(min_value=0, max_value=max_degree),
        st.integers(min_value=0, max_value=max_degree),
    ).filter(lambda ij: ij[0] + ij[1] <= max_degree)
    return st.dictionaries(exponents, coeff, max_size=6).map(PhasePolynomial)


class TestAlgebra:
    def test_identity_element(self):
        g = PhasePolynomial({(2, 1): 3.5, (0, 0): -1j})
        assert moyal_product(ONE, g) == g
        assert moyal_product(g, ONE) == g

    def test_first_order_products(self):
        assert moyal_product(P, Q) == PhasePolynomial({(1, 1): 1, (0, 0): -0.5j})
        assert moyal_product(Q, P) == PhasePolynomial({(1, 1): 1, (0, 0): 0.5j})

    def test_canonical_commutator_exact(self):
        comm = moyal_product(Q, P) - moyal_product(P, Q)
        assert comm == PhasePolynomial({(0, 0): 1j})

    def test_quadratic_commutator(self):
        p2 = PhasePolynomial.monomial(2, 0)
        q2 = PhasePolynomial.monomial(0, 2)
        comm = moyal_product(p2, q2) - moyal_product(q2, p2)
        assert comm == PhasePolynomial({(1, 1): -4j})

    def test_reduces_to_pointwise_at_order_zero(self):
        f = PhasePolynomial({(1, 0): 2})
        g = PhasePolynomial({(0, 0): 3})  # degree 0: no derivative terms
        assert moyal_product(f, g) == f.pointwise_mul(g)

    @given(dyadic_polynomials(), dyadic_polynomials(), dyadic_polynomials())
    @settings(max_examples=60, deadline=None)
    def test_associativity_exact(self, f, g, k):
        lhs = moyal_product(moyal_product(f, g), k)
        rhs = moyal_product(f, moyal_product(g, k))
        assert lhs == rhs

    @given(dyadic_polynomials(), dyadic_polynomials())
    @settings(max_examples=60, deadline=None)
    def test_adjoint_compatibility_exact(self, f, g):
        lhs = moyal_product(f, g).conjugate()
        rhs = moyal_product(g.conjugate(), f.conjugate())
        assert lhs == rhs

    @given(dyadic_polynomials(), dyadic_polynomials(), dyadic_polynomials())
    @settings(max_examples=30, deadline=None)
    def test_bilinearity(self, f, g, k):
        assert moyal_product(f + g, k) == moyal_product(f, k) + moyal_product(g, k)


class TestFlowField:
    def test_momentum_symbol(self):
        assert star_flow_rhs(P, H0) == PhasePolynomial({(0, 1): 2})

    def test_radius_function_is_static(self):
        assert star_flow_rhs(H0, H0).is_zero

    def test_equals_rotation_field_on_all_monomials(self):
        for i in range(7):
            for j in range(7 - i):
                m = PhasePolynomial.monomial(i, j)
                lhs = star_flow_rhs(m, H0)
                rhs = (
                    Q.pointwise_mul(m.diff_p()) - P.pointwise_mul(m.diff_q())
                ).scale(2)
                assert lhs == rhs, (i, j)

    @given(dyadic_polynomials(max_degree=3))
    @settings(max_examples=40, deadline=None)
    def test_real_symbols_stay_real(self, poly):
        real_poly = (poly + poly.conjugate()).scale(0.5)
        out = star_flow_rhs(real_poly, H0)
        for _, coeff in out.terms():
            assert coeff.imag == 0.0


class TestHarmonicTransport:
    def test_radius_invariant(self):
        # exact up to cos^2 + sin^2 roundoff at a generic angle
        out = harmonic_transport_check(H0, 0.77)
        for key in [(2, 0), (0, 2)]:
            assert abs(out.coefficient(*key) - 1.0) < 1e-15
        assert abs(out.coefficient(1, 1)) < 1e-15

    def test_quarter_period_maps_q_to_minus_p(self):
        out = harmonic_transport_check(Q, math.pi / 4)
        assert abs(out.coefficient(1, 0) + 1.0) < 1e-15
        assert abs(out.coefficient(0, 1)) < 1e-15

    def test_full_period_identity_exact(self):
        theta = PhasePolynomial({(3, 0): 1.5, (1, 2): -2, (0, 1): 0.25j})
        assert harmonic_transport_check(theta, math.pi) == theta
        assert harmonic_transport_check(theta, -math.pi) == theta
        assert harmonic_transport_check(theta, 2 * math.pi) == theta

    def test_solves_flow_equation(self):
        # finite-difference time derivative against the generator field
        theta = PhasePolynomial({(2, 1): 1, (0, 1): -0.5})
        t, h = 0.31, 1e-6
        plus = harmonic_transport_check(theta, t + h)
        minus = harmonic_transport_check(theta, t - h)
        rate = star_flow_rhs(harmonic_transport_check(theta, t), H0)
        for (i, j) in set(k for k, _ in plus.terms()) | set(
            k for k, _ in rate.terms()
        ):
            fd = (plus.coefficient(i, j) - minus.coefficient(i, j)) / (2 * h)
            assert abs(fd - rate.coefficient(i, j)) < 1e-7


class TestCubicStatic:
    def test_default_constants(self):
        theta1 = cubic_static_first_order()
        assert theta1 == PhasePolynomial({(1, 2): 1, (3, 0): Fraction(2, 3)})

    def test_first_order_residual_vanishes_identically(self):
        # residual of 1 + g theta1 under H0 + i g q^3, collected at order g
        iq3 = PhasePolynomial({(0, 3): 1j})
        for c, d in [(0, 0), (Fraction(1, 3), Fraction(-2, 7)), (1.5, 0.25)]:
            theta1 = cubic_static_first_order(c, d)
            order_g = star_flow_rhs(theta1, H0) + (
                moyal_product(ONE, iq3) - moyal_product(iq3.conjugate(), ONE)
            ).times_i()
            assert order_g.is_zero, (c, d)


class TestLinearSwitch:
    def test_initial_condition(self):
        vec = linear_switch_closed_form(0.1, 10.0, 0.0)
        expected = np.zeros(10)
        expected[0] = 1.0
        np.testing.assert_allclose(vec, expected, atol=1e-15)

    def test_spot_value_p3_at_pi(self):
        vec = linear_switch_closed_form(0.1, math.pi, math.pi)
        assert abs(vec[ANSATZ_NAMES.index("p3")] - 1.0 / 15.0) < 1e-14

    def test_adiabatic_limit_recovers_static_terms(self):
        g, duration = 0.1, 4000.0
        vec = linear_switch_closed_form(g, duration, duration)
        assert abs(vec[ANSATZ_NAMES.index("pq2")] - g) < 2 * g / duration
        assert abs(vec[ANSATZ_NAMES.index("p3")] - 2 * g / 3) < 2 * g / duration

    def test_conventions_related_by_half_rate(self):
        g, duration = 0.1, 10.0
        for t in (1.0, 2.5, 4.0):
            flow = linear_switch_closed_form(g, duration, t)
            half = linear_switch_closed_form(g, duration, 2.0 * t, convention="half-rate")
            np.testing.assert_allclose(flow[6:], 0.5 * half[6:], atol=1e-14)

    def test_out_of_range_rejected(self):
        with pytest.raises(OutOfRange):
            linear_switch_closed_form(0.1, 1.0, 2.0)
        with pytest.raises(ValueError):
            linear_switch_closed_form(0.1, 1.0, 0.5, convention="banana")

    def test_integration_matches_closed_form(self):
        g = 0.1
        for duration in (math.pi, 10.0):
            pts = [duration / 4, duration / 2, duration]
            traj = cubic_linear_switch_evolve(g, duration, t_eval=pts)
            for k, t in enumerate(pts):
                exact = linear_switch_closed_form(g, duration, t)
                scale = np.maximum(np.abs(exact), g / duration)
                assert np.max(np.abs(traj.values[k] - exact) / scale) < 1e-6

    def test_low_degree_coefficients_stay_zero(self):
        traj = cubic_linear_switch_evolve(0.2, 5.0)
        # nothing feeds degrees 1 and 2 at first order
        for name in ("p", "q", "p2", "pq", "q2"):
            assert np.max(np.abs(traj.coefficient(name))) < 1e-12

    def test_oscillatory_envelope_halves_when_duration_doubles(self):
        g = 0.1
        envelopes = {}
        for duration in (40.0, 80.0):
            traj = cubic_linear_switch_evolve(g, duration)
            window = traj.times >= duration - math.pi
            envelopes[duration] = np.max(
                np.abs(traj.coefficient("p2q")[window])
            )
        ratio = envelopes[80.0] / envelopes[40.0]
        assert 0.4 <= ratio <= 0.6
