"""Moller operators, adiabatic metrics, dressed S-matrices."""

import numpy as np
import pytest
import scipy.linalg

from adiametric.errors import ComplexSpectrum, NoConvergence
from adiametric.metric_flow import (
    adiabatic_transport_prediction,
    eigenbasis_coefficients,
    quasi_hermiticity_residual,
)
from adiametric.operator_core import biorthogonal_decompose
from adiametric.scattering import (
    ScatteringConfig,
    adiabatic_metric,
    dynamical_phase_integrals,
    in_state,
    moller_minus,
    moller_plus,
    out_dressing,
    out_state,
    s_matrix,
)
from adiametric.switching import ExponentialSwitch, extrapolate_to_zero

from helpers import SX, SZ

# shipped scattering fixture: Hermitian free part with gap 4, anti-Hermitian
# interaction of strength 0.75; v^2 = 16 > w^2 = 2.25 all along the switch
H0 = 2.0 * SZ
HI = 0.75j * SX

FAST = ScatteringConfig(rtol=1e-9, atol=1e-12, check_convergence=False)


class TestMollerOperators:
    def test_free_theory_identity(self):
        zero = np.zeros((2, 2))
        np.testing.assert_allclose(moller_minus(H0, zero, 0.2), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(moller_plus(H0, zero, 0.2), np.eye(2), atol=1e-12)

    def test_hermitian_interaction_unitary(self):
        hi = 0.6 * SX
        for op in (moller_minus(H0, hi, 0.1, FAST), moller_plus(H0, hi, 0.1, FAST)):
            assert np.linalg.norm(op.conj().T @ op - np.eye(2)) < 1e-8

    def test_composition_identity(self):
        # U_0(0,t+) U(t+,t-) U_0(t-,0) equals moller_plus . moller_minus
        eps = 0.25
        cfg = ScatteringConfig(rtol=1e-11, atol=1e-13, check_convergence=False)
        om_p = moller_plus(H0, HI, eps, cfg)
        om_m = moller_minus(H0, HI, eps, cfg)

        horizon = cfg.horizon_factor / eps
        sched = ExponentialSwitch(H0, HI, eps)
        from adiametric.metric_flow import _accumulate_propagator

        u_full = _accumulate_propagator(sched, -horizon, horizon, 1e-11, 1e-13)
        u0 = lambda dt: scipy.linalg.expm(-1j * H0 * dt)
        direct = u0(-horizon) @ u_full @ u0(-horizon)
        np.testing.assert_allclose(direct, om_p @ om_m, atol=1e-8)

    def test_out_dressing_inverts_moller_plus(self):
        cfg = ScatteringConfig(rtol=1e-11, atol=1e-13, check_convergence=False)
        om_p = moller_plus(H0, HI, 0.2, cfg)
        om_out = out_dressing(H0, HI, 0.2, cfg)
        np.testing.assert_allclose(om_out @ om_p, np.eye(2), atol=1e-8)

    def test_bounded_for_nonhermitian_fixture(self):
        op = moller_minus(H0, HI, 0.1, FAST)
        assert np.all(np.isfinite(op.view(float)))
        assert np.linalg.norm(op) < 10.0

    def test_states_are_dressed_vectors(self):
        psi = np.array([1.0, 0.0], dtype=complex)
        np.testing.assert_allclose(
            in_state(psi, H0, HI, 0.2, FAST),
            moller_minus(H0, HI, 0.2, FAST) @ psi,
            atol=1e-12,
        )
        np.testing.assert_allclose(
            out_state(psi, H0, HI, 0.2, FAST),
            moller_plus(H0, HI, 0.2, FAST) @ psi,
            atol=1e-12,
        )

    def test_no_convergence_detection(self):
        # a horizon far too short cannot have settled the limit
        cfg = ScatteringConfig(horizon_factor=0.5, convergence_tol=1e-6)
        with pytest.raises(NoConvergence):
            moller_minus(H0, HI, 0.2, cfg)


class TestAdiabaticMetric:
    def test_free_theory_keeps_identity(self):
        theta = adiabatic_metric(H0, np.zeros((2, 2)), np.eye(2), 0.2, FAST)
        np.testing.assert_allclose(theta, np.eye(2), atol=1e-10)

    def test_residual_decreases_with_switching_rate(self):
        h_full = H0 + HI
        residuals = []
        for eps in (0.4, 0.2, 0.1):
            theta = adiabatic_metric(H0, HI, np.eye(2), eps, FAST)
            residuals.append(quasi_hermiticity_residual(h_full, theta))
        assert residuals[0] > residuals[1] > residuals[2]
        assert residuals[2] < 0.2

    def test_offdiagonal_coefficients_vanish_in_limit(self):
        sys = biorthogonal_decompose(H0 + HI)
        offs = []
        for eps in (0.4, 0.1):
            theta = adiabatic_metric(H0, HI, np.eye(2), eps, FAST)
            c = eigenbasis_coefficients(sys, theta)
            offs.append(abs(c[0, 1]))
        assert offs[1] < offs[0]

    def test_limit_matches_transport_prediction(self):
        theta = adiabatic_metric(H0, HI, np.eye(2), 0.05, FAST)
        path = [H0 + s * HI for s in np.linspace(0.0, 1.0, 300)]
        predicted = adiabatic_transport_prediction(path, np.eye(2))
        assert np.linalg.norm(theta - predicted) < 0.1

    def test_complex_spectrum_rejected(self):
        with pytest.raises(ComplexSpectrum):
            adiabatic_metric(0.5 * SZ, 2.0j * SX, np.eye(2), 0.1, FAST)

    def test_shape_independent_limit(self):
        # two different switching profiles grow the same metric from
        # unity once extrapolated to the slow limit
        cfg = ScatteringConfig(rtol=1e-10, atol=1e-13, check_convergence=False)
        ladder = [0.1, 0.05]
        runs = {
            shape: [
                adiabatic_metric(H0, HI, np.eye(2), eps, cfg, shape=shape)
                for eps in ladder
            ]
            for shape in ("exp", "smooth")
        }
        gap = np.max(
            np.abs(
                extrapolate_to_zero(ladder, runs["exp"])
                - extrapolate_to_zero(ladder, runs["smooth"])
            )
        )
        assert gap < 1e-3


class TestInOutIsometry:
    def test_in_pairing_reproduces_free_product(self):
        # <psi_in | Theta phi_in> = <psi | phi> with the identity free metric
        rng = np.random.default_rng(0)
        eps = 0.1
        om = moller_minus(H0, HI, eps, FAST)
        theta = adiabatic_metric(H0, HI, np.eye(2), eps, FAST)
        for _ in range(5):
            psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            phi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            lhs = (om @ psi).conj() @ theta @ (om @ phi)
            rhs = psi.conj() @ phi
            assert abs(lhs - rhs) < 1e-5

    def test_out_pairing_conservation_mirror(self):
        # forward evolution: <psi_out | Theta_out phi_out> = <psi|Theta(0) phi>
        # with Theta_out the free-frame pull-back of the late-time metric
        rng = np.random.default_rng(1)
        eps = 0.1
        cfg = ScatteringConfig(rtol=1e-11, atol=1e-13, check_convergence=False)
        horizon = cfg.horizon_factor / eps
        sched = ExponentialSwitch(H0, HI, eps)
        theta0 = adiabatic_metric(H0, HI, np.eye(2), eps, cfg)
        from adiametric.metric_flow import SolverConfig, evolve_metric

        theta_plus = evolve_metric(
            sched, theta0, 0.0, horizon,
            SolverConfig(rtol=1e-11, atol=1e-13, samples=2),
        ).final
        u0 = scipy.linalg.expm(-1j * H0 * horizon)
        theta_out = u0.conj().T @ theta_plus @ u0
        om_plus = moller_plus(H0, HI, eps, cfg)
        for _ in range(5):
            psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            phi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            lhs = (om_plus @ psi).conj() @ theta_out @ (om_plus @ phi)
            rhs = psi.conj() @ theta0 @ phi
            assert abs(lhs - rhs) < 1e-6


class TestSMatrix:
    def test_free_theory_is_identity(self):
        r = s_matrix(H0, np.zeros((2, 2)), 0.1, config=FAST)
        np.testing.assert_allclose(r.s_matrix, np.eye(2), atol=1e-12)
        assert r.unitarity_defect < 1e-12

    def test_hermitian_interaction_unitary(self):
        r = s_matrix(H0, 0.6 * SX, 0.1, config=FAST)
        assert r.unitarity_defect < 1e-7

    def test_defect_ladder_and_extrapolation(self):
        ladder = [0.4, 0.2, 0.1, 0.05]
        defects = [s_matrix(H0, HI, eps, config=FAST).unitarity_defect for eps in ladder]
        assert all(a > b for a, b in zip(defects, defects[1:]))
        assert extrapolate_to_zero(ladder, defects) < 1e-3

    def test_phase_renormalized_converges_to_identity(self):
        ladder = [0.2, 0.1, 0.05]
        tilded = [
            s_matrix(H0, HI, eps, config=FAST).phase_renormalized() for eps in ladder
        ]
        limit = extrapolate_to_zero(ladder, tilded)
        np.testing.assert_allclose(limit, np.eye(2), atol=5e-3)

    def test_switch_shapes_agree_after_extrapolation(self):
        ladder = [0.2, 0.1]
        exp_runs = [
            s_matrix(H0, HI, eps, config=FAST).phase_renormalized() for eps in ladder
        ]
        smooth_runs = [
            s_matrix(H0, HI, eps, config=FAST, shape="smooth").phase_renormalized()
            for eps in ladder
        ]
        disagreement = np.max(
            np.abs(
                extrapolate_to_zero(ladder, exp_runs)
                - extrapolate_to_zero(ladder, smooth_runs)
            )
        )
        assert disagreement < 1e-3


class TestDynamicalPhases:
    def test_free_theory_zero(self):
        phases = dynamical_phase_integrals(H0, np.zeros((2, 2)), 0.1)
        np.testing.assert_allclose(phases, 0.0, atol=1e-12)

    def test_scaling_with_switching_rate(self):
        p1 = dynamical_phase_integrals(H0, HI, 0.1)
        p2 = dynamical_phase_integrals(H0, HI, 0.05)
        np.testing.assert_allclose(p2, 2.0 * p1, rtol=1e-10)

    def test_trace_preserved(self):
        # sum of level shifts equals the integrated trace shift: the
        # interaction here is traceless, so phases sum to ~0
        phases = dynamical_phase_integrals(H0, HI, 0.1)
        assert abs(phases.sum()) < 1e-8
