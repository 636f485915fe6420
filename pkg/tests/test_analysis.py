import numpy as np
import pytest

from sparselq import analysis, model
from sparselq.errors import (K0NotStabilizing, NotHurwitz, SingularW1,
                             TooLarge)

from conftest import ex1_matrices, lift


def scalar_plant(a=1.0, b2=1.0, b1=1.0):
    # dx = a x + b2 u + b1 w, cost x^2 + u^2
    return model.PlantData(A=[[a]], B2=[[b2]], B1=[[b1]],
                           C=[[1.0], [0.0]], D=[[0.0], [1.0]])


class TestRecoverGain:
    def test_diagonal_fast_path_keeps_zeros(self):
        W = np.zeros((3, 3))
        W[:2, :2] = np.diag([2.0, 4.0])
        W[2, :2] = [1.0, 0.0]
        W[:2, 2] = [1.0, 0.0]
        W[2, 2] = 1.0
        K = analysis.recover_gain(W, 2)
        np.testing.assert_allclose(K, [[0.5, 0.0]])
        assert K[0, 1] == 0.0

    def test_full_solve_path_warns(self):
        W1 = np.array([[2.0, 0.3], [0.3, 1.5]])
        W2t = np.array([[0.7, -0.4]])
        W = np.block([[W1, W2t.T], [W2t, np.eye(1)]])
        with pytest.warns(UserWarning):
            K = analysis.recover_gain(W, 2)
        np.testing.assert_allclose(K, W2t @ np.linalg.inv(W1), atol=1e-12)

    def test_singular_diagonal(self):
        W = np.zeros((3, 3))
        W[1, 1] = 1.0
        W[2, 2] = 1.0
        with pytest.raises(SingularW1):
            analysis.recover_gain(W, 2)


class TestLyapunov:
    def test_residual_tolerance(self):
        rng = np.random.default_rng(0)
        G = rng.standard_normal((6, 6))
        A_cl = G - (abs(np.linalg.eigvals(G).real).max() + 1.0) * np.eye(6)
        Q = np.eye(6)
        W = analysis.solve_lyapunov(A_cl, Q)
        res = A_cl @ W + W @ A_cl.T + Q
        assert np.linalg.norm(res) <= 1e-10 * max(1.0, np.linalg.norm(Q))
        np.testing.assert_allclose(W, W.T)

    def test_scalar_closed_form(self):
        # a w + w a + q = 0 -> w = -q / (2a)
        W = analysis.solve_lyapunov(np.array([[-2.0]]), np.array([[4.0]]))
        assert W[0, 0] == pytest.approx(1.0)

    def test_rejects_unstable(self):
        with pytest.raises(NotHurwitz):
            analysis.solve_lyapunov(np.array([[0.1]]), np.eye(1))

    def test_rejects_oversize(self):
        with pytest.raises(TooLarge):
            analysis.solve_lyapunov(-np.eye(201), np.eye(201))


class TestH2Cost:
    def test_scalar_hand_value(self):
        # A_cl = -2, B1 = 1: Wc = 1/4; C - D K = [1; -k]^T columns ->
        # J = (1 + k^2) Wc with k = 1.  Plant: a=-1, b2=1, K=1 => A_cl=-2.
        plant = scalar_plant(a=-1.0)
        J = analysis.h2_cost(plant, np.array([[1.0]]))
        assert J.shape == (1,)
        assert J[0] == pytest.approx((1.0 + 1.0) * 0.25)

    def test_unstable_vertex_is_inf(self):
        plant = scalar_plant(a=1.0)
        J = analysis.h2_cost(plant, np.array([[0.5]]))  # A_cl = +0.5
        assert np.isinf(J[0])

    def test_one_entry_per_vertex(self):
        A = np.array([[-1.0]])
        B2 = np.array([[1.0]])
        plant = model.PlantData(A=A, B2=B2, B1=[[1.0]],
                                C=[[1.0], [0.0]], D=[[0.0], [1.0]],
                                vertices=((A, B2), (A - 1.0, B2)))
        J = analysis.h2_cost(plant, np.array([[0.0]]))
        assert J.shape == (2,)
        assert J[0] == pytest.approx(0.5)      # Wc = 1/2 at A_cl = -1
        assert J[1] == pytest.approx(0.25)     # Wc = 1/4 at A_cl = -2


class TestSparsityReport:
    def test_relative_threshold(self):
        K = np.array([[100.0, 1e-5], [0.0, -3.0]])
        pattern, zeros = analysis.sparsity_report(K, tol=1e-6)
        np.testing.assert_array_equal(pattern, [[1, 0], [0, 1]])
        assert zeros == 2

    def test_small_matrix_absolute_floor(self):
        pattern, zeros = analysis.sparsity_report(np.array([[1e-8, 0.1]]),
                                                  tol=1e-6)
        np.testing.assert_array_equal(pattern, [[0, 1]])
        assert zeros == 1


class TestRiccatiOracle:
    def test_scalar_closed_form(self):
        # a=1, b=1, q=r=1: P solves 2aP - P^2 b^2/r + q = 0
        # -> P = (2 + sqrt(4 + 4)) / 2 = 1 + sqrt(2), K = P, J = P.
        plant = scalar_plant(a=1.0)
        K, J = analysis.riccati_oracle(plant, np.array([[2.0]]))
        assert J == pytest.approx(1.0 + np.sqrt(2.0), abs=1e-8)
        assert K[0, 0] == pytest.approx(1.0 + np.sqrt(2.0), abs=1e-8)

    def test_matches_scipy_care(self):
        import scipy.linalg as sla
        rng = np.random.default_rng(5)
        A = rng.standard_normal((3, 3))
        B2 = rng.standard_normal((3, 2))
        plant = model.PlantData(
            A=A, B2=B2, B1=np.eye(3),
            C=np.vstack([np.eye(3), np.zeros((2, 3))]),
            D=np.vstack([np.zeros((3, 2)), np.eye(2)]))
        P_ref = sla.solve_continuous_are(A, B2, np.eye(3), np.eye(2))
        K_ref = B2.T @ P_ref
        K0 = K_ref + 0.01 * rng.standard_normal(K_ref.shape)
        K, J = analysis.riccati_oracle(plant, K0)
        np.testing.assert_allclose(K, K_ref, atol=1e-8)
        assert J == pytest.approx(np.trace(P_ref), rel=1e-10)

    def test_rejects_destabilizing_start(self):
        plant = scalar_plant(a=1.0)
        with pytest.raises(K0NotStabilizing):
            analysis.riccati_oracle(plant, np.array([[0.5]]))


class TestSimulateImpulse:
    def test_matches_matrix_exponential(self):
        plant = scalar_plant(a=-0.7)
        t, X = analysis.simulate_impulse(plant, np.array([[0.0]]),
                                         horizon=2.0, dt=1e-3)
        assert X.shape == (1, t.size, 1)
        np.testing.assert_allclose(X[0, :, 0], np.exp(-0.7 * t),
                                   atol=1e-8)

    def test_channel_initial_conditions(self):
        A, B2, B1, C, D = ex1_matrices()
        plant = model.PlantData(A=A, B2=B2, B1=B1, C=C, D=D)
        K = np.zeros((2, 3))
        t, X = analysis.simulate_impulse(plant, K, horizon=0.1, dt=0.05)
        assert X.shape == (3, 3, 3)
        for j in range(3):
            np.testing.assert_array_equal(X[j, 0], B1[:, j])

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            analysis.simulate_impulse(scalar_plant(), np.zeros((1, 1)),
                                      horizon=1.0, dt=0.0)


class TestFeasibilityReport:
    def test_feasible_construction(self):
        rng = np.random.default_rng(7)
        from conftest import feasible_instance
        plant, W, K = feasible_instance(rng, 3, 2)
        lifted = model.lift_plant(model.validate_plant(plant))
        P = W[3:, :3]
        rep = analysis.feasibility_report(lifted, W, P, tol=1e-8)
        assert rep["feasible"]
        assert rep["min_eig_W"] >= -1e-10
        assert rep["min_eig_psi"] > 0
        assert rep["max_offdiag_W1"] == 0.0
        assert rep["gain_coupling_gap"] == 0.0

    def test_detects_violations(self):
        lifted = lift(ex1_matrices(), forced_zeros=((0, 0),))
        W = np.eye(5)
        W[0, 1] = W[1, 0] = 0.5        # off-diagonal W1
        P = np.ones((2, 3))            # coupling gap and forced zero
        rep = analysis.feasibility_report(lifted, W, P, tol=1e-6)
        assert not rep["feasible"]
        assert rep["max_offdiag_W1"] == pytest.approx(0.5)
        assert rep["gain_coupling_gap"] == pytest.approx(1.0)
        assert rep["max_forced_zero"] == pytest.approx(1.0)


class TestBuildSolution:
    def _inputs(self, lifted, K, W1_diag):
        n, m = lifted.n, lifted.m
        W1 = np.diag(W1_diag)
        W2t = K @ W1
        W = np.block([[W1, W2t.T], [W2t, K @ W1 @ K.T + np.eye(m)]])
        W_vec = W.reshape(-1, order="F")
        P_vec = W2t.reshape(-1, order="F")
        return W_vec, P_vec

    def test_gain_recovery_and_certificate(self):
        rng = np.random.default_rng(11)
        from conftest import feasible_instance
        plant, W, K = feasible_instance(rng, 3, 2)
        lifted = model.lift_plant(model.validate_plant(plant))
        W_vec = W.reshape(-1, order="F")
        P_vec = W[3:, :3].reshape(-1, order="F")
        sol = analysis.build_solution(lifted, W_vec, P_vec, trace=[],
                                      status="converged", regime="l1",
                                      gamma=1.0, primal_res=0.0,
                                      dual_res=0.0)
        np.testing.assert_allclose(sol.K, K, atol=1e-10)
        assert sol.certified
        assert np.all(sol.stable < 0)
        assert sol.J_upper >= np.max(sol.J_vertex) - 1e-9
        # exact zeros in P give exact zeros in K
        np.testing.assert_array_equal(sol.K == 0.0, K == 0.0)

    def test_not_certified_when_not_converged(self):
        rng = np.random.default_rng(12)
        from conftest import feasible_instance
        plant, W, K = feasible_instance(rng, 2, 1)
        lifted = model.lift_plant(model.validate_plant(plant))
        sol = analysis.build_solution(
            lifted, W.reshape(-1, order="F"),
            W[2:, :2].reshape(-1, order="F"), trace=[],
            status="max_iterations", regime="l1", gamma=1.0,
            primal_res=1.0, dual_res=1.0)
        assert not sol.certified
