import numpy as np
import pytest

from sparselq import model, vectorize
from sparselq.errors import AssumptionViolated, DimensionMismatch


def unit_cost(n, m):
    C = np.vstack([np.eye(n), np.zeros((m, n))])
    D = np.vstack([np.zeros((n, m)), np.eye(m)])
    return C, D


class TestValidatePlant:
    def test_accepts_well_posed_plant(self, ex1_lifted):
        vp = ex1_lifted.plant
        np.testing.assert_allclose(vp.CtC, vp.plant.C.T @ vp.plant.C)
        np.testing.assert_allclose(vp.DtD, vp.plant.D.T @ vp.plant.D)
        np.testing.assert_allclose(vp.B1B1t, vp.plant.B1 @ vp.plant.B1.T)
        # attribute passthrough to the raw plant
        assert vp.n == 3 and vp.m == 2
        with pytest.raises(AttributeError):
            vp.no_such_field

    def test_rejects_nonsquare_A(self):
        with pytest.raises(DimensionMismatch):
            model.validate_plant(model.PlantData(
                A=np.zeros((2, 3)), B2=np.zeros((2, 1)), B1=np.eye(2),
                C=np.zeros((3, 2)), D=np.zeros((3, 1))))

    def test_rejects_mismatched_B2(self):
        C, D = unit_cost(2, 1)
        with pytest.raises(DimensionMismatch):
            model.validate_plant(model.PlantData(
                A=np.eye(2), B2=np.zeros((3, 1)), B1=np.eye(2), C=C, D=D))

    def test_rejects_mismatched_vertex(self):
        C, D = unit_cost(2, 1)
        with pytest.raises(DimensionMismatch):
            model.validate_plant(model.PlantData(
                A=np.eye(2), B2=np.ones((2, 1)), B1=np.eye(2), C=C, D=D,
                vertices=((np.eye(3), np.ones((2, 1))),)))

    def test_rejects_cross_term(self):
        n, m = 2, 1
        C = np.vstack([np.eye(n), np.zeros((m, n))])
        D = np.vstack([np.zeros((n, m)), np.eye(m)])
        D[0, 0] = 0.5  # couples C and D columns
        with pytest.raises(AssumptionViolated) as exc:
            model.validate_plant(model.PlantData(
                A=np.eye(2), B2=np.ones((2, 1)), B1=np.eye(2), C=C, D=D))
        assert exc.value.which == "CtD"

    def test_rejects_singular_control_weight(self):
        C = np.eye(2)
        D = np.zeros((2, 1))
        with pytest.raises(AssumptionViolated) as exc:
            model.validate_plant(model.PlantData(
                A=np.eye(2), B2=np.ones((2, 1)), B1=np.eye(2), C=C, D=D))
        assert exc.value.which == "DtD"

    def test_rejects_degenerate_noise(self):
        C, D = unit_cost(2, 1)
        B1 = np.array([[1.0], [0.0]])  # rank 1, B1 B1^T singular
        with pytest.raises(AssumptionViolated) as exc:
            model.validate_plant(model.PlantData(
                A=np.eye(2), B2=np.ones((2, 1)), B1=B1, C=C, D=D))
        assert exc.value.which == "B1B1t"

    def test_default_vertex_is_nominal(self):
        C, D = unit_cost(2, 1)
        vp = model.validate_plant(model.PlantData(
            A=np.eye(2), B2=np.ones((2, 1)), B1=np.eye(2), C=C, D=D))
        assert len(vp.vertices) == 1
        np.testing.assert_array_equal(vp.vertices[0][0], np.eye(2))


class TestLiftedStructure:
    def test_block_layout(self, ex1_lifted):
        lp = ex1_lifted
        n, m, p = lp.n, lp.m, lp.p
        assert p == n + m
        A = lp.plant.A
        B2 = lp.plant.B2
        F = lp.F_list[0]
        np.testing.assert_array_equal(F[:n, :n], A)
        np.testing.assert_array_equal(F[:n, n:], -B2)
        np.testing.assert_array_equal(F[n:, :], 0.0)
        np.testing.assert_array_equal(lp.Q[:n, :n], lp.plant.B1B1t)
        np.testing.assert_array_equal(lp.Q[n:, :], 0.0)
        np.testing.assert_array_equal(lp.R[:n, :n], lp.plant.CtC)
        np.testing.assert_array_equal(lp.R[n:, n:], lp.plant.DtD)
        np.testing.assert_array_equal(lp.R[:n, n:], 0.0)

    def test_selectors(self, ex1_lifted):
        lp = ex1_lifted
        rng = np.random.default_rng(0)
        W = rng.standard_normal((lp.p, lp.p))
        np.testing.assert_array_equal(lp.V2 @ W @ lp.V1.T,
                                      W[:lp.n, lp.n:])

    def test_theta_block_matches_closed_loop(self, ex1_lifted):
        # For W built from a gain K and diagonal W1, the constraint block
        # must equal A_cl W1 + W1 A_cl^T + B1 B1^T with A_cl = A - B2 K.
        lp = ex1_lifted
        rng = np.random.default_rng(1)
        n, m = lp.n, lp.m
        W1 = np.diag(1.0 + rng.random(n))
        K = rng.standard_normal((m, n))
        W = np.zeros((lp.p, lp.p))
        W[:n, :n] = W1
        W[:n, n:] = W1 @ K.T
        W[n:, :n] = K @ W1
        W[n:, n:] = K @ W1 @ K.T + np.eye(m)
        A_cl = lp.plant.A - lp.plant.B2 @ K
        expected = A_cl @ W1 + W1 @ A_cl.T + lp.plant.B1B1t
        np.testing.assert_allclose(lp.theta_block(W, 0), expected,
                                   atol=1e-12)
        np.testing.assert_allclose(lp.psi_block(W, 0), -expected,
                                   atol=1e-12)

    def test_vertex_maps_in_iso_coordinates(self, ex2_lifted):
        # J_list[i] @ svec(W) must be svec of V2 (F_i W + W F_i^T) V2^T.
        lp = ex2_lifted
        rng = np.random.default_rng(2)
        S = rng.standard_normal((lp.p, lp.p))
        W = 0.5 * (S + S.T)
        s = vectorize.svec(W, lp.svec_p, iso=True)
        for i, F in enumerate(lp.F_list):
            blk = (F @ W + W @ F.T)[:lp.n, :lp.n]
            np.testing.assert_allclose(
                lp.J_list[i] @ s,
                vectorize.svec(blk, lp.svec_n, iso=True), atol=1e-12)
        np.testing.assert_allclose(
            lp.kappa_q,
            vectorize.svec(lp.Q[:lp.n, :lp.n], lp.svec_n, iso=True),
            atol=1e-14)

    def test_two_vertex_lift(self, ex1_lifted):
        assert ex1_lifted.n_vertices == 1
        C, D = unit_cost(2, 1)
        A = np.array([[0.0, 1.0], [-1.0, -0.5]])
        B2 = np.array([[0.0], [1.0]])
        verts = ((A, B2), (A + 0.1 * np.eye(2), 2.0 * B2))
        vp = model.validate_plant(model.PlantData(
            A=A, B2=B2, B1=np.eye(2), C=C, D=D, vertices=verts))
        lp = model.lift_plant(vp)
        assert lp.n_vertices == 2
        for (Av, Bv), F in zip(verts, lp.F_list):
            np.testing.assert_array_equal(F[:2, :2], Av)
            np.testing.assert_array_equal(F[:2, 2:], -Bv)
            np.testing.assert_array_equal(F[2:, :], 0.0)
        assert len(lp.J_list) == 2

    def test_objective_vector(self, ex1_lifted):
        lp = ex1_lifted
        rng = np.random.default_rng(3)
        S = rng.standard_normal((lp.p, lp.p))
        W = 0.5 * (S + S.T)
        assert lp.vec_R() @ W.reshape(-1, order="F") == pytest.approx(
            np.sum(lp.R * W))

    def test_gain_part_and_unvec(self, ex1_lifted):
        lp = ex1_lifted
        rng = np.random.default_rng(4)
        W = rng.standard_normal((lp.p, lp.p))
        v = W.reshape(-1, order="F")
        np.testing.assert_array_equal(lp.unvec(v), W)
        np.testing.assert_array_equal(
            lp.gain_part(v),
            W[lp.n:, :lp.n].reshape(-1, order="F"))

    def test_gram_consistency(self, ex1_lifted):
        lp = ex1_lifted
        np.testing.assert_allclose(lp.gram_AD1, lp.AD1.T @ lp.AD1,
                                   atol=1e-12)

    def test_forced_zeros_threaded(self):
        C, D = unit_cost(2, 1)
        vp = model.validate_plant(model.PlantData(
            A=np.eye(2), B2=np.ones((2, 1)), B1=np.eye(2), C=C, D=D))
        lp = model.lift_plant(vp, forced_zeros=((0, 1),))
        assert lp.forced_zeros == ((0, 1),)
        assert lp.op.n_forced == 1
