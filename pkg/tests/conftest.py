"""Shared fixtures: the three demo plants, random instance builders, and
the acceptance report hook that prints one line per criterion at the end
of the run."""

import numpy as np
import pytest

from sparselq import model


def ex1_matrices():
    A = np.array([[0.2220, 0.9186, 0.7659],
                  [0.8707, 0.4884, 0.5184],
                  [0.2067, 0.6117, 0.2968]])
    B2 = np.array([[0.9315, 0.7939],
                   [0.9722, 0.1061],
                   [0.5317, 0.7750]])
    B1 = np.eye(3)
    C = np.zeros((3, 3)); C[0, 0] = 1.0
    D = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return A, B2, B1, C, D


def ex2_matrices():
    A = np.array([[0.3079, 0.1879, 0.1797, 0.2935, 0.6537],
                  [0.5194, 0.2695, 0.5388, 0.9624, 0.5366],
                  [0.7683, 0.4962, 0.2828, 0.9132, 0.9957],
                  [0.7892, 0.7391, 0.7609, 0.5682, 0.1420],
                  [0.8706, 0.1950, 0.2697, 0.4855, 0.9753]])
    B2 = np.array([[0.6196, 0.6414],
                   [0.7205, 0.9233],
                   [0.2951, 0.8887],
                   [0.6001, 0.6447],
                   [0.7506, 0.2956]])
    B1 = np.eye(5)
    C = np.zeros((5, 5)); C[0, 0] = 1.0; C[1, 1] = 1.0
    D = np.zeros((5, 2)); D[2, 0] = 1.0; D[3, 1] = 1.0
    return A, B2, B1, C, D


def ex3_matrices():
    A = np.array([[0.0, 1.0, 0.0],
                  [0.0, 0.0, 1.0],
                  [0.0, 0.0, 0.0]])
    _, B2, B1, C, D = ex1_matrices()
    return A, B2, B1, C, D


def lift(mats, forced_zeros=()):
    plant = model.validate_plant(model.PlantData(*mats))
    return model.lift_plant(plant, forced_zeros=forced_zeros)


@pytest.fixture(scope="session")
def ex1_lifted():
    return lift(ex1_matrices())


@pytest.fixture(scope="session")
def ex2_lifted():
    return lift(ex2_matrices())


@pytest.fixture(scope="session")
def ex3_lifted():
    return lift(ex3_matrices())


def random_plant(rng, n, m, n_vertices=1, spread=0.0):
    """Random plant with C = [I; 0], D = [0; I] (unit quadratic weights).

    With n_vertices > 1, vertex matrices are perturbations of (A, B2)
    scaled by spread.
    """
    A = rng.standard_normal((n, n))
    B2 = rng.standard_normal((n, m))
    B1 = np.eye(n)
    C = np.vstack([np.eye(n), np.zeros((m, n))])
    D = np.vstack([np.zeros((n, m)), np.eye(m)])
    vertices = None
    if n_vertices > 1:
        vertices = [(A + spread * rng.standard_normal((n, n)),
                     B2 + spread * rng.standard_normal((n, m)))
                    for _ in range(n_vertices)]
    return model.PlantData(A=A, B2=B2, B1=B1, C=C, D=D, vertices=vertices)


def feasible_instance(rng, n, m):
    """A plant plus a feasible lifted point built by construction.

    Pick a diagonal Hurwitz closed loop A_cl = -diag(d), a gain K, and a
    diagonal W1 large enough that A_cl W1 + W1 A_cl^T + B1 B1^T <= 0,
    then set A = A_cl + B2 K.  The parameter matrix
    W = [[W1, W1 K^T], [K W1, K W1 K^T + I]] is then feasible for the
    lifted problem of (A, B2).
    """
    d = 0.3 + rng.random(n) * 2.0
    B2 = rng.standard_normal((n, m))
    K = rng.standard_normal((m, n))
    K[rng.random((m, n)) < 0.3] = 0.0
    A_cl = -np.diag(d)
    A = A_cl + B2 @ K
    B1 = np.eye(n)
    # diagonal solves of -2 d_i w_i + slack = -(B1 B1^T)_ii; inflate so the
    # full matrix inequality holds, not just the diagonal
    w1 = (np.linalg.norm(B1, 2) ** 2 / (2.0 * d)) * (1.0 + rng.random(n))
    W1 = np.diag(w1 * n)
    W2t = K @ W1
    W3 = K @ W1 @ K.T + np.eye(m)
    W = np.block([[W1, W2t.T], [W2t, W3]])
    C = np.vstack([np.eye(n), np.zeros((m, n))])
    D = np.vstack([np.zeros((n, m)), np.eye(m)])
    plant = model.PlantData(A=A, B2=B2, B1=B1, C=C, D=D)
    return plant, W, K


def make_inner_instance(rng, n=2, m=1):
    """A lifted problem plus random subproblem data with Slater's condition.

    The plant comes from feasible_instance, so a strictly feasible
    parameter matrix exists and the subproblem dual attains its optimum.
    """
    from sparselq import model as _model
    plant, _, _ = feasible_instance(rng, n, m)
    lifted = _model.lift_plant(_model.validate_plant(plant))
    p = lifted.p
    G = rng.standard_normal((p, p))
    d_k = (0.5 * (G + G.T)).reshape(-1, order="F")
    w_k = rng.standard_normal(m * n)
    S = rng.standard_normal((p, p))
    v_tilde = (0.5 * (S + S.T)).reshape(-1, order="F")
    alpha, theta, eta_f = 0.5, 0.7, 1.3
    return lifted, d_k, w_k, v_tilde, alpha, theta, eta_f


def pg_dual_oracle(lifted, data, max_steps=10 ** 6, move_tol=1e-13):
    """Projected-gradient reference solver for the inner dual problem.

    Stacks every PSD block into one variable, takes fixed gradient steps
    of length 1 / (largest eigenvalue of the full quadratic curvature),
    and projects blockwise.  Deliberately shares nothing with the sweep
    solver beyond the problem data: no per-block curvature, no
    Gauss-Seidel ordering, no running linear term.  Stops early once the
    iterate is stationary to machine precision, which is equivalent to
    exhausting the step budget.
    """
    from sparselq import inner as _inner
    sp, sn = lifted.svec_p, lifted.svec_n
    nv = len(lifted.J_list)
    T = np.hstack([-np.eye(sp.size)] + [J.T for J in lifted.J_list])
    H = T.T @ data.Minv @ T
    L = float(np.linalg.eigvalsh(H)[-1])
    c = np.concatenate([np.zeros(sp.size)] + [lifted.kappa_q] * nv)
    q0 = data.q_k - data.g0
    z = np.zeros(sp.size + nv * sn.size)

    def project(vecz):
        out = np.empty_like(vecz)
        out[:sp.size] = _inner._project(vecz[:sp.size], sp)
        off = sp.size
        for _ in range(nv):
            out[off:off + sn.size] = _inner._project(vecz[off:off + sn.size], sn)
            off += sn.size
        return out

    steps = 0
    for steps in range(1, max_steps + 1):
        grad = -(T.T @ (data.Minv @ (q0 - T @ z))) - c
        z_new = project(z - grad / L)
        moved = np.linalg.norm(z_new - z)
        z = z_new
        if moved <= move_tol * (1.0 + np.linalg.norm(z)):
            break
    x0 = z[:sp.size]
    xs = [z[sp.size + i * sn.size: sp.size + (i + 1) * sn.size]
          for i in range(nv)]
    return _inner.DualState(x0=x0, x_list=xs), steps


_ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    _ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
