"""Inner solver for the parameter-matrix subproblem.

Each outer iteration needs the minimizer, over the cone-feasible set
{W >= 0, Psi_i(W) >= 0 for all vertices}, of a strongly convex quadratic

    <d, vec(W)> + sigma1 ||A vec(W) + b||^2 + sigma2 ||vec(W) - vt||^2.

In isometric half-vectorization coordinates s = svec(W) this reads
<g0, s> + sigma1 ||AD1 s + b||^2 + sigma2 ||s - st||^2, and its Lagrange
dual over the PSD multipliers X = (X0, X1, ..., XM) is a convex quadratic
on a product of PSD cones,

    minimize  Th(X) = (1/2) (q - L(X))' Minv (q - L(X)) - <kq, sum_i x_i> + c,
    with      L(X) = g0 - x0 + sum_i J_i' x_i,
              M = 2 sigma1 (AD1)'(AD1) + 2 sigma2 I,
              q = -2 sigma1 (AD1)' b + 2 sigma2 st.

Each block update below is a projected gradient step with step 1/rho_i
(rho_i the largest eigenvalue of the block curvature), which is exactly
the majorized single-projection update: the curvature terms cancel and
the step reduces to an eigenvalue clamp of x_i + (grad-free part)/rho_i.
One sweep runs backward over the vertex blocks, updates X0, then runs
forward; the dual objective never increases.  The primal recovers as
s = Minv (q - L(X)).
"""

from dataclasses import dataclass, field

import numpy as np

from .cones import SpdFactor, max_eigenvalue, min_eigenvalue
from .errors import MaxSweepsExceeded, PsiNotNegativeSemidefinite
from .vectorize import svec, unsvec


@dataclass
class DualState:
    """PSD multipliers in isometric svec coordinates.

    x0 has length p(p+1)/2; each entry of x_list has length n(n+1)/2.
    """

    x0: np.ndarray
    x_list: list

    def copy(self):
        return DualState(self.x0.copy(), [x.copy() for x in self.x_list])


def zero_state(lifted):
    return DualState(np.zeros(lifted.svec_p.size),
                     [np.zeros(lifted.svec_n.size) for _ in lifted.F_list])


@dataclass
class CurvatureCache:
    """Sigma-dependent matrices, reusable while (sigma1, sigma2) repeat.

    With the default scalar schedule of the l1 regime the sigmas are
    constant, so this cache removes nearly all assembly cost there.
    """

    key: tuple
    M_mat: np.ndarray
    Minv: np.ndarray
    Psi_mat: np.ndarray
    JM_list: list
    L_list: list
    rho0: float
    rho_list: list


@dataclass
class DualData:
    """Per-outer-iteration data of the dual problem."""

    lifted: object
    sigma1: float
    sigma2: float
    M_mat: np.ndarray
    Minv: np.ndarray
    Psi_mat: np.ndarray
    L0: np.ndarray
    JM_list: list
    L_list: list
    rho0: float
    rho_list: list
    q_k: np.ndarray
    g0: np.ndarray
    s_tilde: np.ndarray
    b_tilde: np.ndarray
    d_k: np.ndarray = field(repr=False, default=None)
    xi1: np.ndarray = field(repr=False, default=None)
    xi2: np.ndarray = field(repr=False, default=None)
    omega_dual: np.ndarray = field(repr=False, default=None)

    def ell(self, state):
        out = self.g0 - state.x0
        for J, x in zip(self.lifted.J_list, state.x_list):
            out = out + x @ J
        return out


def _sym_svec(vec_coords, maps):
    """Adjoint of the isometric duplication map: symmetrize then svec."""
    G = vec_coords.reshape(maps.dim, maps.dim, order="F")
    return svec(0.5 * (G + G.T), maps, iso=True)


def assemble_dual_data(lifted, d_k, w_k, v_tilde_k, alpha_k, theta_k, eta_f_k,
                       cache=None):
    """Build the dual problem data; reuses cache when the sigmas repeat.

    Returns (data, cache).  Raises NotPositiveDefinite if the curvature
    matrix fails to factor and PsiNotNegativeSemidefinite if the dual
    curvature check fails beyond 1e-6.
    """
    if not (alpha_k > 0 and theta_k > 0 and eta_f_k > 0):
        raise ValueError("alpha, theta, eta_f must be positive")
    sigma1 = alpha_k / (2.0 * theta_k)
    sigma2 = eta_f_k / (2.0 * alpha_k)

    key = (sigma1, sigma2)
    if cache is None or cache.key != key:
        M = 2.0 * sigma1 * lifted.gram_AD1 + 2.0 * sigma2 * np.eye(lifted.svec_p.size)
        Minv = SpdFactor(M).inverse()
        Minv = 0.5 * (Minv + Minv.T)
        Psi = -0.5 * Minv
        if min_eigenvalue(-Psi) < -1e-6:
            raise PsiNotNegativeSemidefinite(
                "dual curvature lost semidefiniteness")
        JM_list = [J @ Minv for J in lifted.J_list]
        L_list = [JM @ J.T for JM, J in zip(JM_list, lifted.J_list)]
        rho0 = max_eigenvalue(Minv)
        rho_list = [max(max_eigenvalue(L), 1e-30) for L in L_list]
        cache = CurvatureCache(key=key, M_mat=M, Minv=Minv, Psi_mat=Psi,
                               JM_list=JM_list, L_list=L_list,
                               rho0=rho0, rho_list=rho_list)

    g0 = _sym_svec(d_k, lifted.svec_p)
    s_tilde = _sym_svec(v_tilde_k, lifted.svec_p)
    b_tilde = lifted.op.apply_B(w_k)
    q = -2.0 * sigma1 * (lifted.AD1.T @ b_tilde) + 2.0 * sigma2 * s_tilde

    Minv_q = cache.Minv @ q
    xi1 = -(lifted.AD1 @ Minv_q) - b_tilde
    xi2 = v_tilde_k - unsvec(Minv_q, lifted.svec_p, iso=True).reshape(-1, order="F")

    return DualData(lifted=lifted, sigma1=sigma1, sigma2=sigma2,
                    M_mat=cache.M_mat, Minv=cache.Minv, Psi_mat=cache.Psi_mat,
                    L0=cache.Minv, JM_list=cache.JM_list, L_list=cache.L_list,
                    rho0=cache.rho0, rho_list=cache.rho_list,
                    q_k=q, g0=g0, s_tilde=s_tilde, b_tilde=b_tilde,
                    d_k=d_k, xi1=xi1, xi2=xi2, omega_dual=Minv_q), cache


def _project(x, maps):
    """PSD projection in isometric coordinates: unpack, clamp, repack."""
    S = unsvec(x, maps, iso=True)
    w, V = np.linalg.eigh(S)
    if w[0] >= 0.0:
        return x
    S = (V * np.maximum(w, 0.0)) @ V.T
    return svec(S, maps, iso=True)


def sgs_sweep(state, data):
    """One backward pass over the vertex blocks, an X0 update, one forward pass."""
    lifted = data.lifted
    maps_n, maps_p = lifted.svec_n, lifted.svec_p
    q, kq = data.q_k, lifted.kappa_q
    x0 = state.x0
    xs = [x.copy() for x in state.x_list]
    ell = data.ell(state)
    nv = len(xs)

    for i in reversed(range(nv)):
        g = kq + data.JM_list[i] @ (q - ell)
        new = _project(xs[i] + g / data.rho_list[i], maps_n)
        ell = ell + (new - xs[i]) @ lifted.J_list[i]
        xs[i] = new

    step0 = data.Minv @ (q - ell)
    new0 = _project(x0 - step0 / data.rho0, maps_p)
    ell = ell - (new0 - x0)
    x0 = new0

    for i in range(nv):
        g = kq + data.JM_list[i] @ (q - ell)
        new = _project(xs[i] + g / data.rho_list[i], maps_n)
        ell = ell + (new - xs[i]) @ lifted.J_list[i]
        xs[i] = new

    return DualState(x0=x0, x_list=xs)


def block_gradients(state, data):
    """Gradients of the dual objective at the current state."""
    ell = data.ell(state)
    r = data.Minv @ (data.q_k - ell)
    grad0 = r
    grads = [-(data.lifted.kappa_q + JM @ (data.q_k - ell))
             for JM in data.JM_list]
    return grad0, grads


def dual_residual(state, data):
    """Relative fixed-point error of the projected optimality map."""
    lifted = data.lifted
    grad0, grads = block_gradients(state, data)
    moved = _project(state.x0 - grad0, lifted.svec_p)
    err = np.linalg.norm(state.x0 - moved) / (
        1.0 + np.linalg.norm(state.x0) + np.linalg.norm(grad0))
    for x, g in zip(state.x_list, grads):
        moved = _project(x - g, lifted.svec_n)
        e = np.linalg.norm(x - moved) / (1.0 + np.linalg.norm(x) + np.linalg.norm(g))
        err = max(err, e)
    return float(err)


def dual_objective(state, data):
    """Value of the dual minimization objective Th(X), constants included."""
    r = data.q_k - data.ell(state)
    xsum = np.zeros(data.lifted.svec_n.size)
    for x in state.x_list:
        xsum = xsum + x
    return float(0.5 * r @ (data.Minv @ r)
                 - data.lifted.kappa_q @ xsum
                 - data.sigma1 * (data.b_tilde @ data.b_tilde)
                 - data.sigma2 * (data.s_tilde @ data.s_tilde))


def primal_objective(data, s):
    """Subproblem objective at isometric coordinates s."""
    res = data.lifted.AD1 @ s + data.b_tilde
    diff = s - data.s_tilde
    return float(data.g0 @ s + data.sigma1 * (res @ res)
                 + data.sigma2 * (diff @ diff))


def recover_primal(data, state):
    """Primal solution in isometric coordinates: s = Minv (q - L(X))."""
    return data.Minv @ (data.q_k - data.ell(state))


def solve_inner(lifted, d_k, w_k, v_tilde_k, alpha_k, theta_k, eta_f_k,
                eps, max_sweeps, warm_start=None, cache=None):
    """Run sweeps until the dual residual drops below eps.

    Returns (v, sweeps_used, state, cache) with v = vec(W) rebuilt from
    the recovered half-vectorization; W is symmetric by construction.
    Raises MaxSweepsExceeded (carrying the best iterate) at the cap.
    """
    data, cache = assemble_dual_data(lifted, d_k, w_k, v_tilde_k,
                                     alpha_k, theta_k, eta_f_k, cache)
    state = warm_start.copy() if warm_start is not None else zero_state(lifted)
    sweeps = 0
    err = np.inf
    while sweeps < max_sweeps:
        state = sgs_sweep(state, data)
        sweeps += 1
        err = dual_residual(state, data)
        if err < eps:
            s = recover_primal(data, state)
            v = unsvec(s, lifted.svec_p, iso=True).reshape(-1, order="F")
            return v, sweeps, state, cache
    s = recover_primal(data, state)
    v = unsvec(s, lifted.svec_p, iso=True).reshape(-1, order="F")
    raise MaxSweepsExceeded(v=v, residual=err, state=state, sweeps=sweeps)
