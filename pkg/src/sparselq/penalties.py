"""Sparsity penalties: values and closed-form proximal maps.

Three regimes are supported.  The weighted l1 norm gamma*sum(w_ij |P_ij|)
is the convex workhorse; its prox is entrywise soft thresholding.  The
piecewise quadratic penalty keeps the kink at zero but adds curvature
away from it, making the penalty strongly convex; its prox is a
four-branch rational map with a dead band around zero.  The exponential
surrogate 1 - exp(-t/sigma) approximates the 0/1 entry counter and only
enters through its derivative, which supplies the weights of a majorizing
weighted-l1 problem.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPqParams, NonPositiveRho, NonPositiveSigma

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty selection and parameters.

    kind is one of "weighted_l1", "piecewise_quadratic", "exp_surrogate",
    or "l0" (the raw entry count, for reporting only; it is never used
    inside iterations).  weights must be strictly positive with the shape
    of the gain.  pq_params = (a1, a2, b1, b2) requires a1, a2 > 0 and
    b1 < 0 < b2.
    """

    kind: str
    gamma: float
    weights: np.ndarray = None
    pq_params: tuple = (1.0, 1.0, -1.0, 1.0)
    sigma: float = 1.0
    mu_gq: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.kind not in ("weighted_l1", "piecewise_quadratic",
                             "exp_surrogate", "l0"):
            raise ValueError(f"unknown penalty kind: {self.kind!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if np.any(w <= 0):
                raise ValueError("weights must be strictly positive")
            object.__setattr__(self, "weights", w)
        a1, a2, b1, b2 = self.pq_params
        if self.kind == "piecewise_quadratic":
            if not (a1 > 0 and a2 > 0 and b1 < 0 < b2):
                raise InvalidPqParams(
                    f"need a1, a2 > 0 and b1 < 0 < b2, got {self.pq_params}")
            wmin = 1.0 if self.weights is None else float(self.weights.min())
            object.__setattr__(self, "mu_gq", wmin * min(a1, a2))
        if self.kind == "exp_surrogate" and self.sigma <= 0:
            raise NonPositiveSigma("sigma must be > 0")


def _weights_like(weights, Z):
    return np.ones_like(Z) if weights is None else np.broadcast_to(weights, Z.shape)


def prox_weighted_l1(Z, gamma, weights, rho):
    """Entrywise soft threshold at gamma*w_ij/rho; exact zeros inside."""
    if rho <= 0:
        raise NonPositiveRho("rho must be > 0")
    Z = np.asarray(Z, dtype=float)
    t = gamma * _weights_like(weights, Z) / rho
    return np.sign(Z) * np.maximum(np.abs(Z) - t, 0.0)


def prox_piecewise_quadratic(Z, gamma, weights, pq_params, rho):
    """Four-branch prox of the piecewise quadratic penalty.

    Zero on the dead band [gamma*w*b1/rho, gamma*w*b2/rho]; a shifted
    shrinkage on either side.
    """
    if rho <= 0:
        raise NonPositiveRho("rho must be > 0")
    a1, a2, b1, b2 = pq_params
    if not (a1 > 0 and a2 > 0 and b1 < 0 < b2):
        raise InvalidPqParams(f"need a1, a2 > 0 and b1 < 0 < b2, got {pq_params}")
    Z = np.asarray(Z, dtype=float)
    gw = gamma * _weights_like(weights, Z)
    hi = (rho * Z - gw * b2) / (gw * a2 + rho)
    lo = (rho * Z - gw * b1) / (gw * a1 + rho)
    out = np.zeros_like(Z)
    out = np.where(Z >= gw * b2 / rho, hi, out)
    out = np.where(Z <= gw * b1 / rho, lo, out)
    return out


def exp_weight_update(x, sigma):
    """Derivative of the exponential surrogate at |x|: (1/sigma) e^(-x/sigma).

    Entries live in (0, 1/sigma]; a floor at the smallest positive float
    guards against underflow for x >> sigma.
    """
    if sigma <= 0:
        raise NonPositiveSigma("sigma must be > 0")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be entrywise nonnegative")
    return np.maximum(np.exp(-x / sigma) / sigma, _TINY)


def pq_scalar_value(x, pq_params):
    """The piecewise quadratic penalty of a scalar or array, weightless."""
    a1, a2, b1, b2 = pq_params
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, 0.5 * a2 * x * x + b2 * x, 0.5 * a1 * x * x + b1 * x)


def penalty_value(P, config):
    """Penalty value of a gain-shaped matrix under the given config."""
    P = np.asarray(P, dtype=float)
    g = config.gamma
    if config.kind == "weighted_l1":
        return g * float(np.sum(_weights_like(config.weights, P) * np.abs(P)))
    if config.kind == "piecewise_quadratic":
        return g * float(np.sum(_weights_like(config.weights, P)
                                * pq_scalar_value(P, config.pq_params)))
    if config.kind == "exp_surrogate":
        return g * float(np.sum(1.0 - np.exp(-np.abs(P) / config.sigma)))
    # l0: reporting only
    return g * float(np.count_nonzero(P))
