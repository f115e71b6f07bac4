"""Simulation-study generators: graph-structured Gaussian covariates and
responses from the three regression families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit, logit

from .data import CUMULATIVE_LOGIT, LINEAR, LOGISTIC, ModelFamily

EIGEN_FLOOR = 0.1
DEFAULT_EDGE_WEIGHT = 0.3


@dataclass(frozen=True)
class CovariateModel:
    """Gaussian covariate distribution with a random-graph precision pattern."""

    p: int
    edge_prob: float
    edge_weight: float
    adjacency: np.ndarray
    precision: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class ResponseSpec:
    family: ModelFamily
    beta: np.ndarray
    intercepts: np.ndarray
    noise_sd: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))
        object.__setattr__(self, "intercepts", np.asarray(self.intercepts, dtype=float))
        if self.family.kind == CUMULATIVE_LOGIT:
            if len(self.intercepts) != self.family.levels - 1:
                raise ValueError("need K-1 intercepts for cumulative logit")
            if np.any(np.diff(self.intercepts) <= 0):
                raise ValueError("cumulative logit intercepts must be strictly increasing")
        if self.noise_sd <= 0:
            raise ValueError("noise_sd must be positive")


def correlation_from_precision(omega: np.ndarray):
    """(sigma, precision) in correlation form for a positive-definite omega."""
    sigma0 = np.linalg.inv(omega)
    d = np.sqrt(np.diag(sigma0))
    sigma = sigma0 / np.outer(d, d)
    precision = np.linalg.inv(sigma)
    return sigma, precision


def random_graph_precision(p: int, edge_prob: float,
                           edge_weight: float = DEFAULT_EDGE_WEIGHT,
                           seed=None) -> CovariateModel:
    """Sample a Bernoulli random graph and build a unit-diagonal covariance.

    Off-diagonal precision entries are edge_weight on sampled edges; the
    diagonal shift keeps the smallest eigenvalue at EIGEN_FLOOR before the
    rescale to correlation form.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    if not 0 <= edge_prob <= 1:
        raise ValueError("edge_prob must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    upper = rng.random((p, p)) < edge_prob
    A = np.triu(upper, k=1)
    A = (A | A.T).astype(float)
    M = edge_weight * A
    eig_min = float(np.linalg.eigvalsh(M)[0])
    d = EIGEN_FLOOR - min(eig_min, 0.0)
    omega = M + d * np.eye(p)
    sigma, precision = correlation_from_precision(omega)
    return CovariateModel(p=p, edge_prob=edge_prob, edge_weight=edge_weight,
                         adjacency=A, precision=precision, sigma=sigma)


def sample_covariates(model: CovariateModel, n: int, seed=None) -> np.ndarray:
    """n i.i.d. rows from N(0, sigma) via the Cholesky factor."""
    try:
        L = np.linalg.cholesky(model.sigma)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is not positive definite") from exc
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, model.p)) @ L.T


def simulate_response(spec: ResponseSpec, X: np.ndarray, seed=None) -> np.ndarray:
    """Draw responses under the configured family."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if X.shape[1] != len(spec.beta):
        raise ValueError("beta length does not match the number of columns")
    rng = np.random.default_rng(seed)
    eta = X @ spec.beta
    kind = spec.family.kind
    if kind == LINEAR:
        return eta + spec.noise_sd * rng.standard_normal(n)
    if kind == LOGISTIC:
        return (rng.random(n) < expit(spec.intercepts[0] + eta)).astype(float)
    cum = expit(spec.intercepts[None, :] + eta[:, None])  # n x (K-1)
    if np.any(np.diff(cum, axis=1) < 0):
        raise ValueError("cumulative probabilities are not non-decreasing")
    u = rng.random(n)
    return (u[:, None] > cum).sum(axis=1).astype(float)


def auto_intercepts(family: ModelFamily, X: np.ndarray, beta: np.ndarray,
                    targets=None) -> np.ndarray:
    """Intercepts matching target marginal response shares by 1-D root-finding.

    Defaults: P(Y = 1) = 1/2 for logistic; P(Y <= k) = (k+1)/K for ordinal.
    """
    if family.kind == LINEAR:
        raise ValueError("linear responses take no intercept calibration")
    if targets is None:
        if family.kind == LOGISTIC:
            targets = (0.5,)
        else:
            K = family.levels
            targets = tuple((k + 1) / K for k in range(K - 1))
    eta = np.asarray(X, dtype=float) @ np.asarray(beta, dtype=float)

    def solve(target):
        f = lambda a: float(np.mean(expit(a + eta)) - target)
        if f(-50.0) > 0 or f(50.0) < 0:
            raise ValueError(f"no intercept in [-50, 50] reaches target {target}")
        return brentq(f, -50.0, 50.0, xtol=1e-12)

    alphas = np.array([solve(t) for t in targets])
    if family.kind == CUMULATIVE_LOGIT and np.any(np.diff(alphas) <= 0):
        raise ValueError("calibrated intercepts are not strictly increasing")
    return alphas
