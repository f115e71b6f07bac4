"""Pathwise coordinate-descent solvers for the three penalised families.

All solvers expect a design whose columns are standardized (mean 0, sd 1
with divisor n) and report coefficients on that scale. The penalised
objective is (1/n) * log-likelihood minus lambda * ||beta||_1, so the
lambda_max formulas below are exact KKT bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .data import (
    CUMULATIVE_LOGIT,
    LINEAR,
    LOGISTIC,
    Dataset,
    LassoPath,
    lambda_grid,
)

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


class SolverError(RuntimeError):
    pass


class DegenerateLambdaMaxError(SolverError):
    """lambda_max is zero: the all-zero solution holds for every penalty."""


class ConvergenceError(SolverError):
    def __init__(self, lam: float, iterations: int):
        super().__init__(f"no convergence at lambda={lam:g} after {iterations} sweeps")
        self.lam = lam
        self.iterations = iterations


@dataclass(frozen=True)
class SolverOptions:
    grid_size: int = 100
    grid_ratio: float = 1e-3
    tol: float = 1e-9
    max_iter: int = 100_000
    zero_clip: float = 1e-8

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.zero_clip < self.tol:
            raise ValueError("zero_clip must be >= tol")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.grid_size < 2:
            raise ValueError("grid_size must be >= 2")
        if not 0 < self.grid_ratio < 1:
            raise ValueError("grid_ratio must lie in (0, 1)")


@dataclass(frozen=True)
class EntryStatistics:
    """Largest grid penalty at which each column is active (0 if never)."""

    T: np.ndarray
    grid: np.ndarray


# ---------------------------------------------------------------------------
# coordinate sweeps (numba-compiled hot loops)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _sweep(X, r, beta, lam, idx):
    """One unweighted coordinate pass over idx; unit column norms assumed.

    Updates r = y_centered - X @ beta in place; returns max |delta beta|.
    """
    n = X.shape[0]
    max_delta = 0.0
    for j in idx:
        xj = X[:, j]
        rho = beta[j] + np.dot(xj, r) / n
        if rho > lam:
            bnew = rho - lam
        elif rho < -lam:
            bnew = rho + lam
        else:
            bnew = 0.0
        d = bnew - beta[j]
        if d != 0.0:
            for i in range(n):
                r[i] -= d * xj[i]
            beta[j] = bnew
            if abs(d) > max_delta:
                max_delta = abs(d)
    return max_delta


@njit(cache=True)
def _sweep_weighted(X, r, beta, lam, idx, w, denom):
    """One weighted coordinate pass; denom[j] = (w @ X[:,j]**2) / n."""
    n = X.shape[0]
    max_delta = 0.0
    for j in idx:
        xj = X[:, j]
        s = 0.0
        for i in range(n):
            s += w[i] * xj[i] * r[i]
        rho = s / n + denom[j] * beta[j]
        if rho > lam:
            bnew = (rho - lam) / denom[j]
        elif rho < -lam:
            bnew = (rho + lam) / denom[j]
        else:
            bnew = 0.0
        d = bnew - beta[j]
        if d != 0.0:
            for i in range(n):
                r[i] -= d * xj[i]
            beta[j] = bnew
            if abs(d) > max_delta:
                max_delta = abs(d)
    return max_delta


def _kkt_violation(c, beta, lam, zero_clip):
    """Max absolute KKT residual given gradient correlations c = X'r / n."""
    active = np.abs(beta) > 0.0
    viol = 0.0
    if np.any(~active):
        viol = max(viol, float(np.max(np.abs(c[~active])) - lam))
    if np.any(active):
        viol = max(viol, float(np.max(np.abs(c[active] - lam * np.sign(beta[active])))))
    return viol


# ---------------------------------------------------------------------------
# lambda_max
# ---------------------------------------------------------------------------


def lambda_max(dataset: Dataset) -> float:
    """Smallest penalty with an all-zero penalised solution (KKT bound)."""
    X, y = dataset.X, dataset.y
    n = dataset.n
    kind = dataset.family.kind
    if kind == LINEAR:
        resid = y - y.mean()
    elif kind == LOGISTIC:
        resid = y - y.mean()
    else:
        K = dataset.family.levels
        alpha = _cumlogit_intercept_mle(y, K)
        dl, _ = _cumlogit_eta_derivs(alpha, np.zeros(n), y.astype(int), K)
        resid = dl
    return float(np.max(np.abs(X.T @ resid)) / n)


# ---------------------------------------------------------------------------
# family helpers
# ---------------------------------------------------------------------------


def _cumlogit_intercept_mle(y, K):
    """Closed-form intercept-only MLE: logit of empirical cumulative shares."""
    n = len(y)
    counts = np.bincount(y.astype(int), minlength=K)
    cum = np.cumsum(counts)[:-1] / n
    cum = np.clip(cum, 1e-12, 1 - 1e-12)
    return np.log(cum / (1 - cum))


def _cumlogit_eta_derivs(alpha, eta, y, K):
    """First and second derivatives of the per-row log-likelihood wrt eta."""
    bounds = np.concatenate(([-np.inf], alpha, [np.inf]))
    a_lo = bounds[y] + eta
    a_hi = bounds[y + 1] + eta
    F_lo = expit(a_lo)
    F_hi = expit(a_hi)
    f_lo = np.where(np.isfinite(a_lo), F_lo * (1 - F_lo), 0.0)
    f_hi = np.where(np.isfinite(a_hi), F_hi * (1 - F_hi), 0.0)
    D = np.clip(F_hi - F_lo, 1e-12, None)
    dl = (f_hi - f_lo) / D
    ddl = (f_hi * (1 - 2 * F_hi) - f_lo * (1 - 2 * F_lo)) / D - dl**2
    return dl, ddl


def _cumlogit_mean_ll(alpha, eta, y, K):
    bounds = np.concatenate(([-np.inf], alpha, [np.inf]))
    F_lo = expit(bounds[y] + eta)
    F_hi = expit(bounds[y + 1] + eta)
    return float(np.mean(np.log(np.clip(F_hi - F_lo, 1e-300, None))))


def _cumlogit_alpha_update(alpha, eta, y, K):
    """Maximise the mean log-likelihood over the intercepts, given eta.

    Monotonicity is kept by the reparameterisation alpha_1 = theta_1,
    alpha_k = alpha_{k-1} + exp(theta_k).
    """
    m = K - 1

    def unpack(theta):
        a = np.empty(m)
        a[0] = theta[0]
        for k in range(1, m):
            a[k] = a[k - 1] + np.exp(theta[k])
        return a

    def nll(theta):
        return -_cumlogit_mean_ll(unpack(theta), eta, y, K)

    theta0 = np.empty(m)
    theta0[0] = alpha[0]
    incr = np.clip(np.diff(alpha), 1e-8, None)
    theta0[1:] = np.log(incr)
    res = minimize(nll, theta0, method="BFGS", options={"gtol": 1e-10, "maxiter": 200})
    return unpack(res.x)


# ---------------------------------------------------------------------------
# path fitting
# ---------------------------------------------------------------------------


def fit_path(dataset: Dataset, opts: SolverOptions | None = None,
             lambdas: np.ndarray | None = None) -> LassoPath:
    """Fit the full regularization path with warm starts along the grid.

    X must be standardized. The grid defaults to a log-equispaced descent
    from lambda_max; a precomputed grid may be supplied (e.g. for
    cross-validation refits on row subsets).
    """
    opts = opts or SolverOptions()
    skip_first = lambdas is None
    if lambdas is None:
        lmax = lambda_max(dataset)
        if lmax <= 1e-12:
            raise DegenerateLambdaMaxError(
                "lambda_max is 0; response carries no signal on any column"
            )
        lambdas = lambda_grid(lmax, opts.grid_size, opts.grid_ratio)
    lambdas = np.asarray(lambdas, dtype=float)

    kind = dataset.family.kind
    if kind == LINEAR:
        return _fit_linear(dataset, opts, lambdas, skip_first)
    if kind == LOGISTIC:
        return _fit_logistic(dataset, opts, lambdas, skip_first)
    return _fit_cumlogit(dataset, opts, lambdas, skip_first)


def _fit_linear(dataset, opts, lambdas, skip_first=True):
    X = np.asfortranarray(dataset.X)
    y = dataset.y
    n, p = X.shape
    ybar = y.mean()
    yc = y - ybar
    G = len(lambdas)
    coefs = np.zeros((G, p))
    intercepts = np.full((G, 1), ybar)

    beta = np.zeros(p)
    r = yc.copy()
    all_idx = np.arange(p, dtype=np.int64)
    kkt_tol = 5.0 * opts.tol
    for g, lam in enumerate(lambdas):
        if g == 0 and skip_first:
            # lambda_max: the all-zero solution is exact by construction
            continue
        sweeps = 0
        while True:
            delta = _sweep(X, r, beta, lam, all_idx)
            sweeps += 1
            active = np.flatnonzero(beta).astype(np.int64)
            while delta > opts.tol and active.size and sweeps < opts.max_iter:
                delta = _sweep(X, r, beta, lam, active)
                sweeps += 1
            c = X.T @ r / n
            if _kkt_violation(c, beta, lam, opts.zero_clip) <= kkt_tol:
                break
            if sweeps >= opts.max_iter:
                raise ConvergenceError(lam, sweeps)
        coefs[g] = beta
    return LassoPath(lambdas, coefs, intercepts)


def _fit_logistic(dataset, opts, lambdas, skip_first=True):
    X = np.asfortranarray(dataset.X)
    y = dataset.y
    n, p = X.shape
    ybar = y.mean()
    G = len(lambdas)
    coefs = np.zeros((G, p))
    intercepts = np.zeros((G, 1))

    alpha = float(np.log(ybar / (1 - ybar)))
    alpha0 = alpha
    beta = np.zeros(p)
    all_idx = np.arange(p, dtype=np.int64)
    inner_tol = max(opts.tol, 1e-10)
    for g, lam in enumerate(lambdas):
        if g == 0 and skip_first:
            intercepts[g, 0] = alpha0
            continue
        sweeps = 0
        for _ in range(100):  # proximal Newton steps
            eta = alpha + X @ beta
            prob = expit(eta)
            w = np.clip(prob * (1 - prob), 1e-5, None)
            z = eta + (y - prob) / w
            denom = (w @ (X**2)) / n
            r = z - alpha - X @ beta
            old = beta.copy()
            old_alpha = alpha
            for _ in range(1000):
                delta = _sweep_weighted(X, r, beta, lam, all_idx, w, denom)
                da = (w @ r) / w.sum()
                alpha += da
                r -= da
                sweeps += 1
                if sweeps >= opts.max_iter:
                    raise ConvergenceError(lam, sweeps)
                if max(delta, abs(da)) <= inner_tol:
                    break
            prob = expit(alpha + X @ beta)
            c = X.T @ (y - prob) / n
            step = max(float(np.max(np.abs(beta - old))), abs(alpha - old_alpha))
            if _kkt_violation(c, beta, lam, opts.zero_clip) <= 1e-7 and step <= 1e-8:
                break
        else:
            raise ConvergenceError(lam, sweeps)
        coefs[g] = beta
        intercepts[g, 0] = alpha
    return LassoPath(lambdas, coefs, intercepts)


def _fit_cumlogit(dataset, opts, lambdas, skip_first=True):
    X = np.asfortranarray(dataset.X)
    y = dataset.y.astype(int)
    n, p = X.shape
    K = dataset.family.levels
    G = len(lambdas)
    coefs = np.zeros((G, p))
    intercepts = np.zeros((G, K - 1))

    alpha = _cumlogit_intercept_mle(y, K)
    alpha0 = alpha.copy()
    beta = np.zeros(p)
    all_idx = np.arange(p, dtype=np.int64)
    inner_tol = max(opts.tol, 1e-10)
    for g, lam in enumerate(lambdas):
        if g == 0 and skip_first:
            intercepts[g] = alpha0
            continue
        sweeps = 0
        for _ in range(200):
            eta = X @ beta
            dl, ddl = _cumlogit_eta_derivs(alpha, eta, y, K)
            w = np.clip(-ddl, 1e-5, None)
            z = eta + dl / w
            denom = (w @ (X**2)) / n
            r = z - eta
            old = beta.copy()
            for _ in range(1000):
                delta = _sweep_weighted(X, r, beta, lam, all_idx, w, denom)
                sweeps += 1
                if sweeps >= opts.max_iter:
                    raise ConvergenceError(lam, sweeps)
                if delta <= inner_tol:
                    break
            eta = X @ beta
            new_alpha = _cumlogit_alpha_update(alpha, eta, y, K)
            step = max(float(np.max(np.abs(beta - old))), float(np.max(np.abs(new_alpha - alpha))))
            alpha = new_alpha
            dl, _ = _cumlogit_eta_derivs(alpha, eta, y, K)
            c = X.T @ dl / n
            if _kkt_violation(c, beta, lam, opts.zero_clip) <= 1e-7 and step <= 1e-8:
                break
        else:
            raise ConvergenceError(lam, sweeps)
        coefs[g] = beta
        intercepts[g] = alpha
    return LassoPath(lambdas, coefs, intercepts)


def entry_lambdas(path: LassoPath, zero_clip: float = 1e-8) -> EntryStatistics:
    """Largest grid penalty at which each column has |beta| >= zero_clip."""
    active = np.abs(path.coefs) >= zero_clip
    ever = active.any(axis=0)
    first = active.argmax(axis=0)  # grid is descending, so first hit = largest lambda
    T = np.where(ever, path.lambdas[first], 0.0)
    return EntryStatistics(T=T, grid=path.lambdas)
