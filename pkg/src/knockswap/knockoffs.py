"""Permutation knockoffs: augmented fits, entry statistics, and selection."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .data import Dataset, standardize
from .solvers import SolverOptions, entry_lambdas, fit_path


@dataclass(frozen=True)
class KnockoffRun:
    """One knockoff draw with its entry statistics and signed statistics W."""

    permutation: np.ndarray
    X_tilde: np.ndarray
    T: np.ndarray
    T_tilde: np.ndarray
    W: np.ndarray
    grid: np.ndarray


def make_knockoffs(X: np.ndarray, rng_seed=None):
    """Knockoff matrix: rows of X under a uniformly drawn permutation.

    Deterministic given a seed; fresh randomness when rng_seed is None.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        raise ValueError("need at least 2 rows to permute")
    rng = np.random.default_rng(rng_seed)
    perm = rng.permutation(X.shape[0])
    return X[perm], perm


def signed_statistic(t: float, t_tilde: float) -> float:
    """W = max(T, T~), positive iff the real column entered strictly first."""
    if t == 0.0 and t_tilde == 0.0:
        return 0.0
    m = max(t, t_tilde)
    return m if t > t_tilde else -m


def knockoff_statistics(dataset: Dataset, opts: SolverOptions | None = None,
                        rng_seed=None) -> KnockoffRun:
    """Fit the path on [X, X~] and compute the signed statistics W."""
    opts = opts or SolverOptions()
    X_tilde, perm = make_knockoffs(dataset.X, rng_seed)
    augmented = np.hstack([dataset.X, X_tilde])
    aug_std, _, _ = standardize(augmented)
    aug_ds = Dataset(aug_std, dataset.y, dataset.family)
    path = fit_path(aug_ds, opts)
    stats = entry_lambdas(path, opts.zero_clip)
    p = dataset.p
    T = stats.T[:p]
    T_tilde = stats.T[p:]
    m = np.maximum(T, T_tilde)
    W = np.where((T == 0) & (T_tilde == 0), 0.0, np.where(T > T_tilde, m, -m))
    return KnockoffRun(permutation=perm, X_tilde=X_tilde, T=T, T_tilde=T_tilde,
                       W=W, grid=stats.grid)


def select(W: np.ndarray, s: float) -> np.ndarray:
    """Indices with W_i >= s. The threshold must be strictly positive."""
    if s <= 0:
        raise ValueError("threshold must be positive")
    return np.flatnonzero(np.asarray(W) >= s)


def write_statistics_csv(path, run: KnockoffRun, selected: np.ndarray) -> None:
    """Per-covariate table: index, T, T_tilde, W, selected flag."""
    chosen = set(int(i) for i in selected)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "T", "T_tilde", "W", "selected"])
        for i in range(len(run.W)):
            writer.writerow([
                i + 1,
                repr(float(run.T[i])),
                repr(float(run.T_tilde[i])),
                repr(float(run.W[i])),
                int(i in chosen),
            ])
