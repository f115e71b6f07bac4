"""Core domain types: model families, datasets, and fitted regularization paths."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

LINEAR = "linear"
LOGISTIC = "logistic"
CUMULATIVE_LOGIT = "cumlogit"

_FAMILY_KINDS = (LINEAR, LOGISTIC, CUMULATIVE_LOGIT)


class ConstantColumnError(ValueError):
    """A design column has zero sample variance and cannot be standardized."""


class InputFormatError(ValueError):
    """Malformed CSV / config input, with row and field diagnostics."""


@dataclass(frozen=True)
class ModelFamily:
    """Regression family: linear, logistic, or cumulative-logit (proportional odds).

    Cumulative logit with K levels has K-1 ordered intercepts; the other
    families have a single intercept.
    """

    kind: str
    levels: int | None = None

    def __post_init__(self):
        if self.kind not in _FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == CUMULATIVE_LOGIT:
            if self.levels is None or self.levels < 3:
                raise ValueError("cumulative logit requires levels >= 3")
        elif self.levels is not None:
            raise ValueError(f"{self.kind} family takes no levels argument")

    @property
    def n_intercepts(self) -> int:
        return self.levels - 1 if self.kind == CUMULATIVE_LOGIT else 1

    @classmethod
    def linear(cls) -> "ModelFamily":
        return cls(LINEAR)

    @classmethod
    def logistic(cls) -> "ModelFamily":
        return cls(LOGISTIC)

    @classmethod
    def cumulative_logit(cls, levels: int = 3) -> "ModelFamily":
        return cls(CUMULATIVE_LOGIT, levels)


@dataclass(frozen=True)
class Dataset:
    """Design matrix, response vector, and the family tying them together.

    Immutable after construction; safe to share across workers.
    """

    X: np.ndarray
    y: np.ndarray
    family: ModelFamily

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D matrix")
        n, p = X.shape
        if n < 2:
            raise ValueError("need at least 2 observations")
        if p < 1:
            raise ValueError("need at least 1 covariate")
        if y.shape != (n,):
            raise ValueError(f"y has shape {y.shape}, expected ({n},)")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("non-finite entries in X or y")
        kind = self.family.kind
        if kind == LOGISTIC:
            if not np.all(np.isin(y, (0.0, 1.0))):
                raise ValueError("logistic responses must lie in {0, 1}")
        elif kind == CUMULATIVE_LOGIT:
            K = self.family.levels
            if not np.all(y == np.round(y)) or y.min() < 0 or y.max() > K - 1:
                raise ValueError(f"ordinal responses must lie in {{0,...,{K - 1}}}")
            present = np.isin(np.arange(K), y.astype(int))
            if not present.all():
                missing = np.flatnonzero(~present).tolist()
                warnings.warn(f"ordinal levels {missing} have no observations")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_csv(cls, path, family_kind: str, levels: int | None = None) -> "Dataset":
        """Load a dataset from a CSV with a header row and a column named `y`.

        All non-`y` columns are covariates, in file order. For cumulative
        logit, `levels` defaults to the number of observed response levels.
        """
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise InputFormatError(f"{path}: empty file") from None
            if "y" not in header:
                raise InputFormatError(f"{path}: header has no 'y' column")
            y_col = header.index("y")
            rows = []
            for i, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise InputFormatError(
                        f"{path}: row {i} has {len(row)} fields, expected {len(header)}"
                    )
                try:
                    rows.append([float(v) for v in row])
                except ValueError as exc:
                    bad = next(v for v in row if not _is_float(v))
                    col = header[row.index(bad)]
                    raise InputFormatError(
                        f"{path}: row {i}, field {col!r}: not a number: {bad!r}"
                    ) from exc
        if not rows:
            raise InputFormatError(f"{path}: no data rows")
        data = np.array(rows)
        y = data[:, y_col]
        X = np.delete(data, y_col, axis=1)
        if family_kind == CUMULATIVE_LOGIT and levels is None:
            levels = max(int(y.max()) + 1, 3)
        family = ModelFamily(family_kind, levels if family_kind == CUMULATIVE_LOGIT else None)
        return cls(X, y, family)

    def to_csv(self, path) -> None:
        header = ["y"] + [f"x{j + 1}" for j in range(self.p)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(self.n):
                writer.writerow([repr(float(self.y[i]))] + [repr(float(v)) for v in self.X[i]])


def _is_float(v: str) -> bool:
    try:
        float(v)
        return True
    except ValueError:
        return False


def standardize(X: np.ndarray):
    """Center and scale columns to mean 0 and sd 1 (divisor n).

    Returns (X_standardized, means, scales). Raises ConstantColumnError
    naming the first offending column if one has zero variance.
    """
    X = np.asarray(X, dtype=float)
    means = X.mean(axis=0)
    centered = X - means
    scales = np.sqrt((centered**2).mean(axis=0))
    bad = np.flatnonzero(scales == 0.0)
    if bad.size:
        raise ConstantColumnError(f"constant column {bad[0]}")
    return centered / scales, means, scales


def lambda_grid(lambda_max: float, size: int, ratio: float) -> np.ndarray:
    """Log-equispaced penalty grid from lambda_max down to ratio * lambda_max."""
    if lambda_max <= 0:
        raise ValueError(f"lambda_max must be positive, got {lambda_max}")
    if size < 2:
        raise ValueError("grid size must be >= 2")
    if not 0 < ratio < 1:
        raise ValueError("grid ratio must lie in (0, 1)")
    return np.geomspace(lambda_max, ratio * lambda_max, size)


@dataclass(frozen=True)
class LassoPath:
    """Coefficients and intercepts along a strictly decreasing penalty grid."""

    lambdas: np.ndarray
    coefs: np.ndarray  # grid x q
    intercepts: np.ndarray  # grid x m

    def __post_init__(self):
        lambdas = np.asarray(self.lambdas, dtype=float)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "coefs", np.asarray(self.coefs, dtype=float))
        object.__setattr__(self, "intercepts", np.asarray(self.intercepts, dtype=float))
        if lambdas.ndim != 1 or len(lambdas) < 2:
            raise ValueError("lambda grid must be a vector of length >= 2")
        if np.any(lambdas <= 0) or np.any(np.diff(lambdas) >= 0):
            raise ValueError("lambda grid must be strictly decreasing and positive")
        G = len(lambdas)
        if self.coefs.shape[0] != G or self.intercepts.shape[0] != G:
            raise ValueError("coefs and intercepts must have one row per grid point")

    @property
    def grid_size(self) -> int:
        return len(self.lambdas)

    def to_csv(self, path) -> None:
        q = self.coefs.shape[1]
        m = self.intercepts.shape[1]
        header = (
            ["lambda"]
            + [f"alpha{k + 1}" for k in range(m)]
            + [f"beta{j + 1}" for j in range(q)]
        )
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for g in range(self.grid_size):
                row = [repr(float(self.lambdas[g]))]
                row += [repr(float(v)) for v in self.intercepts[g]]
                row += [repr(float(v)) for v in self.coefs[g]]
                writer.writerow(row)
