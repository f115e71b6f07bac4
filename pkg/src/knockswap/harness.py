"""Monte-Carlo experiment harness: repeated selection runs, detection rates,
and the K-fold cross-validation baseline."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import changepoint, knockoffs
from .data import (
    CUMULATIVE_LOGIT,
    LINEAR,
    LOGISTIC,
    Dataset,
    ModelFamily,
    standardize,
)
from .datagen import (
    CovariateModel,
    ResponseSpec,
    auto_intercepts,
    random_graph_precision,
    sample_covariates,
    simulate_response,
)
from .solvers import SolverOptions, _cumlogit_mean_ll, fit_path, lambda_max
from .data import lambda_grid

METHOD_KNOCKOFF_STATS = "knockoff_stats"
METHOD_KNOCKOFF_GAPS = "knockoff_gaps"
METHOD_CV = "cv"
_METHODS = (METHOD_KNOCKOFF_STATS, METHOD_KNOCKOFF_GAPS, METHOD_CV)

MODE_FRESH_DATA = "fresh_data"
MODE_FIXED_DATA = "fixed_data"
_MODES = (MODE_FRESH_DATA, MODE_FIXED_DATA)

_FAMILY_CODE = {LINEAR: 0, LOGISTIC: 1, CUMULATIVE_LOGIT: 2}


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    p: int
    B: int
    family: ModelFamily
    beta: np.ndarray
    edge_prob: float
    method: str
    randomness_mode: str = MODE_FRESH_DATA
    base_seed: int = 0
    solver: SolverOptions = field(default_factory=SolverOptions)
    folds: int = 10
    edge_weight: float = 0.3
    noise_sd: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float))
        if self.B < 1:
            raise ValueError("B must be >= 1")
        if len(self.beta) != self.p:
            raise ValueError("beta must have length p")
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.randomness_mode not in _MODES:
            raise ValueError(f"unknown randomness mode {self.randomness_mode!r}")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "B": self.B,
            "family": {"kind": self.family.kind, "levels": self.family.levels},
            "beta": [float(b) for b in self.beta],
            "edge_prob": self.edge_prob,
            "method": self.method,
            "randomness_mode": self.randomness_mode,
            "base_seed": self.base_seed,
            "solver": {
                "grid_size": self.solver.grid_size,
                "grid_ratio": self.solver.grid_ratio,
                "tol": self.solver.tol,
                "max_iter": self.solver.max_iter,
                "zero_clip": self.solver.zero_clip,
            },
            "folds": self.folds,
            "edge_weight": self.edge_weight,
            "noise_sd": self.noise_sd,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        fam = d["family"]
        family = ModelFamily(fam["kind"], fam.get("levels"))
        solver = SolverOptions(**d.get("solver", {}))
        return cls(
            n=d["n"], p=d["p"], B=d["B"], family=family, beta=d["beta"],
            edge_prob=d["edge_prob"], method=d["method"],
            randomness_mode=d.get("randomness_mode", MODE_FRESH_DATA),
            base_seed=d.get("base_seed", 0), solver=solver,
            folds=d.get("folds", 10), edge_weight=d.get("edge_weight", 0.3),
            noise_sd=d.get("noise_sd", 1.0),
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    detection_rate: np.ndarray
    selections: tuple

    @property
    def summary(self) -> dict:
        relevant = self.config.beta != 0
        rates = self.detection_rate
        return {
            "method": self.config.method,
            "B": self.config.B,
            "mean_relevant_rate": float(rates[relevant].mean()) if relevant.any() else None,
            "mean_null_rate": float(rates[~relevant].mean()) if (~relevant).any() else None,
        }

    def csv_rows(self):
        for i in range(self.config.p):
            yield {
                "index": i + 1,
                "beta": float(self.config.beta[i]),
                "method": self.config.method,
                "rate": float(self.detection_rate[i]),
            }

    def write_csv(self, path) -> None:
        write_rate_csv(path, list(self.csv_rows()))

    def write_summary_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary, fh, indent=2, sort_keys=True)
            fh.write("\n")


def write_rate_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["index", "beta", "method", "rate"])
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, "beta": repr(row["beta"]), "rate": repr(row["rate"])})


# ---------------------------------------------------------------------------
# seed streams
# ---------------------------------------------------------------------------

_STREAM_GRAPH = 0
_STREAM_COVARIATES = 1
_STREAM_RESPONSE = 2
_STREAM_PROCEDURE = 3  # knockoff permutation or CV folds


def _stream(base_seed: int, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence(base_seed, spawn_key=tuple(key))


# ---------------------------------------------------------------------------
# selection per repetition
# ---------------------------------------------------------------------------


def apply_threshold(W: np.ndarray, method: str) -> np.ndarray:
    """Auto-threshold W and select; empty selection on no positive stats."""
    try:
        sorted_w = changepoint.SortedPositiveW.from_statistics(W)
        if method == METHOD_KNOCKOFF_STATS:
            result = changepoint.w_threshold(sorted_w)
        else:
            result = changepoint.gaps_threshold(sorted_w)
    except changepoint.EmptySelection:
        return np.array([], dtype=int)
    return knockoffs.select(W, result.s)


def _draw_dataset(config: ExperimentConfig, cov_model: CovariateModel, rep: int) -> Dataset:
    """Covariate stream ignores the family so designs are shared across
    families given the same base seed; the response stream does not."""
    X = sample_covariates(cov_model, config.n,
                          _stream(config.base_seed, _STREAM_COVARIATES, rep))
    fam_code = _FAMILY_CODE[config.family.kind]
    response_seed = _stream(config.base_seed, _STREAM_RESPONSE, rep, fam_code)
    if config.family.kind == LINEAR:
        intercepts = np.array([0.0])
    else:
        intercepts = auto_intercepts(config.family, X, config.beta)
    spec = ResponseSpec(family=config.family, beta=config.beta,
                        intercepts=intercepts, noise_sd=config.noise_sd)
    y = simulate_response(spec, X, response_seed)
    return Dataset(X, y, config.family)


def _rep_selection(config: ExperimentConfig, cov_model: CovariateModel,
                   fixed_dataset: Dataset | None, rep: int) -> list:
    if fixed_dataset is not None:
        dataset = fixed_dataset
    else:
        dataset = _draw_dataset(config, cov_model, rep)
    fam_code = _FAMILY_CODE[config.family.kind]
    proc_seed = _stream(config.base_seed, _STREAM_PROCEDURE, rep, fam_code)
    if config.method == METHOD_CV:
        selected = cv_select(dataset, config.folds, proc_seed)
    else:
        run = knockoffs.knockoff_statistics(dataset, config.solver, proc_seed)
        selected = apply_threshold(run.W, config.method)
    return sorted(int(i) for i in selected)


def _rep_task(args):
    return _rep_selection(*args)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run B repetitions and report per-covariate detection rates."""
    cov_model = random_graph_precision(
        config.p, config.edge_prob, config.edge_weight,
        _stream(config.base_seed, _STREAM_GRAPH))
    fixed_dataset = None
    if config.randomness_mode == MODE_FIXED_DATA:
        fixed_dataset = _draw_dataset(config, cov_model, 0)

    tasks = [(config, cov_model, fixed_dataset, rep) for rep in range(config.B)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            selections = list(pool.map(_rep_task, tasks))
    else:
        selections = [_rep_task(t) for t in tasks]

    counts = np.zeros(config.p)
    for sel in selections:
        counts[sel] += 1
    return ExperimentReport(config=config,
                            detection_rate=counts / config.B,
                            selections=tuple(tuple(s) for s in selections))


# ---------------------------------------------------------------------------
# cross-validation baseline
# ---------------------------------------------------------------------------


def _fold_assignments(n: int, folds: int, rng: np.random.Generator) -> np.ndarray:
    order = rng.permutation(n)
    assign = np.empty(n, dtype=int)
    for k, chunk in enumerate(np.array_split(order, folds)):
        assign[chunk] = k
    return assign


def _folds_cover_levels(y, assign, folds, family) -> bool:
    if family.kind == LINEAR:
        return True
    levels = np.unique(y)
    for k in range(folds):
        train = y[assign != k]
        if not np.all(np.isin(levels, train)):
            return False
    return True


def _heldout_deviance(family, alpha, beta, X_test, y_test) -> float:
    """Mean negative log-likelihood of the held-out rows."""
    eta = X_test @ beta
    if family.kind == LINEAR:
        resid = y_test - alpha[0] - eta
        return float(np.mean(resid**2) / 2)
    if family.kind == LOGISTIC:
        z = alpha[0] + eta
        return float(np.mean(np.logaddexp(0.0, z) - y_test * z))
    return -_cumlogit_mean_ll(alpha, eta, y_test.astype(int), family.levels)


def cv_select(dataset: Dataset, folds: int = 10, rng_seed=None,
              opts: SolverOptions | None = None) -> np.ndarray:
    """K-fold selection: pick the grid penalty minimising held-out deviance
    and return the support of the full-data fit at that penalty."""
    opts = opts or SolverOptions()
    if folds < 2:
        raise ValueError("need at least 2 folds")
    n = dataset.n
    if folds > n:
        raise ValueError("more folds than observations")
    rng = np.random.default_rng(rng_seed)

    X_std, _, _ = standardize(dataset.X)
    full = Dataset(X_std, dataset.y, dataset.family)
    lmax = lambda_max(full)
    if lmax <= 1e-12:
        from .solvers import DegenerateLambdaMaxError
        raise DegenerateLambdaMaxError("lambda_max is 0 on the full data")
    grid = lambda_grid(lmax, opts.grid_size, opts.grid_ratio)
    full_path = fit_path(full, opts, lambdas=grid)

    assign = _fold_assignments(n, folds, rng)
    if not _folds_cover_levels(dataset.y, assign, folds, dataset.family):
        assign = _fold_assignments(n, folds, rng)
        if not _folds_cover_levels(dataset.y, assign, folds, dataset.family):
            raise ValueError("a training fold is missing a response level")

    deviance = np.zeros(len(grid))
    for k in range(folds):
        train = assign != k
        X_train, means, scales = standardize(dataset.X[train])
        train_ds = Dataset(X_train, dataset.y[train], dataset.family)
        path = fit_path(train_ds, opts, lambdas=grid)
        X_test = (dataset.X[~train] - means) / scales
        y_test = dataset.y[~train]
        for g in range(len(grid)):
            deviance[g] += _heldout_deviance(dataset.family, path.intercepts[g],
                                             path.coefs[g], X_test, y_test)
    best = int(np.argmin(deviance / folds))
    return np.flatnonzero(np.abs(full_path.coefs[best]) >= opts.zero_clip)


def compare_methods(configs) -> list:
    """Run several configs and return plot-ready per-covariate rate rows."""
    configs = list(configs)
    if not configs:
        raise ValueError("no configs given")
    p = configs[0].p
    if any(c.p != p for c in configs):
        raise ValueError("all configs must share the same p")
    rows = []
    for config in configs:
        report = run_experiment(config)
        rows.extend(report.csv_rows())
    return rows
