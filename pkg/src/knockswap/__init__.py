"""Variable selection for L1-penalised regressions via permutation knockoffs."""

from .changepoint import (
    EmptySelection,
    SortedPositiveW,
    ThresholdResult,
    cusum_breakpoint,
    dp_breakpoint,
    gaps_threshold,
    manual_threshold,
    w_threshold,
)
from .data import (
    ConstantColumnError,
    Dataset,
    InputFormatError,
    LassoPath,
    ModelFamily,
    lambda_grid,
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
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    compare_methods,
    cv_select,
    run_experiment,
)
from .knockoffs import (
    KnockoffRun,
    knockoff_statistics,
    make_knockoffs,
    select,
    signed_statistic,
)
from .solvers import (
    ConvergenceError,
    DegenerateLambdaMaxError,
    EntryStatistics,
    SolverError,
    SolverOptions,
    entry_lambdas,
    fit_path,
    lambda_max,
)

__version__ = "0.1.0"
