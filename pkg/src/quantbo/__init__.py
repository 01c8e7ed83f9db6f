"""Constrained Bayesian optimization of composite (grey-box) functions.

The central idea: model the expensive black box h with independent
Gaussian processes, push posterior samples through the known outer
functions g_i, and drive the search with differentiable quantile bounds
of the resulting non-Gaussian predictions.
"""

from quantbo.acquisition import (
    CompositeOuter,
    FuncOuter,
    LinearOuter,
    QuantileConfig,
    lower_quantile,
    upper_quantile,
)
from quantbo.bench import (
    ProfileTable,
    RegretTrace,
    build_profiles,
    penalized_value,
    perf_test,
    regret_trace,
)
from quantbo.gp import Dataset, GpSurrogate, KernelHyper, NumericalError
from quantbo.loop import (
    SOLVERS,
    CuqbConfig,
    IterationRecord,
    RunRecord,
    check_infeasibility,
    cuqb_step,
    find_rho,
    initial_design,
    recommend,
    run,
)
from quantbo.optimizer import MultiStartConfig, maximize_penalized
from quantbo.problems import (
    CompositeProblem,
    register,
    registry_get,
    registry_names,
)
from quantbo.softsort import empirical_quantile, hard_sort, soft_sort

__all__ = [
    "CompositeOuter",
    "CompositeProblem",
    "CuqbConfig",
    "Dataset",
    "FuncOuter",
    "GpSurrogate",
    "IterationRecord",
    "KernelHyper",
    "LinearOuter",
    "MultiStartConfig",
    "NumericalError",
    "ProfileTable",
    "QuantileConfig",
    "RegretTrace",
    "RunRecord",
    "SOLVERS",
    "build_profiles",
    "check_infeasibility",
    "cuqb_step",
    "empirical_quantile",
    "find_rho",
    "hard_sort",
    "initial_design",
    "lower_quantile",
    "maximize_penalized",
    "penalized_value",
    "perf_test",
    "recommend",
    "register",
    "registry_get",
    "registry_names",
    "regret_trace",
    "run",
    "soft_sort",
    "upper_quantile",
]
