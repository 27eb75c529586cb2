"""Splitting and composition methods for separable flows.

Three layers: coefficient specs and their conversions (``methods``),
realized integrators on split systems (``flows``, ``processing``), and
the analysis tools on top of them (order certification, linear
stability, the benchmark harness).  Importing the package registers the
full problem catalog, including the time-dependent ones.
"""

from __future__ import annotations

__version__ = "0.1.0"

from . import errors
from .flows import (
    ChainIntegrator,
    FlowMap,
    Integrator,
    Part,
    SplitStepIntegrator,
    SplitSystem,
    Trajectory,
    adjoint,
    as_state,
    build_method,
    compose_ab,
    compose_adjoint_chain,
    compose_modified_potential,
    compose_symmetric_of_symmetric,
    integrate,
    lie_trotter,
    strang,
)
from .methods import (
    CompositionSpec,
    ModifiedPotentialSpec,
    ab_to_alpha,
    alpha_to_ab,
    beta_to_alpha,
    catalog,
    load_spec,
    save_spec,
)
from .order import (
    FitResult,
    OrderReport,
    certify,
    count_conditions,
    empirical_order,
    eval_u,
    lyndon_multiindices,
    reference_state,
)
from .linear import (
    StabilityMatrix,
    modified_frequency,
    stability_functions,
    stability_matrix,
    stability_threshold,
)
from .processing import (
    ProcessedIntegrator,
    build_processor,
    effective_order_conditions,
    processed,
    processor_conditions,
)
from .problems import (
    PROBLEMS,
    HamiltonianProblem,
    kepler_initial_condition,
    make_problem,
)
from .nonauto import AugmentedSystem, augment, driven_oscillator
from .bench import (
    EfficiencyPoint,
    ExperimentConfig,
    baseline_rk,
    efficiency_curve,
    preset_names,
    run_experiment,
    run_preset,
)

__all__ = [
    "__version__",
    "errors",
    # flows
    "ChainIntegrator", "FlowMap", "Integrator", "Part",
    "SplitStepIntegrator", "SplitSystem", "Trajectory", "adjoint",
    "as_state", "build_method", "compose_ab", "compose_adjoint_chain",
    "compose_modified_potential", "compose_symmetric_of_symmetric",
    "integrate", "lie_trotter", "strang",
    # methods
    "CompositionSpec", "ModifiedPotentialSpec", "ab_to_alpha",
    "alpha_to_ab", "beta_to_alpha", "catalog", "load_spec", "save_spec",
    # order
    "FitResult", "OrderReport", "certify", "count_conditions",
    "empirical_order", "eval_u", "lyndon_multiindices", "reference_state",
    # linear
    "StabilityMatrix", "modified_frequency", "stability_functions",
    "stability_matrix", "stability_threshold",
    # processing
    "ProcessedIntegrator", "build_processor", "effective_order_conditions",
    "processed", "processor_conditions",
    # problems
    "PROBLEMS", "HamiltonianProblem", "kepler_initial_condition",
    "make_problem",
    "AugmentedSystem", "augment", "driven_oscillator",
    # bench
    "EfficiencyPoint", "ExperimentConfig", "baseline_rk",
    "efficiency_curve", "preset_names", "run_experiment", "run_preset",
]
