"""Weighted least-squares polynomial approximation on irregular domains with
near-optimal sampling from a discrete Christoffel distribution.

Typical use::

    from christoffel_ls import (annulus, hyperbolic_cross, TensorLegendreBasis,
                                generate_grid, assemble_and_factor, method1_distribution,
                                draw_method1, assemble_method1, solve, evaluate_on_grid)
"""
from .diagnostics import (
    DiagnosticsReport,
    EvalGrid,
    bound_K,
    bound_K_grid,
    bound_k_method2,
    bound_M_maw1,
    bound_M_maw2,
    bound_M_method1,
    condition_number,
    constant_C,
    diagnose,
    error_off_grid,
    error_on_grid,
    estimate_D,
    make_eval_grid,
    nikolskii_lambda_rect,
    weighted_supnorm_gap,
)
from .discrete_measure import (
    KGrid,
    OrthoFactorization,
    assemble_and_factor,
    eval_phi,
    extend_factorization,
    factor_schedule,
    factor_with_policy,
    generate_grid,
    load_grid,
    save_grid,
)
from .domains import (
    Domain,
    annulus,
    builtin_domain,
    complement,
    cube,
    cylinder_complement,
    halfspace_cut_cube,
    intersect,
    minus,
    parse_domain,
    sample_uniform,
    union,
)
from .errors import (
    ChristoffelLSError,
    ConfigurationError,
    DataError,
    FullRankFailure,
    InvariantViolation,
    SamplingBudgetExceeded,
    SolveFailure,
)
from .experiments import ExperimentConfig, MRule, read_results, run_conditioning_sweep, run_sweep
from .functions import TargetFunction, builtin_function, check_pairing, in_space
from .legendre import TensorLegendreBasis, legendre_1d, legendre_table
from .multiindex import (
    MultiIndexSet,
    from_indices,
    hyperbolic_cross,
    index_set,
    is_lower_set,
    parse_index_set,
    tensor_product,
    total_degree,
)
from .rng import RngStream
from .sampling import (
    Method1Plan,
    Method2Plan,
    WeightFunction,
    column_distribution,
    draw_method1,
    method1_distribution,
    method2_advance,
    method2_mixture,
    mixture_check,
)
from .solver import (
    EvaluationCache,
    WlsFit,
    assemble_method1,
    assemble_method2,
    assemble_uniform,
    evaluate_at,
    evaluate_on_grid,
    fit,
    solve,
)

__version__ = "0.1.0"
