"""Rank-phase QAOA workbench for 3-SAT/MaxSAT.

Layers: cnf (instances and scoring), qsim (exact product-state circuit
simulation), shaping (quantile-shaped objective), evolve (GA angle search),
oracle (exact enumeration references), harness/cli (runs and reporting).
"""

__version__ = "0.1.0"

from .cnf import (
    Clause,
    CnfFormula,
    CostParams,
    DimacsError,
    Literal,
    default_params,
    divergence,
    eval_clause,
    g_cost,
    h_count,
    parse_dimacs,
    parse_dimacs_file,
    parse_json_instance,
    satisfied_weight,
    to_dimacs,
)
from .qsim import (
    AngleVector,
    QuantumState,
    ShotSet,
    prepare_state,
    probability,
    rank_of,
    sample,
)
from .shaping import (
    CostHistogram,
    QuantileSet,
    cost_histogram,
    h_histogram,
    quantile,
    shaped_cost,
)
from .evolve import GaConfig, RunHistory, evaluate_fitness, optimize
from .oracle import (
    DistributionTable,
    GuardError,
    enumerate_h,
    exact_h_distribution,
    exact_shaped_cost,
    list_solutions,
)

__all__ = [
    "__version__",
    "Literal", "Clause", "CnfFormula", "CostParams", "DimacsError",
    "parse_dimacs", "parse_dimacs_file", "parse_json_instance", "to_dimacs",
    "eval_clause", "h_count", "divergence", "g_cost", "satisfied_weight",
    "default_params",
    "AngleVector", "QuantumState", "ShotSet",
    "rank_of", "prepare_state", "probability", "sample",
    "CostHistogram", "QuantileSet",
    "cost_histogram", "h_histogram", "quantile", "shaped_cost",
    "GaConfig", "RunHistory", "evaluate_fitness", "optimize",
    "DistributionTable", "GuardError",
    "enumerate_h", "list_solutions", "exact_h_distribution", "exact_shaped_cost",
]
