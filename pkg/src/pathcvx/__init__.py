"""Path-norm regularized two-layer ReLU networks trained to global optimality.

The training problem is reformulated as a finite convex program over the
activation patterns of the data, solved by operator splitting, and mapped
back to an explicit network.  Companion modules provide the infinite-width
NTK kernel-ridge baseline, Monte-Carlo capacity diagnostics, and an
experiment harness for rate sweeps.
"""

from ._backend import BACKEND
from .data import Dataset
from .arrangement import (
    ActivationPattern,
    PatternSet,
    enumerate_patterns,
    exact_region_count,
    pattern_bound,
    witness,
)
from .solver import (
    BlockSolution,
    ConvexProgram,
    SolverConfig,
    SolverDiagnostics,
    assemble,
    feasibility_violation,
    linearized_predictions,
    objective,
    solve,
    solve_oracle,
)
from .network import (
    PathNormReport,
    TwoLayerNet,
    forward,
    mse,
    path_norm,
    reconstruct,
    truncate,
)

__all__ = [
    "BACKEND",
    "Dataset",
    "ActivationPattern",
    "PatternSet",
    "enumerate_patterns",
    "exact_region_count",
    "pattern_bound",
    "witness",
    "BlockSolution",
    "ConvexProgram",
    "SolverConfig",
    "SolverDiagnostics",
    "assemble",
    "feasibility_violation",
    "linearized_predictions",
    "objective",
    "solve",
    "solve_oracle",
    "PathNormReport",
    "TwoLayerNet",
    "forward",
    "mse",
    "path_norm",
    "reconstruct",
    "truncate",
]

__version__ = "0.1.0"
