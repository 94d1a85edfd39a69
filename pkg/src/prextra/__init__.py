"""Decentralized composite optimization over the Stiefel manifold.

Library + CLI implementing a proximal Riemannian EXTRA-type method with a
single communication round per iteration, its Euclidean reference method in
two equivalent forms, a diminishing-stepsize projected subgradient baseline,
synthetic spectral test problems, and a reproducible experiment harness.
"""

from .algorithms import Drsm, NodeState, PgExtraCoupled, PgExtraDecoupled, PrExtra, StepInfo
from .config import RunConfig
from .errors import (ConfigError, DegenerateSampleError, IndivisibleRowsError,
                     InsufficientDataError, MismatchedInstancesError,
                     NoConvergenceError, RankDeficientError, SimulationError,
                     ZeroDirectionError)
from .metrics import (TrajectoryRecord, consensus_error, consensus_potential,
                      eps_stationarity, euclidean_kkt_violation,
                      kkt_violation, kkt_violation_detailed, manifold_mean,
                      rate_slope, riemannian_grad_norm)
from .network import (Graph, MixingMatrix, generate_er_graph, load_mixing,
                      metropolis_weights, save_mixing, spectral_gap)
from .problems import (ProblemInstance, QuadraticComposite, SpectralRecipe,
                       load_matrix, load_matrix_csv, partition, save_matrix,
                       synthesize)
from .regularizers import Regularizer, SubdifferentialBox
from .runner import RunResult, ValidationReport, compare, run, validate, write_trajectory_csv
from .stiefel import Stiefel, sym
from .tangent_prox import (SubproblemResult, dual_residual, solve_subproblem,
                           subgradient_reference)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateSampleError", "Drsm", "Graph",
    "IndivisibleRowsError", "InsufficientDataError",
    "MismatchedInstancesError", "MixingMatrix", "NoConvergenceError",
    "NodeState", "PgExtraCoupled", "PgExtraDecoupled", "PrExtra",
    "ProblemInstance", "QuadraticComposite", "RankDeficientError",
    "Regularizer", "RunConfig", "RunResult", "SimulationError",
    "SpectralRecipe", "StepInfo", "Stiefel", "SubdifferentialBox",
    "SubproblemResult", "TrajectoryRecord", "ValidationReport",
    "ZeroDirectionError", "compare", "consensus_error",
    "consensus_potential", "dual_residual", "eps_stationarity",
    "euclidean_kkt_violation", "generate_er_graph", "kkt_violation",
    "kkt_violation_detailed", "load_matrix", "load_matrix_csv",
    "load_mixing", "manifold_mean", "metropolis_weights", "partition",
    "rate_slope", "riemannian_grad_norm", "run", "save_matrix",
    "save_mixing", "solve_subproblem", "spectral_gap", "subgradient_reference",
    "sym", "synthesize", "validate", "write_trajectory_csv",
]
