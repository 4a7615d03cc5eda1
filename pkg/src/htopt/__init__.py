"""High-order tuner solvers for constrained optimization."""
from .completion import (AffineCompletion, CompletionError, NewtonCompletion,
                         build_affine_completion, complete, completion_for,
                         completion_jacobian)
from .expression import ParseFailure, evaluate, parse, to_string
from .geometry import Projector, contains, project
from .loss import (PenaltyWeights, ReducedLoss, estimate_lipschitz, full_loss,
                   hessian_max_eigenvalue, normalizing_signal, reduced_gradient,
                   reduced_loss, smoothness_bound, softplus)
from .problem import (AffineEquality, CallableField, CallableFunction,
                      ConvexRegionSpec, ExpressionField, ExpressionFunction,
                      ProblemSpec, QuadraticObjective, VariablePartition,
                      residual_equality, residual_inequality, validate)
from .trace import IterationTrace, TraceRow, emit_trace, read_trace
from .tuner import (Gains, GainError, StopRule, TunerState, correction_delta,
                    ht_step, rho, run_alg1, run_alg2, run_alg3, run_alg4,
                    run_baseline, validate_gains)

__all__ = [
    "AffineCompletion", "CompletionError", "NewtonCompletion",
    "build_affine_completion", "complete", "completion_for", "completion_jacobian",
    "ParseFailure", "evaluate", "parse", "to_string", "Projector", "contains", "project",
    "PenaltyWeights", "ReducedLoss", "estimate_lipschitz", "full_loss",
    "hessian_max_eigenvalue", "normalizing_signal", "reduced_gradient", "reduced_loss",
    "smoothness_bound", "softplus", "AffineEquality", "CallableField", "CallableFunction",
    "ConvexRegionSpec", "ExpressionField", "ExpressionFunction", "ProblemSpec",
    "QuadraticObjective", "VariablePartition", "residual_equality", "residual_inequality",
    "validate", "IterationTrace", "TraceRow", "emit_trace", "read_trace", "Gains",
    "GainError", "StopRule", "TunerState", "correction_delta", "ht_step", "rho",
    "run_alg1", "run_alg2", "run_alg3", "run_alg4", "run_baseline", "validate_gains",
]

__version__ = "0.1.0"
