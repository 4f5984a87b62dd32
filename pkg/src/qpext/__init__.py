"""Randomness extractors and condensers analysed through operator-space norms."""

from .errors import (ConvergenceError, ExactModeError, QpextError, SizeLimitError, SolverError,
                     ValidationError)
from .model import (AnalysisParams, BipartiteGraph, CqState, Distribution, FunctionFamily,
                    constant_family, from_graph, identity_family, load_family, random_family,
                    save_family, strong_family, to_graph)

__version__ = "0.1.0"

__all__ = [
    "QpextError", "ValidationError", "SizeLimitError", "ExactModeError", "SolverError", "ConvergenceError",
    "FunctionFamily", "Distribution", "CqState", "BipartiteGraph", "AnalysisParams",
    "identity_family", "constant_family", "strong_family", "random_family",
    "to_graph", "from_graph", "load_family", "save_family",
]
