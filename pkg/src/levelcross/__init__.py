"""Parametric symmetric matrices, reducibility, and level-crossing analysis.

The main entry points are re-exported here; see the submodules for details.
"""

from .adjacency import (
    AccumulatedMatrix,
    PatternMatrix,
    accumulate,
    assemble_blocks,
    components,
    is_reducible,
    pattern_of,
    permute_to_blocks,
    to_dot,
)
from .errors import ConvergenceError, ModelError
from .flow import (
    DEFAULT_LADDER,
    CrossingCandidate,
    CrossingReport,
    SpectralFlow,
    SweepGrid,
    classify,
    classify_all,
    detect_candidates,
    second_order_shifts,
    sweep,
)
from .parametric import (
    NumericMatrix,
    ParametricMatrix,
    ParamTerm,
    build_model_h,
    build_model_h0,
    build_model_hprime,
    evaluate,
    load_model,
    parse_model,
    save_model,
    serialize_model,
)
from .precision import EigenSystem, eig_sym, gap_at

__version__ = "0.1.0"

__all__ = [
    "AccumulatedMatrix",
    "ConvergenceError",
    "CrossingCandidate",
    "CrossingReport",
    "DEFAULT_LADDER",
    "EigenSystem",
    "ModelError",
    "NumericMatrix",
    "ParamTerm",
    "ParametricMatrix",
    "PatternMatrix",
    "SpectralFlow",
    "SweepGrid",
    "accumulate",
    "assemble_blocks",
    "build_model_h",
    "build_model_h0",
    "build_model_hprime",
    "classify",
    "classify_all",
    "components",
    "detect_candidates",
    "eig_sym",
    "evaluate",
    "gap_at",
    "is_reducible",
    "load_model",
    "parse_model",
    "pattern_of",
    "permute_to_blocks",
    "save_model",
    "second_order_shifts",
    "serialize_model",
    "sweep",
    "to_dot",
]
