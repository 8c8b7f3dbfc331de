"""torlib: exact analysis of commuting toral automorphism actions.

Decides whether a Z^p-action by automorphisms of Z^q is the linear part
of a free (optionally minimal) affine action on the torus T^q, and
constructs explicit witness actions or obstruction certificates.
"""

from .action_model import (
    AffineZpAction,
    FreeAt,
    HasFixedPoint,
    ValidationError,
    ZpAction,
    linear_as_affine,
)
from .cohomology import (
    CoboundarySolution,
    principalize,
    solve_coboundary_integral,
    solve_coboundary_rational,
)
from .decomposition import (
    Decomposition,
    FixTrivialError,
    NotUnipotentError,
    UnipotentSplit,
    decompose,
    fitting_split,
    unipotent_split,
    verify_decomposition,
)
from .documents import load_action_document, save_action_document
from .liberation import (
    CommutatorObstruction,
    FixTrivial,
    FreenessCertificate,
    Liberated,
    LiberationResult,
    NotLiberated,
    Unknown,
    detect_obstruction,
    liberate,
    liberate_lowdim,
    liberate_rank,
    lift_free_action,
)
from .minimality import classify_minimal_T3, irrationality_check, is_minimal
from .numeric_oracle import finite_orbit_search, instantiate, orbit_min_return
from .symbolic_reals import SymReal, SymbolPool

__version__ = "0.1.0"

__all__ = [
    "AffineZpAction", "CoboundarySolution", "CommutatorObstruction",
    "Decomposition", "FixTrivial", "FixTrivialError", "FreeAt",
    "FreenessCertificate", "HasFixedPoint", "Liberated", "LiberationResult",
    "NotLiberated", "NotUnipotentError", "SymReal", "SymbolPool",
    "UnipotentSplit", "Unknown", "ValidationError", "ZpAction",
    "classify_minimal_T3", "decompose", "detect_obstruction",
    "finite_orbit_search", "fitting_split", "instantiate",
    "irrationality_check", "is_minimal", "liberate", "liberate_lowdim",
    "liberate_rank", "lift_free_action", "linear_as_affine",
    "load_action_document", "orbit_min_return", "principalize",
    "save_action_document", "solve_coboundary_integral",
    "solve_coboundary_rational", "unipotent_split", "verify_decomposition",
]
