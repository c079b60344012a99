"""Structure-preserving mappings between grounded STRIPS instances."""

from .model import (
    Kind,
    Morphism,
    Operator,
    StripsInstance,
    apply_operator,
    translate_plan,
    validate_plan,
    verify_morphism,
)
from .search import Found, NoMorphism, Timeout, brute_force, find_morphism
from .sat import SolverConfig

__all__ = [
    "Kind", "Morphism", "Operator", "StripsInstance", "apply_operator", "translate_plan",
    "validate_plan", "verify_morphism", "Found", "NoMorphism", "Timeout", "brute_force",
    "find_morphism", "SolverConfig",
]
__version__ = "0.1.0"
