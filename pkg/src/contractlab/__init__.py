"""Exact, desk-scale experiments on growth, genericity and contraction in
finitely generated groups acting on their Cayley graphs."""

from .errors import (BudgetExceeded, InvariantViolation, LabError, MalformedDecomposition,
                     PreconditionError, SpecError)
from .groups import (RAAG, CyclicFactor, DirectProduct, FreeGroup, FreeProduct, build_model, element, fmt,
                     normalize, spec_from_dict)

__all__ = [
    "BudgetExceeded", "InvariantViolation", "LabError", "MalformedDecomposition", "PreconditionError",
    "SpecError", "RAAG", "CyclicFactor", "DirectProduct", "FreeGroup", "FreeProduct", "build_model",
    "element", "fmt", "normalize", "spec_from_dict",
]
__version__ = "0.1.0"
