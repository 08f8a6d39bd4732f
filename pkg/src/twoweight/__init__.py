"""Two-weight dyadic square function and t-Haar multiplier toolkit.

Exact finite-depth computations on the dyadic tree of ``[0, 1)``: weight
characteristics, weighted Haar systems, the weighted square function, Haar
multipliers, operator norms, and checks of the explicit-constant inequalities
relating them.
"""

from .dyadic import (
    ROOT,
    DyadicError,
    DyadicIndex,
    DyadicTree,
    StepFunction,
    StepWeight,
    average,
    mass,
    refine,
    weighted_average,
)

__all__ = [
    "ROOT",
    "DyadicError",
    "DyadicIndex",
    "DyadicTree",
    "StepFunction",
    "StepWeight",
    "average",
    "mass",
    "refine",
    "weighted_average",
]

__version__ = "0.1.0"
