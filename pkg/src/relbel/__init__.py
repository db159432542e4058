"""Relative belief inference and prior-based Bayesian decision theory.

Evidence about a quantity of interest is measured by how its posterior
mass compares to its prior mass; estimates, plausible and credible
regions, and hypothesis assessments all follow from that one table. The
decision half of the package builds the matching prior-based losses,
computes exact Bayes rules on finite models, and verifies numerically
that the evidence-based inferences arise as (limits of) those rules.
"""

from . import classify, decision, evidence, grids, limits, model, regress
from .errors import NumericalGuardError, RelBelError, ValidationError

__all__ = [
    "classify",
    "decision",
    "evidence",
    "grids",
    "limits",
    "model",
    "regress",
    "NumericalGuardError",
    "RelBelError",
    "ValidationError",
]

__version__ = "0.1.0"
