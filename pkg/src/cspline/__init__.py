"""
cspline - B-spline interpolation in Hilbert C*-modules.

Decides existence and uniqueness of spline interpolants for sesquilinear
forms on free Hilbert modules over finite-dimensional C*-algebras, computes
them, and estimates the pure-state coercivity constants behind the
solvability theorems.
"""

__version__ = "0.1.0"
__author__ = "cspline Team"

from .algebra import AlgebraElement, AlgebraSpec, PureState
from .core import SplineCore
from .forms import SesquilinearForm
from .hilbert_module import ModuleSpace, ModuleVector, Submodule
from .problem import parse_problem
from .spline import AnalyzeOptions, SplineProblem, SplineReport, analyze, solve

__all__ = [
    "AlgebraElement",
    "AnalyzeOptions",
    "AlgebraSpec",
    "ModuleSpace",
    "ModuleVector",
    "PureState",
    "SesquilinearForm",
    "SplineCore",
    "SplineProblem",
    "SplineReport",
    "Submodule",
    "analyze",
    "parse_problem",
    "solve",
]
