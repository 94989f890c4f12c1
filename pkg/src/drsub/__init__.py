"""Maximization of non-monotone DR-submodular functions over polytopes.

Offline Frank-Wolfe with harmonic step sizes, online stochastic gradient
ascent, the oracles they need (linear maximization and projection), instance
generators and an experiment harness.
"""

from .algorithms import (
    DELTA,
    FW_RATIO_FLOOR,
    Trajectory,
    frank_wolfe,
    grid_oracle,
    online_sga,
    projected_gradient_ascent,
)
from .core import join, meet
from .objectives import QuadraticObjective, RevenueObjective, SoftmaxObjective
from .oracles import lmo, project, project_simplex_iterative, project_simplex_sorted
from .polytope import Polytope

__version__ = "0.1.0"

__all__ = [
    "DELTA",
    "FW_RATIO_FLOOR",
    "Polytope",
    "QuadraticObjective",
    "RevenueObjective",
    "SoftmaxObjective",
    "Trajectory",
    "frank_wolfe",
    "grid_oracle",
    "join",
    "lmo",
    "meet",
    "online_sga",
    "project",
    "project_simplex_iterative",
    "project_simplex_sorted",
    "projected_gradient_ascent",
]
