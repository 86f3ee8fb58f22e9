"""Imaginary-time phase-space trajectory engine for interacting spin-1/2
systems: stochastic trajectories with exponential reweighting, plus exact
reference solvers.
"""

__version__ = "0.1.0"

from .graphs import RegularGraph, generate_random_regular, parse_graph, serialize_graph
from .models import IsingGraphModel, LatticeSpec, TFIMModel
from .sde import Schedule, WeightedSnapshot, evolve, step
from .runner import run_observables

__all__ = [
    "RegularGraph",
    "generate_random_regular",
    "parse_graph",
    "serialize_graph",
    "IsingGraphModel",
    "LatticeSpec",
    "TFIMModel",
    "Schedule",
    "WeightedSnapshot",
    "evolve",
    "step",
    "run_observables",
    "__version__",
]
