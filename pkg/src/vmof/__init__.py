"""Multiobjective optimisation by sampled and fine-tuned evolution directions."""

from vmof.benchmarks import (
    ReferenceFront,
    hv_reference_point,
    hypervolume,
    igd,
    load_external_problem,
    make_sp1,
    make_sp2,
    register_problem,
    sample_reference_front,
)
from vmof.core import Direction, EvalBudget, Population, Problem, Solution
from vmof.dominance import crowding_distance, dominates, environmental_select, fast_nondominated_sort
from vmof.framework import VmofConfig, VmofResult, vmof_run
from vmof.kernels import BACKEND

__all__ = [
    "BACKEND",
    "Direction",
    "EvalBudget",
    "Population",
    "Problem",
    "ReferenceFront",
    "Solution",
    "VmofConfig",
    "VmofResult",
    "crowding_distance",
    "dominates",
    "environmental_select",
    "fast_nondominated_sort",
    "hv_reference_point",
    "hypervolume",
    "igd",
    "load_external_problem",
    "make_sp1",
    "make_sp2",
    "register_problem",
    "sample_reference_front",
    "vmof_run",
]

__version__ = "0.1.0"
