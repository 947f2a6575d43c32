"""Placement optimization for time-multiplexed rectangular modules on
reconfigurable cell arrays, with single-cell fault-tolerance analysis."""

from .annealer import (
    ALL_MOVE_KINDS,
    AnnealParams,
    CostWeights,
    Move,
    NoFeasiblePlacementError,
    anneal,
    cost,
    initial_placement,
    metropolis_accept,
    propose,
    window_span,
)
from .coverage import (
    CoverageReport,
    covered_cell_count,
    coverage_report,
    is_covered,
    relocation_for,
)
from .pipeline import (
    StageResult,
    beta_sweep,
    greedy_baseline,
    optimize_area,
    optimize_two_stage,
)
from .placement import (
    OccupancyMatrix,
    PlacedModule,
    Placement,
    area_mm2,
    array_area_cells,
    array_dims,
    bounding_box,
    is_feasible,
    normalized,
    occupancy_for,
    overlap_penalty,
    time_overlap,
)
from .problem import (
    GridSpec,
    ModuleSpec,
    ProblemFormatError,
    ProblemInstance,
    ValidationError,
    load_problem,
    pcr_fixture,
    save_problem,
)
from .rects import (
    MaximalEmptyRect,
    Staircase,
    can_accommodate,
    maximal_empty_rects,
    staircase_at,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_MOVE_KINDS",
    "AnnealParams",
    "CostWeights",
    "CoverageReport",
    "GridSpec",
    "MaximalEmptyRect",
    "ModuleSpec",
    "Move",
    "NoFeasiblePlacementError",
    "OccupancyMatrix",
    "PlacedModule",
    "Placement",
    "ProblemFormatError",
    "ProblemInstance",
    "StageResult",
    "Staircase",
    "ValidationError",
    "anneal",
    "area_mm2",
    "array_area_cells",
    "array_dims",
    "beta_sweep",
    "bounding_box",
    "can_accommodate",
    "cost",
    "coverage_report",
    "covered_cell_count",
    "greedy_baseline",
    "initial_placement",
    "is_covered",
    "is_feasible",
    "load_problem",
    "maximal_empty_rects",
    "metropolis_accept",
    "normalized",
    "occupancy_for",
    "optimize_area",
    "optimize_two_stage",
    "overlap_penalty",
    "pcr_fixture",
    "propose",
    "relocation_for",
    "save_problem",
    "staircase_at",
    "time_overlap",
    "window_span",
]
