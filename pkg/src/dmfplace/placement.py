"""Placements: module positions on the grid, time-sharing rules, and areas.

Cells are addressed 1-based with (1, 1) at the bottom-left corner; ``row``
grows upward and ``col`` grows rightward.  A placed module covers the cell
rectangle whose bottom-left cell is its (row, col).  Two modules may cover
the same cells only when their active time intervals are disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .problem import GridSpec, ModuleSpec, ProblemInstance, ValidationError


@dataclass(frozen=True)
class PlacedModule:
    """Position of one module: bottom-left cell plus orientation."""

    module_id: str
    row: int
    col: int
    rotated: bool = False


@dataclass(frozen=True)
class Placement:
    """A full assignment of positions, one per module of the instance."""

    instance: ProblemInstance
    placed: tuple[PlacedModule, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "placed", tuple(self.placed))
        ids = {m.id for m in self.instance.modules}
        seen: set[str] = set()
        for pm in self.placed:
            if pm.module_id not in ids:
                raise ValidationError(f"placement names unknown module {pm.module_id!r}")
            if pm.module_id in seen:
                raise ValidationError(f"module {pm.module_id!r} placed more than once")
            seen.add(pm.module_id)
            spec = self.instance.module_by_id(pm.module_id)
            if pm.rotated and not spec.rotatable:
                raise ValidationError(f"module {pm.module_id!r} is not rotatable")
            rows, cols = footprint(spec, pm.rotated)
            if pm.row < 1 or pm.col < 1:
                raise ValidationError(
                    f"module {pm.module_id!r} at ({pm.row}, {pm.col}) lies outside the grid"
                )
            if pm.row + rows - 1 > self.instance.grid.rows_max or (
                pm.col + cols - 1 > self.instance.grid.cols_max
            ):
                raise ValidationError(
                    f"module {pm.module_id!r} at ({pm.row}, {pm.col}) exceeds grid bounds "
                    f"{self.instance.grid.rows_max}x{self.instance.grid.cols_max}"
                )
        if seen != ids:
            missing = sorted(ids - seen)
            raise ValidationError(f"placement missing module {missing[0]!r}")

    def placed_by_id(self, module_id: str) -> PlacedModule:
        for pm in self.placed:
            if pm.module_id == module_id:
                return pm
        raise KeyError(f"unknown module id {module_id!r}")


def footprint(spec: ModuleSpec, rotated: bool) -> tuple[int, int]:
    """(rows, cols) extent of the module in the given orientation."""
    if rotated:
        return spec.width_cells, spec.height_cells
    return spec.height_cells, spec.width_cells


def placed_box(pm: PlacedModule, spec: ModuleSpec) -> tuple[int, int, int, int]:
    """Inclusive cell rectangle (row_lo, row_hi, col_lo, col_hi) covered by pm."""
    rows, cols = footprint(spec, pm.rotated)
    return pm.row, pm.row + rows - 1, pm.col, pm.col + cols - 1


def time_overlap(a: ModuleSpec, b: ModuleSpec) -> bool:
    """True iff the half-open active intervals of a and b intersect."""
    return a.start_time_s < b.end_time_s and b.start_time_s < a.end_time_s


def concurrent_index_pairs(inst: ProblemInstance) -> tuple[tuple[int, int], ...]:
    """Index pairs (i, j), i < j, of modules that are active at the same time."""
    pairs = []
    for i in range(len(inst.modules)):
        for j in range(i + 1, len(inst.modules)):
            if time_overlap(inst.modules[i], inst.modules[j]):
                pairs.append((i, j))
    return tuple(pairs)


def _box_intersection_cells(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> int:
    rows = min(a[1], b[1]) - max(a[0], b[0]) + 1
    cols = min(a[3], b[3]) - max(a[2], b[2]) + 1
    if rows <= 0 or cols <= 0:
        return 0
    return rows * cols


def overlap_penalty(p: Placement) -> int:
    """Total cell overlap between concurrent module pairs; 0 means feasible.

    Counted pairwise: a cell shared by three mutually concurrent modules
    contributes three, so the penalty strictly decreases as conflicts resolve.
    """
    boxes = [placed_box(pm, p.instance.module_by_id(pm.module_id)) for pm in p.placed]
    specs = [p.instance.module_by_id(pm.module_id) for pm in p.placed]
    total = 0
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if time_overlap(specs[i], specs[j]):
                total += _box_intersection_cells(boxes[i], boxes[j])
    return total


def is_feasible(p: Placement) -> bool:
    return overlap_penalty(p) == 0


def bounding_box(p: Placement) -> tuple[int, int, int, int]:
    """Smallest cell rectangle containing every placed footprint (inclusive)."""
    boxes = [placed_box(pm, p.instance.module_by_id(pm.module_id)) for pm in p.placed]
    return (
        min(b[0] for b in boxes),
        max(b[1] for b in boxes),
        min(b[2] for b in boxes),
        max(b[3] for b in boxes),
    )


def array_dims(p: Placement) -> tuple[int, int]:
    """(rows_used, cols_used) of the bounding array."""
    r_lo, r_hi, c_lo, c_hi = bounding_box(p)
    return r_hi - r_lo + 1, c_hi - c_lo + 1


def array_area_cells(p: Placement) -> int:
    """Cell count of the bounding array; the dead-space measure being minimized."""
    rows, cols = array_dims(p)
    return rows * cols


def area_mm2(cell_count: int, pitch_mm: float) -> float:
    """Physical area of cell_count cells at the given pitch."""
    return cell_count * pitch_mm * pitch_mm


def normalized(p: Placement) -> Placement:
    """Shift the layout so its bounding array starts at (1, 1) and shrink the
    grid bounds to exactly that array.  Relative positions are preserved."""
    r_lo, r_hi, c_lo, c_hi = bounding_box(p)
    grid = GridSpec(
        rows_max=r_hi - r_lo + 1,
        cols_max=c_hi - c_lo + 1,
        pitch_mm=p.instance.grid.pitch_mm,
    )
    inst = ProblemInstance(grid=grid, modules=p.instance.modules)
    moved = tuple(
        replace(pm, row=pm.row - r_lo + 1, col=pm.col - c_lo + 1) for pm in p.placed
    )
    return Placement(instance=inst, placed=moved)


@dataclass
class OccupancyMatrix:
    """0/1 grid of blocked cells; ``cells[r-1, c-1]`` is cell (r, c)."""

    rows: int
    cols: int
    cells: np.ndarray

    def at(self, row: int, col: int) -> int:
        if not (1 <= row <= self.rows and 1 <= col <= self.cols):
            raise ValueError(f"cell ({row}, {col}) outside {self.rows}x{self.cols} matrix")
        return int(self.cells[row - 1, col - 1])


def occupancy_for(
    p: Placement,
    module_id: str,
    faulty_cell: Optional[tuple[int, int]] = None,
) -> OccupancyMatrix:
    """Cells unavailable to module_id were it to be re-placed: the footprints
    of every module concurrent with it, plus the faulty cell if given.

    The target module's own footprint is not blocked; non-concurrent modules
    do not block anything because time-sharing allows reuse of their cells.
    The matrix spans the instance's full grid bounds.
    """
    target = p.instance.module_by_id(module_id)
    grid = p.instance.grid
    cells = np.zeros((grid.rows_max, grid.cols_max), dtype=np.uint8)
    for pm in p.placed:
        if pm.module_id == module_id:
            continue
        spec = p.instance.module_by_id(pm.module_id)
        if not time_overlap(target, spec):
            continue
        r_lo, r_hi, c_lo, c_hi = placed_box(pm, spec)
        cells[r_lo - 1 : r_hi, c_lo - 1 : c_hi] = 1
    if faulty_cell is not None:
        fr, fc = faulty_cell
        if not (1 <= fr <= grid.rows_max and 1 <= fc <= grid.cols_max):
            raise ValueError(f"faulty cell ({fr}, {fc}) outside grid bounds")
        cells[fr - 1, fc - 1] = 1
    return OccupancyMatrix(rows=grid.rows_max, cols=grid.cols_max, cells=cells)
