"""Single-cell fault coverage of a placement.

A cell is *covered* when a single fault there leaves the layout repairable:
every module whose footprint contains the cell can be relocated, within the
placement's grid bounds, to a site that avoids the faulty cell and the
footprints of all modules concurrent with it.  Unused cells are covered by
definition.  The coverage index is the fraction of covered cells in the
normalized bounding array.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .placement import (
    Placement,
    PlacedModule,
    concurrent_index_pairs,
    footprint,
    is_feasible,
    normalized,
    occupancy_for,
    placed_box,
)
from .rects import can_accommodate, maximal_empty_rects


@dataclass(frozen=True)
class CoverageReport:
    """Per-cell coverage over a grid; ``covered[r-1][c-1]`` is cell (r, c)."""

    grid_rows: int
    grid_cols: int
    covered: tuple[tuple[bool, ...], ...]
    k: int
    fti: float

    @classmethod
    def from_grid(cls, covered: Sequence[Sequence[bool]]) -> "CoverageReport":
        grid = tuple(tuple(bool(v) for v in row) for row in covered)
        rows = len(grid)
        cols = len(grid[0]) if grid else 0
        if any(len(r) != cols for r in grid):
            raise ValueError("coverage grid rows must all have equal length")
        k = sum(v for row in grid for v in row)
        cells = rows * cols
        # a grid with no cells is vacuously fully covered
        fti = k / cells if cells else 1.0
        return cls(grid_rows=rows, grid_cols=cols, covered=grid, k=k, fti=fti)


def _require_feasible(p: Placement) -> None:
    if not is_feasible(p):
        raise ValueError("infeasible placement: concurrent modules share cells")


def _containing_modules(p: Placement, cell: tuple[int, int]) -> list[PlacedModule]:
    row, col = cell
    out = []
    for pm in p.placed:
        r_lo, r_hi, c_lo, c_hi = placed_box(pm, p.instance.module_by_id(pm.module_id))
        if r_lo <= row <= r_hi and c_lo <= col <= c_hi:
            out.append(pm)
    return out


def _check_cell(p: Placement, cell: tuple[int, int]) -> None:
    row, col = cell
    if not (1 <= row <= p.instance.grid.rows_max and 1 <= col <= p.instance.grid.cols_max):
        raise ValueError(
            f"cell ({row}, {col}) outside grid bounds "
            f"{p.instance.grid.rows_max}x{p.instance.grid.cols_max}"
        )


def _is_covered_unchecked(p: Placement, cell: tuple[int, int]) -> bool:
    for pm in _containing_modules(p, cell):
        spec = p.instance.module_by_id(pm.module_id)
        occ = occupancy_for(p, pm.module_id, faulty_cell=cell)
        rects = maximal_empty_rects(occ)
        if not can_accommodate(rects, spec.width_cells, spec.height_cells, spec.rotatable):
            return False
    return True


def is_covered(p: Placement, cell: tuple[int, int]) -> bool:
    """True iff a single fault at cell is survivable.

    Evaluated over the placement's own grid bounds: relocation sites may use
    any in-bounds cells, not just the current bounding array.
    """
    _require_feasible(p)
    _check_cell(p, cell)
    return _is_covered_unchecked(p, cell)


def brute_force_is_covered(p: Placement, cell: tuple[int, int], max_cells: int = 400) -> bool:
    """Reference coverage test: try every (row, col, orientation) for each
    module containing the cell, directly on the blocked-cell matrix."""
    grid = p.instance.grid
    if grid.rows_max * grid.cols_max > max_cells:
        raise ValueError(
            f"grid has {grid.rows_max * grid.cols_max} cells, above the {max_cells}-cell bound"
        )
    _require_feasible(p)
    _check_cell(p, cell)
    for pm in _containing_modules(p, cell):
        spec = p.instance.module_by_id(pm.module_id)
        blocked = occupancy_for(p, pm.module_id, faulty_cell=cell).cells
        orients = [False] + ([True] if spec.rotatable else [])
        ok = False
        for rotated in orients:
            rows, cols = footprint(spec, rotated)
            for r0 in range(grid.rows_max - rows + 1):
                for c0 in range(grid.cols_max - cols + 1):
                    if not blocked[r0 : r0 + rows, c0 : c0 + cols].any():
                        ok = True
                        break
                if ok:
                    break
            if ok:
                break
        if not ok:
            return False
    return True


def coverage_report(p: Placement) -> CoverageReport:
    """Coverage of every cell of the normalized bounding array.

    The layout is normalized first, so both the relocation space and the
    denominator of the index are exactly the rows_used x cols_used array the
    placement occupies.
    """
    _require_feasible(p)
    norm = normalized(p)
    rows = norm.instance.grid.rows_max
    cols = norm.instance.grid.cols_max
    grid = tuple(
        tuple(_is_covered_unchecked(norm, (r, c)) for c in range(1, cols + 1))
        for r in range(1, rows + 1)
    )
    return CoverageReport.from_grid(grid)


def relocation_for(
    p: Placement, module_id: str, faulty_cell: tuple[int, int]
) -> Optional[PlacedModule]:
    """A concrete repair for module_id after a fault inside its footprint.

    Searches the maximal empty rectangles of the module's blocked-cell matrix
    and, among those that fit the footprint, picks the rectangle with the
    lexicographically smallest (bottom, left) corner, placing the module at
    that corner; the stated orientation wins when both fit.  None when no
    rectangle accommodates the module.
    """
    _require_feasible(p)
    _check_cell(p, faulty_cell)
    pm = p.placed_by_id(module_id)
    spec = p.instance.module_by_id(module_id)
    r_lo, r_hi, c_lo, c_hi = placed_box(pm, spec)
    fr, fc = faulty_cell
    if not (r_lo <= fr <= r_hi and c_lo <= fc <= c_hi):
        raise ValueError(
            f"faulty cell ({fr}, {fc}) is not inside module {module_id!r}'s footprint"
        )
    occ = occupancy_for(p, module_id, faulty_cell=faulty_cell)
    fits = []
    for rect in maximal_empty_rects(occ):
        plain = rect.height >= spec.height_cells and rect.width >= spec.width_cells
        turned = spec.rotatable and (
            rect.height >= spec.width_cells and rect.width >= spec.height_cells
        )
        if plain or turned:
            fits.append((rect.bottom, rect.left, not plain))
    if not fits:
        return None
    bottom, left, rotated = min(fits)
    return PlacedModule(module_id=module_id, row=bottom, col=left, rotated=rotated)


def count_covered_boxes(
    rows: int,
    cols: int,
    boxes: Sequence[tuple[int, int, int, int]],
    concurrent: Sequence[Sequence[int]],
    dims: Sequence[tuple[int, int]],
    rotatable: Sequence[bool],
) -> int:
    """Covered-cell count on raw arrays; the annealer's hot path.

    ``boxes[i]`` is (row0, col0, rows, cols) of placed footprint i, 0-based;
    ``concurrent[i]`` lists the indices active at the same time as i;
    ``dims[i]`` is the unrotated (height, width) of module i.

    For each module the set of feasible relocation sites (window sums of
    zero over the concurrent-occupancy matrix, both orientations when
    allowed) is counted once, along with how many such sites contain each
    cell.  A fault at a cell inside the footprint is survivable iff some
    site avoids that cell, i.e. containment count < total sites.  This
    equals the per-cell empty-rectangle test: a site avoiding the blocked
    cells always lies inside some maximal empty rectangle and vice versa.
    """
    covered = np.ones((rows, cols), dtype=bool)
    idx_r = np.arange(1, rows + 1)
    idx_c = np.arange(1, cols + 1)
    for i, (r0, c0, hh, ww) in enumerate(boxes):
        occ = np.zeros((rows, cols), dtype=np.int64)
        for j in concurrent[i]:
            rj, cj, hj, wj = boxes[j]
            occ[rj : rj + hj, cj : cj + wj] = 1
        pref = np.zeros((rows + 1, cols + 1), dtype=np.int64)
        pref[1:, 1:] = occ.cumsum(axis=0).cumsum(axis=1)
        h0, w0 = dims[i]
        orients = [(h0, w0)]
        if rotatable[i] and h0 != w0:
            orients.append((w0, h0))
        nfit = 0
        cnt = np.zeros((rows, cols), dtype=np.int64)
        for fh, fw in orients:
            if fh > rows or fw > cols:
                continue
            win = pref[fh:, fw:] + pref[:-fh, :-fw] - pref[:-fh, fw:] - pref[fh:, :-fw]
            feas = win == 0
            sites = int(feas.sum())
            if sites == 0:
                continue
            nfit += sites
            full = np.zeros((rows, cols), dtype=np.int64)
            full[: feas.shape[0], : feas.shape[1]] = feas
            acc = np.zeros((rows + 1, cols + 1), dtype=np.int64)
            acc[1:, 1:] = full.cumsum(axis=0).cumsum(axis=1)
            # sites with bottom-left in [r-fh+1, r] x [c-fw+1, c] contain cell (r, c)
            lo_r = np.maximum(idx_r - fh, 0)
            lo_c = np.maximum(idx_c - fw, 0)
            cnt += (
                acc[idx_r[:, None], idx_c[None, :]]
                - acc[lo_r[:, None], idx_c[None, :]]
                - acc[idx_r[:, None], lo_c[None, :]]
                + acc[lo_r[:, None], lo_c[None, :]]
            )
        sl = (slice(r0, r0 + hh), slice(c0, c0 + ww))
        if nfit == 0:
            covered[sl] = False
        else:
            covered[sl] &= cnt[sl] < nfit
    return int(covered.sum())


def covered_cell_count(p: Placement) -> int:
    """``coverage_report(p).k`` computed by the vectorized site-counting
    kernel; used where the per-cell rectangle search would be too slow."""
    _require_feasible(p)
    norm = normalized(p)
    rows = norm.instance.grid.rows_max
    cols = norm.instance.grid.cols_max
    modules = norm.instance.modules
    boxes = []
    for m in modules:
        pm = norm.placed_by_id(m.id)
        hh, ww = footprint(m, pm.rotated)
        boxes.append((pm.row - 1, pm.col - 1, hh, ww))
    adj: list[list[int]] = [[] for _ in modules]
    for i, j in concurrent_index_pairs(norm.instance):
        adj[i].append(j)
        adj[j].append(i)
    dims = [(m.height_cells, m.width_cells) for m in modules]
    rot = [m.rotatable for m in modules]
    return count_covered_boxes(rows, cols, boxes, adj, dims, rot)
