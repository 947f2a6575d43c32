"""Shared builders and randomized generators for the test suite.

Every random draw comes from a random.Random seeded inside the test that
uses it, so each run exercises exactly the same cases.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

from dmfplace import (
    GridSpec,
    ModuleSpec,
    PlacedModule,
    Placement,
    ProblemInstance,
)
from dmfplace.placement import footprint, time_overlap


def make_instance(
    grid: tuple[int, int] | GridSpec,
    mods: Sequence[tuple],
    pitch: float = 1.5,
) -> ProblemInstance:
    """Terse instance builder; each module is (id, w, h, start, dur[, rotatable])."""
    if not isinstance(grid, GridSpec):
        grid = GridSpec(rows_max=grid[0], cols_max=grid[1], pitch_mm=pitch)
    modules = []
    for entry in mods:
        mid, w, h, start, dur = entry[:5]
        rot = entry[5] if len(entry) > 5 else True
        modules.append(
            ModuleSpec(
                id=mid,
                width_cells=w,
                height_cells=h,
                start_time_s=float(start),
                duration_s=float(dur),
                rotatable=rot,
            )
        )
    return ProblemInstance(grid=grid, modules=tuple(modules))


def place(inst: ProblemInstance, at: Sequence[tuple]) -> Placement:
    """Placement builder; each entry is (id, row, col[, rotated])."""
    placed = tuple(
        PlacedModule(e[0], e[1], e[2], e[3] if len(e) > 3 else False) for e in at
    )
    return Placement(instance=inst, placed=placed)


def random_matrix(
    rng: random.Random, max_rows: int = 20, max_cols: int = 20
) -> list[list[int]]:
    """0/1 matrix with a density drawn from a mix including both extremes."""
    rows = rng.randint(1, max_rows)
    cols = rng.randint(1, max_cols)
    density = rng.choice([0.0, 0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0])
    return [[1 if rng.random() < density else 0 for _ in range(cols)] for _ in range(rows)]


def random_feasible_placement(
    rng: random.Random,
    max_grid: int = 10,
    max_modules: int = 5,
    max_dim: int = 4,
) -> Placement:
    """A feasible placement on a small grid, by rejection sampling.

    Module count, footprints, schedules, orientations, and positions are all
    random; concurrent overlap is avoided during construction, so the result
    always satisfies overlap_penalty = 0.
    """
    while True:
        rows = rng.randint(3, max_grid)
        cols = rng.randint(3, max_grid)
        n = rng.randint(1, max_modules)
        modules = tuple(
            ModuleSpec(
                id=f"m{i}",
                width_cells=rng.randint(1, min(max_dim, cols)),
                height_cells=rng.randint(1, min(max_dim, rows)),
                start_time_s=float(rng.choice([0, 0, 0, 2, 5, 8])),
                duration_s=float(rng.choice([2, 3, 5, 10])),
                rotatable=rng.random() < 0.7,
            )
            for i in range(n)
        )
        inst = ProblemInstance(grid=GridSpec(rows, cols), modules=modules)
        placed: list[PlacedModule] = []
        boxes: list[tuple[ModuleSpec, tuple[int, int, int, int]]] = []
        ok = True
        for spec in modules:
            chosen: Optional[PlacedModule] = None
            for _ in range(80):
                rotated = bool(spec.rotatable and rng.random() < 0.5)
                hh, ww = footprint(spec, rotated)
                if hh > rows or ww > cols:
                    continue
                r = rng.randint(1, rows - hh + 1)
                c = rng.randint(1, cols - ww + 1)
                box = (r, r + hh - 1, c, c + ww - 1)
                clash = any(
                    time_overlap(spec, other)
                    and b[0] <= box[1]
                    and box[0] <= b[1]
                    and b[2] <= box[3]
                    and box[2] <= b[3]
                    for other, b in boxes
                )
                if clash:
                    continue
                chosen = PlacedModule(spec.id, r, c, rotated)
                boxes.append((spec, box))
                break
            if chosen is None:
                ok = False
                break
            placed.append(chosen)
        if ok:
            return Placement(instance=inst, placed=tuple(placed))


def seven_by_nine_low_coverage(rotatable: bool = True) -> Placement:
    """A 7x9 layout with exactly 8 covered cells (coverage index 8/63).

    Two full-height 3-wide blocks wall off the sides; three thin columns sit
    between them.  The full-height pieces cannot slide anywhere, so their
    cells are all uncovered; each 5-tall column is repairable only for the
    two fault rows that leave a 5-cell free run in its own column.  Covered:
    the four unused cells plus (1,4), (2,4), (6,6), (7,6).
    """
    inst = make_instance(
        (7, 9),
        [
            ("MA", 3, 7, 0, 10, rotatable),
            ("MB", 3, 7, 0, 10, rotatable),
            ("MC", 1, 5, 0, 10, rotatable),
            ("MD", 1, 7, 0, 10, rotatable),
            ("ME", 1, 5, 0, 10, rotatable),
        ],
    )
    return place(
        inst,
        [("MA", 1, 1), ("MB", 1, 7), ("MC", 1, 4), ("MD", 1, 5), ("ME", 3, 6)],
    )


EXPECTED_LOW_COVERAGE_CELLS = {
    (1, 4),
    (2, 4),
    (6, 4),
    (7, 4),
    (1, 6),
    (2, 6),
    (6, 6),
    (7, 6),
}


def pcr_seven_by_eleven() -> Placement:
    """A hand-built feasible 7x11 layout of the bundled benchmark fixture."""
    from dmfplace import pcr_fixture

    inst = pcr_fixture()
    return place(
        inst,
        [
            ("M1", 1, 1),
            ("M2", 1, 5),
            ("M3", 3, 8),
            ("M4", 1, 5),
            ("M5", 1, 1),
            ("M6", 1, 4),
            ("M7", 1, 1),
        ],
    )
