"""End-to-end optimization flows and the greedy reference packer.

``optimize_area`` runs a single fault-oblivious annealing pass from the
first-fit start.  ``optimize_two_stage`` refines its result with a short
low-temperature fault-aware pass restricted to displacement moves, trading
bounding-array cells for covered cells at a caller-chosen exchange rate.
``beta_sweep`` repeats the two-stage flow across coverage weights.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .annealer import (
    SINGLE_MOVE_KINDS,
    AnnealParams,
    CostWeights,
    NoFeasiblePlacementError,
    anneal,
    initial_placement,
)
from .coverage import coverage_report
from .placement import (
    Placement,
    PlacedModule,
    area_mm2,
    array_area_cells,
    array_dims,
    footprint,
    time_overlap,
)
from .problem import ProblemInstance, ValidationError

# stage-2 temperature defaults to this fraction of the stage-1 start
LT_REFINE_T_FRACTION = 0.01


@dataclass(frozen=True)
class StageResult:
    """One optimization outcome plus its headline metrics.

    ``cell_count`` and the physical area describe the normalized bounding
    array; ``k`` and ``fti`` are its covered-cell count and covered
    fraction.  ``seed`` is the RNG seed the stage actually used (0 for the
    deterministic greedy packer) and ``elapsed_s`` the wall-clock spent.
    """

    placement: Placement
    cell_count: int
    rows_used: int
    cols_used: int
    area_mm2: float
    k: int
    fti: float
    seed: int
    elapsed_s: float


def _result_for(p: Placement, seed: int, elapsed_s: float) -> StageResult:
    rows, cols = array_dims(p)
    report = coverage_report(p)
    return StageResult(
        placement=p,
        cell_count=rows * cols,
        rows_used=rows,
        cols_used=cols,
        area_mm2=area_mm2(rows * cols, p.instance.grid.pitch_mm),
        k=report.k,
        fti=report.fti,
        seed=seed,
        elapsed_s=elapsed_s,
    )


def greedy_baseline(inst: ProblemInstance) -> StageResult:
    """Deterministic packing used as the quality floor for the annealer.

    Modules are taken largest footprint first (ties by id) and dropped at
    the first bottom-left position, scanning rows then columns, where they
    fit unrotated or rotated without touching a concurrent module.
    """
    t0 = time.perf_counter()
    grid = inst.grid
    order = sorted(inst.modules, key=lambda m: (-m.area_cells, m.id))
    placed: list[PlacedModule] = []
    boxes: list[tuple[int, int, int, int]] = []
    for spec in order:
        others = [
            b
            for pm, b in zip(placed, boxes)
            if time_overlap(spec, inst.module_by_id(pm.module_id))
        ]
        orients = [False]
        if spec.rotatable and spec.width_cells != spec.height_cells:
            orients.append(True)
        choice = None
        for row in range(1, grid.rows_max + 1):
            for col in range(1, grid.cols_max + 1):
                for rotated in orients:
                    rows, cols = footprint(spec, rotated)
                    if row + rows - 1 > grid.rows_max or col + cols - 1 > grid.cols_max:
                        continue
                    box = (row, row + rows - 1, col, col + cols - 1)
                    if any(
                        b[0] <= box[1] and box[0] <= b[1] and b[2] <= box[3] and box[2] <= b[3]
                        for b in others
                    ):
                        continue
                    choice = PlacedModule(spec.id, row, col, rotated)
                    break
                if choice:
                    break
            if choice:
                break
        if choice is None:
            side = sum(m.max_dim for m in inst.modules)
            raise NoFeasiblePlacementError(
                f"no feasible position for module {spec.id!r} within grid bounds "
                f"{grid.rows_max}x{grid.cols_max}; a {side}x{side} grid always suffices"
            )
        placed.append(choice)
        rows, cols = footprint(spec, choice.rotated)
        boxes.append((choice.row, choice.row + rows - 1, choice.col, choice.col + cols - 1))
    ordered = {pm.module_id: pm for pm in placed}
    layout = Placement(
        instance=inst, placed=tuple(ordered[m.id] for m in inst.modules)
    )
    return _result_for(layout, seed=0, elapsed_s=time.perf_counter() - t0)


def optimize_area(
    inst: ProblemInstance,
    params: Optional[AnnealParams] = None,
    weights: Optional[CostWeights] = None,
) -> StageResult:
    """Anneal for minimum bounding-array area, ignoring fault coverage."""
    params = params or AnnealParams()
    weights = replace(weights or CostWeights(), beta_ft=0.0)
    t0 = time.perf_counter()
    start = initial_placement(inst)
    best = anneal(inst, start=start, params=params, weights=weights, with_ft=False)
    return _result_for(best, seed=params.rng_seed, elapsed_s=time.perf_counter() - t0)


def optimize_two_stage(
    inst: ProblemInstance,
    params: Optional[AnnealParams] = None,
    weights: Optional[CostWeights] = None,
    t_refine: Optional[float] = None,
) -> StageResult:
    """Area pass, then a low-temperature fault-aware displacement pass.

    ``weights.beta_ft`` must be positive, otherwise the second stage has
    nothing to optimize for.  ``t_refine`` is the stage-2 starting
    temperature (default: LT_REFINE_T_FRACTION of stage 1's).
    """
    params = params or AnnealParams()
    if weights is None or not weights.beta_ft > 0:
        raise ValidationError("two-stage optimization requires weights with beta_ft > 0")
    t0 = time.perf_counter()
    stage1 = optimize_area(inst, params=params, weights=weights)
    t2 = t_refine if t_refine is not None else params.t_initial * LT_REFINE_T_FRACTION
    params2 = replace(params, t_initial=t2)
    best = anneal(
        inst,
        start=stage1.placement,
        params=params2,
        weights=weights,
        with_ft=True,
        move_filter=SINGLE_MOVE_KINDS,
    )
    return _result_for(best, seed=params.rng_seed, elapsed_s=time.perf_counter() - t0)


def beta_sweep(
    inst: ProblemInstance,
    betas: Sequence[float],
    params: Optional[AnnealParams] = None,
    weights: Optional[CostWeights] = None,
    t_refine: Optional[float] = None,
) -> list[StageResult]:
    """Two-stage run per coverage weight; entry i uses base seed + i so the
    points are independent draws.  Results are ordered like ``betas``."""
    if not betas:
        raise ValidationError("beta sweep requires at least one coverage weight")
    params = params or AnnealParams()
    base = weights or CostWeights()
    out = []
    for idx, beta in enumerate(betas):
        params_i = replace(params, rng_seed=params.rng_seed + idx)
        weights_i = replace(base, beta_ft=float(beta))
        out.append(optimize_two_stage(inst, params=params_i, weights=weights_i, t_refine=t_refine))
    return out
