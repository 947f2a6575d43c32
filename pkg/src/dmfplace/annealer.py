"""Simulated-annealing search over module placements.

The chain moves modules one displacement or pairwise interchange at a time,
optionally flipping orientations, and accepts a candidate when its cost
drops or by the Metropolis rule otherwise.  Temperature decays by a fixed
factor per round; the displacement window shrinks proportionally to the
temperature, and the search stops at the end of the round in which the
window bottoms out.  The best feasible layout seen anywhere along the chain
is returned, not the final state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from random import Random
from typing import Callable, Iterable, Optional, Sequence

from .coverage import count_covered_boxes, coverage_report
from .placement import (
    Placement,
    PlacedModule,
    array_area_cells,
    concurrent_index_pairs,
    footprint,
    overlap_penalty,
    time_overlap,
)
from .problem import ProblemInstance, ValidationError

MOVE_DISPLACE = "displace"
MOVE_DISPLACE_ROTATE = "displace_rotate"
MOVE_INTERCHANGE = "interchange"
MOVE_INTERCHANGE_ROTATE = "interchange_rotate"

SINGLE_MOVE_KINDS = (MOVE_DISPLACE, MOVE_DISPLACE_ROTATE)
PAIR_MOVE_KINDS = (MOVE_INTERCHANGE, MOVE_INTERCHANGE_ROTATE)
ALL_MOVE_KINDS = SINGLE_MOVE_KINDS + PAIR_MOVE_KINDS

# step observer: (temperature, cost_delta, accepted, evaluated, state_cost,
# state_overlap).  delta is None and evaluated False when the proposal left
# the grid and was discarded early; the last two always describe the chain
# state after the step resolved.
StepObserver = Callable[[float, Optional[float], bool, bool, float, int], None]


class NoFeasiblePlacementError(RuntimeError):
    """No overlap-free layout was found; carries the last state examined."""

    def __init__(self, message: str, placement: Optional[Placement] = None):
        super().__init__(message)
        self.placement = placement


@dataclass(frozen=True)
class AnnealParams:
    """Schedule and proposal-distribution knobs.

    ``window_initial`` is the half-width of the displacement window at the
    starting temperature; it defaults to ``t_initial`` so the window scales
    as the ceiling of the current temperature and reaches ``window_min``
    (ending the search) only once the chain is effectively cold.
    """

    t_initial: float = 10000.0
    cooling_alpha: float = 0.9
    iters_per_module: int = 400
    p_single_move: float = 0.75
    window_initial: Optional[int] = None
    window_min: int = 1
    rng_seed: int = 1

    def __post_init__(self) -> None:
        if not self.t_initial > 0:
            raise ValidationError(f"t_initial must be > 0, got {self.t_initial}")
        if not 0 < self.cooling_alpha < 1:
            raise ValidationError(f"cooling_alpha must be in (0, 1), got {self.cooling_alpha}")
        if self.iters_per_module < 1:
            raise ValidationError("iters_per_module must be >= 1")
        if not 0 < self.p_single_move < 1:
            raise ValidationError("p_single_move must be in (0, 1)")
        if self.window_initial is not None and self.window_initial < 1:
            raise ValidationError("window_initial must be >= 1")
        if self.window_min < 1:
            raise ValidationError("window_min must be >= 1")

    @property
    def resolved_window_initial(self) -> int:
        if self.window_initial is not None:
            return self.window_initial
        return int(math.ceil(self.t_initial))


@dataclass(frozen=True)
class CostWeights:
    """Weights of the layout cost: ``alpha_area * bounding-array cells
    + lambda_overlap * pairwise overlap - beta_ft * covered fraction``.

    The coverage term applies only when fault-aware search is on and the
    state is overlap-free.  The reward weighs the covered *fraction* of the
    bounding array, not the raw covered-cell count: an unnormalized count
    grows one-for-one with added empty cells, so any beta above alpha would
    make unbounded spreading strictly profitable.  ``lambda_overlap=None``
    resolves to twice ``alpha_area`` times the largest module footprint,
    making any overlap dearer than the area it could ever save."""

    alpha_area: float = 1.0
    beta_ft: float = 0.0
    lambda_overlap: Optional[float] = None

    def __post_init__(self) -> None:
        if self.alpha_area < 0:
            raise ValidationError("alpha_area must be >= 0")
        if self.beta_ft < 0:
            raise ValidationError("beta_ft must be >= 0")
        if self.lambda_overlap is not None and self.lambda_overlap <= 0:
            raise ValidationError("lambda_overlap must be > 0")

    def resolved_lambda(self, inst: ProblemInstance) -> float:
        if self.lambda_overlap is not None:
            return self.lambda_overlap
        return 2.0 * self.alpha_area * max(m.area_cells for m in inst.modules)


@dataclass(frozen=True)
class Move:
    """One proposed perturbation.  Displacement kinds carry the single module
    and its new bottom-left target; interchange kinds name the pair whose
    positions swap (the first named module is the one a rotate variant
    flips)."""

    kind: str
    module_ids: tuple[str, ...]
    target: Optional[tuple[int, int]] = None


def temperature(params: AnnealParams, round_index: int) -> float:
    """Temperature of the given cooling round, t_initial * alpha ** i."""
    return params.t_initial * params.cooling_alpha**round_index


def window_span(t: float, params: AnnealParams) -> int:
    """Displacement half-width at temperature t: shrinks with t, floored."""
    raw = math.ceil(params.resolved_window_initial * t / params.t_initial)
    return max(params.window_min, int(raw))


def metropolis_accept(delta: float, t: float, rng: Random) -> bool:
    """Accept iff the cost drops, or with probability exp(-delta/t).

    A zero delta always passes because the uniform draw is strictly below 1.
    """
    return delta < 0 or rng.random() < math.exp(-delta / t)


def initial_placement(inst: ProblemInstance) -> Placement:
    """Deterministic first-fit start: modules in instance order, each at the
    first bottom-left position (row-major, unrotated before rotated) free of
    concurrent overlap."""
    grid = inst.grid
    placed: list[PlacedModule] = []
    boxes: list[tuple[int, int, int, int]] = []
    for spec in inst.modules:
        others = [
            b
            for pm, b in zip(placed, boxes)
            if time_overlap(spec, inst.module_by_id(pm.module_id))
        ]
        choice = None
        orients = [False] + ([True] if spec.rotatable and spec.width_cells != spec.height_cells else [])
        for row in range(1, grid.rows_max + 1):
            for col in range(1, grid.cols_max + 1):
                for rotated in orients:
                    rows, cols = footprint(spec, rotated)
                    if row + rows - 1 > grid.rows_max or col + cols - 1 > grid.cols_max:
                        continue
                    box = (row, row + rows - 1, col, col + cols - 1)
                    if any(_boxes_intersect(box, b) for b in others):
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
    return Placement(instance=inst, placed=tuple(placed))


def _boxes_intersect(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1] and a[2] <= b[3] and b[2] <= a[3]


def cost(p: Placement, weights: CostWeights, with_ft: bool = False) -> float:
    """Layout cost as optimized by the annealer.

    The coverage reward applies only in fault-aware mode and only to
    overlap-free states; an overlapping state scores no coverage at all, so
    the chain cannot pay for coverage with infeasibility.
    """
    lam = weights.resolved_lambda(p.instance)
    overlap = overlap_penalty(p)
    total = weights.alpha_area * array_area_cells(p) + lam * overlap
    if with_ft and overlap == 0:
        total -= weights.beta_ft * coverage_report(p).fti
    return total


def _draw_move(
    rng: Random,
    span: int,
    p_single: float,
    nm: int,
    rows: Sequence[int],
    cols: Sequence[int],
    kinds: tuple[str, ...],
) -> tuple[str, int, int, int, int]:
    """Sample one move as (kind, i, j, target_row, target_col); j is -1 for
    single-module kinds.  The draw order is fixed: family, rotate variant,
    module index (plus partner), then the displacement offsets."""
    single = [k for k in SINGLE_MOVE_KINDS if k in kinds]
    pair = [k for k in PAIR_MOVE_KINDS if k in kinds] if nm >= 2 else []
    if not single and not pair:
        raise ValidationError("no applicable move kinds for this instance")
    if single and pair:
        family = single if rng.random() < p_single else pair
    else:
        family = single or pair
    if len(family) == 2:
        kind = family[1] if rng.random() < 0.5 else family[0]
    else:
        kind = family[0]
    i = rng.randrange(nm)
    if kind in PAIR_MOVE_KINDS:
        j = rng.randrange(nm - 1)
        if j >= i:
            j += 1
        return kind, i, j, 0, 0
    dr = rng.randint(-span, span)
    dc = rng.randint(-span, span)
    return kind, i, -1, rows[i] + dr, cols[i] + dc


def propose(
    p: Placement,
    t: float,
    params: AnnealParams,
    rng: Random,
    kinds: Optional[Iterable[str]] = None,
) -> Move:
    """Draw one move for the current state at temperature t.

    Single-module displacements are drawn with probability ``p_single_move``
    (always, when the instance has one module or the kind filter leaves no
    pair kinds); the rotate variant of the chosen family with probability
    one half.  Displacement targets land within ``window_span(t)`` cells of
    the module's current corner in each axis and may leave the grid, in
    which case the caller discards the move unevaluated.
    """
    allowed = tuple(kinds) if kinds is not None else ALL_MOVE_KINDS
    for k in allowed:
        if k not in ALL_MOVE_KINDS:
            raise ValidationError(f"unknown move kind {k!r}")
    ids = [pm.module_id for pm in p.placed]
    rows = [pm.row for pm in p.placed]
    cols = [pm.col for pm in p.placed]
    span = window_span(t, params)
    kind, i, j, tr, tc = _draw_move(
        rng, span, params.p_single_move, len(ids), rows, cols, allowed
    )
    if kind in PAIR_MOVE_KINDS:
        return Move(kind=kind, module_ids=(ids[i], ids[j]))
    return Move(kind=kind, module_ids=(ids[i],), target=(tr, tc))


def apply_move(p: Placement, move: Move) -> Placement:
    """The placement after the move; raises ValidationError when the result
    leaves the grid.  Orientation flips silently skip non-rotatable modules."""
    by_id = {pm.module_id: pm for pm in p.placed}
    if move.kind in SINGLE_MOVE_KINDS:
        (mid,) = move.module_ids
        pm = by_id[mid]
        rotated = pm.rotated
        if move.kind == MOVE_DISPLACE_ROTATE and p.instance.module_by_id(mid).rotatable:
            rotated = not rotated
        by_id[mid] = replace(pm, row=move.target[0], col=move.target[1], rotated=rotated)
    elif move.kind in PAIR_MOVE_KINDS:
        a, b = move.module_ids
        pa, pb = by_id[a], by_id[b]
        rot_a = pa.rotated
        if move.kind == MOVE_INTERCHANGE_ROTATE and p.instance.module_by_id(a).rotatable:
            rot_a = not rot_a
        by_id[a] = replace(pa, row=pb.row, col=pb.col, rotated=rot_a)
        by_id[b] = replace(pb, row=pa.row, col=pa.col)
    else:
        raise ValidationError(f"unknown move kind {move.kind!r}")
    return Placement(instance=p.instance, placed=tuple(by_id[pm.module_id] for pm in p.placed))


_FT_CELL_WARN_LIMIT = 10_000
_MEMO_CAP = 200_000


def anneal(
    inst: ProblemInstance,
    start: Optional[Placement] = None,
    params: Optional[AnnealParams] = None,
    weights: Optional[CostWeights] = None,
    with_ft: bool = False,
    move_filter: Optional[Iterable[str]] = None,
    on_step: Optional[StepObserver] = None,
) -> Placement:
    """Run the annealing chain and return the best feasible layout seen.

    ``start`` defaults to the first-fit layout.  ``move_filter`` restricts
    the proposal kinds (e.g. displacements only for a low-temperature
    refinement pass).  ``on_step`` observes every iteration, including
    out-of-bounds proposals discarded before evaluation.  Raises
    NoFeasiblePlacementError when no overlap-free state was ever visited.
    """
    params = params or AnnealParams()
    weights = weights or CostWeights()
    if start is None:
        start = initial_placement(inst)
    elif start.instance != inst:
        raise ValidationError("start placement belongs to a different instance")
    kinds = tuple(move_filter) if move_filter is not None else ALL_MOVE_KINDS
    for k in kinds:
        if k not in ALL_MOVE_KINDS:
            raise ValidationError(f"unknown move kind {k!r}")

    grid = inst.grid
    if with_ft and grid.cell_count > _FT_CELL_WARN_LIMIT:
        warnings.warn(
            f"fault-aware annealing on a {grid.cell_count}-cell grid evaluates "
            "coverage at every step and may be very slow",
            RuntimeWarning,
            stacklevel=2,
        )

    modules = inst.modules
    nm = len(modules)
    dims0 = [(m.height_cells, m.width_cells) for m in modules]
    rotatable = [m.rotatable for m in modules]
    adj_build: list[list[int]] = [[] for _ in range(nm)]
    for i, j in concurrent_index_pairs(inst):
        adj_build[i].append(j)
        adj_build[j].append(i)
    adj = [tuple(v) for v in adj_build]

    by_id = {pm.module_id: pm for pm in start.placed}
    rows = [by_id[m.id].row for m in modules]
    cols = [by_id[m.id].col for m in modules]
    rots = [by_id[m.id].rotated for m in modules]

    def dims_at(i: int, rotated: bool) -> tuple[int, int]:
        h, w = dims0[i]
        return (w, h) if rotated else (h, w)

    def area_cells() -> int:
        r_lo = c_lo = 1 << 30
        r_hi = c_hi = 0
        for i in range(nm):
            hh, ww = dims_at(i, rots[i])
            r_lo = min(r_lo, rows[i])
            r_hi = max(r_hi, rows[i] + hh - 1)
            c_lo = min(c_lo, cols[i])
            c_hi = max(c_hi, cols[i] + ww - 1)
        return (r_hi - r_lo + 1) * (c_hi - c_lo + 1)

    def overlap_cells() -> int:
        total = 0
        for i in range(nm):
            hi, wi = dims_at(i, rots[i])
            for j in adj[i]:
                if j < i:
                    continue
                hj, wj = dims_at(j, rots[j])
                rr = min(rows[i] + hi, rows[j] + hj) - max(rows[i], rows[j])
                cc = min(cols[i] + wi, cols[j] + wj) - max(cols[i], cols[j])
                if rr > 0 and cc > 0:
                    total += rr * cc
        return total

    memo: dict[tuple, int] = {}

    def coverage_k() -> int:
        key = (tuple(rows), tuple(cols), tuple(rots))
        hit = memo.get(key)
        if hit is not None:
            return hit
        r_lo = min(rows)
        c_lo = min(cols)
        r_hi = c_hi = 0
        boxes = []
        for i in range(nm):
            hh, ww = dims_at(i, rots[i])
            boxes.append((rows[i], cols[i], hh, ww))
            r_hi = max(r_hi, rows[i] + hh - 1)
            c_hi = max(c_hi, cols[i] + ww - 1)
        norm = [(r - r_lo, c - c_lo, hh, ww) for r, c, hh, ww in boxes]
        k = count_covered_boxes(
            r_hi - r_lo + 1, c_hi - c_lo + 1, norm, adj, dims0, rotatable
        )
        if len(memo) >= _MEMO_CAP:
            memo.clear()
        memo[key] = k
        return k

    lam = weights.resolved_lambda(inst)

    def state_cost() -> tuple[float, int]:
        ov = overlap_cells()
        area = area_cells()
        c = weights.alpha_area * area + lam * ov
        if with_ft and ov == 0:
            c -= weights.beta_ft * (coverage_k() / area)
        return c, ov

    rng = Random(params.rng_seed)
    cur_cost, cur_ov = state_cost()
    best: Optional[tuple[float, list[int], list[int], list[bool]]] = None
    if cur_ov == 0:
        best = (cur_cost, rows.copy(), cols.copy(), rots.copy())

    n_inner = params.iters_per_module * nm
    round_index = 0
    while True:
        t = temperature(params, round_index)
        span = window_span(t, params)
        for _ in range(n_inner):
            kind, i, j, tr, tc = _draw_move(
                rng, span, params.p_single_move, nm, rows, cols, kinds
            )
            # stash for revert
            if kind in PAIR_MOVE_KINDS:
                old = (rows[i], cols[i], rots[i], rows[j], cols[j])
                new_rot_i = (not rots[i]) if kind == MOVE_INTERCHANGE_ROTATE and rotatable[i] else rots[i]
                hi, wi = dims_at(i, new_rot_i)
                hj, wj = dims_at(j, rots[j])
                ri, ci = rows[j], cols[j]
                rj, cj = rows[i], cols[i]
                if (
                    ri + hi - 1 > grid.rows_max
                    or ci + wi - 1 > grid.cols_max
                    or rj + hj - 1 > grid.rows_max
                    or cj + wj - 1 > grid.cols_max
                ):
                    if on_step:
                        on_step(t, None, False, False, cur_cost, cur_ov)
                    continue
                rows[i], cols[i], rots[i] = ri, ci, new_rot_i
                rows[j], cols[j] = rj, cj
            else:
                old = (rows[i], cols[i], rots[i])
                new_rot = (not rots[i]) if kind == MOVE_DISPLACE_ROTATE and rotatable[i] else rots[i]
                hh, ww = dims_at(i, new_rot)
                if tr < 1 or tc < 1 or tr + hh - 1 > grid.rows_max or tc + ww - 1 > grid.cols_max:
                    if on_step:
                        on_step(t, None, False, False, cur_cost, cur_ov)
                    continue
                rows[i], cols[i], rots[i] = tr, tc, new_rot

            new_cost, new_ov = state_cost()
            delta = new_cost - cur_cost
            if metropolis_accept(delta, t, rng):
                cur_cost, cur_ov = new_cost, new_ov
                if cur_ov == 0 and (best is None or cur_cost < best[0]):
                    best = (cur_cost, rows.copy(), cols.copy(), rots.copy())
                if on_step:
                    on_step(t, delta, True, True, cur_cost, cur_ov)
            else:
                if kind in PAIR_MOVE_KINDS:
                    rows[i], cols[i], rots[i], rows[j], cols[j] = old
                else:
                    rows[i], cols[i], rots[i] = old
                if on_step:
                    on_step(t, delta, False, True, cur_cost, cur_ov)
        if span <= params.window_min:
            break
        round_index += 1

    if best is None:
        final = Placement(
            instance=inst,
            placed=tuple(
                PlacedModule(m.id, rows[i], cols[i], rots[i]) for i, m in enumerate(modules)
            ),
        )
        raise NoFeasiblePlacementError(
            "annealing never reached an overlap-free layout", placement=final
        )
    _, brow, bcol, brot = best
    return Placement(
        instance=inst,
        placed=tuple(PlacedModule(m.id, brow[i], bcol[i], brot[i]) for i, m in enumerate(modules)),
    )
