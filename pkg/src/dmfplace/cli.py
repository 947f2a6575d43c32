"""Command-line interface.

Subcommands cover the optimization flows (greedy, anneal, two-stage,
sweep) and the analysis utilities (fti on a saved result, rects on a text
cell grid).  Exit codes: 0 success, 1 no feasible layout, 2 bad usage,
3 unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Optional

from .annealer import AnnealParams, CostWeights, NoFeasiblePlacementError
from .coverage import coverage_report
from .fileio import (
    load_result,
    placement_from_record,
    read_cell_grid,
    write_rects,
    write_result,
    write_sweep_csv,
)
from .pipeline import StageResult, beta_sweep, greedy_baseline, optimize_area, optimize_two_stage
from .problem import (
    GridSpec,
    ProblemFormatError,
    ProblemInstance,
    ValidationError,
    load_problem,
    pcr_fixture,
)
from .render import ascii_layout, render_layout, render_sweep
from .rects import maximal_empty_rects

DEFAULT_SWEEP_BETAS = "5,15,30,60"


def _add_io_args(sub: argparse.ArgumentParser, input_help: str) -> None:
    sub.add_argument("--input", default=None, help=input_help)
    sub.add_argument("--output", default=None, help="write the result record to this path")
    sub.add_argument("--render", default=None, help="write a figure to this path (.png/.svg/.pdf)")
    sub.add_argument("--ascii", action="store_true", help="print a text rendering to stdout")


def _add_grid_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--max-rows", type=int, default=None, help="override grid row bound")
    sub.add_argument("--max-cols", type=int, default=None, help="override grid column bound")


def _add_anneal_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=1, help="RNG seed (default 1)")
    sub.add_argument("--t-initial", type=float, default=10000.0, help="starting temperature")
    sub.add_argument("--cooling", type=float, default=0.9, help="temperature decay per round")
    sub.add_argument("--na", type=int, default=400, help="iterations per module per round")
    sub.add_argument(
        "--p-single", type=float, default=0.75, help="probability of a single-module move"
    )
    sub.add_argument(
        "--window-initial", type=int, default=None, help="displacement window at t-initial"
    )
    sub.add_argument("--window-min", type=int, default=1, help="smallest displacement window")
    sub.add_argument("--alpha", type=float, default=1.0, help="cost weight per bounding-array cell")
    sub.add_argument(
        "--lambda",
        dest="lambda_overlap",
        type=float,
        default=None,
        help="cost weight per overlapping cell pair (default: 2*alpha*largest module)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmfplace",
        description="Placement optimizer for time-multiplexed rectangular modules "
        "on reconfigurable cell arrays.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_greedy = subs.add_parser("greedy", help="deterministic largest-first packing")
    _add_io_args(p_greedy, "problem JSON (default: bundled PCR mixing benchmark)")
    _add_grid_args(p_greedy)

    p_anneal = subs.add_parser("anneal", help="anneal for minimum bounding-array area")
    _add_io_args(p_anneal, "problem JSON (default: bundled PCR mixing benchmark)")
    _add_grid_args(p_anneal)
    _add_anneal_args(p_anneal)

    p_two = subs.add_parser(
        "two-stage", help="area pass plus fault-aware low-temperature refinement"
    )
    _add_io_args(p_two, "problem JSON (default: bundled PCR mixing benchmark)")
    _add_grid_args(p_two)
    _add_anneal_args(p_two)
    p_two.add_argument(
        "--beta", type=float, default=30.0, help="cost reward per fault-covered cell"
    )
    p_two.add_argument(
        "--t-ltsa",
        dest="t_refine",
        type=float,
        default=None,
        help="starting temperature of the low-temperature refinement stage "
        "(default: t-initial/100)",
    )

    p_sweep = subs.add_parser("sweep", help="two-stage runs across coverage weights")
    _add_io_args(p_sweep, "problem JSON (default: bundled PCR mixing benchmark)")
    _add_grid_args(p_sweep)
    _add_anneal_args(p_sweep)
    p_sweep.add_argument(
        "--betas",
        default=DEFAULT_SWEEP_BETAS,
        help=f"comma-separated coverage weights (default {DEFAULT_SWEEP_BETAS})",
    )
    p_sweep.add_argument(
        "--t-ltsa",
        dest="t_refine",
        type=float,
        default=None,
        help="starting temperature of the low-temperature refinement stage "
        "(default: t-initial/100)",
    )

    p_fti = subs.add_parser("fti", help="coverage analysis of a saved placement result")
    p_fti.add_argument("--input", required=True, help="result JSON from a placement command")
    p_fti.add_argument("--output", default=None, help="write the coverage record to this path")
    p_fti.add_argument("--render", default=None, help="figure with uncovered cells marked")
    p_fti.add_argument("--ascii", action="store_true", help="print a text rendering to stdout")

    p_rects = subs.add_parser("rects", help="maximal empty rectangles of a text cell grid")
    p_rects.add_argument("--input", required=True, help="text grid of 0/1 cells, top row first")
    p_rects.add_argument("--output", default=None, help="write the rectangle list to this path")

    return parser


def _load_instance(args) -> ProblemInstance:
    inst = load_problem(args.input) if args.input else pcr_fixture()
    if args.max_rows is not None or args.max_cols is not None:
        grid = GridSpec(
            rows_max=args.max_rows if args.max_rows is not None else inst.grid.rows_max,
            cols_max=args.max_cols if args.max_cols is not None else inst.grid.cols_max,
            pitch_mm=inst.grid.pitch_mm,
        )
        inst = ProblemInstance(grid=grid, modules=inst.modules)
    return inst


def _params_from(args) -> AnnealParams:
    return AnnealParams(
        t_initial=args.t_initial,
        cooling_alpha=args.cooling,
        iters_per_module=args.na,
        p_single_move=args.p_single,
        window_initial=args.window_initial,
        window_min=args.window_min,
        rng_seed=args.seed,
    )


def _weights_from(args, beta: float) -> CostWeights:
    return CostWeights(alpha_area=args.alpha, beta_ft=beta, lambda_overlap=args.lambda_overlap)


def _summary(res: StageResult) -> str:
    return (
        f"cells={res.cell_count} array={res.rows_used}x{res.cols_used} "
        f"area_mm2={res.area_mm2:g} k={res.k} fti={res.fti:.6f} "
        f"seed={res.seed} elapsed_s={res.elapsed_s:.2f}"
    )


def _emit_placement(
    args,
    res: StageResult,
    command: str,
    params: Optional[AnnealParams],
    weights: Optional[CostWeights],
    t_refine: Optional[float] = None,
) -> None:
    print(_summary(res))
    report = None
    if args.output:
        write_result(
            res, args.output, command=command, params=params, weights=weights, t_refine=t_refine
        )
    if args.render:
        report = coverage_report(res.placement)
        render_layout(res.placement, args.render, report=report, title=f"{command} placement")
    if args.ascii:
        report = report or coverage_report(res.placement)
        print(ascii_layout(res.placement, report=report))


def _run(args) -> int:
    if args.command == "greedy":
        inst = _load_instance(args)
        res = greedy_baseline(inst)
        _emit_placement(args, res, "greedy", None, None)
        return 0

    if args.command == "anneal":
        inst = _load_instance(args)
        params = _params_from(args)
        weights = _weights_from(args, beta=0.0)
        res = optimize_area(inst, params=params, weights=weights)
        _emit_placement(args, res, "anneal", params, weights)
        return 0

    if args.command == "two-stage":
        inst = _load_instance(args)
        params = _params_from(args)
        weights = _weights_from(args, beta=args.beta)
        res = optimize_two_stage(inst, params=params, weights=weights, t_refine=args.t_refine)
        _emit_placement(args, res, "two-stage", params, weights, t_refine=args.t_refine)
        return 0

    if args.command == "sweep":
        inst = _load_instance(args)
        params = _params_from(args)
        weights = _weights_from(args, beta=0.0)
        try:
            betas = [float(tok) for tok in args.betas.split(",") if tok.strip()]
        except ValueError:
            raise ProblemFormatError(f"--betas must be comma-separated numbers, got {args.betas!r}")
        if not betas:
            raise ProblemFormatError("--betas must name at least one weight")
        results = beta_sweep(inst, betas, params=params, weights=weights, t_refine=args.t_refine)
        for beta, res in zip(betas, results):
            print(f"beta={beta:g} {_summary(res)}")
        if args.output:
            write_sweep_csv(args.output, betas, results)
        if args.render:
            render_sweep(betas, results, args.render)
        if args.ascii:
            best = max(results, key=lambda r: r.fti)
            print(ascii_layout(best.placement, report=coverage_report(best.placement)))
        return 0

    if args.command == "fti":
        record = load_result(args.input)
        placement = placement_from_record(record)
        report = coverage_report(placement)
        print(
            f"array={report.grid_rows}x{report.grid_cols} "
            f"k={report.k} fti={report.fti:.6f}"
        )
        if args.output:
            write_result(report, args.output)
        if args.render:
            render_layout(placement, args.render, report=report, title="fault coverage")
        if args.ascii:
            print(ascii_layout(placement, report=report))
        return 0

    if args.command == "rects":
        grid = read_cell_grid(args.input)
        rects = maximal_empty_rects(grid)
        print(f"rows={grid.shape[0]} cols={grid.shape[1]} maximal_empty_rects={len(rects)}")
        for rect in sorted(rects, key=lambda r: (r.bottom, r.left, r.top, r.right)):
            print(f"  rows {rect.bottom}-{rect.top} cols {rect.left}-{rect.right}")
        if args.output:
            write_rects(args.output, grid, rects)
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except NoFeasiblePlacementError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ProblemFormatError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
