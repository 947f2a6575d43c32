"""Readers and writers for result records, sweep tables, and cell grids.

Result files are JSON with a fixed key order and no timestamps, so a rerun
with the same inputs and seed produces byte-identical output.  The problem
is embedded in every placement record, which keeps records self-contained
for later coverage analysis.
"""

from __future__ import annotations

import csv
import json
import os
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from .annealer import AnnealParams, CostWeights
from .coverage import CoverageReport
from .pipeline import StageResult
from .placement import Placement, PlacedModule
from .problem import (
    ProblemFormatError,
    ProblemInstance,
    problem_from_dict,
    problem_to_dict,
)
from .rects import MaximalEmptyRect

SCHEMA_VERSION = 1

PathLike = Union[str, os.PathLike]


def _params_dict(
    inst: ProblemInstance,
    params: AnnealParams,
    weights: CostWeights,
    t_refine: Optional[float],
) -> dict:
    return {
        "t_initial": params.t_initial,
        "cooling_alpha": params.cooling_alpha,
        "iters_per_module": params.iters_per_module,
        "p_single_move": params.p_single_move,
        "window_initial": params.resolved_window_initial,
        "window_min": params.window_min,
        "rng_seed": params.rng_seed,
        "alpha_area": weights.alpha_area,
        "beta_ft": weights.beta_ft,
        "lambda_overlap": weights.resolved_lambda(inst),
        "t_refine": t_refine,
    }


def stage_record(
    result: StageResult,
    command: str,
    params: Optional[AnnealParams] = None,
    weights: Optional[CostWeights] = None,
    t_refine: Optional[float] = None,
) -> dict:
    """JSON-ready record of one optimization result, problem embedded."""
    inst = result.placement.instance
    record = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "problem": problem_to_dict(inst),
        "parameters": _params_dict(inst, params or AnnealParams(), weights or CostWeights(), t_refine),
        "placement": [
            {
                "module_id": pm.module_id,
                "row": pm.row,
                "col": pm.col,
                "rotated": pm.rotated,
            }
            for pm in result.placement.placed
        ],
        "metrics": {
            "cell_count": result.cell_count,
            "rows_used": result.rows_used,
            "cols_used": result.cols_used,
            "area_mm2": result.area_mm2,
            "k": result.k,
            "fti": result.fti,
            "seed": result.seed,
        },
    }
    return record


def coverage_record(report: CoverageReport) -> dict:
    """JSON-ready record of a coverage report; rows listed bottom-up."""
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "fti",
        "grid_rows": report.grid_rows,
        "grid_cols": report.grid_cols,
        "k": report.k,
        "fti": report.fti,
        "covered": [list(row) for row in report.covered],
    }


def write_result(
    r: Union[StageResult, CoverageReport],
    path: PathLike,
    command: str = "anneal",
    params: Optional[AnnealParams] = None,
    weights: Optional[CostWeights] = None,
    t_refine: Optional[float] = None,
) -> dict:
    """Serialize a stage result or coverage report to path; returns the
    record written."""
    if isinstance(r, StageResult):
        record = stage_record(r, command=command, params=params, weights=weights, t_refine=t_refine)
    elif isinstance(r, CoverageReport):
        record = coverage_record(r)
    else:
        raise TypeError(f"cannot serialize {type(r).__name__} as a result")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")
    return record


def load_result(path: PathLike) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            record = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(f"result file is not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise ProblemFormatError("result file root must be an object")
    return record


def placement_from_record(record: dict) -> Placement:
    """Rebuild the placement (and its embedded problem) from a result record."""
    if "problem" not in record or "placement" not in record:
        raise ProblemFormatError("result record lacks 'problem' or 'placement'")
    inst = problem_from_dict(record["problem"])
    placed = []
    for idx, entry in enumerate(record["placement"]):
        if not isinstance(entry, dict):
            raise ProblemFormatError(f"placement[{idx}]: entry must be an object")
        try:
            placed.append(
                PlacedModule(
                    module_id=entry["module_id"],
                    row=entry["row"],
                    col=entry["col"],
                    rotated=bool(entry.get("rotated", False)),
                )
            )
        except KeyError as exc:
            raise ProblemFormatError(f"placement[{idx}]: missing field {exc.args[0]!r}") from exc
    return Placement(instance=inst, placed=tuple(placed))


SWEEP_FIELDS = ("beta", "seed", "cell_count", "rows_used", "cols_used", "area_mm2", "k", "fti")


def write_sweep_csv(
    path: PathLike, betas: Sequence[float], results: Sequence[StageResult]
) -> None:
    """Delimited (beta, area, coverage) table, one row per sweep point."""
    if len(betas) != len(results):
        raise ValueError("betas and results must have equal length")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_FIELDS)
        for beta, res in zip(betas, results):
            writer.writerow(
                [
                    beta,
                    res.seed,
                    res.cell_count,
                    res.rows_used,
                    res.cols_used,
                    res.area_mm2,
                    res.k,
                    res.fti,
                ]
            )


def read_cell_grid(source: Union[PathLike, IO[str]]) -> np.ndarray:
    """Parse a text grid of 0/1 cells into an array indexed [row-1, col-1].

    The first text line is the top row of the grid (row index rows_max);
    blank lines and lines starting with '#' are skipped, spaces between
    digits are allowed.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    rows: list[list[int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        digits = stripped.replace(" ", "")
        if any(ch not in "01" for ch in digits):
            raise ProblemFormatError(f"line {lineno}: cell grid may contain only 0 and 1")
        rows.append([int(ch) for ch in digits])
    if not rows:
        raise ProblemFormatError("cell grid file contains no rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ProblemFormatError("cell grid rows must all have equal length")
    # text reads top-down; storage is bottom-up
    return np.array(rows[::-1], dtype=np.uint8)


def rects_record(matrix: np.ndarray, rects: Iterable[MaximalEmptyRect]) -> dict:
    ordered = sorted(rects, key=lambda r: (r.bottom, r.left, r.top, r.right))
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "rects",
        "rows": int(matrix.shape[0]),
        "cols": int(matrix.shape[1]),
        "rect_count": len(ordered),
        "rects": [
            {"top": r.top, "bottom": r.bottom, "left": r.left, "right": r.right}
            for r in ordered
        ],
    }


def write_rects(path: PathLike, matrix: np.ndarray, rects: Iterable[MaximalEmptyRect]) -> dict:
    record = rects_record(matrix, rects)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")
    return record
