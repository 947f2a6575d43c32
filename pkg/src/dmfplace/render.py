"""Figure and plain-text renderings of placements and sweep results.

Figures are written straight to files (PNG, SVG, PDF by extension); the
Agg backend is forced so rendering works without a display.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Rectangle

from .coverage import CoverageReport
from .pipeline import StageResult
from .placement import Placement, footprint, normalized, placed_box


def _usage_counts(p: Placement) -> list[list[int]]:
    rows = p.instance.grid.rows_max
    cols = p.instance.grid.cols_max
    counts = [[0] * cols for _ in range(rows)]
    for pm in p.placed:
        r_lo, r_hi, c_lo, c_hi = placed_box(pm, p.instance.module_by_id(pm.module_id))
        for r in range(r_lo, r_hi + 1):
            for c in range(c_lo, c_hi + 1):
                counts[r - 1][c - 1] += 1
    return counts


def render_layout(
    p: Placement,
    path: str,
    report: Optional[CoverageReport] = None,
    title: Optional[str] = None,
) -> None:
    """Draw the normalized layout to a file.

    Each module is a translucent labeled box; cells used by several
    time-disjoint modules are hatched; when a coverage report is given,
    uncovered cells are crossed out.
    """
    norm = normalized(p)
    rows = norm.instance.grid.rows_max
    cols = norm.instance.grid.cols_max
    if report is not None and (report.grid_rows != rows or report.grid_cols != cols):
        raise ValueError("coverage report does not match the normalized layout dimensions")

    fig, ax = plt.subplots(figsize=(max(3.0, cols * 0.45 + 1), max(3.0, rows * 0.45 + 1)))
    cmap = plt.get_cmap("tab10")
    for idx, spec in enumerate(norm.instance.modules):
        pm = norm.placed_by_id(spec.id)
        hh, ww = footprint(spec, pm.rotated)
        ax.add_patch(
            Rectangle(
                (pm.col - 1, pm.row - 1),
                ww,
                hh,
                facecolor=cmap(idx % 10),
                edgecolor="black",
                linewidth=1.2,
                alpha=0.45,
            )
        )
        label = spec.id + (" (r)" if pm.rotated else "")
        ax.text(
            pm.col - 1 + ww / 2,
            pm.row - 1 + hh / 2,
            f"{label}\n[{spec.start_time_s:g},{spec.end_time_s:g})",
            ha="center",
            va="center",
            fontsize=8,
        )

    counts = _usage_counts(norm)
    for r in range(rows):
        for c in range(cols):
            if counts[r][c] >= 2:
                ax.add_patch(
                    Rectangle(
                        (c, r), 1, 1, fill=False, hatch="//", edgecolor="gray", linewidth=0
                    )
                )
    if report is not None:
        for r in range(rows):
            for c in range(cols):
                if not report.covered[r][c]:
                    ax.plot(c + 0.5, r + 0.5, marker="x", color="red", markersize=6)

    ax.set_xlim(0, cols)
    ax.set_ylim(0, rows)
    ax.set_xticks([i + 0.5 for i in range(cols)])
    ax.set_xticklabels([str(i + 1) for i in range(cols)], fontsize=7)
    ax.set_yticks([i + 0.5 for i in range(rows)])
    ax.set_yticklabels([str(i + 1) for i in range(rows)], fontsize=7)
    ax.set_xticks(range(cols + 1), minor=True)
    ax.set_yticks(range(rows + 1), minor=True)
    ax.grid(which="minor", color="lightgray", linewidth=0.5)
    ax.tick_params(which="both", length=0)
    ax.set_aspect("equal")
    caption = f"{rows}x{cols} array, {rows * cols} cells"
    if report is not None:
        caption += f", covered {report.k}/{rows * cols} (fti {report.fti:.4f})"
    ax.set_xlabel(caption, fontsize=9)
    if title:
        ax.set_title(title, fontsize=10)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def render_sweep(
    betas: Sequence[float], results: Sequence[StageResult], path: str
) -> None:
    """Plot the area-versus-coverage tradeoff, one point per weight."""
    if len(betas) != len(results):
        raise ValueError("betas and results must have equal length")
    areas = [res.area_mm2 for res in results]
    ftis = [res.fti for res in results]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(areas, ftis, "o-", color="tab:blue")
    for beta, x, y in zip(betas, areas, ftis):
        ax.annotate(f"b={beta:g}", (x, y), textcoords="offset points", xytext=(6, 4), fontsize=8)
    ax.set_xlabel("bounding array area (mm^2)")
    ax.set_ylabel("covered-cell fraction")
    ax.set_title("area vs fault coverage")
    ax.grid(True, linewidth=0.4, alpha=0.6)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


_MODULE_CHARS = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"


def ascii_layout(p: Placement, report: Optional[CoverageReport] = None) -> str:
    """Plain-text rendering of the normalized layout.

    One letter per module, '*' where time-disjoint modules share cells,
    '.' for unused cells; rows print top-down.  With a coverage report a
    second grid marks uncovered cells with 'X'.
    """
    norm = normalized(p)
    rows = norm.instance.grid.rows_max
    cols = norm.instance.grid.cols_max
    grid = [["." for _ in range(cols)] for _ in range(rows)]
    counts = _usage_counts(norm)
    legend = []
    for idx, spec in enumerate(norm.instance.modules):
        pm = norm.placed_by_id(spec.id)
        ch = _MODULE_CHARS[idx % len(_MODULE_CHARS)]
        r_lo, r_hi, c_lo, c_hi = placed_box(pm, spec)
        for r in range(r_lo, r_hi + 1):
            for c in range(c_lo, c_hi + 1):
                grid[r - 1][c - 1] = "*" if counts[r - 1][c - 1] >= 2 else ch
        legend.append(
            f"  {ch} = {spec.id}  rows {r_lo}-{r_hi} cols {c_lo}-{c_hi}"
            f"  [{spec.start_time_s:g},{spec.end_time_s:g})s"
            + ("  rotated" if pm.rotated else "")
        )
    lines = [f"{rows}x{cols} array ({rows * cols} cells), '*' = time-shared cells"]
    lines += ["".join(grid[r]) for r in range(rows - 1, -1, -1)]
    lines += legend
    if report is not None:
        if report.grid_rows != rows or report.grid_cols != cols:
            raise ValueError("coverage report does not match the normalized layout dimensions")
        lines.append(f"coverage: k={report.k} fti={report.fti:.6f}, 'X' = uncovered cell")
        for r in range(rows - 1, -1, -1):
            lines.append(
                "".join("." if report.covered[r][c] else "X" for c in range(cols))
            )
    return "\n".join(lines)
