"""Maximal empty rectangles of a 0/1 cell matrix.

A rectangle of zero cells is *maximal* when no empty rectangle strictly
contains it, i.e. it cannot grow by one row or column in any direction
without hitting an occupied cell or the matrix edge.  Coordinates are
1-based with row 1 at the bottom; ``bottom <= top`` and ``left <= right``,
all inclusive.

Two independent enumerations are provided: a quadratic-candidate sweep with
explicit one-step extension tests (``brute_force_maximal_rects``, the slow
reference), and a per-row histogram sweep over staircase structures
(``maximal_empty_rects``, the one used everywhere else).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .placement import OccupancyMatrix

MatrixLike = Union[OccupancyMatrix, np.ndarray, Sequence[Sequence[int]]]


@dataclass(frozen=True)
class MaximalEmptyRect:
    """Inclusive 1-based bounds of one maximal empty rectangle."""

    top: int
    bottom: int
    left: int
    right: int

    @property
    def height(self) -> int:
        return self.top - self.bottom + 1

    @property
    def width(self) -> int:
        return self.right - self.left + 1

    @property
    def cell_count(self) -> int:
        return self.height * self.width


@dataclass(frozen=True)
class Staircase:
    """The empty rectangles sharing a fixed bottom-right anchor cell.

    Each step (height, leftmost_col) is the tallest empty rectangle whose
    columns span [leftmost_col, anchor_col] and whose bottom row is the
    anchor row.  Narrower spans can only be taller, so step heights strictly
    increase as leftmost_col moves right toward the anchor.
    """

    anchor: tuple[int, int]
    steps: tuple[tuple[int, int], ...]


def _as_cells(matrix: MatrixLike) -> np.ndarray:
    if isinstance(matrix, OccupancyMatrix):
        cells = matrix.cells
    else:
        cells = np.asarray(matrix)
    if cells.ndim != 2 or cells.size == 0:
        raise ValueError("matrix must be a non-empty 2-D array of 0/1 cells")
    return (cells != 0).astype(np.uint8)


def staircase_at(matrix: MatrixLike, row: int, col: int) -> Staircase:
    """Staircase anchored at cell (row, col); empty if the anchor is occupied."""
    cells = _as_cells(matrix)
    m, n = cells.shape
    if not (1 <= row <= m and 1 <= col <= n):
        raise ValueError(f"anchor ({row}, {col}) outside {m}x{n} matrix")
    if cells[row - 1, col - 1]:
        return Staircase(anchor=(row, col), steps=())
    steps: list[tuple[int, int]] = []
    height = m - row + 1
    for c in range(col, 0, -1):
        # consecutive empty cells in column c looking upward from the anchor row
        up = 0
        for r in range(row, m + 1):
            if cells[r - 1, c - 1]:
                break
            up += 1
        if up == 0:
            break
        height = min(height, up)
        if steps and steps[-1][0] == height:
            steps[-1] = (height, c)
        else:
            steps.append((height, c))
    # recorded right-to-left with heights decreasing; report increasing order
    return Staircase(anchor=(row, col), steps=tuple(reversed(steps)))


def brute_force_maximal_rects(matrix: MatrixLike, max_cells: int = 400) -> set[MaximalEmptyRect]:
    """Reference enumeration: test every candidate rectangle.

    Every (row span, column span) pair is checked for emptiness via prefix
    sums, then a candidate is kept only if all four one-step extensions are
    blocked.  An empty rectangle extendable by one step is contained in a
    larger empty rectangle and vice versa, so this filter is exactly
    non-maximality.  Guarded to small matrices; quadratic in cell count.
    """
    cells = _as_cells(matrix)
    m, n = cells.shape
    if m * n > max_cells:
        raise ValueError(f"matrix has {m * n} cells, above the {max_cells}-cell bound")

    pref = np.zeros((m + 1, n + 1), dtype=np.int64)
    pref[1:, 1:] = cells.cumsum(axis=0).cumsum(axis=1)

    def box_sum(r1: int, r2: int, c1: int, c2: int) -> int:
        # 0-based inclusive spans
        return int(pref[r2 + 1, c2 + 1] - pref[r1, c2 + 1] - pref[r2 + 1, c1] + pref[r1, c1])

    found: set[MaximalEmptyRect] = set()
    for r1 in range(m):
        for r2 in range(r1, m):
            for c1 in range(n):
                for c2 in range(c1, n):
                    if box_sum(r1, r2, c1, c2) != 0:
                        continue
                    if r1 > 0 and box_sum(r1 - 1, r1 - 1, c1, c2) == 0:
                        continue
                    if r2 < m - 1 and box_sum(r2 + 1, r2 + 1, c1, c2) == 0:
                        continue
                    if c1 > 0 and box_sum(r1, r2, c1 - 1, c1 - 1) == 0:
                        continue
                    if c2 < n - 1 and box_sum(r1, r2, c2 + 1, c2 + 1) == 0:
                        continue
                    found.add(
                        MaximalEmptyRect(top=r2 + 1, bottom=r1 + 1, left=c1 + 1, right=c2 + 1)
                    )
    return found


def maximal_empty_rects(matrix: MatrixLike) -> set[MaximalEmptyRect]:
    """All maximal empty rectangles, by histogram sweep in O(cells) per row.

    Row by row (bottom to top), ``up[c]`` tracks how many consecutive empty
    cells end at the current row in column c.  A monotone stack holds the
    staircase of (height, leftmost column) steps ending at the current
    column; a step popped by a shorter height closes a rectangle that cannot
    widen, and it is emitted if it also cannot grow into the next row.
    """
    cells = _as_cells(matrix)
    m, n = cells.shape
    rects: set[MaximalEmptyRect] = set()
    up = np.zeros(n, dtype=np.int64)
    for r in range(m):
        row = cells[r]
        up = np.where(row, 0, up + 1)
        if r + 1 < m:
            nxt_pref = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(cells[r + 1], out=nxt_pref[1:])
        else:
            nxt_pref = None
        stack: list[tuple[int, int]] = []  # (height, leftmost 0-based col)
        for c in range(n + 1):
            h = int(up[c]) if c < n else 0
            start = c
            while stack and stack[-1][0] >= h:
                ph, pl = stack.pop()
                if ph > h:
                    # grows upward? only emit when the row above blocks it
                    if nxt_pref is None or nxt_pref[c] - nxt_pref[pl] > 0:
                        rects.add(
                            MaximalEmptyRect(top=r + 1, bottom=r - ph + 2, left=pl + 1, right=c)
                        )
                start = pl
            if h > 0 and (not stack or stack[-1][0] < h):
                stack.append((h, start))
    return rects


def can_accommodate(
    rects: Iterable[MaximalEmptyRect], width: int, height: int, allow_rotation: bool
) -> bool:
    """True iff some rectangle fits a width x height footprint, optionally
    rotated (footprint sides swapped)."""
    for rect in rects:
        if rect.height >= height and rect.width >= width:
            return True
        if allow_rotation and rect.height >= width and rect.width >= height:
            return True
    return False
