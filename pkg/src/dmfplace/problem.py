"""Problem model: the cell grid and the scheduled rectangular modules to place on it.

A problem instance couples a grid description (maximum extents and cell pitch)
with a list of modules.  Each module occupies a ``width_cells x height_cells``
footprint for the half-open time interval ``[start, start + duration)``.  Two
modules whose intervals overlap are *concurrent* and must never share a cell;
modules active at disjoint times may reuse the same cells freely.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources
from typing import IO, Any, Iterable, Union


class ProblemFormatError(ValueError):
    """Input could not be parsed into the problem schema."""


class ValidationError(ValueError):
    """A structurally well-formed problem violates a model invariant."""


@dataclass(frozen=True)
class GridSpec:
    """Bounds of the placement region, in cells, plus the physical cell pitch."""

    rows_max: int
    cols_max: int
    pitch_mm: float = 1.5

    def __post_init__(self) -> None:
        if self.rows_max < 1:
            raise ValidationError(f"grid rows_max must be >= 1, got {self.rows_max}")
        if self.cols_max < 1:
            raise ValidationError(f"grid cols_max must be >= 1, got {self.cols_max}")
        if not self.pitch_mm > 0:
            raise ValidationError(f"grid pitch_mm must be > 0, got {self.pitch_mm}")

    @property
    def cell_count(self) -> int:
        return self.rows_max * self.cols_max


@dataclass(frozen=True)
class ModuleSpec:
    """One rectangular module and the time window during which it is active.

    ``width_cells`` counts columns, ``height_cells`` counts rows.  A rotated
    placement swaps the two.  ``rotatable=False`` pins the footprint to its
    stated orientation everywhere (search moves and relocation checks alike).
    """

    id: str
    width_cells: int
    height_cells: int
    start_time_s: float
    duration_s: float
    rotatable: bool = True

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("module id must be a non-empty string")
        if self.width_cells < 1:
            raise ValidationError(
                f"module {self.id!r}: width_cells must be >= 1, got {self.width_cells}"
            )
        if self.height_cells < 1:
            raise ValidationError(
                f"module {self.id!r}: height_cells must be >= 1, got {self.height_cells}"
            )
        if self.start_time_s < 0:
            raise ValidationError(
                f"module {self.id!r}: start_time_s must be >= 0, got {self.start_time_s}"
            )
        if not self.duration_s > 0:
            raise ValidationError(
                f"module {self.id!r}: duration_s must be > 0, got {self.duration_s}"
            )

    @property
    def end_time_s(self) -> float:
        return self.start_time_s + self.duration_s

    @property
    def area_cells(self) -> int:
        return self.width_cells * self.height_cells

    @property
    def max_dim(self) -> int:
        return max(self.width_cells, self.height_cells)


def default_bounds(modules: Iterable[ModuleSpec]) -> int:
    """Safe square grid side: the sum of every module's larger dimension.

    Any subset of the modules can be placed in a single row of that many
    cells, so a square of this side always admits a feasible layout.
    """
    return sum(m.max_dim for m in modules)


@dataclass(frozen=True)
class ProblemInstance:
    grid: GridSpec
    modules: tuple[ModuleSpec, ...]

    def __post_init__(self) -> None:
        if not self.modules:
            raise ValidationError("problem must contain at least one module")
        object.__setattr__(self, "modules", tuple(self.modules))
        seen: set[str] = set()
        for m in self.modules:
            if m.id in seen:
                raise ValidationError(f"duplicate module id {m.id!r}")
            seen.add(m.id)
            # A rotatable footprint only needs to fit in one orientation.
            if m.rotatable:
                fits = (
                    (m.height_cells <= self.grid.rows_max and m.width_cells <= self.grid.cols_max)
                    or (m.width_cells <= self.grid.rows_max and m.height_cells <= self.grid.cols_max)
                )
            else:
                fits = m.height_cells <= self.grid.rows_max and m.width_cells <= self.grid.cols_max
            if not fits:
                raise ValidationError(
                    f"module {m.id!r}: footprint {m.width_cells}x{m.height_cells} "
                    f"exceeds grid bounds {self.grid.rows_max}x{self.grid.cols_max}"
                )

    def module_by_id(self, module_id: str) -> ModuleSpec:
        for m in self.modules:
            if m.id == module_id:
                return m
        raise KeyError(f"unknown module id {module_id!r}")

    def module_index(self, module_id: str) -> int:
        for i, m in enumerate(self.modules):
            if m.id == module_id:
                return i
        raise KeyError(f"unknown module id {module_id!r}")


def _require(mapping: dict, key: str, kinds, where: str):
    if key not in mapping:
        raise ProblemFormatError(f"{where}: missing required field {key!r}")
    value = mapping[key]
    # bool passes isinstance(..., int); only accept it where bool is asked for.
    ok = isinstance(value, kinds) and (kinds is bool or not isinstance(value, bool))
    if not ok:
        raise ProblemFormatError(f"{where}: field {key!r} has wrong type ({type(value).__name__})")
    return value


_GRID_KEYS = {"rows_max", "cols_max", "pitch_mm"}
_MODULE_KEYS = {"id", "width_cells", "height_cells", "start_time_s", "duration_s", "rotatable"}


def problem_from_dict(data: dict) -> ProblemInstance:
    """Build an instance from parsed JSON data.

    Unknown top-level keys are ignored (files may carry notes or comments);
    unknown keys inside ``grid`` or a module entry are rejected so typos do
    not silently fall back to defaults.
    """
    if not isinstance(data, dict):
        raise ProblemFormatError(f"problem root must be an object, got {type(data).__name__}")
    raw_modules = _require(data, "modules", list, "problem")
    if not raw_modules:
        raise ProblemFormatError("problem: 'modules' must be a non-empty list")

    modules = []
    for idx, entry in enumerate(raw_modules):
        if not isinstance(entry, dict):
            raise ProblemFormatError(f"modules[{idx}]: entry must be an object")
        where = f"modules[{idx}]"
        unknown = set(entry) - _MODULE_KEYS
        if unknown:
            raise ProblemFormatError(f"{where}: unknown field {sorted(unknown)[0]!r}")
        mid = _require(entry, "id", str, where)
        kwargs: dict[str, Any] = dict(
            id=mid,
            width_cells=_require(entry, "width_cells", int, where),
            height_cells=_require(entry, "height_cells", int, where),
            start_time_s=float(_require(entry, "start_time_s", (int, float), where)),
            duration_s=float(_require(entry, "duration_s", (int, float), where)),
        )
        if "rotatable" in entry:
            kwargs["rotatable"] = _require(entry, "rotatable", bool, where)
        modules.append(ModuleSpec(**kwargs))

    raw_grid = data.get("grid", {})
    if not isinstance(raw_grid, dict):
        raise ProblemFormatError("problem: 'grid' must be an object")
    unknown = set(raw_grid) - _GRID_KEYS
    if unknown:
        raise ProblemFormatError(f"grid: unknown field {sorted(unknown)[0]!r}")
    side = default_bounds(modules)
    rows_max = raw_grid.get("rows_max", side)
    cols_max = raw_grid.get("cols_max", side)
    if not isinstance(rows_max, int) or isinstance(rows_max, bool):
        raise ProblemFormatError("grid: field 'rows_max' has wrong type")
    if not isinstance(cols_max, int) or isinstance(cols_max, bool):
        raise ProblemFormatError("grid: field 'cols_max' has wrong type")
    pitch = raw_grid.get("pitch_mm", 1.5)
    if isinstance(pitch, bool) or not isinstance(pitch, (int, float)):
        raise ProblemFormatError("grid: field 'pitch_mm' has wrong type")

    grid = GridSpec(rows_max=rows_max, cols_max=cols_max, pitch_mm=float(pitch))
    return ProblemInstance(grid=grid, modules=tuple(modules))


def problem_to_dict(inst: ProblemInstance) -> dict:
    """Canonical JSON-ready form; key order is fixed for stable serialization."""
    return {
        "grid": {
            "rows_max": inst.grid.rows_max,
            "cols_max": inst.grid.cols_max,
            "pitch_mm": inst.grid.pitch_mm,
        },
        "modules": [
            {
                "id": m.id,
                "width_cells": m.width_cells,
                "height_cells": m.height_cells,
                "start_time_s": m.start_time_s,
                "duration_s": m.duration_s,
                "rotatable": m.rotatable,
            }
            for m in inst.modules
        ],
    }


PathOrFile = Union[str, os.PathLike, IO[str]]


def load_problem(source: PathOrFile) -> ProblemInstance:
    """Read a problem from a JSON file path or an open text stream."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"not valid JSON: {exc}") from exc
    return problem_from_dict(data)


def save_problem(inst: ProblemInstance, path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(inst), fh, indent=2)
        fh.write("\n")


def pcr_fixture() -> ProblemInstance:
    """The bundled seven-mixer polymerase-chain-reaction benchmark."""
    ref = resources.files("dmfplace").joinpath("data/pcr_mix.json")
    with ref.open("r", encoding="utf-8") as fh:
        return load_problem(fh)
