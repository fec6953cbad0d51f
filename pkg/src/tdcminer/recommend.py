"""Parameter recommendation over a candidate grid.

Predict the run outcomes for every parameter configuration in a candidate
grid (via a trained surrogate), then mark the configurations that are
Pareto-optimal under a user-chosen set of objectives.  The resulting table
has five input columns followed by five predicted output columns, plus a
non-domination flag, and — when exactly two objectives are selected — a
2-D scatter projection of the grid.
"""

from __future__ import annotations

import dataclasses
import io
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cluster import OUTCOME_COLUMNS
from .evotemplate import GAParams
from .harness import SchemaMismatchError
from .seqcore import SetDescriptor, compute_descriptor, parse_sequence_file

MINIMIZE = "min"
MAXIMIZE = "max"

DEFAULT_DIRECTIONS = {
    "elapsed_seconds": MINIMIZE,
    "num_clusters": MINIMIZE,
    "chi": MAXIMIZE,
    "dbi": MINIMIZE,
    "non_clustered": MINIMIZE,
}

TABLE_INPUT_COLUMNS = (
    "increment",
    "mutation_probability",
    "mutation_number",
    "parent_fraction",
    "start_population_factor",
)
TABLE_OUTPUT_COLUMNS = ("chi", "dbi", "non_clustered", "num_clusters", "elapsed_seconds")
TABLE_COLUMNS = TABLE_INPUT_COLUMNS + TABLE_OUTPUT_COLUMNS


@dataclass(frozen=True)
class ObjectiveSpec:
    """An ordered choice of outcome targets with optimization directions."""

    objectives: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.objectives:
            raise ValueError("at least one objective is required")
        seen = set()
        for name, direction in self.objectives:
            if name not in OUTCOME_COLUMNS:
                raise ValueError(f"unknown objective {name!r}; choose from {OUTCOME_COLUMNS}")
            if name in seen:
                raise ValueError(f"duplicate objective {name!r}")
            if direction not in (MINIMIZE, MAXIMIZE):
                raise ValueError(f"direction for {name!r} must be '{MINIMIZE}' or '{MAXIMIZE}'")
            seen.add(name)

    @classmethod
    def parse(cls, text: str) -> "ObjectiveSpec":
        """Parse a comma-separated list like ``dbi,elapsed_seconds`` or ``chi:min``.

        A bare target name takes its default direction; an explicit
        ``name:min`` / ``name:max`` suffix overrides it.
        """
        pairs = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            name, _, direction = chunk.partition(":")
            name = name.strip()
            direction = direction.strip()
            if not direction:
                direction = DEFAULT_DIRECTIONS.get(name, MINIMIZE)
            pairs.append((name, direction))
        return cls(tuple(pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.objectives)

    @property
    def directions(self) -> tuple[str, ...]:
        return tuple(direction for _, direction in self.objectives)


@dataclass
class RecommendationRow:
    """One candidate grid point with its predicted outcomes and flag."""

    params: GAParams
    predicted: dict[str, float]
    nondominated: bool | None = None


@dataclass
class RecommendationTable:
    set_name: str
    rows: list[RecommendationRow]
    scatter: list[tuple[float, float, bool]] | None
    spec: ObjectiveSpec


def _call_model(model, params: GAParams, descriptor: SetDescriptor | None):
    predict = getattr(model, "predict", None)
    try:
        if predict is not None:
            return predict(params, descriptor)
        return model(params, descriptor)
    except ValueError as exc:
        raise SchemaMismatchError(str(exc)) from exc


def predict_grid(model, descriptor: SetDescriptor | None, grid) -> list[RecommendationRow]:
    """Predict outcomes for every grid point; flags are left unset."""
    rows = []
    for params in grid:
        predicted = dict(_call_model(model, params, descriptor))
        rows.append(RecommendationRow(params=params, predicted=predicted))
    return rows


def _adjusted_matrix(rows, spec: ObjectiveSpec) -> np.ndarray:
    matrix = np.empty((len(rows), len(spec.objectives)))
    for j, (name, direction) in enumerate(spec.objectives):
        column = np.array([row.predicted[name] for row in rows], dtype=float)
        matrix[:, j] = -column if direction == MAXIMIZE else column
    return matrix


def mark_nondominated(rows, spec: ObjectiveSpec) -> list[RecommendationRow]:
    """Flag each row: nondominated iff no other row is at least as good on
    every chosen objective and strictly better on at least one.

    Exact-duplicate objective tuples always share one flag: equal tuples
    never strictly improve on each other, so they are flagged together.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("mark_nondominated requires at least one row")
    matrix = _adjusted_matrix(rows, spec)
    flagged = []
    for i in range(len(rows)):
        le = (matrix <= matrix[i]).all(axis=1)
        lt = (matrix < matrix[i]).any(axis=1)
        dominated = bool((le & lt).any())
        flagged.append(dataclasses.replace(rows[i], nondominated=not dominated))
    return flagged


def build_table(
    model,
    descriptor: SetDescriptor | None,
    grid,
    spec: ObjectiveSpec,
    show_all: bool = True,
    set_name: str = "",
) -> RecommendationTable:
    """Predict the grid, flag and sort the rows for an already-parsed set.

    Rows come back sorted by the first objective (ascending for a minimized
    target, descending for a maximized one).  With exactly two objectives a
    scatter projection (x, y, flag) over *all* rows is attached regardless
    of ``show_all``; the flag distinguishes the Pareto-optimal points.
    """
    rows = predict_grid(model, descriptor, grid)
    rows = mark_nondominated(rows, spec)
    first_name, first_direction = spec.objectives[0]
    rows.sort(key=lambda row: row.predicted[first_name], reverse=first_direction == MAXIMIZE)
    scatter = None
    if len(spec.objectives) == 2:
        x_name, y_name = spec.names
        scatter = [
            (row.predicted[x_name], row.predicted[y_name], row.nondominated) for row in rows
        ]
    if not show_all:
        rows = [row for row in rows if row.nondominated]
    return RecommendationTable(set_name=set_name, rows=rows, scatter=scatter, spec=spec)


def recommend(set_file, model, grid, spec: ObjectiveSpec, show_all: bool = True) -> RecommendationTable:
    """Run the full pipeline from a sequence file on disk."""
    path = Path(set_file)
    sset = parse_sequence_file(path.read_text(encoding="utf-8"), name=path.stem)
    descriptor = compute_descriptor(sset)
    return build_table(model, descriptor, grid, spec, show_all, set_name=sset.name)


def row_cells(row: RecommendationRow) -> tuple:
    """The ten table cells for a row, in fixed column order.

    The mutation-probability triple is rendered as a single
    ``sub/del/ins`` cell to keep one column per input parameter.
    """
    p = row.params
    triple = "/".join(repr(float(v)) for v in p.mutation_probability)
    inputs = (p.increment, triple, p.mutation_number, p.parent_fraction, p.start_population_factor)
    outputs = tuple(row.predicted[name] for name in TABLE_OUTPUT_COLUMNS)
    return inputs + outputs


def table_to_csv(table: RecommendationTable) -> str:
    """Serialize the table with the fixed columns plus the flag column."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS + ("nondominated",))
    for row in table.rows:
        cells = [value if isinstance(value, str) else repr(value) for value in row_cells(row)]
        writer.writerow(cells + [row.nondominated])
    return buffer.getvalue()


def scatter_to_csv(table: RecommendationTable) -> str:
    if table.scatter is None:
        raise ValueError("scatter data exists only for exactly two objectives")
    x_name, y_name = table.spec.names
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow((x_name, y_name, "nondominated"))
    for x, y, flag in table.scatter:
        writer.writerow((repr(float(x)), repr(float(y)), flag))
    return buffer.getvalue()
