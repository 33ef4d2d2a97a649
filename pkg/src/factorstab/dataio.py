"""CSV ingestion, standardization, and the multi-dataset stability report.

The report protocol mirrors how one evaluates selection criteria on a large
real dataset: draw several row subsamples without replacement (treated as
near-independent copies), standardize each, run every criterion on each
copy, and summarize per criterion the modal selected k, how often the mode
was selected, and the mean pairwise principal-angle instability between the
selected loading spaces across all copy pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .criteria import CRITERION_NAMES, evaluate_criteria
from .errors import DegenerateColumn, InvalidInput, ParseError
from .rng import spawn_rng, spawn_seed
from .stability import ins_curve, leading_subspace, symmetric_sin_angle


@dataclass(frozen=True)
class DataMatrix:
    """An n-by-p matrix of reals with optional column names and provenance."""

    values: np.ndarray
    columns: Optional[tuple[str, ...]] = None
    source: str = "<memory>"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.ndim != 2:
            raise InvalidInput("DataMatrix expects a 2-d array")
        if not np.all(np.isfinite(v)):
            raise InvalidInput(f"{self.source}: non-finite entries")
        if self.columns is not None and len(self.columns) != v.shape[1]:
            raise InvalidInput("one column name per column required")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def load_csv(path, has_header: bool = False) -> DataMatrix:
    """Parse a comma-separated numeric file.

    Every row must have the same number of cells and every cell must parse
    to a finite float; violations raise ParseError naming the row and
    column (1-based, header excluded).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    columns = None
    if has_header:
        if not lines:
            raise ParseError(f"{path}: empty file")
        columns = tuple(c.strip() for c in lines[0].split(","))
        lines = lines[1:]
    if not lines:
        raise ParseError(f"{path}: no data rows")

    width = len(lines[0].split(","))
    rows = np.empty((len(lines), width))
    for i, line in enumerate(lines):
        cells = line.split(",")
        if len(cells) != width:
            raise ParseError(
                f"{path}: row {i + 1} has {len(cells)} cells, expected {width}"
            )
        for j, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                value = np.nan
            if not np.isfinite(value):
                raise ParseError(
                    f"{path}: row {i + 1}, column {j + 1}: "
                    f"non-numeric cell {cell.strip()!r}"
                )
            rows[i, j] = value
    if columns is not None and len(columns) != width:
        raise ParseError(
            f"{path}: header has {len(columns)} names for {width} columns"
        )
    return DataMatrix(values=rows, columns=columns, source=str(path))


def standardize(data: DataMatrix) -> DataMatrix:
    """Center each column and scale to unit sample variance (n-1 denominator).

    Raises DegenerateColumn (with the offending 0-based index) when a
    column's variance is at or below 1e-12.
    """
    x = data.values
    if x.shape[0] < 2:
        raise InvalidInput("standardization needs at least 2 rows")
    var = x.var(axis=0, ddof=1)
    bad = np.flatnonzero(var <= 1e-12)
    if bad.size:
        raise DegenerateColumn(int(bad[0]))
    out = (x - x.mean(axis=0)) / np.sqrt(var)
    return DataMatrix(values=out, columns=data.columns, source=data.source)


def subsample_rows(
    data: DataMatrix, n_rows: int, n_draws: int, seed: int
) -> list[DataMatrix]:
    """Independent without-replacement row samples, one per draw index."""
    n = data.shape[0]
    if not 1 <= n_rows <= n:
        raise InvalidInput(f"n_rows={n_rows} out of range for {n} rows")
    if n_draws < 1:
        raise InvalidInput("need at least one draw")
    out = []
    for d in range(n_draws):
        idx = spawn_rng(seed, d, 0).choice(n, size=n_rows, replace=False)
        out.append(
            DataMatrix(
                values=data.values[idx],
                columns=data.columns,
                source=f"{data.source}#draw{d}",
            )
        )
    return out


def pairwise_instability(bases) -> float:
    """Mean symmetric sine angle over all unordered pairs of bases.

    Bases may have different dimensions (the symmetric angle handles that);
    they must share the ambient dimension. Touches exactly D(D-1)/2 pairs.
    """
    bases = [np.asarray(b, dtype=np.float64) for b in bases]
    if len(bases) < 2:
        raise InvalidInput("need at least two bases to compare")
    p = bases[0].shape[0]
    for b in bases[1:]:
        if b.shape[0] != p:
            raise InvalidInput("bases must share the ambient dimension")
    total = 0.0
    count = 0
    for i in range(len(bases)):
        for j in range(i + 1, len(bases)):
            total += symmetric_sin_angle(bases[i], bases[j])
            count += 1
    return total / count


@dataclass(frozen=True)
class CriterionSummary:
    criterion: str
    mode: int
    mode_pct: float
    mean_instability: Optional[float]  # None when only one dataset
    selections: tuple[int, ...]


@dataclass(frozen=True)
class RealDataReport:
    """Per-criterion summary over a collection of dataset copies."""

    rows: tuple[CriterionSummary, ...]
    n_datasets: int

    @property
    def pair_count(self) -> int:
        return self.n_datasets * (self.n_datasets - 1) // 2

    def format_table(self) -> str:
        header = (
            "Criterion  Mode  Selection percentage(%)  "
            "Mean between-sample loading instability"
        )
        lines = [header]
        for row in self.rows:
            inst = "n/a" if row.mean_instability is None else f"{row.mean_instability:.2f}"
            lines.append(
                f"{row.criterion:<9}  {row.mode:>4}  {row.mode_pct:>23.0f}  {inst:>39}"
            )
        return "\n".join(lines)

    def to_csv(self) -> str:
        lines = ["criterion,mode,mode_pct,mean_instability"]
        for row in self.rows:
            inst = "" if row.mean_instability is None else repr(row.mean_instability)
            lines.append(f"{row.criterion},{row.mode},{row.mode_pct!r},{inst}")
        return "\n".join(lines) + "\n"


def real_data_report(
    datasets,
    kmax: int,
    n_splits: int,
    criteria=CRITERION_NAMES,
    seed: int = 0,
) -> RealDataReport:
    """Apply every criterion to each dataset copy and summarize.

    Datasets are expected to be standardized already. Each dataset gets its
    own split stream derived from (seed, dataset index); one instability
    curve per dataset feeds all criteria. Modal ties break toward the
    smallest k. With a single dataset the pairwise instability is reported
    as not applicable.
    """
    datasets = list(datasets)
    if not datasets:
        raise InvalidInput("need at least one dataset")
    criteria = tuple(criteria)

    selections: dict[str, list[int]] = {c: [] for c in criteria}
    top_bases = []
    for d, data in enumerate(datasets):
        x = data.values if isinstance(data, DataMatrix) else np.asarray(data)
        curve = ins_curve(x, kmax, n_splits, spawn_seed(seed, d, 1))
        for name, crit in evaluate_criteria(x, curve, names=criteria).items():
            selections[name].append(crit.selected_k)
        top_bases.append(leading_subspace(x, kmax))

    rows = []
    for name in criteria:
        sel = np.asarray(selections[name])
        counts = np.bincount(sel, minlength=kmax + 1)
        mode = int(np.argmax(counts))  # first max <=> smallest k
        mode_pct = float(100.0 * counts[mode] / len(sel))
        if len(datasets) >= 2:
            bases = [top_bases[d][:, : sel[d]] for d in range(len(datasets))]
            inst = pairwise_instability(bases)
        else:
            inst = None
        rows.append(
            CriterionSummary(
                criterion=name,
                mode=mode,
                mode_pct=mode_pct,
                mean_instability=inst,
                selections=tuple(int(s) for s in sel),
            )
        )
    return RealDataReport(rows=tuple(rows), n_datasets=len(datasets))


def write_matrix_csv(x, path) -> None:
    """Write a plain numeric CSV (repr cells, so values round-trip)."""
    x = np.asarray(x)
    with open(path, "w", encoding="utf-8") as f:
        for row in x:
            f.write(",".join(repr(float(v)) for v in row) + "\n")
