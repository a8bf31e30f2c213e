"""CSV ingestion, validation and summaries for right-censored survival data.

A dataset is a validated columnar table: one time column, one integer
status column (0 = censored, 1 = event of interest, codes >= 2 = competing
causes), covariate columns that are either continuous or categorical, and
an optional categorical strata column.  Rows with unusable values in the
selected role columns are dropped at ingestion and counted per reason.

CSV dialect is fixed: comma separator, optional quoting, UTF-8, first row
is the header.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import DataError

MISSING_TOKENS = frozenset({"", "NA", "NaN", "nan"})


@dataclass(frozen=True)
class ColumnRoles:
    """Assignment of table columns to modelling roles."""

    time_column: str
    status_column: str
    predictor: str
    adjusters: tuple = ()
    strata: Optional[str] = None
    cause_of_interest: int = 1

    def __post_init__(self):
        object.__setattr__(self, "adjusters", tuple(self.adjusters))
        if self.time_column == self.status_column:
            raise DataError("time and status must be distinct columns")
        if self.predictor in self.adjusters:
            raise DataError(f"predictor {self.predictor!r} cannot also be an adjuster")
        if int(self.cause_of_interest) < 1:
            raise DataError("cause_of_interest must be a positive event code")
        object.__setattr__(self, "cause_of_interest", int(self.cause_of_interest))

    @property
    def covariate_columns(self) -> tuple:
        return (self.predictor,) + self.adjusters

    def to_dict(self) -> dict:
        return {
            "time_column": self.time_column,
            "status_column": self.status_column,
            "predictor": self.predictor,
            "adjusters": list(self.adjusters),
            "strata": self.strata,
            "cause_of_interest": self.cause_of_interest,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ColumnRoles":
        try:
            return cls(
                time_column=d["time_column"],
                status_column=d["status_column"],
                predictor=d["predictor"],
                adjusters=tuple(d.get("adjusters") or ()),
                strata=d.get("strata"),
                cause_of_interest=d.get("cause_of_interest", 1),
            )
        except KeyError as exc:
            raise DataError(f"roles missing required field {exc.args[0]!r}") from exc


@dataclass(frozen=True)
class ContinuousColumn:
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def kind(self) -> str:
        return "continuous"


@dataclass(frozen=True)
class CategoricalColumn:
    codes: np.ndarray
    levels: tuple

    def __post_init__(self):
        codes = np.ascontiguousarray(self.codes, dtype=np.int64)
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "levels", tuple(self.levels))

    @property
    def kind(self) -> str:
        return "categorical"

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=object)[self.codes]


Column = Union[ContinuousColumn, CategoricalColumn]


@dataclass(frozen=True)
class IngestionReport:
    rows_in: int
    rows_kept: int
    drops: tuple  # of (reason, count), in first-occurrence order

    def to_dict(self) -> dict:
        return {
            "rows_in": self.rows_in,
            "rows_kept": self.rows_kept,
            "drops": [{"reason": r, "count": c} for r, c in self.drops],
        }


@dataclass(frozen=True)
class SurvivalDataset:
    """Validated, immutable survival table."""

    time: np.ndarray
    status: np.ndarray
    covariates: dict
    strata: Optional[CategoricalColumn] = None
    strata_name: Optional[str] = None

    def __post_init__(self):
        time = np.ascontiguousarray(self.time, dtype=float)
        status = np.ascontiguousarray(self.status, dtype=np.int64)
        if time.ndim != 1 or status.shape != time.shape:
            raise DataError("time and status must be 1-d arrays of equal length")
        if time.size == 0:
            raise DataError("zero usable rows")
        if not np.all(np.isfinite(time)) or np.any(time < 0):
            raise DataError("time values must be finite and nonnegative")
        if np.any(status < 0):
            raise DataError("status codes must be nonnegative integers")
        if not np.any(status > 0):
            raise DataError("no events found (all rows censored)")
        for name, col in self.covariates.items():
            if len(col.values) != time.size:
                raise DataError(f"covariate {name!r} length mismatch")
        if (self.strata is None) != (self.strata_name is None):
            raise DataError("strata column and strata name must be set together")
        time.setflags(write=False)
        status.setflags(write=False)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "status", status)
        object.__setattr__(self, "covariates", dict(self.covariates))

    @property
    def n(self) -> int:
        return int(self.time.size)

    @property
    def causes(self) -> tuple:
        return tuple(int(c) for c in np.unique(self.status) if c > 0)

    def column(self, name: str) -> Column:
        if name in self.covariates:
            return self.covariates[name]
        if self.strata_name == name and self.strata is not None:
            return self.strata
        raise DataError(f"unknown column {name!r}")

    def is_categorical(self, name: str) -> bool:
        return self.column(name).kind == "categorical"

    def strata_levels(self) -> tuple:
        return self.strata.levels if self.strata is not None else ()

    def subset(self, mask) -> "SurvivalDataset":
        """Row subset; categorical level sets are preserved (stay closed)."""
        idx = np.asarray(mask)
        covs = {}
        for name, col in self.covariates.items():
            if col.kind == "continuous":
                covs[name] = ContinuousColumn(col.values[idx])
            else:
                covs[name] = CategoricalColumn(col.codes[idx], col.levels)
        strata = None
        if self.strata is not None:
            strata = CategoricalColumn(self.strata.codes[idx], self.strata.levels)
        return SurvivalDataset(
            time=self.time[idx],
            status=self.status[idx],
            covariates=covs,
            strata=strata,
            strata_name=self.strata_name,
        )

    def resample(self, indices) -> "SurvivalDataset":
        return self.subset(np.asarray(indices, dtype=np.int64))


def lower_median(values) -> float:
    """Median as the lower of the two middle order statistics for even n."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise DataError("median of empty column")
    return float(v[(v.size - 1) // 2])


def _parse_float(cell: str):
    try:
        return float(cell)
    except ValueError:
        return None


def _is_missing(cell: str) -> bool:
    return cell.strip() in MISSING_TOKENS


def ingest_csv(
    data: bytes,
    roles: ColumnRoles,
    strict: bool = False,
    categorical: Sequence[str] = (),
):
    """Parse and validate a CSV document into a SurvivalDataset.

    Parameters
    ----------
    data : raw CSV bytes (UTF-8, comma-separated, header row required).
    roles : column role assignment; all role columns must exist.
    strict : if True, malformed cells raise instead of dropping the row.
    categorical : covariate columns to force categorical.  Columns with any
        non-numeric cell are detected categorical automatically; numeric
        columns are never silently treated as categorical.

    Returns
    -------
    (SurvivalDataset, IngestionReport)
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"CSV is not valid UTF-8: {exc}") from exc

    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DataError("CSV document is empty")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]

    needed = [roles.time_column, roles.status_column, *roles.covariate_columns]
    if roles.strata is not None:
        needed.append(roles.strata)
    col_idx = {}
    missing_cols = []
    for name in needed:
        if name in header:
            col_idx[name] = header.index(name)
        else:
            missing_cols.append(name)
    if missing_cols:
        raise DataError(f"missing column(s): {', '.join(sorted(set(missing_cols)))}")

    declared_cat = set(categorical)

    def cell(row, name):
        i = col_idx[name]
        return row[i].strip() if i < len(row) else ""

    # Column-level type detection for covariates: categorical iff declared
    # so or any non-missing cell fails to parse as a number.
    col_is_cat = {}
    for name in roles.covariate_columns:
        if name in declared_cat:
            col_is_cat[name] = True
            continue
        is_cat = False
        for row in body:
            c = cell(row, name)
            if not _is_missing(c) and _parse_float(c) is None:
                is_cat = True
                break
        col_is_cat[name] = is_cat

    if col_is_cat[roles.predictor]:
        raise DataError(
            f"predictor column {roles.predictor!r} must be continuous"
        )

    drop_counts: dict = {}
    drop_order: list = []

    def drop(reason: str):
        if strict:
            raise DataError(f"row rejected: {reason}")
        if reason not in drop_counts:
            drop_counts[reason] = 0
            drop_order.append(reason)
        drop_counts[reason] += 1

    times, statuses = [], []
    cov_raw = {name: [] for name in roles.covariate_columns}
    strata_raw = []

    for row in body:
        c = cell(row, roles.time_column)
        if _is_missing(c):
            drop("missing time")
            continue
        t = _parse_float(c)
        if t is None:
            drop("non-numeric time")
            continue
        if not np.isfinite(t):
            drop("non-finite time")
            continue
        if t < 0:
            drop("negative time")
            continue

        c = cell(row, roles.status_column)
        if _is_missing(c):
            drop("missing status")
            continue
        s = _parse_float(c)
        if s is None:
            drop("non-numeric status")
            continue
        if s < 0 or s != int(s):
            drop("unknown status code")
            continue

        parsed_covs = {}
        bad = None
        for name in roles.covariate_columns:
            c = cell(row, name)
            if _is_missing(c):
                bad = f"missing covariate: {name}"
                break
            if col_is_cat[name]:
                parsed_covs[name] = c
            else:
                v = _parse_float(c)
                if v is None or not np.isfinite(v):
                    bad = f"non-numeric covariate: {name}"
                    break
                parsed_covs[name] = v
        if bad:
            drop(bad)
            continue

        if roles.strata is not None:
            c = cell(row, roles.strata)
            if _is_missing(c):
                drop("missing strata")
                continue
            strata_raw.append(c)

        times.append(t)
        statuses.append(int(s))
        for name in roles.covariate_columns:
            cov_raw[name].append(parsed_covs[name])

    if not times:
        raise DataError("zero usable rows after ingestion")

    covariates = {}
    for name in roles.covariate_columns:
        raw = cov_raw[name]
        if col_is_cat[name]:
            covariates[name] = _categorical_from_strings(raw)
        else:
            covariates[name] = ContinuousColumn(np.asarray(raw, dtype=float))

    strata_col = None
    if roles.strata is not None:
        strata_col = _categorical_from_strings(strata_raw)

    dataset = SurvivalDataset(
        time=np.asarray(times, dtype=float),
        status=np.asarray(statuses, dtype=np.int64),
        covariates=covariates,
        strata=strata_col,
        strata_name=roles.strata,
    )
    report = IngestionReport(
        rows_in=len(body),
        rows_kept=dataset.n,
        drops=tuple((r, drop_counts[r]) for r in drop_order),
    )
    return dataset, report


def _categorical_from_strings(raw) -> CategoricalColumn:
    levels: list = []
    index: dict = {}
    codes = np.empty(len(raw), dtype=np.int64)
    for i, v in enumerate(raw):
        if v not in index:
            index[v] = len(levels)
            levels.append(v)
    for i, v in enumerate(raw):
        codes[i] = index[v]
    return CategoricalColumn(codes, tuple(levels))


def serialize_csv(data: SurvivalDataset, roles: ColumnRoles) -> bytes:
    """Write the role columns back to CSV; inverse of ingest_csv for
    validated datasets (values, level sets and roles round-trip)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = [roles.time_column, roles.status_column, *roles.covariate_columns]
    if roles.strata is not None:
        header.append(roles.strata)
    writer.writerow(header)
    for i in range(data.n):
        row = [repr(float(data.time[i])), str(int(data.status[i]))]
        for name in roles.covariate_columns:
            col = data.covariates[name]
            if col.kind == "continuous":
                row.append(repr(float(col.values[i])))
            else:
                row.append(str(col.values[i]))
        if roles.strata is not None:
            row.append(str(data.strata.values[i]))
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


@dataclass(frozen=True)
class AdjusterProfile:
    """Fixed values of the non-displayed covariates, with provenance."""

    entries: dict  # name -> (value, source) with source in {"default", "user"}

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))

    def value(self, name: str):
        return self.entries[name][0]

    def names(self) -> tuple:
        return tuple(self.entries)

    def with_overrides(self, overrides: Mapping) -> "AdjusterProfile":
        entries = dict(self.entries)
        for name, value in overrides.items():
            if name not in entries:
                raise DataError(f"unknown adjuster {name!r}")
            entries[name] = (value, "user")
        return AdjusterProfile(entries)

    def to_dict(self) -> dict:
        return {
            name: {"value": value, "source": source}
            for name, (value, source) in self.entries.items()
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AdjusterProfile":
        return cls({name: (v["value"], v["source"]) for name, v in d.items()})


def default_adjuster_profile(data: SurvivalDataset, roles: ColumnRoles) -> AdjusterProfile:
    """Default adjuster values: column median for continuous adjusters
    (lower-middle order statistic for even n), most frequent level for
    categorical ones (ties broken by first appearance)."""
    entries = {}
    for name in roles.adjusters:
        col = data.covariates[name]
        if col.kind == "continuous":
            entries[name] = (lower_median(col.values), "default")
        else:
            counts = np.bincount(col.codes, minlength=len(col.levels))
            entries[name] = (col.levels[int(np.argmax(counts))], "default")
    return AdjusterProfile(entries)


def summarize(data: SurvivalDataset) -> dict:
    """Per-column stats, per-cause event counts and the follow-up range."""
    columns = {}
    for name, col in data.covariates.items():
        if col.kind == "continuous":
            columns[name] = {
                "kind": "continuous",
                "min": float(np.min(col.values)),
                "max": float(np.max(col.values)),
                "median": lower_median(col.values),
            }
        else:
            counts = np.bincount(col.codes, minlength=len(col.levels))
            columns[name] = {
                "kind": "categorical",
                "levels": list(col.levels),
                "counts": [int(c) for c in counts],
            }
    events = {str(code): int(np.sum(data.status == code)) for code in data.causes}
    summary = {
        "n": data.n,
        "follow_up": [float(np.min(data.time)), float(np.max(data.time))],
        "events": events,
        "censored": int(np.sum(data.status == 0)),
        "columns": columns,
    }
    if data.strata is not None:
        counts = np.bincount(data.strata.codes, minlength=len(data.strata.levels))
        summary["strata"] = {
            "column": data.strata_name,
            "levels": list(data.strata.levels),
            "counts": [int(c) for c in counts],
        }
    return summary
