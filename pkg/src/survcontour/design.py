"""Covariate encoding shared by the regression fitters.

Continuous covariates map to one column; categorical covariates become
dummy columns against the most frequent level as reference.  Columns are
centered at their fit-data means, and predictions must re-apply the same
centering.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dataset import ColumnRoles, SurvivalDataset
from .errors import DataError, ModelValidationError


@dataclass(frozen=True)
class CovariateEncoding:
    """Everything needed to rebuild design rows for new covariate values."""

    column_names: tuple          # encoded design column names
    sources: tuple               # per design column: source covariate name
    categorical_levels: dict     # covariate -> (levels tuple, reference level)
    means: np.ndarray            # per design column, fit-data means
    scales: np.ndarray           # per design column, fit-data std (for diagnostics)

    @property
    def n_columns(self) -> int:
        return len(self.column_names)

    def encode_row(self, x: Mapping) -> np.ndarray:
        """Encode one covariate assignment to a centered design row."""
        row = np.zeros(self.n_columns)
        seen = set()
        for j, (col_name, source) in enumerate(zip(self.column_names, self.sources)):
            if source in self.categorical_levels:
                levels, reference = self.categorical_levels[source]
                if source not in x:
                    raise DataError(f"covariate {source!r} missing from assignment")
                value = x[source]
                if value not in levels:
                    raise DataError(
                        f"unknown level {value!r} for covariate {source!r}"
                    )
                level = col_name.rsplit("=", 1)[1]
                row[j] = 1.0 if str(value) == level else 0.0
            else:
                if source not in x:
                    raise DataError(f"covariate {source!r} missing from assignment")
                row[j] = float(x[source])
            seen.add(source)
        return row - self.means


def build_design(data: SurvivalDataset, columns) -> tuple:
    """Encode and center the named covariate columns.

    Returns (matrix, encoding); matrix rows follow the dataset rows.
    Raises on rank deficiency, naming the collinear columns.
    """
    blocks = []
    names = []
    sources = []
    categorical_levels = {}
    for name in columns:
        col = data.covariates[name]
        if col.kind == "continuous":
            blocks.append(col.values[:, None].astype(float))
            names.append(name)
            sources.append(name)
        else:
            counts = np.bincount(col.codes, minlength=len(col.levels))
            reference = col.levels[int(np.argmax(counts))]
            categorical_levels[name] = (col.levels, reference)
            for level in col.levels:
                if level == reference:
                    continue
                blocks.append((col.values == level).astype(float)[:, None])
                names.append(f"{name}={level}")
                sources.append(name)
    if blocks:
        matrix = np.hstack(blocks)
    else:
        matrix = np.empty((data.n, 0))
    means = matrix.mean(axis=0) if matrix.size else np.zeros(matrix.shape[1])
    centered = matrix - means
    scales = centered.std(axis=0, ddof=0) if matrix.size else np.zeros(matrix.shape[1])
    _check_rank(centered, names)
    encoding = CovariateEncoding(
        column_names=tuple(names),
        sources=tuple(sources),
        categorical_levels=categorical_levels,
        means=means,
        scales=scales,
    )
    return centered, encoding


def _check_rank(matrix: np.ndarray, names) -> None:
    if matrix.shape[1] == 0:
        return
    scale = np.abs(matrix).max(axis=0)
    zero = np.flatnonzero(scale <= 1e-12)
    if zero.size:
        raise ModelValidationError(
            "design matrix is rank deficient; constant column(s): "
            + ", ".join(names[j] for j in zero)
        )
    rank = np.linalg.matrix_rank(matrix)
    if rank == matrix.shape[1]:
        return
    # Walk the columns and name a dependent set: the first column that lies
    # in the span of its predecessors, together with the predecessors that
    # carry weight in the least-squares representation.
    for j in range(1, matrix.shape[1]):
        prev = matrix[:, :j]
        target = matrix[:, j]
        coef, residual, *_ = np.linalg.lstsq(prev, target, rcond=None)
        fitted = prev @ coef
        if np.allclose(fitted, target, atol=1e-8 * (1.0 + np.abs(target).max())):
            involved = [names[k] for k in range(j) if abs(coef[k]) > 1e-8]
            involved.append(names[j])
            raise ModelValidationError(
                "design matrix is rank deficient; collinear columns: "
                + ", ".join(involved)
            )
    raise ModelValidationError("design matrix is rank deficient")


def stratum_indices(data: SurvivalDataset):
    """Row-index arrays per stratum level (first-appearance order); a single
    pseudo-stratum when the dataset is unstratified."""
    if data.strata is None:
        return {None: np.arange(data.n)}
    out = {}
    for code, level in enumerate(data.strata.levels):
        idx = np.flatnonzero(data.strata.codes == code)
        out[level] = idx
    return out
