"""Nonparametric bootstrap percentile intervals for fitted models.

One mechanism serves every family that supports intervals: resample rows
(within stratum when the data are stratified), refit with the original
options, and read percentile intervals off the replicate predictions at
any queried (covariate assignment, time) cell.  Replicate b draws from a
generator seeded with ``seed + b``, so runs are reproducible and
replicates are independent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import ColumnRoles, SurvivalDataset
from .errors import DataError, ModelValidationError, NonconvergenceError, SurvContourError

MAX_FAILURE_FRACTION = 0.2


@dataclass(frozen=True)
class BootstrapCI:
    """Percentile-interval functional over bootstrap refits."""

    models: tuple
    level: float
    requested: int
    failed: int
    seed: int

    def interval(self, x, times, stratum=None):
        """(lower, upper) arrays over ``times`` at the requested level."""
        times = np.asarray(times, dtype=float)
        samples = np.empty((len(self.models), times.size))
        for b, model in enumerate(self.models):
            samples[b] = model.predict(x, times, stratum)
        alpha = (1.0 - self.level) / 2.0
        lower = np.quantile(samples, alpha, axis=0)
        upper = np.quantile(samples, 1.0 - alpha, axis=0)
        return lower, upper


def _resample_indices(data: SurvivalDataset, rng) -> np.ndarray:
    if data.strata is None:
        return rng.integers(0, data.n, size=data.n)
    pieces = []
    for code in range(len(data.strata.levels)):
        idx = np.flatnonzero(data.strata.codes == code)
        if idx.size == 0:
            continue
        pieces.append(idx[rng.integers(0, idx.size, size=idx.size)])
    return np.concatenate(pieces)


def bootstrap_ci(
    model,
    data: SurvivalDataset,
    roles: ColumnRoles,
    B: int = 200,
    seed: int = 0,
    level: float = 0.95,
) -> BootstrapCI:
    """Refit ``model`` on B row resamples and return the CI functional.

    Replicates that fail to converge are dropped and counted; more than
    20% failures is an error.
    """
    if B < 2:
        raise DataError("bootstrap needs B >= 2 replicates")
    if not getattr(model, "supports_ci", False):
        raise ModelValidationError("CI unsupported for this family")
    if not (0.0 < level < 1.0):
        raise DataError("level must be in (0, 1)")
    models = []
    failed = 0
    for b in range(B):
        rng = np.random.default_rng(seed + b)
        idx = _resample_indices(data, rng)
        try:
            models.append(model.refit(data.resample(idx), roles))
        except SurvContourError:
            failed += 1
    if failed > MAX_FAILURE_FRACTION * B:
        raise NonconvergenceError(
            f"{failed}/{B} bootstrap refits failed to converge"
        )
    return BootstrapCI(
        models=tuple(models), level=level, requested=B, failed=failed, seed=seed
    )
