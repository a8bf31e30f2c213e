import numpy as np
import pytest

from survcontour.dataset import (
    CategoricalColumn,
    ColumnRoles,
    ContinuousColumn,
    SurvivalDataset,
)


def make_dataset(time, status, strata=None, strata_name="group", **covariates):
    """Assemble a SurvivalDataset from plain arrays (test convenience)."""
    covs = {}
    for name, values in covariates.items():
        values = np.asarray(values)
        if values.dtype.kind in ("U", "S", "O"):
            levels, codes = [], []
            index = {}
            for v in values:
                v = str(v)
                if v not in index:
                    index[v] = len(levels)
                    levels.append(v)
            codes = np.asarray([index[str(v)] for v in values], dtype=np.int64)
            covs[name] = CategoricalColumn(codes, tuple(levels))
        else:
            covs[name] = ContinuousColumn(np.asarray(values, dtype=float))
    strata_col = None
    if strata is not None:
        levels = []
        index = {}
        for v in strata:
            v = str(v)
            if v not in index:
                index[v] = len(levels)
                levels.append(v)
        codes = np.asarray([index[str(v)] for v in strata], dtype=np.int64)
        strata_col = CategoricalColumn(codes, tuple(levels))
    return SurvivalDataset(
        time=np.asarray(time, dtype=float),
        status=np.asarray(status, dtype=np.int64),
        covariates=covs,
        strata=strata_col,
        strata_name=strata_name if strata is not None else None,
    )


def simulate_cox_data(rng, n, beta=0.7, censor_scale=2.0):
    """One continuous covariate, exponential baseline, random censoring."""
    x = rng.normal(size=n)
    t_event = rng.exponential(scale=np.exp(-beta * x))
    t_cens = rng.exponential(scale=censor_scale, size=n)
    time = np.minimum(t_event, t_cens)
    status = (t_event <= t_cens).astype(int)
    return make_dataset(time, status, x=x), ColumnRoles("time", "status", "x")


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
