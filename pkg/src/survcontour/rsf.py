"""Random survival forest: bootstrap ensemble of trees with log-rank
splitting and Nelson-Aalen leaf estimates.

Determinism: tree i draws its bootstrap sample and node covariate
subsets from numpy's default generator seeded with ``seed + i``; bootstrap
draws are sorted and node row sets are kept in canonical index order, so
construction depends only on the multiset of sampled rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .cox import PredictionResult
from .dataset import ColumnRoles, SurvivalDataset
from .errors import DataError, ModelValidationError
from .metrics import c_index
from .nonparametric import nelson_aalen
from .stepfun import StepFunction

try:  # optional accelerator; the numpy path below computes the same scan
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised on numba-free installs
    _HAVE_NUMBA = False


if _HAVE_NUMBA:

    @_njit(cache=True)
    def _logrank_scan(pos, cand, rate, c1, c2, events_left, out_num, out_var):
        """Per-candidate log-rank numerator and variance via an
        incrementally maintained group-1 at-risk vector."""
        T = rate.size
        n1 = np.zeros(T)
        idx = 0
        for ci in range(cand.size):
            c = cand[ci]
            while idx <= c:
                p = pos[idx]
                for k in range(p):
                    n1[k] += 1.0
                idx += 1
            s_num = 0.0
            s_c1 = 0.0
            s_c2 = 0.0
            for k in range(T):
                s_num += rate[k] * n1[k]
                s_c1 += c1[k] * n1[k]
                s_c2 += c2[k] * n1[k] * n1[k]
            out_num[ci] = events_left[ci] - s_num
            out_var[ci] = s_c1 - s_c2


@dataclass
class _Leaf:
    chf: StepFunction
    mortality: float
    n_inbag: int
    n_events: int


@dataclass
class _Split:
    cov: int                     # covariate index
    threshold: Optional[float]   # continuous: left iff x <= threshold
    level_code: Optional[int]    # categorical: left iff code == level
    left: object = None
    right: object = None


@dataclass(frozen=True)
class SurvivalTree:
    root: object
    inbag: np.ndarray  # sorted bootstrap row indices (with multiplicity)


def _hypergeometric_variance(n, d, n1):
    """Variance term of the log-rank numerator at one event time."""
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = n1 / n
        safe = np.where(n > 1, (n - d) / np.maximum(n - 1.0, 1.0), 0.0)
        return d * frac * (1.0 - frac) * safe


class _TreeBuilder:
    def __init__(self, columns, times, events, mtry, nodesize, rng, pooled_grid):
        self.columns = columns  # (kind, values-or-codes) per covariate
        self.times = times
        self.events = events
        self.mtry = mtry
        self.nodesize = nodesize
        self.rng = rng
        self.pooled_grid = pooled_grid

    def build(self, rows) -> object:
        t = self.times[rows]
        ev = self.events[rows]
        n_events = int(ev.sum())
        if rows.size < 2 * self.nodesize or n_events < 2:
            return self._leaf(rows, t, ev, n_events)
        event_times = np.unique(t[ev])

        # Per row: at-risk column span [0, pos) over the node event times,
        # and the column of its own event (-1 for non-events).
        pos = np.searchsorted(event_times, t, side="right")
        exact = np.minimum(np.searchsorted(event_times, t), event_times.size - 1)
        ev_col = np.where(ev, exact, -1)
        t_sorted = np.sort(t)
        totals_n = rows.size - np.searchsorted(t_sorted, event_times, side="left")
        totals_d = np.bincount(ev_col[ev], minlength=event_times.size)

        chosen = np.sort(
            self.rng.choice(len(self.columns), size=self.mtry, replace=False)
        )
        best_stat = 0.0
        best = None  # (split, left_rows, right_rows)
        for cov in chosen:
            kind, data = self.columns[cov]
            values = data[rows]
            if kind == "continuous":
                found = self._best_continuous(
                    values, rows, ev, pos, ev_col, totals_n, totals_d
                )
            else:
                found = self._best_categorical(
                    values, rows, ev, event_times, ev_col, totals_n, totals_d
                )
            if found is not None and found[0] > best_stat + 1e-12:
                best_stat = found[0]
                if kind == "continuous":
                    split = _Split(cov=int(cov), threshold=found[1], level_code=None)
                else:
                    split = _Split(cov=int(cov), threshold=None, level_code=found[1])
                best = (split, found[2], found[3])
        if best is None:
            return self._leaf(rows, t, ev, n_events)
        split, left_rows, right_rows = best
        split.left = self.build(np.sort(left_rows))
        split.right = self.build(np.sort(right_rows))
        return split

    def _best_continuous(self, values, rows, ev, pos, ev_col, totals_n, totals_d):
        """Exhaustive scan over midpoints between consecutive distinct values.

        With n1(c,k) the group-1 at-risk count of prefix c at event time k,
        the log-rank numerator is (events in prefix) - (d/n) @ n1 and the
        variance is c1 @ n1 - c2 @ n1^2, so only the at-risk prefix counts
        are materialized.
        """
        order = np.argsort(values, kind="stable")
        v_sorted = values[order]
        distinct_last = np.flatnonzero(np.diff(v_sorted) != 0)
        if distinct_last.size == 0:
            return None
        sizes_left = distinct_last + 1
        events_left = np.cumsum(ev[order])[distinct_last]
        valid = (
            (sizes_left >= self.nodesize)
            & (rows.size - sizes_left >= self.nodesize)
            & (events_left >= 1)
            & (events_left < totals_d.sum())
        )
        if not np.any(valid):
            return None
        cand = distinct_last[valid]

        T = totals_n.size
        pos_o = pos[order]
        n = totals_n.astype(float)
        d = totals_d.astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = d / n
            c1 = np.where(n > 1, d * (n - d) / (n * (n - 1.0)), 0.0)
            c2 = c1 / n
        if _HAVE_NUMBA:
            num = np.empty(cand.size)
            var = np.empty(cand.size)
            _logrank_scan(
                pos_o.astype(np.int64), cand.astype(np.int64), rate, c1, c2,
                events_left[valid].astype(float), num, var,
            )
        else:
            at_risk = np.arange(T)[:, None] < pos_o[None, :]  # (T, m)
            N1 = np.cumsum(at_risk, axis=1, dtype=np.int32)[:, cand].astype(float)
            num = events_left[valid] - rate @ N1
            var = c1 @ N1 - c2 @ (N1 * N1)
        stat = np.zeros(cand.size)
        ok = var > 0
        stat[ok] = np.abs(num[ok]) / np.sqrt(var[ok])
        k = int(np.argmax(stat))
        if stat[k] <= 0:
            return None
        cut = cand[k]
        threshold = (v_sorted[cut] + v_sorted[cut + 1]) / 2.0
        return (
            float(stat[k]),
            float(threshold),
            rows[order[: cut + 1]],
            rows[order[cut + 1 :]],
        )

    def _best_categorical(self, codes, rows, ev, event_times, ev_col, totals_n, totals_d):
        """One-vs-rest scan over the levels present in the node."""
        present = np.unique(codes)
        if present.size < 2:
            return None
        n = totals_n.astype(float)
        d = totals_d.astype(float)
        T = totals_n.size
        best = None
        for level in present:
            mask = codes == level
            size_left = int(mask.sum())
            events_left = int(ev[mask].sum())
            if (
                size_left < self.nodesize
                or rows.size - size_left < self.nodesize
                or events_left < 1
                or events_left >= totals_d.sum()
            ):
                continue
            t_left_sorted = np.sort(self.times[rows[mask]])
            n1 = size_left - np.searchsorted(t_left_sorted, event_times, side="left")
            d1 = np.bincount(ev_col[mask][ev_col[mask] >= 0], minlength=T)
            num = (d1 - n1 * d / n).sum()
            var = _hypergeometric_variance(n, d, n1.astype(float)).sum()
            if var <= 0:
                continue
            stat = abs(num) / math.sqrt(var)
            if best is None or stat > best[0] + 1e-12:
                best = (float(stat), int(level), rows[mask], rows[~mask])
        return best

    def _leaf(self, rows, t, ev, n_events) -> _Leaf:
        chf = nelson_aalen(t, ev.astype(np.int64))
        mortality = float(np.sum(chf(self.pooled_grid))) if n_events else 0.0
        return _Leaf(
            chf=chf, mortality=mortality, n_inbag=rows.size, n_events=n_events
        )


def _apply_tree_rows(root, column_data, rows) -> list:
    """Leaf object per row, by vectorized descent."""
    out = [None] * rows.size
    stack = [(root, np.arange(rows.size))]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, _Leaf):
            for j in idx:
                out[j] = node
            continue
        values = column_data[node.cov][rows[idx]]
        if node.threshold is not None:
            left = values <= node.threshold
        else:
            left = values == node.level_code
        if np.any(left):
            stack.append((node.left, idx[left]))
        if not np.all(left):
            stack.append((node.right, idx[~left]))
    return out


@dataclass(frozen=True)
class ForestFit:
    """Bootstrap ensemble of survival trees."""

    trees: tuple
    columns: tuple              # (name, kind, levels-or-None) per covariate
    column_data: tuple          # training column arrays, fit-level encoding
    pooled_event_times: np.ndarray
    n_trees: int
    mtry: int
    nodesize: int
    seed: int
    oob_c_index: Optional[float]
    n: int
    n_events: int
    cause: int = 1
    fit_options: dict = field(default_factory=dict)

    outcome_kind = "survival"
    family = "rsf"
    supports_ci = False
    stratified = False
    strata_levels = ()

    def _encode_x(self, x: Mapping) -> list:
        encoded = []
        for name, kind, levels in self.columns:
            if name not in x:
                raise DataError(f"covariate {name!r} missing from assignment")
            if kind == "continuous":
                encoded.append(float(x[name]))
            else:
                value = x[name]
                if value not in levels:
                    raise DataError(f"unknown level {value!r} for covariate {name!r}")
                encoded.append(levels.index(value))
        return encoded

    def _dataset_columns(self, data: SurvivalDataset) -> tuple:
        """Column arrays for an arbitrary dataset, recoded to fit levels."""
        arrays = []
        for name, kind, levels in self.columns:
            col = data.covariates[name]
            if kind == "continuous":
                arrays.append(col.values)
            else:
                mapping = {lvl: i for i, lvl in enumerate(levels)}
                try:
                    arrays.append(
                        np.asarray([mapping[v] for v in col.values], dtype=np.int64)
                    )
                except KeyError as exc:
                    raise DataError(
                        f"unknown level {exc.args[0]!r} for covariate {name!r}"
                    ) from exc
        return tuple(arrays)

    def _leaf_for(self, tree: SurvivalTree, encoded) -> _Leaf:
        node = tree.root
        while isinstance(node, _Split):
            if node.threshold is not None:
                go_left = encoded[node.cov] <= node.threshold
            else:
                go_left = encoded[node.cov] == node.level_code
            node = node.left if go_left else node.right
        return node

    def ensemble_chf(self, x: Mapping, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        encoded = self._encode_x(x)
        total = np.zeros(times.shape)
        for tree in self.trees:
            leaf = self._leaf_for(tree, encoded)
            total += np.asarray(leaf.chf(times), dtype=float)
        return total / len(self.trees)

    def predict(self, x: Mapping, times, stratum: Optional[str] = None) -> np.ndarray:
        return self.predict_result(x, times, stratum).values

    def predict_result(self, x, times, stratum=None) -> PredictionResult:
        if stratum is not None:
            raise DataError("forest fits are unstratified")
        times = np.asarray(times, dtype=float)
        values = np.exp(-self.ensemble_chf(x, times))
        return PredictionResult(
            values=values, extrapolated=times > self.last_knot(), stratum=None
        )

    def last_knot(self, stratum=None) -> float:
        return (
            float(self.pooled_event_times[-1])
            if self.pooled_event_times.size
            else 0.0
        )

    def risk_scores(self, data: SurvivalDataset, horizon=None) -> np.ndarray:
        """Per-row risk: ensemble cumulative hazard at half the horizon
        (half the last pooled event time when none is given)."""
        h = np.asarray([(horizon if horizon is not None else self.last_knot()) / 2.0])
        columns = self._dataset_columns(data)
        rows = np.arange(data.n)
        totals = np.zeros(data.n)
        for tree in self.trees:
            leaves = _apply_tree_rows(tree.root, columns, rows)
            cache: dict = {}
            for j, leaf in enumerate(leaves):
                key = id(leaf)
                if key not in cache:
                    cache[key] = float(leaf.chf(h)[0])
                totals[j] += cache[key]
        return totals / len(self.trees)

    def refit(self, data: SurvivalDataset, roles: ColumnRoles) -> "ForestFit":
        return fit_rsf(data, roles, **self.fit_options)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "n_trees": self.n_trees,
            "mtry": self.mtry,
            "nodesize": self.nodesize,
            "seed": self.seed,
            "oob_c_index": self.oob_c_index,
            "n": self.n,
            "n_events": self.n_events,
        }


def _build_one_tree(builder_columns, times, event, mtry, nodesize, seed,
                    pooled, tree_index) -> SurvivalTree:
    rng = np.random.default_rng(seed + tree_index)
    draws = np.sort(rng.integers(0, times.size, size=times.size))
    builder = _TreeBuilder(
        builder_columns, times, event, mtry, nodesize, rng, pooled
    )
    return SurvivalTree(root=builder.build(draws), inbag=draws)


def fit_rsf(
    data: SurvivalDataset,
    roles: ColumnRoles,
    n_trees: int = 200,
    mtry: Optional[int] = None,
    nodesize: int = 15,
    seed: int = 0,
    n_jobs: int = 1,
) -> ForestFit:
    """Grow a seeded bootstrap ensemble of log-rank survival trees.

    A candidate split is valid only when both children keep at least
    ``nodesize`` in-bag rows and at least one event; nodes without a valid
    positive-statistic split become Nelson-Aalen leaves.  Trees are
    independent given their seed streams, so ``n_jobs > 1`` builds them in
    parallel processes without changing the result.
    """
    if n_trees < 1:
        raise ModelValidationError("n_trees must be >= 1")
    cov_names = roles.covariate_columns
    p = len(cov_names)
    if mtry is None:
        mtry = max(1, math.ceil(math.sqrt(p)))
    if mtry > p:
        raise ModelValidationError(f"mtry={mtry} exceeds the {p} available covariates")
    if mtry < 1:
        raise ModelValidationError("mtry must be >= 1")
    event = data.status == roles.cause_of_interest
    if int(event.sum()) < 2:
        raise DataError("random survival forests need at least 2 events")

    columns_meta = []
    builder_columns = []
    column_data = []
    for name in cov_names:
        col = data.covariates[name]
        if col.kind == "continuous":
            columns_meta.append((name, "continuous", None))
            builder_columns.append(("continuous", col.values))
            column_data.append(col.values)
        else:
            columns_meta.append((name, "categorical", tuple(col.levels)))
            builder_columns.append(("categorical", col.codes))
            column_data.append(col.codes)

    pooled = np.unique(data.time[event])
    n = data.n
    args = (tuple(builder_columns), data.time, event, mtry, nodesize, seed, pooled)
    if n_jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            futures = [
                pool.submit(_build_one_tree, *args, i) for i in range(n_trees)
            ]
            trees = [f.result() for f in futures]
    else:
        trees = [_build_one_tree(*args, i) for i in range(n_trees)]

    oob = _oob_c_index(trees, tuple(column_data), data.time, event)
    return ForestFit(
        trees=tuple(trees),
        columns=tuple(columns_meta),
        column_data=tuple(column_data),
        pooled_event_times=pooled,
        n_trees=n_trees,
        mtry=mtry,
        nodesize=nodesize,
        seed=seed,
        oob_c_index=oob,
        n=n,
        n_events=int(event.sum()),
        cause=roles.cause_of_interest,
        fit_options={
            "n_trees": n_trees,
            "mtry": mtry,
            "nodesize": nodesize,
            "seed": seed,
        },
    )


def _oob_c_index(trees, column_data, times, event) -> Optional[float]:
    """Out-of-bag concordance with per-row ensemble mortality as the risk."""
    n = times.size
    totals = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    all_rows = np.arange(n)
    for tree in trees:
        oob = np.setdiff1d(all_rows, tree.inbag)
        if oob.size == 0:
            continue
        leaves = _apply_tree_rows(tree.root, column_data, oob)
        for j, leaf in zip(oob, leaves):
            totals[j] += leaf.mortality
            counts[j] += 1
    have = counts > 0
    if int(have.sum()) < 2 or not np.any(event[have]):
        return None
    scores = totals[have] / counts[have]
    try:
        result = c_index(times[have], event[have].astype(int), scores)
    except DataError:
        return None
    return result.value


def predict_survival_rsf(fit: ForestFit, x: Mapping, times) -> PredictionResult:
    """S(t|x) = exp(-ensemble CHF(t|x)); constant beyond the pooled grid."""
    return fit.predict_result(x, times)
