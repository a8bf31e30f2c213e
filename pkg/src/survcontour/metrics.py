"""Censored-data fit diagnostics: Harrell's concordance index and the
IPCW integrated Brier score."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError
from .stepfun import StepFunction


@dataclass(frozen=True)
class ConcordanceResult:
    value: float
    comparable_pairs: int


@dataclass(frozen=True)
class BrierResult:
    integrated: float
    times: np.ndarray
    values: np.ndarray
    window: tuple  # (0, tau)


@dataclass(frozen=True)
class MetricsReport:
    c_index: float
    comparable_pairs: int
    integrated_brier: Optional[float]
    window: Optional[tuple]
    brier_times: Optional[np.ndarray]
    brier_values: Optional[np.ndarray]

    def to_dict(self) -> dict:
        out = {
            "c_index": self.c_index,
            "comparable_pairs": self.comparable_pairs,
            "integrated_brier": self.integrated_brier,
            "window": list(self.window) if self.window is not None else None,
        }
        if self.brier_times is not None:
            out["brier_times"] = [float(t) for t in self.brier_times]
            out["brier_values"] = [float(v) for v in self.brier_values]
        else:
            out["brier_times"] = None
            out["brier_values"] = None
        return out


def c_index(times, status, risk_scores) -> ConcordanceResult:
    """Harrell's concordance over comparable pairs.

    A pair is comparable when the strictly shorter time belongs to an
    event; it counts as concordant when that subject also has the higher
    risk score, and 1/2 on score ties.
    """
    times = np.asarray(times, dtype=float)
    status = np.asarray(status, dtype=np.int64)
    scores = np.asarray(risk_scores, dtype=float)
    if not (times.shape == status.shape == scores.shape):
        raise DataError("times, status and risk scores must align")
    n = times.size
    shorter = times[:, None] < times[None, :]
    is_event = (status != 0)[:, None]
    comparable = shorter & is_event
    higher = scores[:, None] > scores[None, :]
    tied = scores[:, None] == scores[None, :]
    pairs = int(comparable.sum())
    if pairs == 0:
        raise DataError("no comparable pairs for the concordance index")
    concordant = float((comparable & higher).sum()) + 0.5 * float(
        (comparable & tied).sum()
    )
    return ConcordanceResult(value=concordant / pairs, comparable_pairs=pairs)


def integrated_brier(
    predictions,
    times,
    status,
    grid,
    censoring_survival: StepFunction,
) -> BrierResult:
    """IPCW Brier score curve and its time average over the grid window.

    ``predictions`` is the (n x len(grid)) matrix of predicted survival
    probabilities S(t | x_i).  The weight of subject i at grid time t is
    1/G(T_i-) when the subject had an event by t, 1/G(t) while still under
    observation, 0 otherwise; BS(t) is the weighted mean squared error of
    1[T_i > t] against the prediction, and the integrated score is the
    trapezoidal average over the grid (intended as [0, tau]).
    """
    times = np.asarray(times, dtype=float)
    status = np.asarray(status, dtype=np.int64)
    grid = np.asarray(grid, dtype=float)
    predictions = np.asarray(predictions, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise DataError("grid must contain at least two strictly ascending times")
    n = times.size
    if predictions.shape != (n, grid.size):
        raise DataError("predictions must be an (n x grid) matrix")

    G_at_grid = np.asarray(censoring_survival(grid), dtype=float)
    G_left_subject = np.asarray(censoring_survival.left_limit(times), dtype=float)

    event = status != 0
    past_event = (times[:, None] <= grid[None, :]) & event[:, None]
    still_alive = times[:, None] > grid[None, :]

    if np.any(still_alive & (G_at_grid[None, :] <= 0)):
        raise DataError("censoring support exhausted; shrink tau")
    if np.any(past_event & (G_left_subject[:, None] <= 0)):
        raise DataError("censoring support exhausted; shrink tau")

    with np.errstate(divide="ignore"):
        w = np.zeros((n, grid.size))
        w[past_event] = np.broadcast_to(
            1.0 / np.where(G_left_subject > 0, G_left_subject, np.inf)[:, None],
            w.shape,
        )[past_event]
        w[still_alive] = np.broadcast_to(
            1.0 / np.where(G_at_grid > 0, G_at_grid, np.inf)[None, :], w.shape
        )[still_alive]

    residual = still_alive.astype(float) - predictions
    bs = (w * residual**2).mean(axis=0)
    span = grid[-1] - grid[0]
    ibs = float(np.trapezoid(bs, grid) / span)
    return BrierResult(
        integrated=ibs,
        times=grid,
        values=bs,
        window=(float(grid[0]), float(grid[-1])),
    )


def default_brier_horizon(times, status, censoring_survival: StepFunction) -> float:
    """Largest event time with censoring survival above 0.05."""
    times = np.asarray(times, dtype=float)
    status = np.asarray(status, dtype=np.int64)
    event_times = np.unique(times[status != 0])
    if event_times.size == 0:
        raise DataError("no events; cannot choose a Brier horizon")
    g = np.asarray(censoring_survival(event_times), dtype=float)
    ok = event_times[g > 0.05]
    if ok.size == 0:
        return float(event_times[0])
    return float(ok[-1])
