"""Right-continuous step functions.

Every nonparametric curve in the package (survival curves, cumulative
hazards, censoring-distribution curves, cumulative incidence) is one of
these: a value before the first knot, then a new value at each knot,
evaluated right-continuously.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as_readonly(a) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class StepFunction:
    """A right-continuous step map t -> value.

    Parameters
    ----------
    knots : strictly ascending times at which the value changes.
    values : the value taken on [knots[i], knots[i+1]).
    initial_value : the value on (-inf, knots[0]); 1.0 for survival-type
        curves, 0.0 for cumulative-type curves.
    """

    knots: np.ndarray
    values: np.ndarray
    initial_value: float = 1.0

    def __post_init__(self):
        knots = _as_readonly(self.knots)
        values = _as_readonly(self.values)
        if knots.ndim != 1 or values.ndim != 1 or knots.shape != values.shape:
            raise ValueError("knots and values must be 1-d arrays of equal length")
        if knots.size and np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly ascending")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "initial_value", float(self.initial_value))

    def __call__(self, t):
        """Evaluate right-continuously: value of the last knot <= t."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.knots, t, side="right") - 1
        padded = np.concatenate(([self.initial_value], self.values))
        out = padded[idx + 1]
        return out if out.ndim else float(out)

    def left_limit(self, t):
        """Evaluate the left limit: value of the last knot strictly < t."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.knots, t, side="left") - 1
        padded = np.concatenate(([self.initial_value], self.values))
        out = padded[idx + 1]
        return out if out.ndim else float(out)

    @property
    def last_knot(self) -> float:
        return float(self.knots[-1]) if self.knots.size else 0.0

    def is_non_increasing(self, tol: float = 0.0) -> bool:
        seq = np.concatenate(([self.initial_value], self.values))
        return bool(np.all(np.diff(seq) <= tol))

    def is_non_decreasing(self, tol: float = 0.0) -> bool:
        seq = np.concatenate(([self.initial_value], self.values))
        return bool(np.all(np.diff(seq) >= -tol))

    def scaled(self, factor: float, transform=None) -> "StepFunction":
        """New step function with values transformed by ``factor * value``
        (or an arbitrary elementwise ``transform``)."""
        if transform is None:
            vals = self.values * factor
            init = self.initial_value * factor
        else:
            vals = transform(self.values)
            init = float(transform(np.asarray([self.initial_value]))[0])
        return StepFunction(self.knots, vals, initial_value=init)
