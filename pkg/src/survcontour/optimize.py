"""Newton-Raphson maximization with monotone step-halving.

One loop serves the partial-likelihood and parametric fitters: relative
objective change < tol_objective or max |gradient| < tol_gradient stops,
any decrease triggers step halving (up to max_halvings), and a caller-
supplied divergence check can abort with a nonconvergence error.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonconvergenceError


def _ascent_direction(grad, hess):
    """Newton step when it points uphill; otherwise damp the hessian
    toward gradient ascent (the likelihoods are concave near the optimum
    but not necessarily far from it)."""

    def usable(step):
        return (
            step is not None
            and np.all(np.isfinite(step))
            and float(grad @ step) > 0.0
        )

    try:
        step = -np.linalg.solve(hess, grad)
    except np.linalg.LinAlgError:
        step = None
    if usable(step):
        return step
    eye = np.eye(grad.size)
    lam = max(float(np.max(np.abs(np.diag(hess)))), 1.0) * 1e-4
    for _ in range(30):
        try:
            step = -np.linalg.solve(hess - lam * eye, grad)
        except np.linalg.LinAlgError:
            step = None
        if usable(step):
            return step
        lam *= 10.0
    norm = float(np.max(np.abs(grad)))
    return grad / max(norm, 1.0)


@dataclass
class NewtonResult:
    params: np.ndarray
    objective: float
    gradient: np.ndarray
    hessian: np.ndarray
    trace: list
    converged: bool
    iterations: int


def newton_maximize(
    objective_fn,
    x0,
    max_iter: int = 25,
    tol_objective: float = 1e-9,
    tol_gradient: float = 1e-9,
    max_halvings: int = 10,
    divergence_check=None,
) -> NewtonResult:
    """Maximize a twice-differentiable objective.

    ``objective_fn(x)`` must return (value, gradient, hessian).  The
    hessian is that of the objective (negative definite near a maximum).
    """
    x = np.asarray(x0, dtype=float).copy()
    value, grad, hess = objective_fn(x)
    if not np.isfinite(value):
        raise NonconvergenceError("objective not finite at the starting point")
    trace = [value]
    if x.size == 0:
        return NewtonResult(x, value, grad, hess, trace, True, 0)

    converged = False
    iterations = 0
    for iteration in range(1, max_iter + 1):
        iterations = iteration
        if np.max(np.abs(grad)) < tol_gradient:
            converged = True
            break
        step = _ascent_direction(grad, hess)

        accepted = False
        for halving in range(max_halvings + 1):
            candidate = x + step / (2.0**halving)
            cand_value, cand_grad, cand_hess = objective_fn(candidate)
            if np.isfinite(cand_value) and cand_value >= value - 1e-14:
                x, new_value = candidate, cand_value
                grad, hess = cand_grad, cand_hess
                accepted = True
                break
        if not accepted:
            # No uphill step found: treat the current point as the optimum
            # if the gradient is already small, otherwise fail.
            if np.max(np.abs(grad)) < 1e-6:
                converged = True
                break
            raise NonconvergenceError(
                f"step-halving exhausted at iteration {iteration}",
                iterations=iteration,
            )

        if divergence_check is not None:
            divergence_check(x)

        rel_change = abs(new_value - value) / (abs(value) + 1e-10)
        trace.append(new_value)
        improved_value = new_value
        value = improved_value
        if rel_change < tol_objective or np.max(np.abs(grad)) < tol_gradient:
            converged = True
            break

    return NewtonResult(
        params=x,
        objective=value,
        gradient=grad,
        hessian=hess,
        trace=trace,
        converged=converged,
        iterations=iterations,
    )


def check_flat_likelihood(result: NewtonResult, objective_fn, scales,
                          trigger: float = 5.0, collapse: float = 1e-6) -> None:
    """Detect monotone-likelihood (separation) pseudo-convergence.

    A plateauing partial likelihood satisfies the gradient tolerance at a
    large but arbitrary coefficient, so a cap on the iterates alone cannot
    fire.  When a standardized coefficient is implausibly large, compare
    the observed information along it with the information at zero: a
    collapse by ``collapse`` means the maximum sits at infinity.
    """
    params = result.params
    if params.size == 0:
        return
    scales = np.asarray(scales, dtype=float)
    if np.max(np.abs(params * scales)) <= trigger:
        return
    s = np.diag(scales)
    info_hat = s @ (-result.hessian) @ s
    _, _, h0 = objective_fn(np.zeros_like(params))
    info_0 = s @ (-h0) @ s
    eig_hat = np.linalg.eigvalsh(info_hat)[0]
    eig_0 = np.linalg.eigvalsh(info_0)[0]
    if eig_hat < collapse * max(eig_0, 1e-300):
        raise NonconvergenceError("nonconvergence: possible monotone likelihood")
