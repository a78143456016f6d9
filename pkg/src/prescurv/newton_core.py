"""Damped Newton iteration shared by the sphere and graph solvers.

The Jacobian is assembled by forward differences of the residual with the
per-column step sqrt(machine eps) * (1 + |x_j|).  Columns whose stencils
never meet the same residual row are perturbed together (structurally
orthogonal groups), which reproduces the per-column entries exactly while
costing only one residual evaluation per group.  Factorization is dense,
sized for desk-scale grids.

Damping is backtracking with factor 1/2 and Armijo constant 1e-4 on the
squared residual norm, plus an admissibility veto: a trial point whose
spectrum leaves the cone (margin <= 0) or whose support function turns
nonpositive anywhere is rejected no matter how good its residual.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonconvergenceError

ARMIJO_C = 1e-4
MAX_BACKTRACKS = 40
_SQRT_EPS = math.sqrt(np.finfo(float).eps)


@dataclass
class Evaluation:
    """Soft residual evaluation: never raises on admissibility loss."""

    residual: np.ndarray
    admissible: bool
    cone_margin: float
    aux: dict


@dataclass
class SolveReport:
    converged: bool = False
    iterations: int = 0
    residual_history: list = field(default_factory=list)   # max norms
    step_history: list = field(default_factory=list)       # accepted damping factors
    cone_margin_history: list = field(default_factory=list)
    aux_history: list = field(default_factory=list)
    message: str = ""

    @property
    def final_residual(self):
        return self.residual_history[-1] if self.residual_history else math.inf


def fd_jacobian(x, res0, eval_fn, groups, reads):
    """Forward-difference Jacobian using structurally orthogonal columns."""
    n = x.size
    J = np.zeros((n, n))
    for grp in groups:
        eps = _SQRT_EPS * (1.0 + np.abs(x[grp]))
        xp = x.copy()
        xp[grp] += eps
        dres = eval_fn(xp).residual - res0
        for col, e in zip(grp, eps):
            rows = reads[col]
            J[rows, col] = dres[rows] / e
    return J


def damped_newton(x0, eval_fn, groups, reads, tol, max_iter):
    """Newton iteration on a flat unknown vector.

    eval_fn(x) -> Evaluation;  the start must be admissible.  Returns
    (x, SolveReport); raises NonconvergenceError (with the report attached
    as diagnostics) when the line search stalls or max_iter runs out.
    """
    x = np.asarray(x0, dtype=float).copy()
    report = SolveReport()
    ev = eval_fn(x)
    if not ev.admissible:
        raise NonconvergenceError("start point is not admissible", diagnostics=report)
    reads_idx = [np.fromiter(r, dtype=np.int64) for r in reads]
    rnorm = float(np.abs(ev.residual).max())
    report.residual_history.append(rnorm)
    report.cone_margin_history.append(ev.cone_margin)
    report.aux_history.append(ev.aux)
    while rnorm > tol:
        if report.iterations >= max_iter:
            report.message = f"no convergence in {max_iter} iterations"
            raise NonconvergenceError(report.message, diagnostics=(report, x))
        J = fd_jacobian(x, ev.residual, eval_fn, groups, reads_idx)
        try:
            step = np.linalg.solve(J, -ev.residual)
        except np.linalg.LinAlgError as exc:
            report.message = f"singular Jacobian: {exc}"
            raise NonconvergenceError(report.message, diagnostics=(report, x))
        f0 = float(ev.residual @ ev.residual)
        s = 1.0
        accepted = None
        for _ in range(MAX_BACKTRACKS):
            trial = x + s * step
            ev_trial = eval_fn(trial)
            f_trial = float(ev_trial.residual @ ev_trial.residual)
            if ev_trial.admissible and f_trial <= (1.0 - 2.0 * ARMIJO_C * s) * f0:
                accepted = (trial, ev_trial, s)
                break
            s *= 0.5
        if accepted is None:
            report.message = "line search found no admissible decreasing step"
            raise NonconvergenceError(report.message, diagnostics=(report, x))
        x, ev, s = accepted
        rnorm = float(np.abs(ev.residual).max())
        report.iterations += 1
        report.residual_history.append(rnorm)
        report.step_history.append(s)
        report.cone_margin_history.append(ev.cone_margin)
        report.aux_history.append(ev.aux)
    report.converged = True
    return x, report
