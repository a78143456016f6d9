"""Solver for the curvature-measure equation on starshaped surfaces.

The unknown is the radial function rho over S^2; the equation at every
grid node is

    F(A) = u^p * phi(X),        F = sigma_k  (or sigma_k/sigma_l),

with A the second fundamental form, u = <X, nu> the support value and phi
a positive density given as a polynomial in the components of x = X/|X|.
Solutions are found by damped Newton constrained to the Gamma_k cone and
continued from the round-sphere start along phi_t = 1 - t + t*phi.

The quotient operator and exponents p > 1 are accepted as experiments:
runs may legitimately fail to continue, and the failure (with its partial
trace) is the recorded outcome.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConeViolationError,
    ConfigError,
    NonconvergenceError,
    StartRadiusError,
)
from .newton_core import Evaluation, SolveReport, damped_newton
from .polynomials import Poly3
from .sphere_geometry import RadialField, radial_geometry
from .symmfunc import OperatorSpec, sigma

SURFACE_DIM = 2  # the discretized solver targets radial graphs over S^2


@dataclass
class MeasureProblem:
    op: OperatorSpec
    p: float
    phi: Poly3
    grid: object  # SphericalGrid

    def __post_init__(self):
        if self.p == 0.0:
            raise ConfigError("exponent p must be nonzero (the support-power "
                              "gradient bound degenerates at p = 0)")
        if not 1 <= self.op.k <= SURFACE_DIM:
            raise ConfigError(f"operator order k={self.op.k} out of range for "
                              f"surfaces of dimension {SURFACE_DIM}")
        hom = self.op.homogeneity
        if hom + self.p == 0.0:
            raise ConfigError("k + p = 0 leaves the round-sphere start equation "
                              "without a positive root")
        if self.p > 1.0:
            warnings.warn("p > 1 is outside the guaranteed existence range; "
                          "continuation is allowed to fail", stacklevel=2)
        if self.op.kind == "quotient":
            warnings.warn("quotient operator is experimental; continuation is "
                          "allowed to fail", stacklevel=2)
        phi_vals = self.phi.eval_unit_vectors(self.grid.nodes)
        if np.any(phi_vals <= 0.0):
            raise ConfigError("phi must be positive at every grid node")

    def phi_values(self):
        return self.phi.eval_unit_vectors(self.grid.nodes)


@dataclass
class HomotopyStep:
    t: float
    newton_iters: int
    final_residual: float
    min_cone_margin: float
    min_u: float


@dataclass
class HomotopyTrace:
    steps: list = field(default_factory=list)       # accepted HomotopySteps
    rejections: list = field(default_factory=list)  # (t_attempted, dt, reason)
    success: bool = False


@dataclass
class HomotopySchedule:
    dt_init: float = 0.1
    dt_min: float = 1e-4
    newton_tol: float = 1e-9
    newton_max_iter: int = 30
    oneshot_iters: int = 4   # a step this cheap counts toward dt doubling


@dataclass
class BoundsReport:
    rho_min: float
    rho_max: float
    u_min: float
    sigma1_max: float
    phi_min: float
    phi_max: float
    homogeneity: int
    residual_max: float
    verified: bool


def initial_sphere_radius(op, p, n=SURFACE_DIM):
    """Radius r of the round sphere solving F(1/r, ..., 1/r) = r^p.

    For F = sigma_k the scalar equation is C(n,k) r^{-k} = r^p, so
    r = C(n,k)^{1/(k+p)}; the quotient replaces C(n,k) by C(n,k)/C(n,l)
    and k by k - l.
    """
    if not 1 <= op.k <= n:
        raise StartRadiusError(f"operator order k={op.k} out of range 1..{n}")
    coeff = math.comb(n, op.k)
    if op.kind == "quotient":
        coeff = coeff / math.comb(n, op.l)
    expo = op.homogeneity + p
    if expo == 0.0:
        raise StartRadiusError("degenerate exponent k + p = 0: no positive root")
    return float(coeff ** (1.0 / expo))


def _soft_evaluate(rho_flat, prob, phi_vals):
    """Residual plus admissibility data; never raises inside the solver."""
    grid = prob.grid
    rho = rho_flat.reshape(grid.n_theta, grid.n_phi)
    if np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
        return Evaluation(np.full(rho_flat.size, 1e30), False, -math.inf,
                          {"u_min": -math.inf, "rho_min": float(rho.min())})
    geo = radial_geometry(RadialField(grid, rho))
    lam = geo.principal
    margin = sigma(lam, 1)
    for l in range(2, prob.op.k + 1):
        margin = np.minimum(margin, sigma(lam, l))
    cone_margin = float(margin.min())
    u_min = float(geo.u.min())
    admissible = cone_margin > 0.0 and u_min > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        F = prob.op.value_on_spectrum(lam)
        res = F - geo.u**prob.p * phi_vals
    res = np.where(np.isfinite(res), res, 1e30)
    aux = {"u_min": u_min, "rho_min": float(rho.min()), "rho_max": float(rho.max()),
           "res_norm2": float(np.linalg.norm(res))}
    return Evaluation(res.ravel(), admissible, cone_margin, aux)


def residual(field, prob):
    """Per-node residual F(A) - u^p phi(X); errors on inadmissible input."""
    if field.grid is not prob.grid:
        raise ConfigError("field and problem use different grids")
    ev = _soft_evaluate(field.rho.ravel(), prob, prob.phi_values())
    if not ev.admissible:
        geo = radial_geometry(field)
        lam = geo.principal
        ok = np.ones(lam.shape[:-1], dtype=bool)
        for l in range(1, prob.op.k + 1):
            ok &= sigma(lam, l) > 0.0
        bad = np.argwhere(~ok)
        raise ConeViolationError(
            f"spectrum outside Gamma_{prob.op.k} at {len(bad)} node(s), "
            f"first {bad[:5].tolist()}", nodes=bad.tolist())
    return ev.residual.reshape(field.grid.n_theta, field.grid.n_phi)


_GROUP_CACHE = {}


def _grid_groups(grid):
    # groups depend only on the grid shape, so key by it (ids get recycled)
    key = (grid.n_theta, grid.n_phi)
    if key not in _GROUP_CACHE:
        _GROUP_CACHE[key] = grid.column_groups()
    return _GROUP_CACHE[key]


def newton_solve(start, prob, tol=1e-10, max_iter=30):
    """Damped Newton from an admissible start field.

    Returns (RadialField, SolveReport); raises NonconvergenceError with the
    partial report attached when the cone veto or iteration cap bites.
    """
    phi_vals = prob.phi_values()
    groups, reads = _grid_groups(prob.grid)
    ev0 = _soft_evaluate(start.rho.ravel(), prob, phi_vals)
    if not ev0.admissible:
        raise ConeViolationError("start field is not admissible for the solve")
    x, report = damped_newton(
        start.rho.ravel(),
        lambda x: _soft_evaluate(x, prob, phi_vals),
        groups, reads, tol, max_iter,
    )
    out = RadialField(prob.grid, x.reshape(start.rho.shape))
    return out, report


def _problem_at_t(prob, t):
    """Interpolated data phi_t = 1 - t + t*phi as a fresh problem."""
    terms = [(1.0 - t, (0, 0, 0))]
    terms += [(t * c, pw) for c, pw in prob.phi.terms]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return MeasureProblem(prob.op, prob.p, Poly3(tuple(terms)), prob.grid)


def homotopy_solve(prob, schedule=None):
    """Continuation from the round-sphere start at t = 0 up to t = 1.

    Advances t adaptively: halve the step when Newton fails, double it
    after two consecutive cheap successes, floor at schedule.dt_min.  On
    step underflow a NonconvergenceError carries the partial trace (the
    expected outcome for out-of-theory parameters such as p > 1).
    """
    sched = schedule or HomotopySchedule()
    trace = HomotopyTrace()
    r0 = initial_sphere_radius(prob.op, prob.p)
    field = RadialField.constant(prob.grid, r0)

    def solve_at(t, start):
        sub = _problem_at_t(prob, t)
        out, rep = newton_solve(start, sub, tol=sched.newton_tol,
                                max_iter=sched.newton_max_iter)
        last_aux = rep.aux_history[-1]
        trace.steps.append(HomotopyStep(
            t=t, newton_iters=rep.iterations, final_residual=rep.final_residual,
            min_cone_margin=min(rep.cone_margin_history),
            min_u=min(a["u_min"] for a in rep.aux_history)))
        return out, rep

    field, rep = solve_at(0.0, field)

    # constant data (phi identically 1) makes every phi_t the same problem:
    # carry the t=0 solution straight to t=1
    tail = _soft_evaluate(field.rho.ravel(), _problem_at_t(prob, 1.0),
                          _problem_at_t(prob, 1.0).phi_values())
    if tail.admissible and float(np.abs(tail.residual).max()) <= sched.newton_tol:
        field, rep = solve_at(1.0, field)
        trace.success = True
        return field, trace

    t, dt = 0.0, sched.dt_init
    streak = 0
    while t < 1.0:
        t_try = min(t + dt, 1.0)
        try:
            field_try, rep = solve_at(t_try, field)
        except NonconvergenceError as exc:
            trace.rejections.append((t_try, dt, str(exc)))
            dt *= 0.5
            if dt < sched.dt_min:
                raise NonconvergenceError(
                    f"continuation stalled at t = {t:.6f} (step underflow)",
                    diagnostics=trace)
            continue
        field, t = field_try, t_try
        if rep.iterations <= sched.oneshot_iters:
            streak += 1
        else:
            streak = 0
        if streak >= 2:
            dt *= 2.0
            streak = 0
    trace.success = True
    return field, trace


def verify_apriori_bounds(field, prob, residual_tol=1e-8):
    """Bound report for a computed field; labeled unverified when the
    residual shows it is not a solution at the stated tolerance."""
    geo = radial_geometry(field)
    phi_vals = prob.phi_values()
    ev = _soft_evaluate(field.rho.ravel(), prob, phi_vals)
    res_max = float(np.abs(ev.residual).max())
    lam = geo.principal
    return BoundsReport(
        rho_min=float(field.rho.min()),
        rho_max=float(field.rho.max()),
        u_min=float(geo.u.min()),
        sigma1_max=float(sigma(lam, 1).max()),
        phi_min=float(phi_vals.min()),
        phi_max=float(phi_vals.max()),
        homogeneity=prob.op.homogeneity,
        residual_max=res_max,
        verified=bool(ev.admissible and res_max <= residual_tol),
    )


@dataclass
class UniquenessProbe:
    converged: list
    max_distance: float
    distances: np.ndarray
    complete: bool


def uniqueness_probe(prob, starts, tol=1e-10, max_iter=40):
    """Solve from several starts; small pairwise distances evidence the
    uniqueness of the admissible solution at desk scale."""
    fields, converged = [], []
    for start in starts:
        try:
            out, _ = newton_solve(start, prob, tol=tol, max_iter=max_iter)
            fields.append(out)
            converged.append(True)
        except NonconvergenceError:
            fields.append(None)
            converged.append(False)
    m = len(starts)
    dist = np.full((m, m), np.nan)
    best = 0.0
    for i in range(m):
        for j in range(i, m):
            if fields[i] is not None and fields[j] is not None:
                d = float(np.abs(fields[i].rho - fields[j].rho).max())
                dist[i, j] = dist[j, i] = d
                best = max(best, d)
    return UniquenessProbe(converged=converged, max_distance=best,
                           distances=dist, complete=all(converged))
