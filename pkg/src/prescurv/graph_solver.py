"""Dirichlet solver for the prescribed-curvature graph equation.

On a planar rectangle with exact Dirichlet data the unknown height g
satisfies, node by node,

    sigma_k(lambda) = H(x, g) * (1 + |Dg|^2)^{-q/2},

where lambda are the principal curvatures of the graph {(x, g(x))} with
respect to the upward normal (-Dg, 1)/w.  The sign is fixed so the upper
hemisphere cap g = sqrt(R^2 - |x|^2) has lambda = (1/R, 1/R); admissible
spectra then live in Gamma_k for positive right-hand sides.

Verification is by manufactured solutions: a closed-form surface is pushed
through the operator to define H, making it the exact solution.  The
interior curvature-bound probe tabulates sup|A| ratios across q; boundary
|A| uses one-sided stencils and is probe-only, never part of the solve.

Extension point (not implemented): quotient operators sigma_k/sigma_l on
graphs.  The residual and admissibility plumbing would carry over, but the
right-hand-side structure is untested territory and deliberately left out.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConeViolationError, ConfigError, ConstructionError
from .mat2 import eigvalsh_sym, inv_sqrt_spd
from .newton_core import Evaluation, damped_newton
from .symmfunc import sigma

GRAPH_DIM = 2


# ---------------------------------------------------------------------------
# grid


@dataclass(frozen=True)
class RectGrid:
    a: float
    b: float
    c: float
    d: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError("need at least 4 nodes per axis")
        if not (self.b > self.a and self.d > self.c):
            raise ValueError("empty rectangle")

    @property
    def hx(self):
        return (self.b - self.a) / (self.nx - 1)

    @property
    def hy(self):
        return (self.d - self.c) / (self.ny - 1)

    @property
    def x1(self):
        return self.a + self.hx * np.arange(self.nx)

    @property
    def x2(self):
        return self.c + self.hy * np.arange(self.ny)

    def meshes(self):
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    @property
    def n_interior(self):
        return (self.nx - 2) * (self.ny - 2)

    def boundary_mask(self):
        m = np.zeros((self.nx, self.ny), dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m


def _d1(f, axis, h):
    """First derivative on the full grid: centered interior, second-order
    one-sided at the two edges (probe usage only)."""
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return np.moveaxis(out, 0, axis)


def _d2(f, axis, h):
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return np.moveaxis(out, 0, axis)


# ---------------------------------------------------------------------------
# problem data


class GraphRHS:
    """Right-hand-side data H: polynomial in (x1, x2, g) or fixed samples."""

    def __init__(self, poly=None, samples=None):
        if (poly is None) == (samples is None):
            raise ConfigError("H must be given either as a polynomial or as samples")
        self.poly = poly
        self.samples = None if samples is None else np.asarray(samples, dtype=float)
        if self.samples is not None and np.any(self.samples <= 0.0):
            raise ConfigError("sampled H must be positive everywhere")

    def interior(self, grid, g_full):
        if self.samples is not None:
            return self.samples[1:-1, 1:-1]
        X1, X2 = grid.meshes()
        vals = self.poly(X1[1:-1, 1:-1], X2[1:-1, 1:-1], g_full[1:-1, 1:-1])
        return vals


@dataclass
class GraphProblem:
    grid: RectGrid
    k: int
    q: float
    H: GraphRHS
    boundary: np.ndarray  # full (nx, ny) array; only the boundary ring is used

    def __post_init__(self):
        if not 1 <= self.k <= GRAPH_DIM:
            raise ConfigError(f"k={self.k} out of range for {GRAPH_DIM}-dimensional graphs")
        if not math.isfinite(self.q):
            raise ConfigError("q must be finite")
        if self.q > 1.0:
            warnings.warn("q > 1 is outside the interior curvature-bound "
                          "hypothesis; runs may fail", stacklevel=2)
        self.boundary = np.asarray(self.boundary, dtype=float)
        if self.boundary.shape != (self.grid.nx, self.grid.ny):
            raise ConfigError("boundary array must cover the full grid")


@dataclass
class GraphField:
    """Height samples on the full grid; boundary entries are the Dirichlet data."""

    grid: RectGrid
    g: np.ndarray

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=float)
        if self.g.shape != (self.grid.nx, self.grid.ny):
            raise ValueError("g shape does not match the grid")

    def w_full(self):
        gx = _d1(self.g, 0, self.grid.hx)
        gy = _d1(self.g, 1, self.grid.hy)
        return np.sqrt(1.0 + gx**2 + gy**2)


# ---------------------------------------------------------------------------
# pointwise shape


def graph_shape(Dg, D2g):
    """Principal curvatures and |A| of a graph point from its derivatives.

    Dg has shape (..., 2), D2g shape (..., 2, 2).  Curvatures are the
    eigenvalues of g^{-1/2} (-D2g/w) g^{-1/2} with metric
    g = I + Dg Dg^T: the cap-positive convention.
    """
    Dg = np.asarray(Dg, dtype=float)
    D2g = np.asarray(D2g, dtype=float)
    p1, p2 = Dg[..., 0], Dg[..., 1]
    w = np.sqrt(1.0 + p1**2 + p2**2)
    G = np.empty(Dg.shape[:-1] + (2, 2))
    G[..., 0, 0] = 1.0 + p1**2
    G[..., 0, 1] = p1 * p2
    G[..., 1, 0] = p1 * p2
    G[..., 1, 1] = 1.0 + p2**2
    b = -D2g / w[..., None, None]
    gis = inv_sqrt_spd(G)
    S = gis @ b @ gis
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    lam = eigvalsh_sym(S)
    return lam, np.sqrt(np.sum(lam**2, axis=-1))


def _interior_derivatives(grid, g):
    hx, hy = grid.hx, grid.hy
    gx = (g[2:, 1:-1] - g[:-2, 1:-1]) / (2 * hx)
    gy = (g[1:-1, 2:] - g[1:-1, :-2]) / (2 * hy)
    gxx = (g[2:, 1:-1] - 2 * g[1:-1, 1:-1] + g[:-2, 1:-1]) / hx**2
    gyy = (g[1:-1, 2:] - 2 * g[1:-1, 1:-1] + g[1:-1, :-2]) / hy**2
    gxy = (g[2:, 2:] - g[2:, :-2] - g[:-2, 2:] + g[:-2, :-2]) / (4 * hx * hy)
    Dg = np.stack([gx, gy], axis=-1)
    D2g = np.empty(gx.shape + (2, 2))
    D2g[..., 0, 0] = gxx
    D2g[..., 0, 1] = gxy
    D2g[..., 1, 0] = gxy
    D2g[..., 1, 1] = gyy
    return Dg, D2g


def _soft_evaluate(g_int_flat, prob):
    grid = prob.grid
    g = prob.boundary.copy()
    g[1:-1, 1:-1] = g_int_flat.reshape(grid.nx - 2, grid.ny - 2)
    if not np.all(np.isfinite(g)):
        return Evaluation(np.full(g_int_flat.size, 1e30), False, -math.inf, {})
    Dg, D2g = _interior_derivatives(grid, g)
    lam, _ = graph_shape(Dg, D2g)
    margin = sigma(lam, 1)
    for l in range(2, prob.k + 1):
        margin = np.minimum(margin, sigma(lam, l))
    cone_margin = float(margin.min())
    # mean curvature (k = 1) is elliptic on every graph, so the cone gate
    # only applies to the genuinely fully nonlinear orders
    admissible = cone_margin > 0.0 if prob.k >= 2 else True
    w = np.sqrt(1.0 + Dg[..., 0] ** 2 + Dg[..., 1] ** 2)
    H_int = prob.H.interior(grid, g)
    res = sigma(lam, prob.k) - H_int * w ** (-prob.q)
    aux = {"H_min": float(H_int.min()), "res_norm2": float(np.linalg.norm(res))}
    return Evaluation(res.ravel(), admissible, cone_margin, aux)


def graph_residual(field, prob):
    """Per-interior-node residual sigma_k(lambda) - H w^{-q}.

    Boundary entries of the field are replaced by the problem's Dirichlet
    data; inadmissible interior spectra raise with the offending nodes.
    """
    ev = _soft_evaluate(field.g[1:-1, 1:-1].ravel(), prob)
    if not ev.admissible:
        g = prob.boundary.copy()
        g[1:-1, 1:-1] = field.g[1:-1, 1:-1]
        Dg, D2g = _interior_derivatives(prob.grid, g)
        lam, _ = graph_shape(Dg, D2g)
        ok = np.ones(lam.shape[:-1], dtype=bool)
        for l in range(1, prob.k + 1):
            ok &= sigma(lam, l) > 0.0
        bad = np.argwhere(~ok) + 1  # report in full-grid indices
        raise ConeViolationError(
            f"spectrum outside Gamma_{prob.k} at {len(bad)} interior node(s), "
            f"first {bad[:5].tolist()}", nodes=bad.tolist())
    if ev.aux["H_min"] <= 0.0:
        raise ConfigError("H must stay positive on the working range")
    return ev.residual.reshape(prob.grid.nx - 2, prob.grid.ny - 2)


# ---------------------------------------------------------------------------
# manufactured solutions


class CapSolution:
    """Upper-hemisphere cap g = g0 + sqrt(R^2 - |x - c|^2), tilt optional."""

    def __init__(self, radius, center=(0.0, 0.0), offset=0.0, tilt=(0.0, 0.0)):
        self.R = float(radius)
        self.center = (float(center[0]), float(center[1]))
        self.offset = float(offset)
        self.tilt = (float(tilt[0]), float(tilt[1]))

    def height(self, x1, x2):
        r2 = (x1 - self.center[0]) ** 2 + (x2 - self.center[1]) ** 2
        if np.any(r2 >= self.R**2):
            raise ConstructionError("cap domain exceeds its radius")
        return (self.offset + np.sqrt(self.R**2 - r2)
                + self.tilt[0] * x1 + self.tilt[1] * x2)

    def derivatives(self, x1, x2):
        u1, u2 = x1 - self.center[0], x2 - self.center[1]
        s = np.sqrt(self.R**2 - u1**2 - u2**2)
        Dg = np.stack([-u1 / s + self.tilt[0], -u2 / s + self.tilt[1]], axis=-1)
        D2g = np.empty(np.shape(s) + (2, 2))
        D2g[..., 0, 0] = -1.0 / s - u1 * u1 / s**3
        D2g[..., 0, 1] = -u1 * u2 / s**3
        D2g[..., 1, 0] = D2g[..., 0, 1]
        D2g[..., 1, 1] = -1.0 / s - u2 * u2 / s**3
        return Dg, D2g


class ParaboloidSolution:
    """g = g0 + alpha |x - c|^2; admissible in Gamma_k only for alpha < 0
    under the cap-positive sign convention (the surface must bend the same
    way as the cap)."""

    def __init__(self, alpha, center=(0.0, 0.0), offset=0.0):
        self.alpha = float(alpha)
        self.center = (float(center[0]), float(center[1]))
        self.offset = float(offset)

    def height(self, x1, x2):
        return (self.offset + self.alpha * ((x1 - self.center[0]) ** 2
                                            + (x2 - self.center[1]) ** 2))

    def derivatives(self, x1, x2):
        u1, u2 = x1 - self.center[0], x2 - self.center[1]
        Dg = np.stack([2 * self.alpha * u1, 2 * self.alpha * u2], axis=-1)
        D2g = np.zeros(np.shape(u1) + (2, 2))
        D2g[..., 0, 0] = 2 * self.alpha
        D2g[..., 1, 1] = 2 * self.alpha
        return Dg, D2g


def manufactured_H(solution, k, q, grid):
    """Push an exact solution through the operator: H := sigma_k(lambda) w^q.

    With this H the given surface solves the equation exactly, so the solver
    can be verified against it.  Raises when the surface is inadmissible
    anywhere on the grid.
    """
    X1, X2 = grid.meshes()
    Dg, D2g = solution.derivatives(X1, X2)
    lam, _ = graph_shape(Dg, D2g)
    for l in range(1, k + 1):
        if np.any(sigma(lam, l) <= 0.0):
            raise ConstructionError(
                f"manufactured surface leaves Gamma_{k} on the domain (sigma_{l} <= 0)")
    w = np.sqrt(1.0 + Dg[..., 0] ** 2 + Dg[..., 1] ** 2)
    return sigma(lam, k) * w**q


def exact_field(solution, grid):
    X1, X2 = grid.meshes()
    return GraphField(grid, solution.height(X1, X2))


def dirichlet_boundary_from(solution, grid):
    """Full-grid array whose boundary ring carries the exact heights."""
    X1, X2 = grid.meshes()
    return solution.height(X1, X2)


# ---------------------------------------------------------------------------
# solver


_GROUP_CACHE = {}


def _rect_groups(grid):
    key = (grid.nx, grid.ny)
    if key in _GROUP_CACHE:
        return _GROUP_CACHE[key]
    mx, my = grid.nx - 2, grid.ny - 2

    def flat(i, j):
        return i * my + j

    reads = [set() for _ in range(mx * my)]
    for i in range(mx):
        for j in range(my):
            row = flat(i, j)
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    ci, cj = i + di, j + dj
                    if 0 <= ci < mx and 0 <= cj < my:
                        reads[flat(ci, cj)].add(row)
    groups = []
    for ri in range(3):
        for rj in range(3):
            grp = np.array([flat(i, j) for i in range(ri, mx, 3)
                            for j in range(rj, my, 3)], dtype=np.int64)
            if grp.size:
                groups.append(grp)
    _GROUP_CACHE[key] = (groups, reads)
    return groups, reads


def dirichlet_newton_solve(start, prob, tol=1e-10, max_iter=30):
    """Damped Newton on the interior unknowns, boundary held at the data.

    Same contract as the sphere solver: forward-difference Jacobian in
    structurally orthogonal groups, Armijo backtracking, cone veto.
    """
    ev0 = _soft_evaluate(start.g[1:-1, 1:-1].ravel(), prob)
    if not ev0.admissible:
        raise ConeViolationError("start field is not admissible on the interior")
    groups, reads = _rect_groups(prob.grid)
    x, report = damped_newton(
        start.g[1:-1, 1:-1].ravel(),
        lambda x: _soft_evaluate(x, prob),
        groups, reads, tol, max_iter,
    )
    g = prob.boundary.copy()
    g[1:-1, 1:-1] = x.reshape(prob.grid.nx - 2, prob.grid.ny - 2)
    return GraphField(prob.grid, g), report


# ---------------------------------------------------------------------------
# interior curvature-bound probe


@dataclass
class CurvatureBoundProbe:
    sup_interior_A: float
    sup_boundary_A: float
    ratio: float
    q: float
    k: int
    grid_shape: tuple


def curvature_bound_probe(field, prob):
    """sup|A| over interior and boundary nodes and their bound ratio.

    |A| = sqrt(lambda_1^2 + lambda_2^2) from full-grid derivatives; the
    boundary values come from one-sided second-order stencils and serve the
    probe only.
    """
    grid = prob.grid
    g = field.g
    Dg = np.stack([_d1(g, 0, grid.hx), _d1(g, 1, grid.hy)], axis=-1)
    D2g = np.empty(g.shape + (2, 2))
    D2g[..., 0, 0] = _d2(g, 0, grid.hx)
    D2g[..., 1, 1] = _d2(g, 1, grid.hy)
    mixed = _d1(_d1(g, 0, grid.hx), 1, grid.hy)
    D2g[..., 0, 1] = mixed
    D2g[..., 1, 0] = mixed
    _, A = graph_shape(Dg, D2g)
    mask = grid.boundary_mask()
    sup_int = float(A[~mask].max())
    sup_bnd = float(A[mask].max())
    return CurvatureBoundProbe(
        sup_interior_A=sup_int,
        sup_boundary_A=sup_bnd,
        ratio=sup_int / (1.0 + sup_bnd),
        q=prob.q,
        k=prob.k,
        grid_shape=(grid.nx, grid.ny),
    )


@dataclass
class CampaignRow:
    q: float
    nx: int
    ny: int
    sup_int_A: float
    sup_bnd_A: float
    ratio: float
    converged: bool


def bound_probe_campaign(qs, grid_sizes, k=2, radius=2.0, bounds=(-1.0, 1.0, -1.0, 1.0),
                         perturbation=1e-2, tol=1e-9, max_iter=40):
    """Solve the cap-manufactured problem across q and grids; tabulate the
    interior/boundary curvature ratios.  Nonconvergent runs are recorded,
    not raised (q > 1 exploration is expected to be allowed to fail)."""
    from .errors import NonconvergenceError

    rows = []
    cap = CapSolution(radius)
    for q in qs:
        for (nx, ny) in grid_sizes:
            grid = RectGrid(*bounds, nx, ny)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                prob = GraphProblem(grid, k, q, GraphRHS(samples=manufactured_H(cap, k, q, grid)),
                                    dirichlet_boundary_from(cap, grid))
            X1, X2 = grid.meshes()
            bump = (perturbation * np.sin(math.pi * (X1 - bounds[0]) / (bounds[1] - bounds[0]))
                    * np.sin(math.pi * (X2 - bounds[2]) / (bounds[3] - bounds[2])))
            start = GraphField(grid, exact_field(cap, grid).g + bump)
            try:
                sol, _ = dirichlet_newton_solve(start, prob, tol=tol, max_iter=max_iter)
                probe = curvature_bound_probe(sol, prob)
                rows.append(CampaignRow(q, nx, ny, probe.sup_interior_A,
                                        probe.sup_boundary_A, probe.ratio, True))
            except NonconvergenceError:
                rows.append(CampaignRow(q, nx, ny, math.nan, math.nan, math.nan, False))
    return rows
