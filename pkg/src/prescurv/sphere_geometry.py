"""Radial graphs X(x) = rho(x) x over the unit sphere S^2.

Discretization: staggered latitude-longitude grid (colatitude nodes at
(i+1/2) pi/n_theta, no node on a pole), periodic longitude, and cross-pole
ghost rows: the ghost at colatitude -theta_j is the row at +theta_j shifted
by half a revolution.  Scalar fields extend through the pole with parity +1;
longitude-frame vector components flip sign (parity -1).

Sign convention: the second fundamental form is oriented so that the round
sphere of radius r with outward normal has principal curvatures +1/r.  With
a positive right-hand side this makes near-round admissible spectra live in
the Gamma_k cone, which is what the continuation solver needs.

Pole rows of some covariant-Hessian components are one order less accurate
than the interior (the classic lat-lon pole penalty); aggregate health
numbers therefore come in three flavours: plain max, quadrature-weighted L2,
and max over off-pole rows.  structure_equation_residuals monitors this.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import StarshapednessError
from .mat2 import eigvalsh_sym, inv_sqrt_spd


# ---------------------------------------------------------------------------
# grid


@dataclass(frozen=True)
class SphericalGrid:
    n_theta: int
    n_phi: int
    theta: np.ndarray          # (n_theta,) colatitudes
    phi: np.ndarray            # (n_phi,) longitudes
    nodes: np.ndarray          # (n_theta, n_phi, 3) unit vectors
    weights: np.ndarray        # (n_theta, n_phi), sum exactly 4 pi
    e_theta: np.ndarray        # (n_theta, n_phi, 3) unit colatitude tangent
    e_phi: np.ndarray          # (n_theta, n_phi, 3) unit longitude tangent

    @property
    def dtheta(self):
        return math.pi / self.n_theta

    @property
    def dphi(self):
        return 2.0 * math.pi / self.n_phi

    @property
    def pole_shift(self):
        return self.n_phi // 2

    @property
    def n_nodes(self):
        return self.n_theta * self.n_phi

    @property
    def sin_theta(self):
        return np.sin(self.theta)[:, None]

    @property
    def cos_theta(self):
        return np.cos(self.theta)[:, None]

    # -- ghost extension and difference stencils ---------------------------

    def extend(self, f, rows, parity=1.0):
        """Append ``rows`` cross-pole ghost rows above and below ``f``."""
        shift = self.pole_shift
        top = parity * np.roll(f[rows - 1::-1], shift, axis=1)
        bot = parity * np.roll(f[:self.n_theta - rows - 1:-1], shift, axis=1)
        return np.concatenate([top, f, bot], axis=0)

    def d_phi(self, f, order=2):
        h = self.dphi
        if order == 2:
            return (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2 * h)
        return (-np.roll(f, -2, axis=1) + 8 * np.roll(f, -1, axis=1)
                - 8 * np.roll(f, 1, axis=1) + np.roll(f, 2, axis=1)) / (12 * h)

    def d_phiphi(self, f, order=2):
        h = self.dphi
        if order == 2:
            return (np.roll(f, -1, axis=1) - 2 * f + np.roll(f, 1, axis=1)) / h**2
        return (-np.roll(f, -2, axis=1) + 16 * np.roll(f, -1, axis=1) - 30 * f
                + 16 * np.roll(f, 1, axis=1) - np.roll(f, 2, axis=1)) / (12 * h**2)

    def d_theta(self, f, order=2, parity=1.0):
        h = self.dtheta
        if order == 2:
            ext = self.extend(f, 1, parity)
            return (ext[2:] - ext[:-2]) / (2 * h)
        ext = self.extend(f, 2, parity)
        return (-ext[4:] + 8 * ext[3:-1] - 8 * ext[1:-3] + ext[:-4]) / (12 * h)

    def d_thetatheta(self, f, order=2, parity=1.0):
        h = self.dtheta
        if order == 2:
            ext = self.extend(f, 1, parity)
            return (ext[2:] - 2 * ext[1:-1] + ext[:-2]) / h**2
        ext = self.extend(f, 2, parity)
        return (-ext[4:] + 16 * ext[3:-1] - 30 * ext[2:-2]
                + 16 * ext[1:-3] - ext[:-4]) / (12 * h**2)

    # -- stencil table for the finite-difference Jacobian -------------------

    def stencil_neighbors(self):
        """Flat-index table: row i lists every node the second-order
        derivative stencils at node i read (the node itself included).
        Pole rows read their cross-pole ghost columns; with n_phi >= 8 the
        nine reads are always distinct."""
        nt, np_, shift = self.n_theta, self.n_phi, self.pole_shift
        table = np.empty((nt * np_, 9), dtype=np.int64)
        for i in range(nt):
            for j in range(np_):
                entries = []
                for di in (-1, 0, 1):
                    r = i + di
                    if r < 0:
                        r, jc = 0, (j + shift) % np_
                    elif r >= nt:
                        r, jc = nt - 1, (j + shift) % np_
                    else:
                        jc = j
                    for dj in (-1, 0, 1):
                        entries.append(r * np_ + (jc + dj) % np_)
                table[i * np_ + j] = entries
        return table

    def column_groups(self):
        """Structurally orthogonal column groups for forward-difference
        Jacobian assembly: two columns share a group only if no residual
        row reads both of them."""
        neigh = self.stencil_neighbors()
        n = self.n_nodes
        reads = [set() for _ in range(n)]     # reads[c] = rows that read column c
        for row in range(n):
            for c in set(neigh[row]):
                reads[c].add(row)
        color = np.full(n, -1, dtype=int)
        ncolors = 0
        for c in range(n):
            used = set()
            for row in reads[c]:
                for other in set(neigh[row]):
                    if color[other] >= 0:
                        used.add(color[other])
            k = 0
            while k in used:
                k += 1
            color[c] = k
            ncolors = max(ncolors, k + 1)
        groups = [np.nonzero(color == k)[0] for k in range(ncolors)]
        return groups, reads


def build_grid(n_theta, n_phi):
    """Staggered latitude-longitude grid with cross-pole ghost pairing.

    n_phi must be even so the ghost of column j is column j + n_phi/2.
    Quadrature weights are the midpoint-rule weights rescaled so they sum
    to 4 pi exactly.
    """
    if n_phi % 2 != 0:
        raise ValueError("n_phi must be even (cross-pole ghost pairing)")
    if n_theta < 8 or n_phi < 8:
        raise ValueError("grid too coarse: need n_theta >= 8 and n_phi >= 8")
    theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    phi = np.arange(n_phi) * 2.0 * math.pi / n_phi
    st, ct = np.sin(theta)[:, None], np.cos(theta)[:, None]
    sp, cp = np.sin(phi)[None, :], np.cos(phi)[None, :]
    nodes = np.stack([st * cp, st * sp, ct * np.ones_like(sp)], axis=-1)
    w = st * np.ones_like(sp)
    weights = w * (4.0 * math.pi / w.sum())
    e_theta = np.stack([ct * cp, ct * sp, -st * np.ones_like(sp)], axis=-1)
    e_phi = np.stack([-sp * np.ones_like(st), cp * np.ones_like(st),
                      np.zeros((n_theta, n_phi))], axis=-1)
    for arr in (theta, phi, nodes, weights, e_theta, e_phi):
        arr.flags.writeable = False
    return SphericalGrid(n_theta, n_phi, theta, phi, nodes, weights, e_theta, e_phi)


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class RadialField:
    """Samples of the radial function rho > 0 on a spherical grid."""

    grid: SphericalGrid
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if rho.shape != (self.grid.n_theta, self.grid.n_phi):
            raise ValueError("rho shape does not match the grid")
        if not np.all(np.isfinite(rho)):
            raise StarshapednessError("rho contains non-finite samples")
        if np.any(rho <= 0.0):
            raise StarshapednessError("rho must be positive everywhere (starshapedness)")
        rho = rho.copy()
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full((grid.n_theta, grid.n_phi), float(value)))

    def with_rho(self, rho):
        return RadialField(self.grid, rho)


def tangential_derivatives(field, order=2):
    """Covariant gradient and Hessian of rho on S^2, orthonormal frame.

    Returns (grad, hess) with grad[..., i] = (rho_theta, rho_phi/sin) and
    hess the symmetric 2x2 covariant Hessian.  The mixed component is
    computed as d_theta(rho_phi / sin theta) with odd cross-pole parity,
    which keeps it second-order accurate up to the pole rows.
    """
    grid, rho = field.grid, field.rho
    st, ct = grid.sin_theta, grid.cos_theta
    g1 = grid.d_theta(rho, order)
    dphi = grid.d_phi(rho, order)
    g2 = dphi / st
    h11 = grid.d_thetatheta(rho, order)
    h12 = grid.d_theta(g2, order, parity=-1.0)
    h22 = grid.d_phiphi(rho, order) / st**2 + (ct / st) * g1
    grad = np.stack([g1, g2], axis=-1)
    hess = np.empty(rho.shape + (2, 2))
    hess[..., 0, 0] = h11
    hess[..., 0, 1] = h12
    hess[..., 1, 0] = h12
    hess[..., 1, 1] = h22
    return grad, hess


@dataclass(frozen=True)
class SurfaceGeometry:
    """Per-node geometry of the radial graph: immutable once built."""

    field: RadialField
    X: np.ndarray              # (nt, np, 3) positions
    nu: np.ndarray             # (nt, np, 3) outward unit normals
    u: np.ndarray              # (nt, np) support values <X, nu>
    metric: np.ndarray         # (nt, np, 2, 2) induced metric, sphere frame
    second_fundamental: np.ndarray  # (nt, np, 2, 2) orthonormal tangent frame
    principal: np.ndarray      # (nt, np, 2) principal curvatures, ascending
    grad_rho: np.ndarray       # (nt, np, 2)
    hess_rho: np.ndarray       # (nt, np, 2, 2)
    w: np.ndarray              # (nt, np) sqrt(rho^2 + |grad rho|^2)
    b_form: np.ndarray         # (nt, np, 2, 2) second fundamental form, sphere frame

    @property
    def grid(self):
        return self.field.grid


def radial_geometry(field):
    """All geometric quantities of the radial graph X = rho x.

    Formulas (orthonormal sphere frame, outward normal):
        w     = sqrt(rho^2 + |grad rho|^2)
        nu    = (rho x - grad rho) / w
        u     = rho^2 / w
        g_ij  = rho^2 delta_ij + rho_i rho_j
        b_ij  = (rho^2 delta_ij + 2 rho_i rho_j - rho rho_;ij) / w
    Principal curvatures are the eigenvalues of g^{-1/2} b g^{-1/2}; the
    round sphere rho = r gives lambda = +1/r exactly (stencils annihilate
    constants), which fixes the orientation convention.
    """
    grid, rho = field.grid, field.rho
    grad, hess = tangential_derivatives(field)
    d1, d2 = grad[..., 0], grad[..., 1]
    w = np.sqrt(rho**2 + d1**2 + d2**2)
    x = grid.nodes
    X = rho[..., None] * x
    grad_vec = d1[..., None] * grid.e_theta + d2[..., None] * grid.e_phi
    nu = (rho[..., None] * x - grad_vec) / w[..., None]
    u = rho**2 / w
    if np.any(u <= 0.0):
        bad = np.argwhere(u <= 0.0)
        raise StarshapednessError(f"support function u <= 0 at node(s) {bad[:5].tolist()}")
    metric = np.empty(rho.shape + (2, 2))
    metric[..., 0, 0] = rho**2 + d1**2
    metric[..., 0, 1] = d1 * d2
    metric[..., 1, 0] = d1 * d2
    metric[..., 1, 1] = rho**2 + d2**2
    b = np.empty_like(metric)
    winv = 1.0 / w
    b[..., 0, 0] = (rho**2 + 2 * d1 * d1 - rho * hess[..., 0, 0]) * winv
    b[..., 0, 1] = (2 * d1 * d2 - rho * hess[..., 0, 1]) * winv
    b[..., 1, 0] = b[..., 0, 1]
    b[..., 1, 1] = (rho**2 + 2 * d2 * d2 - rho * hess[..., 1, 1]) * winv
    gis = inv_sqrt_spd(metric)
    S = gis @ b @ gis
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    principal = eigvalsh_sym(S)
    geo = SurfaceGeometry(field, X, nu, u, metric, S, principal, grad, hess, w, b)
    for arr in (X, nu, u, metric, S, principal, grad, hess, w, b):
        arr.flags.writeable = False
    return geo


# ---------------------------------------------------------------------------
# structure-equation health checks


@dataclass(frozen=True)
class StructureResiduals:
    """Per-node residual norms of the discrete structure equations.

    gauss:   | <Hess X, nu> + b |_F  per node (Gauss formula, normal part)
    support: | grad u - b g^{-1} <grad X, X> |  per node
    Derivatives of rho and u are re-evaluated with independent fourth-order
    stencils, so both residuals vanish to round-off on constant fields and
    decay at the second-order rate on smooth ones.
    """

    gauss: np.ndarray
    support: np.ndarray
    max_gauss: float
    max_support: float
    l2_gauss: float
    l2_support: float
    offpole_max_gauss: float
    offpole_max_support: float


def field_norm(grid, values, kind="l2"):
    """Aggregate a per-node field: quadrature-weighted L2 or plain max."""
    values = np.abs(np.asarray(values, dtype=float))
    if kind == "max":
        return float(values.max())
    if kind == "l2":
        return float(np.sqrt((grid.weights * values**2).sum() / (4.0 * math.pi)))
    raise ValueError(f"unknown norm kind {kind!r}")


def structure_equation_residuals(geom):
    grid = geom.grid
    rho = geom.field.rho
    grad4, hess4 = tangential_derivatives(geom.field, order=4)
    d1, d2 = geom.grad_rho[..., 0], geom.grad_rho[..., 1]
    winv = 1.0 / geom.w
    # normal projection of the sphere-covariant Hessian of X, fourth order
    proj = np.empty(rho.shape + (2, 2))
    for i in range(2):
        for j in range(2):
            di = d1 if i == 0 else d2
            dj = d1 if j == 0 else d2
            g4i = grad4[..., i]
            g4j = grad4[..., j]
            delta = 1.0 if i == j else 0.0
            proj[..., i, j] = (rho * hess4[..., i, j] - g4i * dj - g4j * di
                               - delta * rho**2) * winv
    r1 = proj + geom.b_form
    gauss = np.sqrt(np.sum(r1**2, axis=(-2, -1)))

    # support identity: grad u = b g^{-1} <grad X, X>, with <X_m, X> = rho rho_m
    u = geom.u
    du = np.stack([grid.d_theta(u, order=4), grid.d_phi(u, order=4) / grid.sin_theta],
                  axis=-1)
    ginv = np.linalg.inv(geom.metric)
    t = rho[..., None] * geom.grad_rho
    rhs = np.einsum("...il,...lm,...m->...i", geom.b_form, ginv, t)
    r2 = du - rhs
    support = np.sqrt(np.sum(r2**2, axis=-1))

    off = slice(1, -1)
    return StructureResiduals(
        gauss=gauss,
        support=support,
        max_gauss=float(gauss.max()),
        max_support=float(support.max()),
        l2_gauss=field_norm(grid, gauss, "l2"),
        l2_support=field_norm(grid, support, "l2"),
        offpole_max_gauss=float(gauss[off].max()),
        offpole_max_support=float(support[off].max()),
    )


# ---------------------------------------------------------------------------
# closed-form test bodies

def ellipsoid_radial_field(grid, a, b, c):
    """Radial function of the ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1."""
    x = grid.nodes
    q = (x[..., 0] / a) ** 2 + (x[..., 1] / b) ** 2 + (x[..., 2] / c) ** 2
    return RadialField(grid, q ** -0.5)


def ellipsoid_principal_curvatures(points, a, b, c):
    """Closed-form principal curvatures of the ellipsoid at surface points.

    Shape operator of a level set {h = 1}: project Hess h / |grad h| onto
    the tangent plane; for the ellipsoid the nonzero eigenvalues of that
    projected matrix are the principal curvatures (positive, outward
    normal convention).
    """
    p = np.asarray(points, dtype=float)
    D = np.diag([1.0 / a**2, 1.0 / b**2, 1.0 / c**2])
    N = p @ D
    nrm = np.linalg.norm(N, axis=-1)
    nu = N / nrm[..., None]
    P = np.eye(3) - np.einsum("...i,...j->...ij", nu, nu)
    M = P @ (D / nrm[..., None, None]) @ P
    eig = np.linalg.eigvalsh(M)
    return eig[..., 1:]  # drop the zero eigenvalue along nu


# ---------------------------------------------------------------------------
# grid transfer and comparison

def restrict_to_coarse(fine_field, coarse_grid, stencil=6):
    """Interpolate a fine-grid field to the nodes of a coarser grid.

    Requires nested longitudes (fine n_phi a multiple of coarse n_phi);
    colatitudes of staggered grids never coincide, so values are moved by
    1-D Lagrange interpolation in colatitude along the matching longitude
    columns.  Cross-pole ghost rows extend the columns near the poles;
    stencil=6 keeps the transfer error far below second-order differences.
    """
    fg = fine_field.grid
    if fg.n_phi % coarse_grid.n_phi != 0:
        raise ValueError("fine longitude count must be a multiple of the coarse one")
    ratio = fg.n_phi // coarse_grid.n_phi
    cols = fine_field.rho[:, ::ratio]
    shift = coarse_grid.n_phi // 2   # fine pole shift expressed in subsampled columns
    rows = stencil
    ext = np.concatenate([
        np.roll(cols[rows - 1::-1], shift, axis=1),
        cols,
        np.roll(cols[:fg.n_theta - rows - 1:-1], shift, axis=1),
    ], axis=0)
    # ghost colatitudes: -theta_j above the north pole, 2 pi - theta_j past south
    theta_ext = np.concatenate([
        -fg.theta[rows - 1::-1],
        fg.theta,
        2.0 * math.pi - fg.theta[:fg.n_theta - rows - 1:-1],
    ])
    out = np.empty((coarse_grid.n_theta, coarse_grid.n_phi))
    for it, th in enumerate(coarse_grid.theta):
        base = int(np.searchsorted(theta_ext, th))
        lo = min(max(base - stencil // 2, 0), len(theta_ext) - stencil)
        ts = theta_ext[lo:lo + stencil]
        weights = np.ones(stencil)
        for i in range(stencil):
            for j in range(stencil):
                if i != j:
                    weights[i] *= (th - ts[j]) / (ts[i] - ts[j])
        out[it] = weights @ ext[lo:lo + stencil]
    return out


def field_difference(coarse_field, fine_field, kind="l2"):
    """Norm of the difference between solutions on nested grids."""
    interp = restrict_to_coarse(fine_field, coarse_field.grid)
    return field_norm(coarse_field.grid, coarse_field.rho - interp, kind)


# ---------------------------------------------------------------------------
# exports

def export_obj(geom, path):
    """Write the surface as a Wavefront OBJ (quads split into triangles)."""
    nt, np_ = geom.grid.n_theta, geom.grid.n_phi
    with open(path, "w") as fh:
        for i in range(nt):
            for j in range(np_):
                x, y, z = geom.X[i, j]
                fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        for i in range(nt - 1):
            for j in range(np_):
                a = i * np_ + j + 1
                b = i * np_ + (j + 1) % np_ + 1
                c = (i + 1) * np_ + (j + 1) % np_ + 1
                d = (i + 1) * np_ + j + 1
                fh.write(f"f {a} {b} {c}\n")
                fh.write(f"f {a} {c} {d}\n")


def export_csv(geom, op, path):
    """Per-node CSV: theta, phi, rho, u, lambda1, lambda2, sigma_k."""
    grid = geom.grid
    fk = op.value_on_spectrum(geom.principal)
    with open(path, "w") as fh:
        fh.write("theta,phi,rho,u,lambda1,lambda2,sigma_k\n")
        for i in range(grid.n_theta):
            for j in range(grid.n_phi):
                row = (grid.theta[i], grid.phi[j], geom.field.rho[i, j], geom.u[i, j],
                       geom.principal[i, j, 0], geom.principal[i, j, 1], fk[i, j])
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
