"""Elementary symmetric function calculus on spectra and symmetric matrices.

A spectrum is an ndarray whose last axis holds the n principal curvatures;
every routine broadcasts over leading axes, so batches of spectra (or of
symmetric matrices, shape (..., n, n)) are handled in one call.  The cone
Gamma_k = {lambda : sigma_l(lambda) > 0 for l = 1..k} is the admissibility
domain used by the solvers.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConeViolationError

_ORACLE_MAX_N = 12


def sigma(values, l):
    """l-th elementary symmetric polynomial of the last axis of ``values``.

    Uses the one-pass Horner-style recurrence on e_0..e_l (cost O(n*l)),
    not subset enumeration.  sigma_0 is 1 by the empty-product convention.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    if not 0 <= l <= n:
        raise ValueError(f"sigma index l={l} out of range 0..{n}")
    batch = values.shape[:-1]
    if l == 0:
        return np.ones(batch) if batch else 1.0
    e = [np.ones(batch)] + [np.zeros(batch) for _ in range(l)]
    for i in range(n):
        x = values[..., i]
        for j in range(min(i + 1, l), 0, -1):
            e[j] = e[j] + x * e[j - 1]
    return e[l] if batch else float(e[l])


def sigma_subset_oracle(values, l):
    """sigma_l by explicit enumeration of all size-l index subsets.

    Independent test oracle only; refuses n > 12 to bound the C(n,l) cost.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    if n > _ORACLE_MAX_N:
        raise ValueError(f"enumeration oracle refuses n={n} > {_ORACLE_MAX_N}")
    if not 0 <= l <= n:
        raise ValueError(f"sigma index l={l} out of range 0..{n}")
    total = np.zeros(values.shape[:-1])
    for subset in itertools.combinations(range(n), l):
        term = np.ones(values.shape[:-1])
        for i in subset:
            term = term * values[..., i]
        total = total + term
    return total if values.ndim > 1 else float(total)


_DELETE_INDEX_CACHE = {}


def _delete_one_indices(n):
    if n not in _DELETE_INDEX_CACHE:
        idx = np.array([[j for j in range(n) if j != i] for i in range(n)], dtype=int)
        _DELETE_INDEX_CACHE[n] = idx
    return _DELETE_INDEX_CACHE[n]


def sigma_grad(values, l):
    """Gradient of sigma_l: component i is sigma_{l-1} of the spectrum with
    entry i deleted.  Satisfies Euler's identity sum_i lambda_i g_i = l sigma_l.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    if not 1 <= l <= n:
        raise ValueError(f"gradient index l={l} out of range 1..{n}")
    deleted = values[..., _delete_one_indices(n)]  # (..., n, n-1)
    out = sigma(deleted, l - 1)
    return out if values.ndim > 1 else np.asarray(out, dtype=float)


_VANDERMONDE_ROW2 = {}


def _t2_weights(l):
    """Interpolation weights extracting the t^2 coefficient of a degree-l
    polynomial from its values at the l+1 integer nodes centred near 0."""
    if l not in _VANDERMONDE_ROW2:
        s = np.arange(l + 1, dtype=float) - l // 2
        V = np.vander(s, increasing=True)
        _VANDERMONDE_ROW2[l] = (np.linalg.inv(V)[2], s)
    return _VANDERMONDE_ROW2[l]


def sigma_hess_dir(A, B, l):
    """Second directional derivative d^2/dt^2 sigma_l(A + t B) at t = 0.

    sigma_l(A + tB) is a polynomial of degree <= l in t, so the coefficient
    of t^2 is extracted exactly (up to rounding) by evaluating at l+1 nodes
    and interpolating; no symbolic second-derivative tensor is formed.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = A.shape[-1]
    if A.shape[-2:] != (n, n) or B.shape[-2:] != (n, n):
        raise ValueError("A and B must be square matrices with matching size")
    if not 1 <= l <= n:
        raise ValueError(f"hessian index l={l} out of range 1..{n}")
    batch = np.broadcast_shapes(A.shape[:-2], B.shape[:-2])
    if l < 2:
        out = np.zeros(batch)
        return out if batch else 0.0
    w2, s = _t2_weights(l)
    # Scale nodes to the size of B so the sampled matrices stay well ranged.
    bnorm = np.sqrt(np.sum(B * B, axis=(-2, -1)))
    tau = 1.0 / (1.0 + bnorm)
    tau_m = tau[..., None, None] if batch else tau
    vals = []
    for sj in s:
        lam = np.linalg.eigvalsh(A + (sj * tau_m) * B)
        vals.append(sigma(lam, l))
    c2 = sum(wj * vj for wj, vj in zip(w2, vals))
    out = 2.0 * c2 / tau**2
    return out if batch else float(out)


def in_gamma_k(values, k, return_margin=True):
    """Membership of the spectrum in the cone Gamma_k.

    Returns (ok, margin): ok is True iff sigma_l > 0 for every l = 1..k and
    margin is the smallest of the raw sigma_l values (line-search currency;
    callers wanting scale invariance normalise themselves).
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    if not 1 <= k <= n:
        raise ValueError(f"cone index k={k} out of range 1..{n}")
    margin = sigma(values, 1)
    for l in range(2, k + 1):
        margin = np.minimum(margin, sigma(values, l))
    ok = margin > 0.0
    if values.ndim == 1:
        ok, margin = bool(ok), float(margin)
    if return_margin:
        return ok, margin
    return ok


@dataclass(frozen=True)
class OperatorSpec:
    """Curvature operator: sigma_k or the quotient sigma_k / sigma_l.

    ``homogeneity`` is the degree of the operator as a function of the
    spectrum (k for sigma_k, k - l for the quotient); the a priori bound
    report and the round-sphere start both consume it.
    """

    kind: str = "sigma_k"
    k: int = 2
    l: int = 0

    def __post_init__(self):
        if self.kind not in ("sigma_k", "quotient"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("operator order k must be >= 1")
        if self.kind == "quotient" and not 0 <= self.l < self.k:
            raise ValueError("quotient denominator index must satisfy 0 <= l < k")

    @property
    def homogeneity(self):
        return self.k - (self.l if self.kind == "quotient" else 0)

    def value_on_spectrum(self, lam):
        """Operator value from a spectrum array (..., n); quotient included."""
        if self.kind == "sigma_k":
            return sigma(lam, self.k)
        sl = sigma(lam, self.l)
        return sigma(lam, self.k) / sl

    def label(self):
        if self.kind == "sigma_k":
            return f"sigma_{self.k}"
        return f"sigma_{self.k}/sigma_{self.l}"


def operator_value_grad(A, op):
    """Value and gradient matrix of F(A) = sigma_k(A) (or sigma_k/sigma_l).

    The gradient of a symmetric spectral function is Q diag(df/dlambda) Q^T
    in the eigenbasis Q of A; this is exact also at degenerate eigenvalues,
    so no divided-difference switching is needed at first order.  For the
    quotient, sigma_l(A) must be positive.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[-1]
    if A.shape[-2:] != (n, n):
        raise ValueError("A must be square")
    if np.max(np.abs(A - np.swapaxes(A, -1, -2))) > 1e-12 * (1.0 + np.max(np.abs(A))):
        raise ValueError("A must be symmetric as stored")
    if not 1 <= op.k <= n:
        raise ValueError(f"operator order k={op.k} out of range 1..{n}")
    lam, Q = np.linalg.eigh(A)
    sk = sigma(lam, op.k)
    gk = sigma_grad(lam, op.k)
    if op.kind == "sigma_k":
        value, gspec = sk, gk
    else:
        sl = sigma(lam, op.l)
        if np.any(np.asarray(sl) <= 0.0):
            raise ConeViolationError(
                f"quotient denominator sigma_{op.l} <= 0 at an admissibility-required point"
            )
        if op.l == 0:
            value, gspec = sk, gk
        else:
            gl = sigma_grad(lam, op.l)
            value = sk / sl
            gspec = (np.asarray(sl)[..., None] * gk - np.asarray(sk)[..., None] * gl) / (
                np.asarray(sl)[..., None] ** 2
            )
    grad = np.einsum("...ik,...k,...jk->...ij", Q, np.asarray(gspec), Q)
    grad = 0.5 * (grad + np.swapaxes(grad, -1, -2))
    return value, grad
