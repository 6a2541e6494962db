"""Truncated transforms ``R_{mu,eps}`` and their adjoint on atomic measures.

Every sum keeps only atoms at distance strictly greater than ``eps`` from
the evaluation point.  An atom within 4 ulp of the sphere ``|y - x| = eps``
raises :class:`TruncationTieError` instead of being silently included or
dropped, which keeps the regrouping identities exact.
"""
from dataclasses import dataclass

import numpy as np

from . import _parallel
from .errors import DegenerateInputError, TruncationTieError, ValidationError
from .kernels import kernel_values
from .measure import as_mask

TIE_ULPS = 4


def check_eps(eps):
    eps = float(eps)
    if not eps > 0 or not np.isfinite(eps):
        raise ValidationError(f"eps must be a positive finite number, got {eps!r}")
    return eps


def truncation_mask(dist, eps):
    """``dist > eps`` after rejecting distances within 4 ulp of ``eps``."""
    tol = TIE_ULPS * np.spacing(eps)
    if np.any(np.abs(dist - eps) <= tol):
        raise TruncationTieError(
            f"an atom lies at distance eps={eps!r} from an evaluation point; "
            "nudge eps to break the tie"
        )
    return dist > eps


def check_no_ties(points, eps, extra=None):
    """Raise if any pairwise distance among ``points`` (and ``extra``) ties eps."""
    pts = points if extra is None else np.vstack([points, np.atleast_2d(extra)])
    for lo, hi in _parallel.chunk_bounds(pts.shape[0]):
        dist = np.linalg.norm(pts[lo:hi, None, :] - pts[None, :, :], axis=-1)
        truncation_mask(dist, eps)


def riesz_sum(spec, sources, coef, targets, eps, componentwise=False, threads=None):
    """``out[t] = sum_{|y_j - x_t| > eps} coef_j K(y_j - x_t)``.

    ``coef`` has shape (M,) for a scalar density, or (M, d) with
    ``componentwise=True``, in which case ``out[t, c]`` only uses
    ``coef[:, c]`` against the c-th kernel component.
    """
    eps = check_eps(eps)
    sources = np.asarray(sources, dtype=float)
    targets = np.asarray(targets, dtype=float)
    coef = np.asarray(coef, dtype=float)
    d = targets.shape[1]
    if sources.shape[0] == 0:
        return np.zeros((targets.shape[0], d))

    def block(lo, hi):
        diff = sources[None, :, :] - targets[lo:hi, None, :]
        dist = np.linalg.norm(diff, axis=-1)
        keep = truncation_mask(dist, eps)
        kv = kernel_values(spec, diff, dist)
        kv[~keep] = 0.0
        if componentwise:
            return np.einsum("tjc,jc->tc", kv, coef)
        return np.einsum("tjc,j->tc", kv, coef)

    parts = _parallel.ordered_map(block, _parallel.chunk_bounds(targets.shape[0]), threads)
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, d))


def _targets(mu, at):
    if at is None:
        return mu.points
    pts = np.asarray(at, dtype=float)
    return pts.reshape(-1, mu.dim)


def truncated_transform_point(mu, spec, eps, x, mask=None):
    """``R_eps mu(x)`` restricted to the atoms selected by ``mask``."""
    sel = as_mask(mu, mask)
    x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, mu.dim)
    return riesz_sum(spec, mu.points[sel], mu.weights[sel], x, eps)[0]


def transform_field(mu, spec, eps, f=None, mask=None, at=None, threads=None):
    """``R_{mu,eps} f`` evaluated at every atom (or at the points ``at``).

    ``f`` is a scalar per atom (default 1).  A vector-valued ``f`` of shape
    (N, d) is applied componentwise, ``out[:, c] = R_{mu,eps,c} f_c``.
    ``mask`` restricts the sources, i.e. computes ``R(f chi_mask)``.
    """
    sel = as_mask(mu, mask)
    if f is None:
        coef = mu.weights[sel]
        componentwise = False
    else:
        f = np.asarray(f, dtype=float)
        if f.shape[0] != mu.size:
            raise ValidationError("coefficients must be indexed like the atoms")
        componentwise = f.ndim == 2
        w = mu.weights[sel]
        coef = f[sel] * (w[:, None] if componentwise else w)
    return riesz_sum(spec, mu.points[sel], coef, _targets(mu, at), eps,
                     componentwise=componentwise, threads=threads)


def adjoint_apply(mu, spec, eps, F, mask=None, at=None, threads=None):
    """``R*_{mu,eps} F = - sum_c R_{mu,eps,c} F_c`` for a vector field ``F``."""
    F = np.asarray(F, dtype=float)
    if F.shape != (mu.size, mu.dim):
        raise ValidationError(f"field must have shape {(mu.size, mu.dim)}, got {F.shape}")
    comp = transform_field(mu, spec, eps, f=F, mask=mask, at=at, threads=threads)
    return -comp.sum(axis=1)


def weighted_inner(mu, f, g):
    """``<f, g>_mu = sum_i w_i f_i . g_i`` for scalar or vector fields."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    prod = f * g
    if prod.ndim == 2:
        prod = prod.sum(axis=1)
    return float(mu.weights @ prod)


def operator_norm(mu, spec, eps, iterations=200, seed=0, restarts=4, threads=None):
    """Power iteration for ``||R_{mu,eps}||`` on ``L^2(mu)``.

    Iterates ``R* R`` in the mu-weighted inner product and returns the square
    root of the final Rayleigh quotient.  If an iterate is annihilated the
    run restarts from the next seeded vector; if every restart is annihilated
    the operator is zero on the sampled directions and 0 is returned.
    """
    if iterations < 1:
        raise ValidationError("iterations must be >= 1")
    rng = np.random.default_rng(seed)

    def apply(v):
        return adjoint_apply(mu, spec, eps, transform_field(mu, spec, eps, f=v, threads=threads),
                             threads=threads)

    for _ in range(restarts + 1):
        v = rng.standard_normal(mu.size)
        nv = np.sqrt(weighted_inner(mu, v, v))
        if nv == 0:
            continue
        v = v / nv
        rayleigh = 0.0
        degenerate = False
        for _ in range(iterations):
            u = apply(v)
            rayleigh = weighted_inner(mu, u, v)
            nu = np.sqrt(weighted_inner(mu, u, u))
            if nu == 0:
                degenerate = True
                break
            v = u / nu
        if degenerate:
            continue
        return float(np.sqrt(max(weighted_inner(mu, apply(v), v), 0.0)))
    return 0.0


def dense_operator(mu, spec, eps):
    """Matrix of ``R_{mu,eps}`` in mu-orthonormal coordinates, shape (N*d, N).

    The spectral norm of this matrix is the operator norm; used as the dense
    oracle for :func:`operator_norm` at small N.
    """
    pts = mu.points
    diff = pts[None, :, :] - pts[:, None, :]
    dist = np.linalg.norm(diff, axis=-1)
    keep = truncation_mask(dist, eps)
    kv = kernel_values(spec, diff, dist)
    kv[~keep] = 0.0
    sw = np.sqrt(mu.weights)
    # entry (i, c; j) = sqrt(w_i) * w_j * K_c(x_j - x_i) / sqrt(w_j)
    mat = sw[:, None, None] * kv * sw[None, :, None]
    return mat.transpose(0, 2, 1).reshape(mu.size * mu.dim, mu.size)


@dataclass
class AnnulusReport:
    """Empirical constants of the two thin-boundary annulus estimates."""

    inner_to_annulus: float
    annulus_to_inner: float
    theta_2B: float
    a_sup: float
    n_annulus: int
    n_inner: int

    def to_dict(self):
        return {
            "C_inside_to_annulus": self.inner_to_annulus,
            "C_annulus_to_inside": self.annulus_to_inner,
            "theta_2B": self.theta_2B,
            "a_sup": self.a_sup,
            "atoms_in_annulus": self.n_annulus,
            "atoms_in_B": self.n_inner,
        }


def annulus_bound_report(mu, spec, eps, ball, a):
    """Ratios ``|R(a chi_B)| / (|a|_inf theta(2B))`` on 2B\\B and vice versa.

    ``inner_to_annulus`` maximises over atoms of 2B\\B the transform of
    ``a chi_B``; ``annulus_to_inner`` maximises over atoms of B the
    transform of ``a chi_{2B\\B}``.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.shape[0] != mu.size:
        raise ValidationError("coefficients must be indexed like the atoms")
    dist = ball.distances(mu.points)
    inner = dist <= ball.radius
    double = dist <= 2 * ball.radius
    annulus = double & ~inner
    mass2 = float(mu.weights[double].sum())
    theta2 = mass2 / (2 * ball.radius) ** spec.s
    if theta2 == 0:
        raise DegenerateInputError("theta(2B) = 0")
    a_sup = float(np.abs(a).max()) if a.size else 0.0
    if a_sup == 0:
        return AnnulusReport(0.0, 0.0, theta2, 0.0, int(annulus.sum()), int(inner.sum()))
    scale = a_sup * theta2

    def worst(src, tgt):
        if not src.any() or not tgt.any():
            return 0.0
        vals = riesz_sum(spec, mu.points[src], mu.weights[src] * a[src], mu.points[tgt], eps)
        return float(np.linalg.norm(vals, axis=1).max() / scale)

    return AnnulusReport(
        inner_to_annulus=worst(inner, annulus),
        annulus_to_inner=worst(annulus, inner),
        theta_2B=theta2,
        a_sup=a_sup,
        n_annulus=int(annulus.sum()),
        n_inner=int(inner.sum()),
    )
