"""The permutation quantity p(x, y, z), its energies, and the exact regroupings.

``p(x1, x2, x3)`` is half the sum over the six permutations of
``K(x_s2 - x_s1) . K(x_s3 - x_s1)``.  Permutations sharing the base point
give equal products, so in practice it is the sum over the three base
points.
"""
from dataclasses import asdict, dataclass

import numpy as np

from . import _config
from .errors import DomainError, ValidationError
from .kernels import kernel_values
from .measure import as_mask
from .transforms import (
    adjoint_apply,
    check_eps,
    check_no_ties,
    transform_field,
    truncated_transform_point,
    truncation_mask,
)


def permutation_form(spec, x1, x2, x3):
    x1, x2, x3 = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (x1, x2, x3))
    if np.array_equal(x1, x2) or np.array_equal(x1, x3) or np.array_equal(x2, x3):
        raise DomainError("permutation form needs three distinct points")
    return float(permutation_form_batch(spec, x1[None], x2[None], x3[None])[0])


def permutation_form_batch(spec, a, b, c):
    """Row-wise ``p(a_i, b_i, c_i)``; rows with a coincidence give 0."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    kab = kernel_values(spec, b - a)
    kac = kernel_values(spec, c - a)
    kbc = kernel_values(spec, c - b)
    # bases a, b, c; K(a - b) = -K(b - a) for odd n
    out = (kab * kac).sum(-1) - (kab * kbc).sum(-1) + (kac * kbc).sum(-1)
    bad = (np.all(a == b, axis=-1) | np.all(a == c, axis=-1) | np.all(b == c, axis=-1))
    out[bad] = 0.0
    return out


def _max_side(a, b, c):
    return np.maximum.reduce([
        np.linalg.norm(a - b, axis=-1),
        np.linalg.norm(a - c, axis=-1),
        np.linalg.norm(b - c, axis=-1),
    ])


def comparability_ratios(spec, x1, x2, x3):
    """``p * max_side**(2s)`` row-wise."""
    return permutation_form_batch(spec, x1, x2, x3) * _max_side(x1, x2, x3) ** (2 * spec.s)


def comparability_scan(spec, trials, seed=0, scale_range=(1e-3, 1e3), dim=2):
    """Empirical two-sided constants of ``p * max_side^{2s}`` on random triples.

    Triples are Gaussian clouds dilated by a log-uniform factor from
    ``scale_range``.  Returns ``(min_ratio, max_ratio)``.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = np.log(scale_range[0]), np.log(scale_range[1])
    scale = np.exp(rng.uniform(lo, hi, size=(trials, 1)))
    pts = rng.standard_normal((3, trials, dim)) * scale
    ratios = comparability_ratios(spec, pts[0], pts[1], pts[2])
    return float(ratios.min()), float(ratios.max())


def pair_kernel_matrix(mu, spec):
    """``M[a, b] = K(x_b - x_a)`` with zero diagonal (no truncation)."""
    diff = mu.points[None, :, :] - mu.points[:, None, :]
    return kernel_values(spec, diff)


def _atom_at(mu, x):
    hit = np.flatnonzero(np.all(mu.points == x, axis=1))
    return hit


def pairwise_energy(mu, spec, x, E=None, F=None, kernel_matrix=None):
    """``p_mu(x, E, F) = sum_{y in E, z in F} w_y w_z p(x, y, z)``.

    Pairs where two of x, y, z coincide are skipped.  ``E`` and ``F`` are
    Balls, index collections or masks (None means every atom).  Pass a
    precomputed :func:`pair_kernel_matrix` to amortise repeated calls.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    em = as_mask(mu, E)
    fm = as_mask(mu, F)
    hit = _atom_at(mu, x)
    em[hit] = False
    fm[hit] = False
    if not em.any() or not fm.any():
        return 0.0
    M = pair_kernel_matrix(mu, spec) if kernel_matrix is None else kernel_matrix
    w = mu.weights
    kx = kernel_values(spec, mu.points - x)
    we = w * em
    wf = w * fm
    t1 = (we @ kx) @ (wf @ kx) - float(((we * wf) * (kx * kx).sum(1)).sum())
    # G_F[y] = sum_{z in F, z != y} w_z K(z - y)
    gf = np.einsum("yzc,z->yc", M, wf)
    ge = np.einsum("zyc,y->zc", M, we)
    t2 = -float((we * (kx * gf).sum(1)).sum())
    t3 = -float((wf * (kx * ge).sum(1)).sum())
    return float(t1 + t2 + t3)


@dataclass
class EnergyEstimate:
    value: float
    stderr: float
    samples: int
    mode: str

    def to_dict(self):
        return {"p_s": self.value, "stderr": self.stderr, "samples": self.samples,
                "mode": self.mode}


MC_CHUNK = 1 << 16


def total_energy(mu, spec, mode="exact", samples=1_000_000, seed=0, exact_cap=None):
    """``p_s(mu)``: sum of ``w_i w_j w_k p`` over ordered distinct triples.

    ``mode="exact"`` uses the base-point regrouping
    ``3 sum_i w_i (|sum_j w_j K_ij|^2 - sum_j w_j^2 |K_ij|^2)``.
    ``mode="montecarlo"`` draws i.i.d. triples from ``mu / |mu|`` and
    averages ``|mu|^3 p`` (zero on coincidences); each 65536-sample block
    has its own spawned stream so the estimate does not depend on threading.
    """
    if mode == "exact":
        cap = _config.exact_cap(exact_cap)
        if mu.size > cap:
            raise ValidationError(
                f"exact energy capped at N={cap} atoms (got {mu.size}); use montecarlo"
            )
        M = pair_kernel_matrix(mu, spec)
        w = mu.weights
        field = np.einsum("ijc,j->ic", M, w)
        diag = np.einsum("ij,j->i", (M * M).sum(-1), w * w)
        value = 3.0 * float(w @ ((field * field).sum(1) - diag))
        return EnergyEstimate(value, 0.0, 0, "exact")
    if mode != "montecarlo":
        raise ValidationError(f"unknown energy mode {mode!r}")
    if samples < 2:
        raise ValidationError("montecarlo needs at least 2 samples")
    total = mu.total_mass
    prob = mu.weights / total
    cdf = np.cumsum(prob)
    cdf[-1] = 1.0
    nblocks = -(-samples // MC_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(nblocks)
    count, mean, m2 = 0, 0.0, 0.0
    for b, ss in enumerate(streams):
        m = min(MC_CHUNK, samples - b * MC_CHUNK)
        rng = np.random.default_rng(ss)
        idx = np.searchsorted(cdf, rng.random((3, m)), side="right")
        idx = np.minimum(idx, mu.size - 1)
        vals = total**3 * permutation_form_batch(
            spec, mu.points[idx[0]], mu.points[idx[1]], mu.points[idx[2]])
        bm = float(vals.mean())
        bm2 = float(((vals - bm) ** 2).sum())
        delta = bm - mean
        new = count + m
        mean += delta * m / new
        m2 += bm2 + delta * delta * count * m / new
        count = new
    stderr = float(np.sqrt(m2 / (count - 1) / count))
    return EnergyEstimate(mean, stderr, count, "montecarlo")


@dataclass
class IdentityReport:
    """Both sides of the pointwise regrouping at one point.

    ``a_term`` is twice the T1 sum (the form in which the identity is stated
    for E = F); ``a_term_exact`` adds the T1 sum and its mirror image, which
    closes the identity for arbitrary E and F.
    """

    lhs_terms: tuple
    p_term: float
    a_term: float
    b_term: float
    residual: float
    a_term_exact: float
    residual_exact: float
    scale: float
    pair_counts: dict

    @property
    def relative_residual(self):
        return self.residual / self.scale if self.scale > 0 else self.residual

    @property
    def relative_residual_exact(self):
        return self.residual_exact / self.scale if self.scale > 0 else self.residual_exact

    def to_dict(self):
        out = asdict(self)
        out["lhs_terms"] = list(self.lhs_terms)
        out["p_mu_eps"] = out.pop("p_term")
        out["A_eps"] = out.pop("a_term")
        out["B_eps"] = out.pop("b_term")
        out["A_eps_exact"] = out.pop("a_term_exact")
        out["relative_residual"] = self.relative_residual
        out["relative_residual_exact"] = self.relative_residual_exact
        return out


def pointwise_identity_check(mu, spec, eps, x, E=None, F=None):
    """Evaluate both sides of the truncated pointwise regrouping at ``x``.

    Left: ``R(chi_E)(x).R(chi_F)(x) + R*((R chi_F) chi_E)(x) + R*((R chi_E) chi_F)(x)``
    computed with the transform routines.  Right: every ordered atom pair
    (y in E, z in F) is classified by which of ``|y-x|, |z-x|, |z-y|``
    exceed eps and summed directly.
    """
    eps = check_eps(eps)
    x = np.atleast_1d(np.asarray(x, dtype=float)).reshape(mu.dim)
    check_no_ties(mu.points, eps, extra=x)
    em = as_mask(mu, E)
    fm = as_mask(mu, F)

    re_x = truncated_transform_point(mu, spec, eps, x, em)
    rf_x = truncated_transform_point(mu, spec, eps, x, fm)
    rf = transform_field(mu, spec, eps, mask=fm)
    re = transform_field(mu, spec, eps, mask=em)
    lhs1 = float(re_x @ rf_x)
    lhs2 = float(adjoint_apply(mu, spec, eps, rf * em[:, None], at=x)[0])
    lhs3 = float(adjoint_apply(mu, spec, eps, re * fm[:, None], at=x)[0])

    yi = np.flatnonzero(em)
    zi = np.flatnonzero(fm)
    Y = np.repeat(yi, zi.size)
    Z = np.tile(zi, yi.size)
    py, pz = mu.points[Y], mu.points[Z]
    ww = mu.weights[Y] * mu.weights[Z]
    dxy = np.linalg.norm(py - x, axis=1)
    dxz = np.linalg.norm(pz - x, axis=1)
    dyz = np.linalg.norm(pz - py, axis=1)
    gxy, gxz, gyz = dxy > eps, dxz > eps, dyz > eps
    S = gxy & gxz & gyz
    T1 = gxy & gyz & ~gxz
    T1m = gxz & gyz & ~gxy
    T2 = gxy & gxz & ~gyz

    p_term = float(ww[S] @ permutation_form_batch(spec, np.broadcast_to(x, py[S].shape),
                                                 py[S], pz[S]))
    t1 = float(ww[T1] @ (kernel_values(spec, x - py[T1])
                         * kernel_values(spec, pz[T1] - py[T1])).sum(1))
    t1m = float(ww[T1m] @ (kernel_values(spec, x - pz[T1m])
                           * kernel_values(spec, py[T1m] - pz[T1m])).sum(1))
    b_term = float(ww[T2] @ (kernel_values(spec, py[T2] - x)
                             * kernel_values(spec, pz[T2] - x)).sum(1))
    a_term = 2.0 * t1
    a_exact = t1 + t1m
    lhs = (lhs1, lhs2, lhs3)
    total = lhs1 + lhs2 + lhs3
    scale = sum(abs(v) for v in lhs) + abs(p_term) + abs(t1) + abs(t1m) + abs(b_term)
    return IdentityReport(
        lhs_terms=lhs,
        p_term=p_term,
        a_term=a_term,
        b_term=b_term,
        residual=abs(total - (p_term + a_term + b_term)),
        a_term_exact=a_exact,
        residual_exact=abs(total - (p_term + a_exact + b_term)),
        scale=scale,
        pair_counts={"S": int(S.sum()), "T1": int(T1.sum()), "T1_mirror": int(T1m.sum()),
                     "T2": int(T2.sum()), "discarded": int(Y.size - S.sum() - T1.sum()
                                                           - T1m.sum() - T2.sum())},
    )


@dataclass
class GlobalIdentity:
    """``sum_i w_i |R_eps 1(x_i)|^2`` split into its triple and diagonal parts.

    ``near_pair_term`` collects distinct triples whose two far atoms are
    within eps of each other; it vanishes whenever eps is below the measure
    resolution, and ``residual - near_pair_term`` is always a pure rounding
    residual.
    """

    lhs: float
    third_of_triple_sum: float
    diagonal_term: float
    near_pair_term: float
    residual: float

    @property
    def relative_residual(self):
        return abs(self.residual) / abs(self.lhs) if self.lhs else abs(self.residual)

    @property
    def closed_residual(self):
        return self.residual - self.near_pair_term

    def to_dict(self):
        out = asdict(self)
        out["relative_residual"] = self.relative_residual
        out["closed_residual"] = self.closed_residual
        return out


def global_identity_check(mu, spec, eps):
    """Check ``int |R_eps mu|^2 dmu = (1/3) p_eps(mu) + diagonal``.

    The triple sum runs over ordered triples with all three pairwise
    distances > eps and evaluates p with all three base points.
    """
    eps = check_eps(eps)
    check_no_ties(mu.points, eps)
    w = mu.weights
    field = transform_field(mu, spec, eps)
    lhs = float(w @ (field * field).sum(1))

    diff = mu.points[None, :, :] - mu.points[:, None, :]
    dist = np.linalg.norm(diff, axis=-1)
    far = truncation_mask(dist, eps)
    K = kernel_values(spec, diff, dist)
    K[~far] = 0.0
    ww = np.outer(w, w)
    diagonal = float(w @ ((K * K).sum(-1) @ (w * w)))

    triple = 0.0
    near = 0.0
    for i in range(mu.size):
        ki = K[i]
        # base i: K(x_j - x_i).K(x_k - x_i); base j: K(x_i - x_j).K(x_k - x_j)
        base_i = ki @ ki.T
        base_j = np.einsum("jc,jkc->jk", K[:, i], K)
        pair_ok = far[i][:, None] & far[i][None, :]
        allfar = pair_ok & far
        vals = base_i + base_j + base_j.T
        triple += float(w[i]) * float((ww * vals)[allfar].sum())
        nearpair = pair_ok & ~far
        np.fill_diagonal(nearpair, False)
        near += float(w[i]) * float((ww * base_i)[nearpair].sum())
    third = triple / 3.0
    return GlobalIdentity(
        lhs=lhs,
        third_of_triple_sum=third,
        diagonal_term=diagonal,
        near_pair_term=near,
        residual=float(lhs - third - diagonal),
    )
