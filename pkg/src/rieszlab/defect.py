"""Reflectionless pairing, the ball defect functional and its variation.

For a ball B, ``nu = g mu|_B`` and fixed truncation eps,

    F(nu) = sum_{x_i in B} nu_i |R chi_{B^c}(x_i) + R_nu chi_B(x_i)
                                 - m_B^nu(R chi_{B^c})|^2,

where ``m_B^nu`` is the nu-average over B.  The perturbation
``nu_t = mu|_B (1 + t chi_Delta)`` gives ``g(t) = F(nu_t)`` whose
derivative at 0 has a closed six-term expansion; that expansion is
compared against central differences.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, ValidationError
from .measure import as_mask
from .kernels import kernel_values
from .transforms import check_eps, riesz_sum, transform_field, truncation_mask


@dataclass
class TestFunction:
    """Finite combination of radial hats ``c * max(0, 1 - |x - center| / radius)``."""

    __test__ = False  # not a pytest class

    terms: list = field(default_factory=list)

    def __post_init__(self):
        clean = []
        for center, radius, coef in self.terms:
            radius = float(radius)
            if not radius > 0:
                raise ValidationError("hat radii must be positive")
            clean.append((np.atleast_1d(np.asarray(center, dtype=float)), radius, float(coef)))
        self.terms = clean

    @property
    def lip_bound(self):
        return float(sum(abs(c) / r for _, r, c in self.terms))

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        pts = pts.reshape(-1, pts.shape[-1]) if pts.ndim > 1 else pts.reshape(-1, 1)
        out = np.zeros(pts.shape[0])
        for center, radius, coef in self.terms:
            out += coef * np.maximum(0.0, 1.0 - np.linalg.norm(pts - center, axis=1) / radius)
        return out

    def to_json(self):
        return [{"center": c.tolist(), "radius": r, "coefficient": k} for c, r, k in self.terms]

    @classmethod
    def from_json(cls, data):
        try:
            return cls([(t["center"], t["radius"], t["coefficient"]) for t in data])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed test function: {exc}") from None


@dataclass
class PairingResult:
    value: np.ndarray
    centered: bool
    mean_removed: float


MEAN_ZERO_TOL = 1e-10


def reflectionless_pairing(mu, spec, eps, psi, mode="direct"):
    """``<R_eps mu, psi>_mu`` for a mean-zero test function.

    If ``|sum w_i psi(x_i)|`` exceeds ``1e-10 |mu| max|psi|`` the values are
    centred by their mu-mean first and ``centered`` is set.  ``psi`` may be a
    :class:`TestFunction` or an array of values at the atoms.
    """
    eps = check_eps(eps)
    vals = psi(mu.points) if callable(psi) else np.asarray(psi, dtype=float).reshape(-1)
    if vals.shape[0] != mu.size:
        raise ValidationError("psi values must be indexed like the atoms")
    total = mu.total_mass
    mean = float(mu.weights @ vals) / total
    scale = float(np.abs(vals).max()) if vals.size else 0.0
    centered = abs(mean * total) > MEAN_ZERO_TOL * total * scale
    if centered:
        vals = vals - mean
    if mode == "direct":
        field = transform_field(mu, spec, eps)
        value = (mu.weights * vals) @ field
    elif mode == "antisymmetrized":
        value = np.zeros(mu.dim)
        for lo in range(0, mu.size, 256):
            xi = mu.points[lo:lo + 256]
            diff = mu.points[None, :, :] - xi[:, None, :]
            dist = np.linalg.norm(diff, axis=-1)
            keep = truncation_mask(dist, eps)
            kv = kernel_values(spec, diff, dist)
            kv[~keep] = 0.0
            dpsi = vals[lo:lo + 256, None] - vals[None, :]
            wij = mu.weights[lo:lo + 256, None] * mu.weights[None, :]
            value = value + 0.5 * np.einsum("ij,ijc->c", wij * dpsi, kv)
    else:
        raise ValidationError(f"unknown pairing mode {mode!r}")
    return PairingResult(np.asarray(value, dtype=float), bool(centered), mean if centered else 0.0)


@dataclass
class BallField:
    """Vector values attached to the atoms of a ball (``indices`` into mu)."""

    indices: np.ndarray
    values: np.ndarray


def _inside(mu, ball):
    mask = as_mask(mu, ball)
    if not mu.weights[mask].sum() > 0:
        raise DegenerateInputError("mu(B) = 0")
    return mask


def _exterior(mu, spec, eps, mask):
    """``R_{mu,eps} chi_{B^c}`` at the atoms of B."""
    out_ = ~mask
    return riesz_sum(spec, mu.points[out_], mu.weights[out_], mu.points[mask], eps)


def exterior_field(mu, ball, spec, eps):
    """``f_0 = R chi_{B^c} - m_B(R chi_{B^c})`` on the atoms of B."""
    eps = check_eps(eps)
    mask = _inside(mu, ball)
    ext = _exterior(mu, spec, eps, mask)
    w = mu.weights[mask]
    mean = (w @ ext) / w.sum()
    return BallField(np.flatnonzero(mask), ext - mean)


def defect_functional(mu, ball, spec, eps, g_factors=None):
    """``F(nu)`` for ``nu = g_factors * mu|_B`` (per-atom factors for atoms in B).

    ``g_factors`` may be indexed like all atoms or like the atoms of B;
    default is 1, which gives ``F(mu chi_B)``.
    """
    eps = check_eps(eps)
    mask = as_mask(mu, ball)
    idx = np.flatnonzero(mask)
    if g_factors is None:
        g = np.ones(idx.size)
    else:
        g = np.asarray(g_factors, dtype=float).reshape(-1)
        if g.size == mu.size:
            g = g[idx]
        elif g.size != idx.size:
            raise ValidationError("g_factors must be indexed like all atoms or the atoms of B")
    if np.any(g < 0):
        raise ValidationError("g_factors must be nonnegative")
    nu = g * mu.weights[idx]
    if not nu.sum() > 0:
        raise DegenerateInputError("nu has zero mass")
    pts = mu.points[idx]
    ext = _exterior(mu, spec, eps, mask)
    inner = riesz_sum(spec, pts, nu, pts, eps)
    mean = (nu @ ext) / nu.sum()
    dev = ext + inner - mean
    return float(nu @ (dev * dev).sum(1))


def _t_factors(mu, ball, delta, t):
    mask = as_mask(mu, ball)
    in_delta = as_mask(mu, delta)[mask]
    return 1.0 + t * in_delta


def perturbation_curve(mu, ball, delta, spec, eps, t_values):
    """``[(t, g(t))]`` with ``g(t) = F(mu|_B (1 + t chi_Delta))``."""
    out = []
    for t in t_values:
        t = float(t)
        if t <= -1:
            raise ValidationError("perturbation parameter t must exceed -1")
        out.append((t, defect_functional(mu, ball, spec, eps, _t_factors(mu, ball, delta, t))))
    return out


@dataclass
class DerivativeReport:
    analytic: float
    finite_difference: list
    observed_order: float
    terms: dict

    def to_dict(self):
        return {
            "g_prime_analytic": self.analytic,
            "g_prime_fd": [{"h": h, "value": v} for h, v in self.finite_difference],
            "observed_order": self.observed_order,
            "terms": self.terms,
        }


DEFAULT_STEPS = (0.2, 0.1, 0.05, 0.025)


def variational_derivative_terms(mu, ball, delta, spec, eps):
    """The six terms of ``g'(0)`` plus the antisymmetry term that vanishes.

    All integrals are finite sums over the atoms of B with eps-truncated
    transforms.
    """
    eps = check_eps(eps)
    mask = _inside(mu, ball)
    dmask = as_mask(mu, delta) & mask
    pts = mu.points[mask]
    w = mu.weights[mask]
    ind = dmask[mask]
    ext = _exterior(mu, spec, eps, mask)
    f0 = ext - (w @ ext) / w.sum()
    rb = riesz_sum(spec, pts, w, pts, eps)
    rd = riesz_sum(spec, mu.points[dmask], mu.weights[dmask], pts, eps)
    mass_b = w.sum()
    mass_d = w[ind].sum()
    dfdt = mass_d / mass_b**2 * (w @ ext) - (w[ind] @ ext[ind]) / mass_b
    wd = w * ind
    terms = {
        "int_BD_|R chi_B|^2": float(wd @ (rb * rb).sum(1)),
        "2 int_B R chi_B . R chi_BD": 2.0 * float(w @ (rb * rd).sum(1)),
        "2 int_BD f0 . R chi_B": 2.0 * float(wd @ (f0 * rb).sum(1)),
        "2 int_B f0 . R chi_BD": 2.0 * float(w @ (f0 * rd).sum(1)),
        "int_BD |f0|^2": float(wd @ (f0 * f0).sum(1)),
        "2 int_B f0 . d_t f_t": 2.0 * float((w @ f0) @ dfdt),
    }
    terms["2 d_t f_t . int_B R chi_B (antisymmetric, ~0)"] = 2.0 * float(dfdt @ (w @ rb))
    return terms


def variational_derivative(mu, ball, delta, spec, eps, fd_steps=DEFAULT_STEPS):
    """Analytic ``g'(0)`` against central differences of :func:`perturbation_curve`.

    ``observed_order`` is the least-squares slope of ``log|analytic - FD(h)|``
    against ``log h`` (nan when every difference is exactly zero).
    """
    terms = variational_derivative_terms(mu, ball, delta, spec, eps)
    analytic = float(sum(v for k, v in terms.items() if "antisymmetric" not in k))
    fd = []
    for h in fd_steps:
        (_, gp), (_, gm) = perturbation_curve(mu, ball, delta, spec, eps, [h, -h])
        fd.append((float(h), (gp - gm) / (2.0 * h)))
    errs = np.array([abs(analytic - v) for _, v in fd])
    hs = np.array([h for h, _ in fd])
    good = errs > 0
    if good.sum() >= 2:
        order = float(np.polyfit(np.log(hs[good]), np.log(errs[good]), 1)[0])
    else:
        order = float("nan")
    return DerivativeReport(analytic, fd, order, terms)
