"""Finitely supported measures, balls, and the density functionals on them.

All balls are closed: an atom lying exactly on a sphere is counted.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateInputError, ValidationError

# Resolution reported for a one-atom measure, where no pairwise distance exists.
SINGLETON_RESOLUTION = float(np.finfo(float).tiny)


def _as_points(points, dim=None):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None] if dim in (None, 1) else pts.reshape(-1, dim)
    if pts.ndim != 2:
        raise ValidationError(f"points must be an (N, d) array, got shape {pts.shape}")
    return pts


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Nonnegative weights on N distinct points of R^d.

    ``resolution`` is the minimum pairwise distance (``SINGLETON_RESOLUTION``
    when N == 1).  Arrays are copied and made read-only on construction.
    """

    points: np.ndarray
    weights: np.ndarray
    resolution: float = field(init=False)

    def __post_init__(self):
        pts = _as_points(self.points)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pts.shape[0] < 1:
            raise ValidationError("a measure needs at least one atom")
        if w.shape[0] != pts.shape[0]:
            raise ValidationError(
                f"{pts.shape[0]} points but {w.shape[0]} weights"
            )
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(w)):
            raise ValidationError("points and weights must be finite")
        if np.any(w < 0):
            raise ValidationError("weights must be nonnegative")
        if not w.sum() > 0:
            raise ValidationError("total mass must be positive")
        if pts.shape[0] == 1:
            res = SINGLETON_RESOLUTION
        else:
            dist, _ = cKDTree(pts).query(pts, k=2)
            res = float(dist[:, 1].min())
            if res == 0.0:
                raise ValidationError("points must be pairwise distinct")
        pts = pts.copy()
        w = w.copy()
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "resolution", res)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def size(self):
        return self.points.shape[0]

    def __len__(self):
        return self.size

    @property
    def total_mass(self):
        return float(self.weights.sum())

    def hull_ball(self):
        """Smallest ball about the bounding-box center containing every atom."""
        center = 0.5 * (self.points.min(axis=0) + self.points.max(axis=0))
        radius = float(np.linalg.norm(self.points - center, axis=1).max())
        return Ball(center, radius if radius > 0 else 1.0)


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed ball ``{y : |y - center| <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float)).copy()
        r = float(self.radius)
        if not (r > 0) or not np.isfinite(r):
            raise ValidationError(f"ball radius must be positive, got {self.radius!r}")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    def scaled(self, k):
        return Ball(self.center, k * self.radius)

    def distances(self, points):
        return np.linalg.norm(np.asarray(points, dtype=float) - self.center, axis=-1)

    def contains(self, points):
        return self.distances(points) <= self.radius

    def contains_ball(self, other):
        gap = np.linalg.norm(other.center - self.center)
        return gap + other.radius <= self.radius

    def to_dict(self):
        return {"center": self.center.tolist(), "radius": self.radius}

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius!r})"


def as_mask(mu, subset):
    """Boolean atom mask from a Ball, an index collection, a mask, or None (all)."""
    if subset is None:
        return np.ones(mu.size, dtype=bool)
    if isinstance(subset, Ball):
        return subset.contains(mu.points)
    arr = np.asarray(subset)
    if arr.dtype == bool:
        if arr.shape != (mu.size,):
            raise ValidationError("boolean mask length must equal the atom count")
        return arr.copy()
    mask = np.zeros(mu.size, dtype=bool)
    if arr.size:
        idx = arr.astype(int).reshape(-1)
        if idx.min() < 0 or idx.max() >= mu.size:
            raise ValidationError("atom index out of range")
        mask[idx] = True
    return mask


def ball_mass(mu, ball):
    return float(mu.weights[ball.contains(mu.points)].sum())


def density(mu, ball, spec):
    """Average s-dimensional density ``mu(B) / r(B)**s``."""
    return ball_mass(mu, ball) / ball.radius**spec.s


def poisson_density(mu, ball, spec, tol=1e-12, max_terms=4096):
    """Smoothed density ``sum_k theta(2^k B) 2^{-k}``.

    Terms are summed explicitly until ``2^k B`` holds every atom; from there
    on each term is ``|mu| / (2^k r)^s``, whose geometric tail is added in
    closed form, so the result is exact up to rounding (``tol`` only guards
    the argument).
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    s = spec.s
    dist = ball.distances(mu.points)
    total = mu.total_mass
    reach = float(dist.max())
    acc = 0.0
    for k in range(max_terms):
        r = ball.radius * 2.0**k
        if reach <= r:
            q = 2.0 ** (-(1.0 + s))
            tail = total / ball.radius**s * q**k / (1.0 - q)
            return acc + tail
        acc += float(mu.weights[dist <= r].sum()) / r**s * 2.0**-k
    raise DegenerateInputError("support not reached within max_terms dilations")


def poisson_density_partial(mu, ball, spec, terms):
    """Brute-force partial sum of the first ``terms`` dilations (oracle)."""
    dist = ball.distances(mu.points)
    out = 0.0
    for k in range(terms):
        r = ball.radius * 2.0**k
        out += float(mu.weights[dist <= r].sum()) / r**spec.s * 2.0**-k
    return out


def ball_masses(mu, centers, radii, chunk=256):
    """``masses[i, j] = mu(B(centers[i], radii[j]))``."""
    centers = _as_points(centers, mu.dim)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    out = np.empty((centers.shape[0], radii.size))
    for lo in range(0, centers.shape[0], chunk):
        c = centers[lo:lo + chunk]
        dist = np.linalg.norm(c[:, None, :] - mu.points[None, :, :], axis=-1)
        for j, r in enumerate(radii):
            out[lo:lo + chunk, j] = (dist <= r) @ mu.weights
    return out


@dataclass
class DensityDiagnostics:
    """Growth scan over balls centered at atoms.

    ``theta[q, j]`` is the density of ``B(points[query[q]], radii[j])``; the
    rows are the per-point upper density profiles.
    """

    growth_constant: float
    worst_ball: Ball
    radii: np.ndarray
    query: np.ndarray
    theta: np.ndarray

    def profile(self, q):
        return list(zip(self.radii.tolist(), self.theta[q].tolist()))


def _check_grid(mu, radii_grid):
    radii = np.atleast_1d(np.asarray(radii_grid, dtype=float))
    if radii.size == 0:
        raise ValidationError("radii grid is empty")
    if np.any(radii < mu.resolution):
        raise ValidationError(
            f"grid radii must be >= the measure resolution {mu.resolution:.6g}"
        )
    return radii


def density_diagnostics(mu, spec, radii_grid, query=None):
    radii = _check_grid(mu, radii_grid)
    theta = ball_masses(mu, mu.points, radii) / radii**spec.s
    flat = int(np.argmax(theta))
    i, j = np.unravel_index(flat, theta.shape)
    query = np.arange(mu.size) if query is None else np.asarray(query, dtype=int)
    return DensityDiagnostics(
        growth_constant=float(theta[i, j]),
        worst_ball=Ball(mu.points[i], radii[j]),
        radii=radii,
        query=query,
        theta=theta[query],
    )


def _boundary_offsets(mu, ball):
    dist = ball.distances(mu.points)
    inside = dist <= 2.0 * ball.radius
    mass2 = float(mu.weights[inside].sum())
    delta = np.abs(dist[inside] - ball.radius) / ball.radius
    return delta, mu.weights[inside], mass2


def thin_boundary_ratio(mu, ball):
    """Smallest ``t`` for which ``ball`` has t-thin boundary.

    The supremum over lambda is attained at one of the relative boundary
    offsets ``delta_i = |dist_i - r| / r`` of the atoms of 2B, so it is a max
    over the sorted cumulative masses.  An atom on the sphere gives ``inf``.
    """
    delta, w, mass2 = _boundary_offsets(mu, ball)
    if not mass2 > 0:
        raise DegenerateInputError("mu(2B) = 0: thin-boundary ratio undefined")
    order = np.argsort(delta, kind="stable")
    delta = delta[order]
    cum = np.cumsum(w[order])
    # ties in delta: the cumulative mass at delta_i includes every equal offset
    last = np.searchsorted(delta, delta, side="right") - 1
    cum = cum[last]
    if delta[0] == 0.0 and cum[0] > 0:
        return float("inf")
    with np.errstate(divide="ignore"):
        ratio = cum / (delta * mass2)
    return float(ratio.max())


@dataclass
class ThinBallResult:
    ball: Ball
    ratio: float
    success: bool
    candidates_tried: int


def find_thin_ball(mu, center, r, t=8.0, samples=32):
    """Search ``[r, 2r]`` for a radius whose ball has t-thin boundary.

    Candidates are gap midpoints between consecutive sorted atom distances
    (widest gap first), padded with a uniform grid.  Failure is reported in
    the result rather than raised.
    """
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    if not t > 0:
        raise ValidationError("t must be positive")
    center = np.atleast_1d(np.asarray(center, dtype=float))
    r = float(r)
    dist = np.linalg.norm(mu.points - center, axis=1)
    inner = np.sort(dist[(dist > r) & (dist < 2 * r)])
    edges = np.concatenate([[r], inner, [2 * r]])
    gaps = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    order = np.argsort(-gaps, kind="stable")
    keep = gaps[order] > 0
    cands = [float(m) for m in mids[order][keep]][:samples]
    if len(cands) < samples:
        extra = np.linspace(r, 2 * r, samples - len(cands) + 2)[1:-1]
        cands.extend(float(x) for x in extra)
    best = None
    tried = 0
    for rad in cands:
        tried += 1
        ball = Ball(center, rad)
        try:
            ratio = thin_boundary_ratio(mu, ball)
        except DegenerateInputError:
            # empty double ball: the boundary condition holds trivially
            ratio = 0.0
        if ratio <= t:
            return ThinBallResult(ball, ratio, True, tried)
        if best is None or ratio < best[1]:
            best = (ball, ratio)
    return ThinBallResult(best[0], best[1], False, tried)
