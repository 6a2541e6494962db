"""Multiscale density and energy diagnostics.

These quantify how the triple energy of a point accumulates along a chain
of concentric balls, and evaluate the ratio ``p_mu(x, B, B) / P(B)^2``,
which stays bounded for a reflectionless measure.  On a Cantor measure of
matching dimension the cumulative energy grows linearly with the number of
scales, so the ratio is unbounded as generations are added.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, ValidationError
from .measure import (
    Ball,
    _check_grid,
    ball_masses,
    density,
    find_thin_ball,
    poisson_density,
    thin_boundary_ratio,
)
from .symmetrization import pair_kernel_matrix, pairwise_energy


def max_density_ball(mu, spec, radii_grid):
    """Ball centered at an atom maximising the density over the radius grid.

    Ties go to the lowest atom index, then the smallest radius.
    """
    radii = _check_grid(mu, radii_grid)
    theta = ball_masses(mu, mu.points, radii) / radii**spec.s
    i, j = np.unravel_index(int(np.argmax(theta)), theta.shape)
    return Ball(mu.points[i], radii[j])


@dataclass
class ComparabilityRow:
    ball: Ball
    ratio: float
    skipped: bool


def density_comparability_scan(mu, spec, B0, delta, trial_balls):
    """``theta(B) / theta(B0)`` for each trial ball with ``B0`` inside ``delta B``.

    Balls violating the containment are returned with ``skipped=True`` and a
    nan ratio.
    """
    if not delta > 0:
        raise ValidationError("delta must be positive")
    theta0 = density(mu, B0, spec)
    if theta0 == 0:
        raise DegenerateInputError("theta(B0) = 0")
    rows = []
    for ball in trial_balls:
        if not ball.scaled(delta).contains_ball(B0):
            rows.append(ComparabilityRow(ball, float("nan"), True))
            continue
        rows.append(ComparabilityRow(ball, density(mu, ball, spec) / theta0, False))
    return rows


@dataclass
class EnergyGrowthReport:
    """Energy accumulated along ``B_j``, j = 0..N.

    ``shell_energies[j] = p_mu(x, B_j, B_j \\ B_{j-1})`` (with ``B_{-1}``
    empty) and ``cumulative[j] = p_mu(x, B_j, B_j)``.  By symmetry of p,
    ``cumulative[j] = cumulative[j-1] + 2 shell_energies[j] - shell_self[j]``
    where ``shell_self[j] = p_mu(x, shell_j, shell_j)``.
    """

    scales: list
    densities: list
    shell_energies: list
    shell_self: list
    cumulative: list
    fit_slope: float
    fit_r2: float
    thin_ok: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def window_fit(self, lo, hi):
        """Least-squares (slope, r2) of cumulative against j over ``lo..hi``."""
        return _linear_fit(np.arange(lo, hi + 1), np.asarray(self.cumulative[lo:hi + 1]))

    def to_dict(self):
        return {
            "r": self.scales,
            "theta": self.densities,
            "e_j": self.shell_energies,
            "e_self_j": self.shell_self,
            "p_mu_cumulative": self.cumulative,
            "fit_slope": self.fit_slope,
            "fit_r2": self.fit_r2,
            "thin_ok": self.thin_ok,
            "flags": self.flags,
        }

    def csv_rows(self):
        yield ("j", "r", "theta", "e_j", "cumulative")
        for j, row in enumerate(zip(self.scales, self.densities, self.shell_energies,
                                    self.cumulative)):
            yield (j,) + row


def _linear_fit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        return float("nan"), float("nan")
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss if ss > 0 else 1.0
    return float(slope), r2


def ball_chain(mu, B0, n_scales, step=1, thin_t=8.0, thin_samples=32):
    """Concentric radii ``r0 2^{j step}``, each nudged within [r, 2r] to a thin ball.

    Returns the balls and a per-level flag telling whether the thin search
    succeeded (level 0 is B0 itself and always flagged True).
    """
    if step < 1:
        raise ValidationError("step must be >= 1")
    balls = [B0]
    ok = [True]
    for j in range(1, n_scales + 1):
        r = B0.radius * 2.0 ** (j * step)
        if thin_t is None:
            balls.append(Ball(B0.center, r))
            ok.append(True)
            continue
        found = find_thin_ball(mu, B0.center, r, thin_t, thin_samples)
        balls.append(found.ball if found.success else Ball(B0.center, r))
        ok.append(bool(found.success))
    return balls, ok


def multiscale_energy_profile(mu, spec, x, B0, n_scales, step=1, thin_t=8.0,
                              kernel_matrix=None):
    """Shell-by-shell triple energy of ``x`` along a chain of dilates of ``B0``.

    ``step`` is the number of doublings between consecutive levels; for a
    Cantor measure with contraction ``2^{-m}`` use ``step=m`` so that each
    level adds one generation.  ``thin_t=None`` disables the thin-boundary
    adjustment.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if n_scales < 2:
        raise ValidationError("n_scales must be >= 2")
    if not B0.contains(x[None])[0]:
        raise ValidationError("x must lie in B0")
    M = pair_kernel_matrix(mu, spec) if kernel_matrix is None else kernel_matrix
    balls, ok = ball_chain(mu, B0, n_scales, step, thin_t)
    prev = np.zeros(mu.size, dtype=bool)
    scales, dens, shell_e, shell_s, cum = [], [], [], [], []
    nonempty = 0
    for ball in balls:
        cur = ball.contains(mu.points)
        shell = cur & ~prev
        if shell.any():
            nonempty += 1
        scales.append(ball.radius)
        dens.append(density(mu, ball, spec))
        shell_e.append(pairwise_energy(mu, spec, x, cur, shell, kernel_matrix=M))
        shell_s.append(pairwise_energy(mu, spec, x, shell, shell, kernel_matrix=M))
        cum.append(pairwise_energy(mu, spec, x, cur, cur, kernel_matrix=M))
        prev = cur
    slope, r2 = _linear_fit(np.arange(len(cum)), cum)
    flags = []
    if nonempty < 2:
        flags.append("fewer than 2 nonempty shells")
    if not all(ok):
        flags.append("thin-boundary search failed at levels "
                     + ",".join(str(j) for j, good in enumerate(ok) if not good))
    return EnergyGrowthReport(scales, dens, shell_e, shell_s, cum, slope, r2, ok, flags)


@dataclass
class MainLemmaResult:
    ratio: float
    argmax: int
    poisson: float
    energies: np.ndarray
    samples: np.ndarray
    thin_ratio: float

    def to_dict(self):
        return {
            "ratio_p_mu_over_P2": self.ratio,
            "argmax_atom": self.argmax,
            "P": self.poisson,
            "p_mu": self.energies.tolist(),
            "x_samples": self.samples.tolist(),
            "thin_ratio": self.thin_ratio,
        }


def sample_atoms(mask, x_samples=None, seed=0):
    """Atom indices in ``mask``: a seeded subset of size ``min(32, count)`` by default."""
    inside = np.flatnonzero(mask)
    if x_samples is None:
        x_samples = 32
    if np.ndim(x_samples) == 0:
        k = min(int(x_samples), inside.size)
        rng = np.random.default_rng(seed)
        return np.sort(rng.choice(inside, size=k, replace=False))
    idx = np.asarray(x_samples, dtype=int)
    if not np.all(mask[idx]):
        raise ValidationError("every sampled atom must lie in B")
    return idx


def main_lemma_ratio(mu, spec, ball, x_samples=None, seed=0, kernel_matrix=None):
    """``max_x p_mu(x, B, B) / P(B)^2`` over sampled atoms of ``B``.

    Bounded for reflectionless measures; its growth under refinement
    certifies the opposite.  A ball with non-finite thin-boundary ratio is
    accepted but reported through ``thin_ratio``.
    """
    mask = ball.contains(mu.points)
    if not mu.weights[mask].sum() > 0:
        raise DegenerateInputError("mu(B) = 0")
    idx = sample_atoms(mask, x_samples, seed)
    P = poisson_density(mu, ball, spec)
    M = pair_kernel_matrix(mu, spec) if kernel_matrix is None else kernel_matrix
    energies = np.array([pairwise_energy(mu, spec, mu.points[i], mask, mask, kernel_matrix=M)
                         for i in idx])
    k = int(np.argmax(energies))
    return MainLemmaResult(
        ratio=float(energies[k] / P**2),
        argmax=int(idx[k]),
        poisson=P,
        energies=energies,
        samples=idx,
        thin_ratio=thin_boundary_ratio(mu, ball),
    )
