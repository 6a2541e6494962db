"""Reference measures: self-similar Cantor measures, uniform segments, random clouds."""
from dataclasses import dataclass

import numpy as np

from . import _config
from .errors import ValidationError
from .measure import DiscreteMeasure


@dataclass(frozen=True)
class CantorSpec:
    """Self-similar Cantor measure of dimension ``s``.

    ``branching=2`` keeps the two end intervals of [0, 1]; ``branching=4``
    keeps the four corner squares of [0, 1]^2.  The contraction ratio is
    ``branching**(-1/s)``, below 1/2 for every s in (0, 1), so the copies
    never touch.
    """

    s: float
    generations: int
    branching: int = 2
    total_mass: float = 1.0

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise ValidationError("Cantor dimension s must lie in (0, 1)")
        if self.branching not in (2, 4):
            raise ValidationError("branching must be 2 (line) or 4 (planar corners)")
        if int(self.generations) != self.generations or self.generations < 0:
            raise ValidationError("generations must be a nonnegative integer")
        if not self.total_mass > 0:
            raise ValidationError("total_mass must be positive")

    @property
    def ratio(self):
        return self.branching ** (-1.0 / self.s)

    def build(self, atom_cap=None):
        return cantor_measure(self, atom_cap=atom_cap)


def cantor_measure(spec, atom_cap=None):
    """Atoms at the centers of the generation-g cells, equal weights."""
    g = int(spec.generations)
    cap = _config.atom_cap(atom_cap)
    if spec.branching**g > cap:
        raise ValidationError(
            f"{spec.branching}^{g} atoms exceeds the atom cap {cap}"
        )
    lam = spec.ratio
    dim = 1 if spec.branching == 2 else 2
    offsets = np.array([[0.0], [1.0]]) if dim == 1 else np.array(
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    corners = np.zeros((1, dim))
    size = 1.0
    for _ in range(g):
        step = size * (1.0 - lam)
        corners = (corners[:, None, :] + step * offsets[None, :, :]).reshape(-1, dim)
        size *= lam
    points = corners + 0.5 * size
    weights = np.full(points.shape[0], spec.total_mass / points.shape[0])
    return DiscreteMeasure(points, weights)


def cantor_cell_size(spec, generation):
    return spec.ratio**generation


def segment_uniform(N, length=1.0):
    """N atoms at ``(k + 1/2) length / N``, weights 1/N."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    pts = (np.arange(N) + 0.5) * (length / N)
    return DiscreteMeasure(pts[:, None], np.full(N, 1.0 / N))


def random_cloud(seed, N, dim=2, box_size=1.0):
    """Uniform points in ``[0, box_size)^dim``, equal weights; duplicates redrawn."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, box_size, size=(N, dim))
    while True:
        _, first = np.unique(pts, axis=0, return_index=True)
        if first.size == N:
            break
        dup = np.setdiff1d(np.arange(N), first)
        pts[dup] = rng.uniform(0.0, box_size, size=(dup.size, dim))
    return DiscreteMeasure(pts, np.full(N, 1.0 / N))
