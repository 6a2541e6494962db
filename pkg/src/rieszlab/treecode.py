"""Barnes-Hut evaluation of ``R_{mu,eps} 1`` at the atoms.

The tree splits tight bounding boxes at their midpoint (2^d children).  A
cell is replaced by its total mass at its centroid when

    cell_diameter < theta_mac * |x - centroid|

and every atom of the cell is certainly outside the eps-ball around the
target.  Cells entirely inside the eps-ball are skipped; cells straddling
the eps-sphere are opened down to leaves, which are summed directly with
the usual tie check.  With the centroid expansion point the dipole term
vanishes, so the per-cell error is second order in the opening ratio.
"""
from dataclasses import dataclass, field

import numpy as np

from .kernels import kernel_values
from .transforms import TIE_ULPS, check_eps, transform_field, truncation_mask
from .errors import ValidationError

LEAF_SIZE = 16
MAX_DEPTH = 64


@dataclass
class Cell:
    index: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    mass: float
    centroid: np.ndarray
    diameter: float
    children: list = field(default_factory=list)

    @property
    def is_leaf(self):
        return not self.children


def build_tree(points, weights, leaf_size=LEAF_SIZE):
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    d = points.shape[1]
    corners = np.array(np.meshgrid(*([[0, 1]] * d), indexing="ij")).reshape(d, -1).T

    def make(index, depth):
        pts = points[index]
        w = weights[index]
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        mass = float(w.sum())
        if mass > 0:
            centroid = (w @ pts) / mass
        else:
            centroid = 0.5 * (lo + hi)
        cell = Cell(index, lo, hi, mass, centroid, float(np.linalg.norm(hi - lo)))
        if index.size <= leaf_size or depth >= MAX_DEPTH or cell.diameter == 0:
            return cell
        mid = 0.5 * (lo + hi)
        code = (pts > mid).astype(int) @ (1 << np.arange(d))
        for key in range(corners.shape[0]):
            sub = index[code == key]
            if sub.size:
                cell.children.append(make(sub, depth + 1))
        if len(cell.children) == 1:
            # midpoint split failed to separate (degenerate box); stop here
            cell.children = []
        return cell

    return make(np.arange(points.shape[0]), 0)


def tree_transform_field(mu, spec, eps, theta_mac=0.3, leaf_size=LEAF_SIZE, tree=None):
    """Approximate ``transform_field(mu, spec, eps)`` (f = 1) with a treecode.

    Returns an (N, d) array.  ``theta_mac = 0`` opens every cell; whenever
    no cell is accepted the result is taken from the direct sum, so the
    fully opened tree reproduces ``transform_field`` bit for bit.
    """
    eps = check_eps(eps)
    if not 0 <= theta_mac < 1:
        raise ValidationError("theta_mac must lie in [0, 1)")
    if theta_mac == 0:
        return transform_field(mu, spec, eps)
    pts = mu.points
    w = mu.weights
    if tree is None:
        tree = build_tree(pts, w, leaf_size)
    out = np.zeros((mu.size, mu.dim))
    tol = TIE_ULPS * np.spacing(eps)
    stack = [(tree, np.arange(mu.size))]
    accepted = False
    while stack:
        cell, tgt = stack.pop()
        if tgt.size == 0:
            continue
        x = pts[tgt]
        if cell.is_leaf:
            src = cell.index
            diff = pts[src][None, :, :] - x[:, None, :]
            dist = np.linalg.norm(diff, axis=-1)
            keep = truncation_mask(dist, eps)
            kv = kernel_values(spec, diff, dist)
            kv[~keep] = 0.0
            out[tgt] += np.einsum("tjc,j->tc", kv, w[src])
            continue
        gap = np.maximum(np.maximum(cell.lo - x, x - cell.hi), 0.0)
        near = np.linalg.norm(gap, axis=1)
        far_corner = np.maximum(np.abs(x - cell.lo), np.abs(x - cell.hi))
        reach = np.linalg.norm(far_corner, axis=1)
        to_centroid = cell.centroid - x
        dc = np.linalg.norm(to_centroid, axis=1)
        accept = (cell.diameter < theta_mac * dc) & (near > eps + tol)
        if accept.any():
            accepted = True
            out[tgt[accept]] += cell.mass * kernel_values(spec, to_centroid[accept], dc[accept])
        skip = reach < eps - tol
        rest = tgt[~accept & ~skip]
        for child in reversed(cell.children):
            stack.append((child, rest))
    if not accepted:
        return transform_field(mu, spec, eps)
    return out


def contract_deviation(mu, spec, naive, approx, chunk=256):
    """Componentwise ``max |approx - naive| / sum_j w_j |K_c(x_j - x_i)|``.

    The denominator is the absolute field the error contract is stated
    against; a plain ratio to ``|naive|`` is meaningless where the signed
    sum nearly cancels.
    """
    worst = 0.0
    for lo in range(0, mu.size, chunk):
        diff = mu.points[None, :, :] - mu.points[lo:lo + chunk, None, :]
        scale = np.einsum("tjc,j->tc", np.abs(kernel_values(spec, diff)), mu.weights)
        err = np.abs(approx[lo:lo + chunk] - naive[lo:lo + chunk])
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(scale > 0, err / scale, 0.0)
        worst = max(worst, float(ratio.max()))
    return worst
