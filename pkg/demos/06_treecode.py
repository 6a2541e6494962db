"""
Treecode against direct summation
=================================

Far cells are replaced by their mass at the centroid.  The error is
measured against the absolute field ``sum_j w_j |K_c(x_j - x_i)|``, the
scale at which the monopole error budget is stated.
"""
import time

import numpy as np

from rieszlab import CantorSpec, DiscreteMeasure, KernelSpec, transform_field, tree_transform_field
from rieszlab.treecode import contract_deviation

full = CantorSpec(0.5, 13).build()
pick = np.sort(np.random.default_rng(0).choice(full.size, 5000, replace=False))
mu = DiscreteMeasure(full.points[pick], full.weights[pick])
spec = KernelSpec(0.5)
eps = mu.resolution / 2

t0 = time.perf_counter()
naive = transform_field(mu, spec, eps)
print(f"direct: {time.perf_counter() - t0:.2f}s")

for theta in (0.6, 0.3, 0.1, 0.03):
    t0 = time.perf_counter()
    approx = tree_transform_field(mu, spec, eps, theta)
    dt = time.perf_counter() - t0
    print(f"theta={theta:<5} {dt:.2f}s  deviation {contract_deviation(mu, spec, naive, approx):.2e}")
