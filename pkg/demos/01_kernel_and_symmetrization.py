"""
Kernels and the permutation quantity
====================================

The s-Riesz kernel is odd and homogeneous of degree -s.  Summing products
of kernel values over the six orderings of three points gives a quantity
that is always positive and comparable to the largest side to the power
-2s.
"""
import math

import numpy as np

from rieszlab import KernelSpec, comparability_scan, kernel_eval, permutation_form

spec = KernelSpec(0.5)
print("K(4) =", kernel_eval(spec, [4.0]))
print("K(-4) =", kernel_eval(spec, [-4.0]))

# unit equilateral triangle: each base point contributes cos(60 deg)
h = math.sqrt(3) / 2
print("equilateral:", permutation_form(spec, [0, 0], [1, 0], [0.5, h]))

# three collinear points 0, 1, 2
print("collinear:  ", permutation_form(spec, [0.0], [1.0], [2.0]), "vs", math.sqrt(2) - 1)

# the ratio p * diam^{2s} stays in a fixed window over random triples and scales
for n in (1, 3):
    lo, hi = comparability_scan(KernelSpec(0.5, n), 10_000, seed=0, dim=2)
    print(f"n={n}: ratio in [{lo:.3f}, {hi:.3f}]")

# dilating a triple by t scales p by t^{-2s}
a, b, c = np.random.default_rng(1).standard_normal((3, 2))
ratio = permutation_form(spec, 10 * a, 10 * b, 10 * c) / permutation_form(spec, a, b, c)
print("p(10x) / p(x) =", ratio, "expected", 10.0**-1.0)
