"""
Truncated transforms and their norm
===================================

``R_eps`` sums the kernel over atoms further than eps away.  The adjoint is
minus the sum of the scalar components, and power iteration on ``R* R``
estimates the operator norm in ``L^2(mu)``.
"""
import numpy as np

from rieszlab import DiscreteMeasure, KernelSpec, adjoint_apply, operator_norm, transform_field
from rieszlab import random_cloud
from rieszlab.transforms import dense_operator, weighted_inner

spec = KernelSpec(0.5)

# two half-unit atoms at distance one: the operator is a 2x2 matrix with norm 1/2
pair = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
print("two-atom norm:", operator_norm(pair, spec, 0.5))

mu = random_cloud(seed=3, N=150, dim=2)
eps = 0.02
field = transform_field(mu, spec, eps)
print("largest |R_eps 1|:", np.linalg.norm(field, axis=1).max())

# duality <R f, G> = <f, R* G> holds exactly as finite sums
rng = np.random.default_rng(0)
f = rng.standard_normal(mu.size)
G = rng.standard_normal((mu.size, 2))
lhs = weighted_inner(mu, transform_field(mu, spec, eps, f=f), G)
rhs = weighted_inner(mu, f, adjoint_apply(mu, spec, eps, G))
print("duality gap:", abs(lhs - rhs))

# power iteration against the dense singular value
for e in (0.2, 0.05, 0.02):
    print(f"eps={e}: power {operator_norm(mu, spec, e):.6f}  "
          f"dense {np.linalg.norm(dense_operator(mu, spec, e), 2):.6f}")
