"""
Regrouping identities
=====================

The squared transform splits into triple terms, pairs with one short side,
and a diagonal part.  Both the pointwise and the global forms are checked
term by term.
"""
from rieszlab import KernelSpec, global_identity_check, pointwise_identity_check, random_cloud

spec = KernelSpec(0.5)
mu = random_cloud(seed=11, N=120, dim=2)

rep = pointwise_identity_check(mu, spec, 0.1, mu.points[0])
print("pair classes:", rep.pair_counts)
print("relative residual (E = F):", rep.relative_residual)

# with different sets the near-pair term needs both orientations
rep = pointwise_identity_check(mu, spec, 0.1, mu.points[0], E=range(60), F=range(30, 120))
print("E != F, doubled form:  ", rep.relative_residual)
print("E != F, mirrored form: ", rep.relative_residual_exact)

# below the resolution no pair is short and the global split is exact
g = global_identity_check(mu, spec, 0.5 * mu.resolution)
print("global, eps < resolution:", g.relative_residual)

# above it the triples with a short far side are collected separately
g = global_identity_check(mu, spec, 0.05)
print("global, eps = 0.05:", g.relative_residual, "closed:", abs(g.closed_residual) / g.lhs)
