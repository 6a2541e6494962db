"""
Defect functional and its first variation
=========================================

On a ball B the defect measures how far the transform of ``nu = g mu|_B``
is from its mean.  Perturbing the density on a sub-ball and differentiating
at t = 0 gives a closed form that is checked against central differences.
"""
import numpy as np

from rieszlab import (
    Ball,
    CantorSpec,
    KernelSpec,
    TestFunction,
    defect_functional,
    perturbation_curve,
    reflectionless_pairing,
    variational_derivative,
)

spec = KernelSpec(0.5)
mu = CantorSpec(0.5, 7).build()
eps = mu.resolution / 2

# the pairing with a mean-zero test function, computed two ways
psi = TestFunction([([0.1], 0.2, 1.0), ([0.9], 0.2, -1.0)])
for mode in ("direct", "antisymmetrized"):
    res = reflectionless_pairing(mu, spec, eps, psi, mode)
    print(f"{mode:16s}", res.value, "centered" if res.centered else "")

ball, delta = Ball([0.05], 0.1), Ball([0.0], 0.03)
print("F(mu|B) =", defect_functional(mu, ball, spec, eps))

for t, g in perturbation_curve(mu, ball, delta, spec, eps, np.linspace(-0.5, 0.5, 5)):
    print(f"  g({t:+.2f}) = {g:.6f}")

rep = variational_derivative(mu, ball, delta, spec, eps)
print("g'(0) analytic:", rep.analytic)
for h, v in rep.finite_difference:
    print(f"  h={h:<6} FD={v:.10f}  err={abs(v - rep.analytic):.2e}")
print("observed order:", rep.observed_order)
