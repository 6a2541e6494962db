"""
Energy growth on a Cantor measure
=================================

On the two-interval Cantor measure of dimension s each new generation
adds a roughly fixed amount of triple energy at a point, so the
cumulative energy along a chain of balls grows linearly and the ratio
``p_mu(x, B, B) / P(B)^2`` grows with the number of generations.
"""
from rieszlab import Ball, CantorSpec, KernelSpec, find_thin_ball, main_lemma_ratio
from rieszlab import multiscale_energy_profile, total_energy

spec = KernelSpec(0.5)
g = 10
mu = CantorSpec(0.5, g).build()
x = mu.points[0]

# contraction 1/4 = 2^{-2}: two doublings per generation
rep = multiscale_energy_profile(mu, spec, x, Ball(x, 4.0**-g), 9, step=2)
for j, (r, c) in enumerate(zip(rep.scales, rep.cumulative)):
    print(f"j={j}  r={r:.3e}  cumulative={c:.4f}")
print("slope on [2, 5]:", rep.window_fit(2, 5)[0])
print("slope on [5, 8]:", rep.window_fit(5, 8)[0])

for gen in range(4, 11):
    m = CantorSpec(0.5, gen).build()
    ball = find_thin_ball(m, [0.5], 0.5).ball
    print(f"generation {gen:2d}: ratio {main_lemma_ratio(m, spec, ball).ratio:.4f}")

# Monte Carlo total energy against the exact sum
m = CantorSpec(0.5, 8).build()
exact = total_energy(m, spec)
mc = total_energy(m, spec, "montecarlo", samples=1_000_000, seed=0)
print(f"p_s exact {exact.value:.5f}, MC {mc.value:.5f} +- {mc.stderr:.5f}")
