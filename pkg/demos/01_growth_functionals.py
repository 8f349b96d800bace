"""Four ways to measure how fast a power series grows.

For f(z) = sum a_n z^n and a radius r we compare the maximal term mu(r),
the circle mean S(r) = (sum |a_n|^2 r^{2n})^{1/2}, the majorant
G(r) = sum |a_n| r^n and the maximum modulus M(r).  Always
mu <= S <= M <= G.  Everything is computed with logarithms, so radii where
e^r overflows a double are no problem.
"""

import numpy as np

from wvlab import RadiusGrid, SeedSpec, growth_profile, make_exp_series, make_geometric_series, randomize
from wvlab.sampler import rademacher

exp = make_exp_series(2000)
grid = RadiusGrid.explicit([1.0, 10.0, 100.0, 800.0])
p = growth_profile(exp, grid)

print("exp(z): log of each functional")
print(f"{'r':>6} {'log mu':>12} {'log S':>12} {'log M':>12} {'N*':>6}")
for row in zip(p.r, p.log_mu, p.log_S, p.log_M, p.n_trunc):
    print(f"{row[0]:6.0f} {row[1]:12.4f} {row[2]:12.4f} {row[3]:12.4f} {row[4]:6d}")

# Stirling: log mu ~ r - log(r)/2 - log(2 pi)/2, and log M = r exactly
print("\nlog M - r          :", np.abs(p.log_M - p.r).max())
print("log M - log mu     :", np.round(p.log_M - p.log_mu, 3), " (grows like log(r)/2)")

# A Rademacher sign flip leaves mu and S alone but lowers M well below G
g = randomize(exp, rademacher(), SeedSpec(2024))
q = growth_profile(g, grid)
print("\nrandom signs, log M - log S:", np.round(q.log_M - q.log_S, 3))
print("deterministic,  log M - log S:", np.round(p.log_M - p.log_S, 3))

# On the disk, 1/(1-z) as r -> 1
geom = make_geometric_series(400000)
d = growth_profile(geom, RadiusGrid.approach_disk(0.5, 0.1, 4))
print("\n1/(1-z): r, G(r)(1-r), S(r) sqrt(1-r^2)")
for r, lg, ls in zip(d.r, d.log_G, d.log_S):
    print(f"  {r:.6f}  {np.exp(lg) * (1 - r):.12f}  {np.exp(ls) * np.sqrt(1 - r * r):.12f}")
