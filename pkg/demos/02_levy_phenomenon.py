"""Random signs make the maximum modulus smaller.

For the deterministic exponential, M(r)/S(r) grows like r^{1/4}.  With
random multipliers the ratio typically stays within a factor of
sqrt(log log mu), up to a small exceptional set of radii.  We run a small
Monte Carlo suite and compare regression slopes of log(M/S) against
log log mu for both.
"""

import numpy as np

from wvlab import RadiusGrid, levy_trial_suite, make_exp_series
from wvlab.inequality import exponent_fit, regression_data
from wvlab.sampler import rademacher

grid = RadiusGrid.geometric_between(16.0, 512.0, 8)
suite = levy_trial_suite(make_exp_series(1000), rademacher(), "levy_plane_S", 40, grid,
                         master_seed=1, C=1.0)

base = suite.base_profile
x, y = regression_data(base, base, "loglog_mu", "M/S")
det = exponent_fit(x, y).slope
rand = np.array([f.slope for f in suite.slopes(exclude_violations=False)])
print(f"deterministic slope of log(M/S) vs loglog mu: {det:.3f}")
print(f"random slopes: mean {rand.mean():.3f}, sd {rand.std(ddof=1):.3f}")

ratios = suite.sup_ratios()
print("\nsup over the grid of M/(S sqrt(loglog mu)), quantiles over trials:")
for q in (5, 50, 95):
    print(f"  q{q:02d}  {np.percentile(ratios, q):.4f}")

for r_max in (128.0, 256.0, 512.0):
    print(f"q95 up to r = {r_max:5.0f}: {np.percentile(suite.sup_ratios(r_max=r_max), 95):.4f}")
print("\nviolation measures at C = 1:", np.round(np.percentile(suite.violation_measures, [50, 95]), 3))
