"""Exceptional sets of finite logarithmic measure.

Growth inequalities of Wiman-Valiron type hold outside a set E with
int_E dr/r < oo.  Here we calibrate the constant of the Rosenbloom bound
on a burn-in window, look at where the exponential violates it, and check
that the measure of the violation set stays put as the range of radii
grows and the grid is refined.
"""

import math

import numpy as np

from wvlab import RadiusGrid, calibrate_constant, check_inequality, growth_profile, make_exp_series
from wvlab.measure import HWeight, IntervalSet, MeasureConvention, derivative_exceptional_set, h_log_measure

exp = make_exp_series(1000)
for per_octave in (8, 16, 32):
    grid = RadiusGrid.geometric_between(2.0, 200.0, per_octave)
    p = growth_profile(exp, grid)
    unit = check_inequality(p, p, "rosenbloom", log_C=0.0, delta=0.5)
    C = calibrate_constant(unit, (2.0, 20.0))
    rep = check_inequality(p, p, "rosenbloom", C=C, delta=0.5)
    print(f"{per_octave:3d} points/octave: C = {C:.4f}, E = {rep.violations.intervals}, "
          f"log-measure {rep.measure:.4f}")

# The same bookkeeping for the derivative lemma, on the disk
print("\nd/dr log g <= (h/r)(log g)^2 with g = 1/(1-r), h = 1/(1-r):")
for k in (1, 2, 4, 8):
    grid = RadiusGrid.approach_disk(0.05, 0.8 ** (1 / k), 40 * k)
    rep = derivative_exceptional_set(-np.log1p(-grid.radii), HWeight.disk_reciprocal(), 1.0, grid)
    print(f"  refinement x{k}: measure {rep.measure:.4f}")
print("  flag region [0, 1 - 1/e) has measure",
      h_log_measure(IntervalSet([(0.0, 1 - math.exp(-1))]), MeasureConvention.DISK_CLASSIC))
