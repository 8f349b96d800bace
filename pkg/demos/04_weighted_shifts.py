"""Random frequently hypercyclic functions for the derivative.

B_w shifts coefficients down and multiplies by weights; w_n = n gives
the derivative D on entire functions.  With i.i.d. Gaussian X_n the
function g = sum X_n z^n / n! is almost surely frequently hypercyclic:
its derivatives D^n g return to every ball with positive lower density.
We estimate these densities on a few target balls.
"""

import numpy as np

from wvlab import SeedSpec
from wvlab.dynamics import TargetSpec, WeightSequence, chaos_check, hitting_density, random_fhc_function
from wvlab.sampler import complex_gaussian

for w in (WeightSequence.derivative(), WeightSequence.taylor_shift(),
          WeightSequence.constant(1.0, "plane"), WeightSequence.constant(0.5, "disk")):
    print(f"{w.name:>12} on the {w.space:5s}: {chaos_check(w).verdict}")

D = WeightSequence.derivative()
targets = [TargetSpec((0.0,), 0.5, 0.5, "0"), TargetSpec((1.0,), 0.5, 0.5, "1"),
           TargetSpec((0.0, 1.0), 0.5, 0.5, "z")]
rows = []
for seed in range(5):
    g = random_fhc_function(D, complex_gaussian(), 5200, SeedSpec(seed))
    rep = hitting_density(g, D, targets, 5000)
    rows.append(rep.lower_density)
    print(f"seed {seed}: window lower densities", np.round(rep.lower_density, 4))

est = np.array(rows)
print("\nmean lower density per target:", dict(zip((t.name for t in targets), (round(float(m), 4) for m in est.mean(0)))))
print("hit counts over n <= 5000 for the last seed:", rep.hits.sum(axis=1))
