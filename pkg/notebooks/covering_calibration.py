"""Random cap coverings of the unit sphere at n = 8, alpha = pi/3.

The nominal size ceil(oversample * sin(alpha)^-n) with oversample 4 gives
only 13 caps, which cover about two thirds of the sphere.  The expected
coverage 1 - (1 - f)^K follows from the cap fraction f and tells how far the
oversample factor must go.
"""

# %%
import math

import numpy as np

from multipack.covering import build_covering, cap_fraction, coverage_fraction, expected_coverage, oversample_for

n, alpha = 8, math.pi / 3
print(f"cap fraction {cap_fraction(n, alpha):.5f}")
for over in (1, 4, 8, 16, 27, 32):
    covs = [build_covering(n, alpha, over, seed=s) for s in range(20)]
    frac = [coverage_fraction(c, 50_000, seed=100 + s) for s, c in enumerate(covs)]
    print(f"oversample {over:3d}  K {covs[0].K:4d}  expected {expected_coverage(n, alpha, covs[0].K):.4f}"
          f"  measured median {np.median(frac):.4f}  >= 0.999 in {sum(f >= 0.999 for f in frac)}/20")

# %%
for target in (0.99, 0.999, 0.9995):
    print(f"coverage {target}: oversample {oversample_for(n, alpha, target):.2f}")
