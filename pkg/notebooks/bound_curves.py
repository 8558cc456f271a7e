"""Bound curves for the bounded and unbounded problems.

Writes one CSV per (family, L) next to this script and prints the ranking
at N/P = 0.4 for L = 5 together with the crossovers of the lower bounds.
Run with ``python notebooks/bound_curves.py [outdir]``.
"""

# %%
import itertools
import sys
from pathlib import Path

import numpy as np

from multipack.bounds import BOUNDED, BOUNDED_LOWER, UNBOUNDED, bound_curve, crossovers, eval_bound, plotkin_point
from multipack.codefile import curve_csv

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "output"
out.mkdir(parents=True, exist_ok=True)

# %% [markdown]
# The bounded family lives on (0, (L-1)/L]; every curve except the large-L
# capacity vanishes at the right end.  The unbounded family takes the noise
# level N itself and may go negative.

# %%
for L in (2, 3, 5, 10):
    pp = plotkin_point(L)
    grid = [round(k * 0.01, 2) for k in range(1, int(round(pp * 100)) + 1)]
    (out / f"bounded_L{L}.csv").write_text(curve_csv(BOUNDED, L, grid))
    (out / f"unbounded_L{L}.csv").write_text(curve_csv(UNBOUNDED, L, [k * 0.01 for k in range(1, 101)]))
print("curves written to", out)

# %%
L, x = 5, 0.4
for name in sorted(BOUNDED[:5], key=lambda b: -eval_bound(b, L, x)):
    print(f"{name.value:24s} {eval_bound(name, L, x):.4f} nats")

# %% [markdown]
# Crossovers between lower bounds on a fine grid.  Nothing to compare them
# against; they only show where each bound is the best one available.

# %%
grid = np.linspace(1e-3, plotkin_point(L) - 1e-3, 2000)
curves = {b: bound_curve(b, L, grid) for b in BOUNDED_LOWER}
for a, b in itertools.combinations(BOUNDED_LOWER, 2):
    xs = crossovers(curves[a], curves[b])
    if xs:
        print(f"{a.value} / {b.value}: " + ", ".join(f"{v:.4f}" for v in xs))
