"""Bad-list probability of the gaussian ensemble: exact values, Monte Carlo
and the exponent.

The finite-n exponent approaches the asymptotic rate slowly because of the
polynomial prefactor; at n = 800 the gap is still close to ten percent.
"""

# %%
import math

from multipack.ensembles import EnsembleSpec
from multipack.montecarlo import exponent_fit, gaussian_tail_exact, gaussian_tail_log, gaussian_tail_rate, mc_tail

L, P, x = 3, 1.0, 0.5
rate = gaussian_tail_rate(L, P, x)
print(f"asymptotic rate {rate:.6f}")
for n in (100, 200, 400, 800, 1600, 3200, 6400, 12800, 25600):
    r = -gaussian_tail_log(n, L, P, x) / n
    print(f"n {n:6d}  -ln p / n {r:.6f}  rel gap {(r - rate) / rate:+.2%}")

# %% [markdown]
# Least-squares slopes over two windows.  The far window is within half a
# percent of the rate.

# %%
for ns in (range(100, 801, 100), range(1000, 8001, 1000)):
    slope = exponent_fit([(n, gaussian_tail_exact(n, L, P, x)) for n in ns])
    print(f"n in [{ns.start}, {ns.stop - 1}]: slope {slope:.6f}")

# %%
est = mc_tail(EnsembleSpec("gaussian", 20, P), L, 20 * 0.3, 1_000_000, seed=2024, workers=4)
exact = gaussian_tail_exact(20, L, P, 0.3)
print(f"n=20, N=0.3: MC {est.p_hat:.6f} +- {est.stderr:.6f}, exact {exact:.6f}")
print(f"z = {(est.p_hat - exact) / est.stderr:+.2f}, -ln p / n = {-math.log(exact) / 20:.4f}")
