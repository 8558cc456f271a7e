"""Random coding with expurgation at n = 50, L = 3, N/P = 0.45.

Compares the plain gaussian ensemble with one whose variance is backed off
by the factor chosen in `choose_eps`, over 200 seeds.
"""

# %%
import logging

from multipack.bounds import BoundName, eval_bound
from multipack.ensembles import EnsembleSpec
from multipack.expurgation import choose_eps, construct, expected_removals, initial_size
from multipack.geometry import PackingParams

n, L, P, N = 50, 3, 1.0, 0.45
rate = 0.8 * eval_bound(BoundName.lb_gaussian, L, N / P)
M = initial_size(n, rate)
params = PackingParams(n, L, N, P, "average-radius")
# the plain ensemble sometimes loses every codeword; that is counted below
logging.getLogger("multipack.expurgation").setLevel(logging.ERROR)
print(f"target rate {rate:.4f} nats, initial size {M}")

# %% [markdown]
# Expected deletions: power violations plus bad lists.  The back-off trades
# the first against the second.

# %%
eps = choose_eps(n, L, P, N, M)
for e in (0.0, eps, 0.5):
    print(f"eps {e:.3f}: expected removals {expected_removals(e, n, L, P, N, M):.3f}")

# %%
for e in (0.0, eps):
    good = 0
    for seed in range(200):
        _, rep = construct(EnsembleSpec("gaussian", n, P, seed=seed, eps=e), params, rate)
        good += rep.verified and 2 * rep.final_size >= rep.initial_size
    print(f"eps {e:.3f}: kept at least half the code in {good}/200 seeds")
