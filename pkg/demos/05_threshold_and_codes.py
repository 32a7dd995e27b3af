"""
Where the error threshold comes from
====================================

The asymptotic rate 1 - h2(2p) - h2(p) hits zero near 7.56%.  At finite n
the same boundary shows up as the point where no parity-check fraction r/n
satisfies both code-existence inequalities.
"""
import numpy as np

from qkdlab import bounds as bd
from qkdlab import gf2codes as gf2

p_star = bd.threshold_solve()
print("threshold:", p_star)
for p in (0.0, 0.02, 0.05, 0.07, p_star, 0.08):
    print(f"  p={p:.4f}  rate={bd.secret_rate(p):+.4f}")

n = 10**6
for p in np.arange(0.070, 0.0801, 0.002):
    rep = bd.rate_report(p, n, eps_rel=1e-4, eps_sec=1e-4)
    print(f"  p={p:.3f} feasible={rep.feasible!s:5} g1={rep.g1:.2e} g2={rep.g2:.2e}")

# random codes at tiny n: the distance bound is loose
rng = np.random.default_rng(9)
d = np.array([gf2.min_distance(gf2.sample_random_linear_code(16, 8, rng)) for _ in range(2000)])
print("\n(16, r=8) random codes, distance histogram:", np.bincount(d))
print("fraction with d/n < 0.2:", (d < 3.2).mean(), " bound:", bd.gallager_failure(16, 0.5, 0.2, raw=True))
print("the same bound at n=2000, r/n=0.9, delta=0.1:", bd.gallager_failure(2000, 0.9, 0.1))
