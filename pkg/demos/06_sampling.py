"""
Estimating errors from a random half
====================================

Given a fixed error string of weight |c| on 2n positions, how often does the
information half carry noticeably more than its share?  Compare Monte Carlo,
the exact hypergeometric tail and the exponential bound.
"""
import numpy as np

from qkdlab import bounds as bd

rng = np.random.default_rng(7)
print(f"{'n':>4} {'|c|':>4} {'eps':>5} {'mc':>9} {'exact':>9} {'bound':>9}")
for n in (20, 50, 100):
    for c in (int(0.2 * n), int(0.6 * n)):
        for eps in (0.1, 0.2):
            mc = bd.sampling_tail_mc(n, c, eps, 50_000, rng)
            ex = bd.hypergeometric_tail(n, c, eps)
            print(f"{n:4d} {c:4d} {eps:5.2f} {mc:9.5f} {ex:9.5f} {bd.hoeffding_tail(n, eps):9.5f}")

# the Markov step behind the security criterion
pairs = [(0.01, 1.0), (0.2, 0.05), (0.79, 0.0)]
S, I_star, lhs, holds = bd.security_criterion_check(pairs)
print(f"\nS={S:.4f}  I*={I_star:.4f}  P(info >= I*)={lhs:.4f}  holds={holds}")
print(bd.criterion_constants(1, 0.05, 0.05).to_json())
