"""
How much does Eve learn about one key parity?
=============================================

Split the coset of an announced syndrome by the parity v.i, average Eve's
states over each half, and compare half the trace distance between the two
averages with the bounds built from the eta weights.
"""
import numpy as np

from qkdlab import evesim as ev
from qkdlab import gf2codes as gf2

rng = np.random.default_rng(3)
attack = ev.symmetrize(ev.random_attack(4, 1, rng))
code = gf2.CodeSpec(gf2.bitmatrix(["11"]), 2)
v = gf2.bits("10")
hat_v = gf2.hat_v_of(code.H, v)
print("hat v =", hat_v)

rows = []
for b, s in [("0000", "0011"), ("0110", "0101"), ("1111", "1100")]:
    t = ev.conditional_states(attack, b, s, "00", "00")
    phis = ev.purify(t)
    eta = ev.eta_decompose(phis)
    for xi in ("0", "1"):
        ens = ev.parity_density_matrices(phis, code, xi, v)
        rep = ev.bound_report(eta, ens, hat_v, m=1)
        rows.append((b, s, xi, rep.sd_trace, ev.pair_sum(eta, ens), rep.sd_tight, rep.sd_loose))

print(f"{'b':>5} {'s':>5} xi {'1/2 Tr':>8} {'pairs':>8} {'tight':>8} {'loose':>8}")
for b, s, xi, *vals in rows:
    print(f"{b:>5} {s:>5} {xi:>2} " + " ".join(f"{x:8.4f}" for x in vals))

# the extreme cases: a perfect wire leaks nothing, a swap into memory leaks everything
for name in ("identity", "swap-like"):
    a = ev.symmetrize(ev.attack_by_name(name).joint(4))
    phis = ev.purify(ev.conditional_states(a, "0000", "0101", "00", "00"))
    ens = ev.parity_density_matrices(phis, gf2.CodeSpec.full_space(2), "", "11")
    print(name, "distinguishability:", round(ev.trace_distinguishability(ens), 6))
