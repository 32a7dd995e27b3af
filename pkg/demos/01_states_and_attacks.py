"""
BB84 states and a few eavesdroppers
===================================

Encode bits in the z and x bases, then look at what each catalog attack does
to Bob's error rate in the matching basis.
"""
import numpy as np

from qkdlab import evesim as ev
from qkdlab import qstate as qs

# the four states; cross-basis overlaps are all 1/2
for basis in "zx":
    for bit in (0, 1):
        print(basis, bit, np.round(qs.bb84_encode(bit, basis).amps, 3))
print("|<0_z|0_x>|^2 =", abs(qs.bb84_encode(0, "z").inner(qs.bb84_encode(0, "x"))) ** 2)

# distinguishing |0_z> from |0_x> perfectly is impossible
rho = [qs.pure_density(qs.bb84_encode(0, b)) for b in "zx"]
print("half trace distance:", 0.5 * qs.trace_norm(rho[0] - rho[1]))

# transition table P[alice basis, bob basis, i, j]
print("\nerror rate (z basis, x basis)")
for name in ["identity", "intercept-resend", "zcnot", "swap", "depolarizing:0.03"]:
    P = ev.attack_by_name(name).transition_table()
    print(f"  {name:18s}", [round(float(P[b, b, 0, 1] + P[b, b, 1, 0]) / 2, 4) for b in (0, 1)])

# the same attack written out on two qubits, with and without the ancilla wrapper
a = ev.zcnot_attack().joint(2)
sa = ev.symmetrize(a)
print("\nqubits:", a.total_qubits, "->", sa.total_qubits, sa.register_map)
for b in range(4):
    per_input = ev.error_distribution(sa, b, average=False)
    # after symmetrization the error pattern no longer depends on Alice's bits
    print("  bases", format(b, "02b"), "spread over inputs:", float(np.ptp(per_input, axis=0).max()))
