"""
Running the protocol
====================

Used-bits BB84 against a few adversaries, then full BB84 with basis sifting.
"""
import warnings

import numpy as np

from qkdlab import bounds as bd
from qkdlab import evesim as ev
from qkdlab import gf2codes as gf2
from qkdlab import protocol as pr

warnings.simplefilter("ignore", pr.ContractWarning)

params = pr.ProtocolParams(10, p_allowed=0.1)
tr = pr.run_used_bits(params, rng=0)
print(tr.to_json())

# no error correction here, so any information-bit error is a key mismatch
for name in ["identity", "depolarizing:0.03", "intercept-resend", "swap"]:
    runs = pr.run_campaign(params, adversary=ev.attack_by_name(name), seed=1, trials=5000)
    print(f"{name:18s}", pr.summarize(runs))
print("swap pass rate should be 11/1024 =", round(11 / 1024, 5))

# error correction with a searched code: 15 bits, 3 information bits, distance 7
rng = np.random.default_rng(8)
code = gf2.search_code(15, 12, 7, rng)
pa = gf2.make_pa(code, [gf2.nullspace(code.H)[0]])
# with 12 checks on 15 bits every mask sits close to the check span; this code is for reliability only
print("\ncode d =", code.d, "t =", code.t, "mask distance", pa.hat_v)
p15 = pr.ProtocolParams(15, p_allowed=0.1)
runs = pr.run_campaign(p15, code, pa, ev.depolarizing_attack(0.03), seed=2, trials=2000)
print(pr.summarize(runs))

# full BB84: about half the bases match, the first 2n matches are kept
full = pr.FullBb84Params(10, 0.3)
aborts = sum(pr.run_full_bb84(full, rng=5, trial=t)[0].abort_reason is not None for t in range(4000))
print("\nfull BB84 abort rate", aborts / 4000, bd.sifting_abort_bound(full))
