"""
Eve's purified states and the eta basis
=======================================

Fix one public context (bases, split, test values), build Eve's purified
states phi_i for every information string i, and transform them into the
eta vectors.  Their squared norms turn out to be the error probabilities Bob
would have seen had the information bits been sent in the other basis.
"""
import numpy as np

from qkdlab import evesim as ev

rng = np.random.default_rng(1)
attack = ev.symmetrize(ev.random_attack(4, 1, rng))     # n = 2 information bits
b, s, i_T, j_T = "0110", "1010", "01", "01"

table = ev.conditional_states(attack, b, s, i_T, j_T)
print("P(j_T | i_T, i_I) for each i_I:", np.round(table.cond_probs, 6))

phis = ev.purify(table)
eta = ev.eta_decompose(phis)
print("d_l^2            :", np.round(eta.d_sq, 6))
print("conjugate errors :", np.round(ev.conjugate_error_distribution(attack, b, s, i_T, j_T), 6))
print("largest overlap between distinct eta directions:", eta.overlap_residual())
print("phi_i recovered from eta:", np.allclose(eta.reconstruct(), phis))

# drop the ancilla wrapper and the eta directions stop being orthogonal
raw = ev.random_attack(4, 1, np.random.default_rng(1))
eta_raw = ev.eta_decompose(ev.purify(ev.conditional_states(raw, b, s, i_T, j_T)))
print("same attack, unsymmetrized, largest overlap:", round(eta_raw.overlap_residual(), 4))
