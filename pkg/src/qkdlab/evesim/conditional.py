"""Eve's probe states conditioned on the public test data, and their eta basis."""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .. import gf2codes as gf2
from ..errors import InputError, ZeroProbabilityBranchError
from .attacks import AttackSpec, basis_rotation

ETA_PRESENT = 1e-10  # d_l^2 below this leaves eta_hat_l undefined


def _as_int(x, n: int) -> int:
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = gf2.bits(x)
    if x.size != n:
        raise InputError(f"expected {n} bits, got {x.size}")
    return gf2.to_int(x)


def walsh(n: int) -> np.ndarray:
    """``W[i, l] = (-1)^(i.l)`` for n-bit strings packed MSB first."""
    idx = np.arange(1 << n)
    return 1 - 2 * (np.bitwise_count(idx[:, None] & idx[None, :]) & 1).astype(np.int64)


class AttackChannel:
    """Amplitudes ``<e|<j|_b U |0>|i>_b`` of an attack, cached per basis string.

    ``tensor(b)[i, j, e]`` has Alice's input ``i`` and Bob's outcome ``j`` both
    in the basis string ``b``, and ``e`` indexes Eve's register (probe, then
    symmetrization ancillas).
    """

    def __init__(self, attack: AttackSpec):
        self.attack = attack
        self.D = attack.data_qubits
        self._cache: dict[int, np.ndarray] = {}

    def tensor(self, b) -> np.ndarray:
        b = _as_int(b, self.D)
        if b not in self._cache:
            self._cache[b] = self._compute(gf2.from_int(b, self.D))
        return self._cache[b]

    def _compute(self, bases) -> np.ndarray:
        a = self.attack
        Q, D, A = a.probe_qubits, a.data_qubits, a.ancilla_qubits
        Hb = basis_rotation(bases)
        dd = 1 << D
        psi = np.zeros((dd, 1 << Q, dd, 1 << A), dtype=complex)
        psi[:, 0, :, :] = Hb.T[:, :, None] * 2 ** (-A / 2)
        out = a.evolve(psi.reshape(dd, -1)).reshape(dd, 1 << Q, dd, 1 << A)
        # Bob's measurement in basis b: rotate the data register back (Hb is real, symmetric).
        out = np.einsum("jx,iqxa->ijqa", Hb, out)
        return out.reshape(dd, dd, -1)


def split_positions(s) -> tuple[np.ndarray, np.ndarray]:
    """Test positions (zeros of ``s``) and information positions (ones of ``s``)."""
    s = gf2.bits(s)
    return np.nonzero(s == 0)[0], np.nonzero(s == 1)[0]


def merge_index(s, test_val: int, info_val: int) -> int:
    """Full 2n-bit index with the test and info substrings placed per ``s``."""
    test, info = split_positions(s)
    D = len(test) + len(info)
    full = np.zeros(D, dtype=np.uint8)
    full[test] = gf2.from_int(test_val, len(test))
    full[info] = gf2.from_int(info_val, len(info))
    return gf2.to_int(full)


def info_index_map(s, test_val: int) -> np.ndarray:
    n = int(np.count_nonzero(gf2.bits(s)))
    return np.array([merge_index(s, test_val, v) for v in range(1 << n)])


@dataclass(frozen=True)
class ConditionalStateTable:
    """Normalized probe vectors ``E[i_I, j_I]`` for one public context."""

    context: dict
    E: np.ndarray            # (2^n, 2^n, eve_dim)
    cond_probs: np.ndarray   # P(j_T | i_T, i_I, b, s) for every i_I

    @property
    def vectors(self) -> np.ndarray:
        return self.E

    @property
    def n_info(self) -> int:
        return int(np.log2(self.E.shape[0]))

    @property
    def cond_prob(self) -> float:
        return float(self.cond_probs.mean())

    def entry(self, i_I) -> np.ndarray:
        return self.E[_as_int(i_I, self.n_info)]


def conditional_states(attack, b, s, i_T, j_T, channel: AttackChannel | None = None) -> ConditionalStateTable:
    """Eve's states given bases ``b``, split ``s`` and test values ``(i_T, j_T)``.

    Each row ``i_I`` is normalized by its own ``P(j_T | i_T, i_I, b, s)``; for a
    symmetrized attack those probabilities coincide.
    """
    ch = channel or AttackChannel(attack)
    s_bits = gf2.bits(s)
    if s_bits.size != ch.D:
        raise InputError("split string length differs from the number of data qubits")
    n_test = int(np.count_nonzero(s_bits == 0))
    t_in, t_out = _as_int(i_T, n_test), _as_int(j_T, n_test)
    T = ch.tensor(b)
    rows = info_index_map(s_bits, t_in)
    cols = info_index_map(s_bits, t_out)
    E = T[np.ix_(rows, cols)]
    probs = np.einsum("ije,ije->i", E.conj(), E).real
    if np.any(probs <= 1e-14):
        raise ZeroProbabilityBranchError(f"test outcome j_T={j_T} impossible for some i_I")
    E = E / np.sqrt(probs)[:, None, None]
    ctx = {"b": gf2.to_str(gf2.bits(b, ch.D) if isinstance(b, (int, np.integer)) else gf2.bits(b)),
           "s": gf2.to_str(s_bits),
           "i_T": gf2.to_str(gf2.from_int(t_in, n_test)), "j_T": gf2.to_str(gf2.from_int(t_out, n_test))}
    return ConditionalStateTable(ctx, E, probs)


def purify(table: ConditionalStateTable) -> np.ndarray:
    """``phi_i = sum_j E_{i,j} (x) |i xor j>`` as rows of shape ``(2^n, eve_dim * 2^n)``."""
    E = table.E
    N, _, dE = E.shape
    phis = np.zeros((N, dE, N), dtype=complex)
    for i in range(N):
        for j in range(N):
            phis[i, :, i ^ j] += E[i, j]
    return phis.reshape(N, -1)


def mixed_state(table: ConditionalStateTable, i_I) -> np.ndarray:
    """``rho^i = sum_j |E_{i,j}><E_{i,j}|``."""
    E = table.entry(i_I)
    return E.T @ E.conj()


@dataclass(frozen=True)
class EtaDecomposition:
    n_info: int
    d_sq: np.ndarray
    eta: np.ndarray          # unnormalized eta_l as rows
    present: np.ndarray      # d_l^2 > ETA_PRESENT

    @property
    def eta_hat(self) -> np.ndarray:
        """Normalized directions; rows with ``present == False`` are zero."""
        d = np.sqrt(self.d_sq)
        out = np.zeros_like(self.eta)
        out[self.present] = self.eta[self.present] / d[self.present, None]
        return out

    def reconstruct(self) -> np.ndarray:
        """``phi_i = sum_l (-1)^(i.l) eta_l``."""
        return walsh(self.n_info) @ self.eta

    def overlap_residual(self) -> float:
        """Largest ``|<eta_hat_k|eta_hat_l>|`` over ``k != l`` with both present."""
        V = self.eta_hat[self.present]
        if len(V) < 2:
            return 0.0
        G = np.abs(V.conj() @ V.T)
        np.fill_diagonal(G, 0.0)
        return float(G.max())


def eta_decompose(phis: np.ndarray) -> EtaDecomposition:
    phis = np.asarray(phis)
    N = phis.shape[0]
    n = N.bit_length() - 1
    if 1 << n != N:
        raise InputError("need 2^n purified states")
    eta = walsh(n) @ phis / N
    d_sq = np.einsum("le,le->l", eta.conj(), eta).real
    return EtaDecomposition(n, d_sq, eta, d_sq > ETA_PRESENT)


def phi_shift_residual(phis: np.ndarray) -> float:
    """Spread over ``l`` of ``<phi_l|phi_{l xor k}>``, maximized over ``k``."""
    N = phis.shape[0]
    G = phis.conj() @ phis.T
    worst = 0.0
    for k in range(N):
        vals = np.array([G[l, l ^ k] for l in range(N)])
        worst = max(worst, float(np.abs(vals - vals[0]).max()))
    return worst


def _flip_info_bases(b: int, s, D: int) -> int:
    bb = gf2.from_int(b, D)
    _, info = split_positions(s)
    bb[info] ^= 1
    return gf2.to_int(bb)


def _joint_errors(ch: AttackChannel, b: int, s, t_in: int, t_out: int) -> np.ndarray:
    """Unnormalized ``(1/2^n) sum_k ||<j_T, k xor c| U |i_T, k>||^2`` over ``c``."""
    T = ch.tensor(b)
    rows = info_index_map(s, t_in)
    cols = info_index_map(s, t_out)
    N = len(rows)
    out = np.zeros(N)
    for k in range(N):
        for c in range(N):
            v = T[rows[k], cols[k ^ c]]
            out[c] += np.vdot(v, v).real
    return out / N


def conjugate_error_distribution(attack, b, s, i_T, j_T, channel: AttackChannel | None = None) -> np.ndarray:
    """``P(c_I^o | i_T, j_T, b, s)``: info-bit errors had the info bases been flipped.

    Obtained by re-running the attack with the information qubits encoded and
    measured in the conjugate bases, averaging over uniform ``i_I``.
    """
    ch = channel or AttackChannel(attack)
    s_bits = gf2.bits(s)
    n_test = int(np.count_nonzero(s_bits == 0))
    b_int = _as_int(b, ch.D)
    joint = _joint_errors(ch, _flip_info_bases(b_int, s_bits, ch.D), s_bits,
                          _as_int(i_T, n_test), _as_int(j_T, n_test))
    total = joint.sum()
    if total <= 1e-14:
        raise ZeroProbabilityBranchError(f"test outcome j_T={j_T} impossible")
    return joint / total


def error_distribution(attack, b, channel: AttackChannel | None = None, average: bool = True) -> np.ndarray:
    """``P(c | i, b)`` over full 2n-bit error strings; averaged over ``i`` by default."""
    ch = channel or AttackChannel(attack)
    T = ch.tensor(b)
    N = T.shape[0]
    P = np.zeros((N, N))
    for i in range(N):
        norms = np.einsum("je,je->j", T[i].conj(), T[i]).real
        P[i] = norms[np.arange(N) ^ i]
    return P.mean(axis=0) if average else P


def test_outcome_probabilities(attack, b, s, i_T, channel: AttackChannel | None = None) -> np.ndarray:
    """``P(j_T | i_T, i_I, b, s)`` as an array indexed ``[i_I, j_T]``."""
    ch = channel or AttackChannel(attack)
    s_bits = gf2.bits(s)
    test, info = split_positions(s_bits)
    T = ch.tensor(b)
    t_in = _as_int(i_T, len(test))
    out = np.zeros((1 << len(info), 1 << len(test)))
    for iv, row in enumerate(info_index_map(s_bits, t_in)):
        norms = np.einsum("je,je->j", T[row].conj(), T[row]).real
        for jt in range(1 << len(test)):
            out[iv, jt] = norms[info_index_map(s_bits, jt)].sum()
    return out


def all_splits(D: int) -> list[np.ndarray]:
    """Every 2n-bit string with exactly n ones, in increasing integer order."""
    n = D // 2
    return [gf2.from_int(v, D) for v in range(1 << D) if v.bit_count() == n]


__all__ = [
    "AttackChannel", "ConditionalStateTable", "EtaDecomposition", "conditional_states",
    "purify", "mixed_state", "eta_decompose", "phi_shift_residual",
    "conjugate_error_distribution", "error_distribution", "test_outcome_probabilities",
    "split_positions", "merge_index", "walsh", "all_splits",
]
