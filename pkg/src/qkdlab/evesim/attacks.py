"""Eve's unitary attacks and their 0/1 symmetrization.

Register layout of a joint attack: ``probe | data | ancilla``.  The ancilla
block (one qubit per data qubit) only exists for symmetrized attacks.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property, reduce

import numpy as np

from .. import qstate
from ..errors import CapacityError, InputError
from ..qstate import CNOT, HAD, SWAP, X, Z, apply_matrix, controlled

# sigma_x sigma_z applied when the ancilla is 1, and its inverse afterwards.
FLIP = X @ Z
UNFLIP = FLIP.conj().T


@dataclass(frozen=True, eq=False)
class AttackSpec:
    """A unitary on ``probe (x) data`` (probe qubits leading)."""

    data_qubits: int
    probe_qubits: int
    U: np.ndarray
    symmetrized: bool = False
    name: str = "custom"

    def __post_init__(self):
        U = qstate.check_unitary(self.U)
        if U.shape[0] != 1 << (self.data_qubits + self.probe_qubits):
            raise InputError("U does not act on probe + data qubits")
        U.setflags(write=False)
        object.__setattr__(self, "U", U)
        if self.total_qubits > qstate.MAX_QUBITS:
            raise CapacityError(f"attack needs {self.total_qubits} qubits (cap {qstate.MAX_QUBITS})")

    @property
    def ancilla_qubits(self) -> int:
        return self.data_qubits if self.symmetrized else 0

    @property
    def total_qubits(self) -> int:
        return self.probe_qubits + self.data_qubits + self.ancilla_qubits

    @property
    def eve_dim(self) -> int:
        return 1 << (self.probe_qubits + self.ancilla_qubits)

    @property
    def register_map(self) -> dict:
        Q, D = self.probe_qubits, self.data_qubits
        return {"probe": range(0, Q), "data": range(Q, Q + D),
                "ancilla": range(Q + D, Q + D + self.ancilla_qubits)}

    def evolve(self, amps: np.ndarray) -> np.ndarray:
        """Run the attack on a batch of register states ``(B, 2**total_qubits)``."""
        Q, D, N = self.probe_qubits, self.data_qubits, self.total_qubits
        data = list(range(Q, Q + D))
        if self.symmetrized:
            for k in range(D):
                amps = apply_matrix(amps, controlled(FLIP), [Q + D + k, Q + k], N)
        amps = apply_matrix(amps, self.U, list(range(Q)) + data, N)
        if self.symmetrized:
            for k in range(D):
                amps = apply_matrix(amps, controlled(UNFLIP), [Q + D + k, Q + k], N)
        return amps

    def initial_state(self, data_state: qstate.StateVector) -> qstate.StateVector:
        """``|0>_probe (x) data (x) |+>^A`` for a given data-register state."""
        probe = qstate.basis_state(0, self.probe_qubits).amps
        plus = np.full(1 << self.ancilla_qubits, 2 ** (-self.ancilla_qubits / 2), dtype=complex)
        amps = np.kron(np.kron(probe, data_state.amps), plus)
        return qstate.StateVector(amps, self.total_qubits, self.register_map)

    def apply(self, data_state: qstate.StateVector) -> qstate.StateVector:
        psi = self.initial_state(data_state)
        return qstate.StateVector(self.evolve(psi.amps[None, :])[0], psi.num_qubits, psi.register_map)


def symmetrize(attack: AttackSpec) -> AttackSpec:
    """Wrap ``attack`` in ancilla-controlled bit flips (applied structurally)."""
    if attack.symmetrized:
        raise InputError("attack is already symmetrized")
    return replace(attack, symmetrized=True, name=f"sym({attack.name})")


def ensure_symmetrized(attack: AttackSpec) -> AttackSpec:
    return attack if attack.symmetrized else symmetrize(attack)


@dataclass(frozen=True, eq=False)
class PerQubitAttack:
    """The same local unitary on ``probe_k (x) data_k`` for every transmitted qubit."""

    probe_qubits: int
    U: np.ndarray
    name: str = "local"

    def __post_init__(self):
        U = qstate.check_unitary(self.U)
        if U.shape[0] != 1 << (self.probe_qubits + 1):
            raise InputError("local unitary must act on probe_qubits + 1 qubits")
        object.__setattr__(self, "U", U)

    def joint(self, data_qubits: int) -> AttackSpec:
        """The product attack on ``data_qubits`` qubits as one AttackSpec."""
        q, D = self.probe_qubits, data_qubits
        Q = q * D
        N = Q + D
        if N > qstate.MAX_QUBITS:
            raise CapacityError(f"joint form needs {N} qubits")
        amps = np.eye(1 << N, dtype=complex)
        for k in range(D):
            targets = list(range(k * q, (k + 1) * q)) + [Q + k]
            amps = apply_matrix(amps, self.U, targets, N)
        # Row b of `amps` is U|b>, so U itself is the transpose.
        return AttackSpec(D, Q, amps.T, name=self.name)

    def transition_table(self) -> np.ndarray:
        """``P[a_basis, b_basis, i, j]``: Bob reads ``j`` in ``b_basis`` when Alice sent ``i`` in ``a_basis``."""
        return self._transitions

    @cached_property
    def _transitions(self) -> np.ndarray:
        q = self.probe_qubits
        table = np.zeros((2, 2, 2, 2))
        for a in (0, 1):
            for i in (0, 1):
                psi = qstate.basis_state(0, q).tensor(qstate.bb84_encode(i, a)) if q else qstate.bb84_encode(i, a)
                psi = qstate.apply_unitary(self.U, psi, range(q + 1))
                for b in (0, 1):
                    table[a, b, i] = qstate.measure_distribution(psi, [q], [b])
        return table


def _local(gates, probe_qubits: int, name: str) -> PerQubitAttack:
    """Compose ``(matrix, targets)`` gates on ``probe (x) data`` into one local unitary."""
    N = probe_qubits + 1
    amps = np.eye(1 << N, dtype=complex)
    for U, targets in gates:
        amps = apply_matrix(amps, U, targets, N)
    return PerQubitAttack(probe_qubits, amps.T, name)


def identity_attack() -> PerQubitAttack:
    return PerQubitAttack(0, np.eye(2), "identity")


def swap_attack() -> PerQubitAttack:
    """Keep Alice's qubit, send Bob a uniformly random BB84 state.

    Probe qubits: (memory, bit coin, basis coin); data qubit last.
    """
    mem, cbit, cbasis, d = 0, 1, 2, 3
    return _local([(HAD, [cbit]), (HAD, [cbasis]), (SWAP, [mem, d]),
                   (CNOT, [cbit, d]), (controlled(HAD), [cbasis, d])], 3, "swap")


def swap_like_attack() -> PerQubitAttack:
    """Swap the data qubit into a one-qubit memory; Bob receives ``|0>``."""
    return _local([(SWAP, [0, 1])], 1, "swap-like")


def intercept_resend_attack() -> PerQubitAttack:
    """Measure in a uniformly random basis and resend the outcome.

    Probe qubits: (record, basis coin).  The CNOT into the record is the
    measurement; the data qubit leaves in the measured eigenstate.
    """
    record, coin, d = 0, 1, 2
    return _local([(HAD, [coin]), (controlled(HAD), [coin, d]), (CNOT, [d, record]),
                   (controlled(HAD), [coin, d])], 2, "intercept-resend")


def zcnot_attack() -> PerQubitAttack:
    """Copy the z value of the data qubit into a one-qubit probe."""
    return _local([(CNOT, [1, 0])], 1, "zcnot")


def depolarizing_attack(error_rate: float) -> PerQubitAttack:
    """Unitary dilation of a depolarizing channel with the given per-basis error rate.

    X, Y and Z each occur with probability ``error_rate / 2``.
    """
    if not 0 <= error_rate <= 2 / 3:
        raise InputError("depolarizing error rate must lie in [0, 2/3]")
    q = error_rate / 2
    # Environment |ab>: a -> apply X, b -> apply Z; |11> gives XZ ~ Y.
    env = np.sqrt([1 - 3 * q, q, q, q]).astype(complex)
    prep = _complete_unitary(env)
    return _local([(prep, [0, 1]), (controlled(Z), [1, 2]), (controlled(X), [0, 2])],
                  2, f"depolarizing({error_rate:g})")


def _complete_unitary(col: np.ndarray) -> np.ndarray:
    """A unitary whose first column is the unit vector ``col``."""
    d = col.size
    M = np.eye(d, dtype=complex)
    M[:, 0] = col
    Q, R = np.linalg.qr(M)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_attack(data_qubits: int, probe_qubits: int, rng: np.random.Generator) -> AttackSpec:
    U = qstate.haar_unitary(1 << (data_qubits + probe_qubits), rng)
    return AttackSpec(data_qubits, probe_qubits, U, name="random")


def load_attack(path) -> AttackSpec:
    with open(path) as fh:
        U, D, Q = qstate.loads_unitary(fh.read())
    return AttackSpec(D, Q, U, name=str(path))


def save_attack(path, attack: AttackSpec) -> None:
    with open(path, "w") as fh:
        fh.write(qstate.dumps_unitary(attack.U, attack.data_qubits, attack.probe_qubits))


CATALOG = {
    "identity": identity_attack,
    "swap": swap_attack,
    "swap-like": swap_like_attack,
    "intercept-resend": intercept_resend_attack,
    "zcnot": zcnot_attack,
}


def attack_by_name(spec: str):
    """Resolve ``name``, ``depolarizing:<rate>`` or ``file:<path>``."""
    if spec in CATALOG:
        return CATALOG[spec]()
    if spec.startswith("depolarizing:"):
        return depolarizing_attack(float(spec.split(":", 1)[1]))
    if spec.startswith("file:"):
        return load_attack(spec.split(":", 1)[1])
    raise InputError(f"unknown attack {spec!r}")


def as_joint(attack, data_qubits: int) -> AttackSpec:
    if isinstance(attack, PerQubitAttack):
        return attack.joint(data_qubits)
    if attack.data_qubits != data_qubits:
        raise InputError(f"attack acts on {attack.data_qubits} data qubits, need {data_qubits}")
    return attack


def basis_rotation(bases) -> np.ndarray:
    """Tensor product of H (x basis) or I (z basis) over the given basis bits."""
    return reduce(np.kron, [HAD if b else np.eye(2) for b in bases], np.eye(1, dtype=complex))


__all__ = [
    "AttackSpec", "PerQubitAttack", "symmetrize", "ensure_symmetrized", "identity_attack",
    "swap_attack", "swap_like_attack", "intercept_resend_attack", "zcnot_attack",
    "depolarizing_attack", "random_attack", "load_attack", "save_attack", "attack_by_name",
    "as_joint", "basis_rotation", "CATALOG",
]
