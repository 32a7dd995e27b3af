"""Small exact statevector engine (at most 12 qubits).

Qubit 0 is the most significant bit of the amplitude index.  States are
immutable; every operation returns a new value.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .errors import CapacityError, InputError, ZeroProbabilityBranchError

MAX_QUBITS = 12
STATE_TOL = 1e-9
MATRIX_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
HAD = np.array([[1, 1], [1, -1]], dtype=complex) / sqrt(2)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def controlled(U: np.ndarray) -> np.ndarray:
    """``|0><0| (x) I + |1><1| (x) U`` with the control as the leading qubit."""
    d = U.shape[0]
    out = np.eye(2 * d, dtype=complex)
    out[d:, d:] = U
    return out


CNOT = controlled(X)


@dataclass(frozen=True, eq=False)
class StateVector:
    amps: np.ndarray
    num_qubits: int
    register_map: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.num_qubits > MAX_QUBITS:
            raise CapacityError(f"{self.num_qubits} qubits exceeds the cap of {MAX_QUBITS}")
        a = np.array(self.amps, dtype=complex).ravel()
        if a.size != 1 << self.num_qubits:
            raise InputError(f"{a.size} amplitudes for {self.num_qubits} qubits")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amps, other.amps))

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amps, other.amps), self.num_qubits + other.num_qubits)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def with_registers(self, **spans) -> "StateVector":
        return StateVector(self.amps, self.num_qubits, {**self.register_map, **spans})


def basis_state(index: int, num_qubits: int) -> StateVector:
    a = np.zeros(1 << num_qubits, dtype=complex)
    a[index] = 1.0
    return StateVector(a, num_qubits)


def bb84_encode(bit: int, basis: str | int) -> StateVector:
    """One of the four BB84 states; basis ``"z"``/0 or ``"x"``/1."""
    if bit not in (0, 1):
        raise InputError("bit must be 0 or 1")
    b = _basis_code(basis)
    amps = np.array([1, 0] if bit == 0 else [0, 1], dtype=complex)
    if b == 1:
        amps = HAD @ amps
    return StateVector(amps, 1)


def _basis_code(basis) -> int:
    if basis in ("z", "Z", 0):
        return 0
    if basis in ("x", "X", 1):
        return 1
    raise InputError(f"unknown basis {basis!r}")


# --------------------------------------------------------------------------
# kernels on raw amplitude arrays with a leading batch axis

def apply_matrix(amps: np.ndarray, U: np.ndarray, targets, num_qubits: int) -> np.ndarray:
    """Apply ``U`` to ``targets`` of a batch of states shaped ``(B, 2**num_qubits)``."""
    targets = list(targets)
    k = len(targets)
    B = amps.shape[0]
    psi = amps.reshape((B,) + (2,) * num_qubits)
    axes = [t + 1 for t in targets]
    Ut = U.reshape((2,) * (2 * k))
    psi = np.tensordot(psi, Ut, axes=(axes, list(range(k, 2 * k))))
    # tensordot puts the k new axes last; move them back to the target slots.
    psi = np.moveaxis(psi, list(range(num_qubits + 1 - k, num_qubits + 1)), axes)
    return psi.reshape(B, -1)


def apply_controlled(amps, U, control: int, targets, num_qubits: int) -> np.ndarray:
    return apply_matrix(amps, controlled(U), [control, *targets], num_qubits)


def check_unitary(U: np.ndarray, tol: float = MATRIX_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape[0] & (U.shape[0] - 1):
        raise InputError(f"unitary must be square with power-of-two size, got {U.shape}")
    err = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]))
    if err > tol:
        raise InputError(f"matrix is not unitary (||U^dag U - I||_F = {err:.3g})")
    return U


def apply_unitary(U: np.ndarray, state: StateVector, targets) -> StateVector:
    U = np.asarray(U, dtype=complex)
    targets = list(targets)
    if len(set(targets)) != len(targets) or any(not 0 <= t < state.num_qubits for t in targets):
        raise InputError(f"bad target qubits {targets}")
    if U.shape != (1 << len(targets),) * 2:
        raise InputError(f"{U.shape} unitary on {len(targets)} targets")
    out = apply_matrix(state.amps[None, :], U, targets, state.num_qubits)[0]
    return StateVector(out, state.num_qubits, state.register_map)


def project(state: StateVector, qubits, bases, outcome, normalize: bool = True):
    """Project ``qubits`` onto ``outcome`` measured in per-qubit ``bases``.

    Returns ``(branch, prob)``.  The branch is expressed in the original frame
    and is renormalized when ``normalize`` is set.
    """
    qubits = list(qubits)
    outcome = [int(o) for o in np.asarray(outcome).ravel()]
    if isinstance(bases, str) and len(bases) == 1:
        bases = bases * len(qubits)
    bases = [_basis_code(b) for b in bases]
    if not (len(qubits) == len(outcome) == len(bases)):
        raise InputError("qubits, bases and outcome must have equal length")
    n = state.num_qubits
    a = state.amps[None, :]
    xq = [q for q, b in zip(qubits, bases) if b == 1]
    for q in xq:
        a = apply_matrix(a, HAD, [q], n)
    psi = a.reshape((2,) * n).copy()
    mask = np.zeros((2,) * n, dtype=bool)
    idx = [slice(None)] * n
    for q, o in zip(qubits, outcome):
        idx[q] = o
    mask[tuple(idx)] = True
    psi[~mask] = 0
    a = psi.reshape(1, -1)
    for q in xq:
        a = apply_matrix(a, HAD, [q], n)
    prob = float(np.vdot(a[0], a[0]).real)
    if normalize:
        if prob <= 0.0:
            raise ZeroProbabilityBranchError(f"outcome {outcome} has probability 0")
        a = a / sqrt(prob)
    return StateVector(a[0], n, state.register_map), prob


def measure_distribution(state: StateVector, qubits, bases) -> np.ndarray:
    """Outcome probabilities for measuring ``qubits`` (outcome index MSB = first qubit)."""
    n = state.num_qubits
    a = state.amps[None, :]
    for q, b in zip(qubits, bases):
        if _basis_code(b) == 1:
            a = apply_matrix(a, HAD, [q], n)
    p = (np.abs(a[0]) ** 2).reshape((2,) * n)
    rest = tuple(q for q in range(n) if q not in qubits)
    p = p.sum(axis=rest) if rest else p
    # Remaining axes are in increasing qubit order; reorder to the requested order.
    order = np.argsort(np.argsort(list(qubits)))
    p = np.transpose(p, order) if len(qubits) > 1 else p
    return p.reshape(-1)


def partial_trace(state: StateVector, keep) -> np.ndarray:
    """Reduced density matrix on ``keep`` (in the given order)."""
    keep = list(keep)
    n = state.num_qubits
    if not keep or len(set(keep)) != len(keep) or any(not 0 <= q < n for q in keep):
        raise InputError(f"bad subsystem {keep}")
    traced = [q for q in range(n) if q not in keep]
    psi = np.transpose(state.amps.reshape((2,) * n), keep + traced)
    psi = psi.reshape(1 << len(keep), -1)
    return psi @ psi.conj().T


def pure_density(vec) -> np.ndarray:
    v = np.asarray(vec.amps if isinstance(vec, StateVector) else vec, dtype=complex).ravel()
    return np.outer(v, v.conj())


def check_density(rho: np.ndarray, tol: float = STATE_TOL, normalized: bool = True) -> None:
    rho = np.asarray(rho)
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > tol:
        raise InputError("density matrix is not Hermitian")
    if normalized and abs(np.trace(rho).real - 1) > tol:
        raise InputError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise InputError("density matrix has a negative eigenvalue")


def trace_norm(A: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError("trace_norm needs a square matrix")
    if np.max(np.abs(A - A.conj().T), initial=0.0) > MATRIX_TOL:
        raise InputError("trace_norm needs a Hermitian matrix")
    return float(np.abs(np.linalg.eigvalsh((A + A.conj().T) / 2)).sum())


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    Zm = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / sqrt(2)
    Q, R = np.linalg.qr(Zm)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    v = rng.standard_normal(1 << num_qubits) + 1j * rng.standard_normal(1 << num_qubits)
    return StateVector(v / np.linalg.norm(v), num_qubits)


# --------------------------------------------------------------------------
# "qkd-attack v1" unitary files

def dumps_unitary(U: np.ndarray, data_qubits: int, probe_qubits: int) -> str:
    U = check_unitary(U)
    if U.shape[0] != 1 << (data_qubits + probe_qubits):
        raise InputError("unitary size does not match data_qubits + probe_qubits")
    lines = [f"data_qubits={data_qubits} probe_qubits={probe_qubits}"]
    for row in U:
        lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def loads_unitary(text: str) -> tuple[np.ndarray, int, int]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines and lines[0].strip() == "qkd-attack v1":
        lines = lines[1:]
    try:
        head = dict(tok.split("=") for tok in lines[0].split())
        D, Q = int(head["data_qubits"]), int(head["probe_qubits"])
    except (IndexError, KeyError, ValueError) as exc:
        raise InputError("header must read 'data_qubits=D probe_qubits=Q'") from exc
    dim = 1 << (D + Q)
    if len(lines) - 1 != dim:
        raise InputError(f"expected {dim} rows, found {len(lines) - 1}")
    U = np.empty((dim, dim), dtype=complex)
    for r, ln in enumerate(lines[1:]):
        toks = ln.split()
        if len(toks) != dim:
            raise InputError(f"row {r} has {len(toks)} entries, expected {dim}")
        for c, tok in enumerate(toks):
            try:
                re, im = tok.split(",")
                U[r, c] = complex(float(re), float(im))
            except ValueError as exc:
                raise InputError(f"bad entry {tok!r} in row {r}") from exc
    return check_unitary(U), D, Q
