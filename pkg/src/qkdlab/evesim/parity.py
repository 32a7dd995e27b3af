"""Parity density matrices of Eve's purified states and the SD bounds on one key bit."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from math import sqrt

import numpy as np

from .. import gf2codes as gf2
from .. import qstate
from ..errors import InputError
from .conditional import EtaDecomposition


@dataclass(frozen=True)
class ParityEnsembles:
    states0: np.ndarray            # phi_i with v.i = 0, as rows
    states1: np.ndarray
    code: gf2.CodeSpec
    xi: np.ndarray
    mask: np.ndarray
    complement_space: np.ndarray   # basis of S^c, mask first
    gamma_set: dict                # hat_v, members of Gamma (as ints), claim_holds

    @property
    def rho0(self) -> np.ndarray:
        return self.states0.T @ self.states0.conj() / len(self.states0)

    @property
    def rho1(self) -> np.ndarray:
        return self.states1.T @ self.states1.conj() / len(self.states1)


def gamma_record(H: np.ndarray, complement: np.ndarray, v) -> dict:
    """Members of Gamma_v and whether every m in S^c has m or m^v in it."""
    hv = gf2.hat_v_of(H, v)
    S = gf2.span_ints(H).astype(np.int64)
    Sc = gf2.span_ints(complement).astype(np.int64)
    dist = np.bitwise_count(Sc[:, None] ^ S[None, :]).min(axis=1)
    members = {int(m) for m, dm in zip(Sc, dist) if 2 * dm >= hv}
    vi = gf2.to_int(gf2.bits(v))
    claim = all(int(m) in members or (int(m) ^ vi) in members for m in Sc)
    return {"hat_v": hv, "members": sorted(members), "claim_holds": claim}


def parity_density_matrices(phis: np.ndarray, code: gf2.CodeSpec, xi, v) -> ParityEnsembles:
    """Eve's states for key parity ``v.i = 0`` and ``= 1`` over the coset with syndrome ``xi``."""
    phis = np.asarray(phis)
    n = code.n
    if phis.shape[0] != 1 << n:
        raise InputError(f"need 2^{n} purified states, got {phis.shape[0]}")
    v = gf2.bits(v, n) if isinstance(v, (int, np.integer)) else gf2.bits(v)
    complement = gf2.complement_basis(code.H, v)   # raises when v is in the dual span
    xi = gf2.bits(xi, code.r) if isinstance(xi, (int, np.integer)) else gf2.bits(xi)
    rep = gf2.to_int(gf2.coset_representative(code.H, xi))
    codewords = gf2.span_ints(code.generator()).astype(np.int64)
    coset = rep ^ codewords
    vi = gf2.to_int(v)
    par = np.bitwise_count(coset & vi) & 1
    half = 1 << (n - code.r - 1)
    halves = [coset[par == b] for b in (0, 1)]
    if any(len(h) != half for h in halves):
        raise InputError("mask does not split the coset evenly")
    return ParityEnsembles(phis[halves[0]], phis[halves[1]], code, xi, v, complement,
                           gamma_record(code.H, complement, v))


def trace_distinguishability(ens: ParityEnsembles) -> float:
    """Half the trace norm of ``rho0 - rho1``.

    Both matrices live in the span of a few vectors, so the spectrum is taken
    from a small Gram-weighted matrix instead of the full density matrix.
    """
    P = np.vstack([ens.states0, ens.states1])
    w = np.r_[np.full(len(ens.states0), 1 / len(ens.states0)),
              -np.full(len(ens.states1), 1 / len(ens.states1))]
    lam, V = np.linalg.eigh(P.conj() @ P.T)
    root = V * np.sqrt(np.clip(lam, 0, None))
    # rho0 - rho1 = B^dag W B with B = conj(P); B B^dag = root root^dag, so the
    # nonzero spectrum equals that of root^dag W root.
    M = root.conj().T @ (w[:, None] * root)
    return 0.5 * qstate.trace_norm((M + M.conj().T) / 2)


def coarse_weights(eta: EtaDecomposition, ens: ParityEnsembles) -> dict[int, float]:
    """``d'_m`` for m in S^c: root of the eta weight summed over the coset ``m + S``."""
    S = gf2.span_ints(ens.code.H).astype(np.int64)
    Sc = gf2.span_ints(ens.complement_space).astype(np.int64)
    return {int(m): sqrt(float(eta.d_sq[m ^ S].sum())) for m in Sc}


def pair_sum(eta: EtaDecomposition, ens: ParityEnsembles) -> float:
    """``sum_m d'_m d'_(m^v)``, the middle term of the bound chain."""
    w = coarse_weights(eta, ens)
    vi = gf2.to_int(ens.mask)
    return sum(dm * w[m ^ vi] for m, dm in w.items())


def tail_mass(eta: EtaDecomposition, hat_v: int) -> float:
    """``sum of d_l^2 over |l| >= hat_v / 2``."""
    w = np.bitwise_count(np.arange(1 << eta.n_info))
    return float(eta.d_sq[2 * w >= hat_v].sum())


def _alpha(alpha, tail: float):
    if alpha is None:
        return sqrt(tail)
    if alpha <= 0:
        raise InputError("alpha must be positive")
    return float(alpha)


def sd_bound_tight(eta: EtaDecomposition, hat_v: int, alpha: float | None = None) -> float:
    """``alpha + tail / alpha``; alpha defaults to ``sqrt(tail)``."""
    tail = tail_mass(eta, hat_v)
    a = _alpha(alpha, tail)
    return 0.0 if a == 0 else a + tail / a


def sd_bound_loose(eta: EtaDecomposition, hat_v: int, r: int, alpha: float | None = None) -> float:
    return (1 << r) * sd_bound_tight(eta, hat_v, alpha)


def total_info_bound(m: int, alpha: float | None, tail: float) -> float:
    """Bound on Eve's information about all ``m`` key bits together."""
    if m < 1:
        raise InputError("m must be at least 1")
    a = _alpha(alpha, tail)
    return 0.0 if a == 0 else m * (a + tail / a)


@dataclass(frozen=True)
class BoundReport:
    alpha: float
    tail: float
    sd_tight: float
    sd_loose: float
    sd_trace: float
    m_total: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)


def bound_report(eta: EtaDecomposition, ens: ParityEnsembles, hat_v: int, m: int = 1,
                 alpha: float | None = None) -> BoundReport:
    tail = tail_mass(eta, hat_v)
    a = _alpha(alpha, tail)
    return BoundReport(a, tail, sd_bound_tight(eta, hat_v, alpha),
                       sd_bound_loose(eta, hat_v, ens.code.r, alpha),
                       trace_distinguishability(ens), total_info_bound(m, alpha, tail))


# classical composition over independent key bits

def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def mutual_information(pxy: np.ndarray) -> float:
    """``I(X;Y)`` in bits for a joint table with X on axis 0."""
    pxy = np.asarray(pxy, dtype=float)
    pxy = pxy.reshape(pxy.shape[0], -1)
    return _entropy(pxy.sum(1)) + _entropy(pxy.sum(0)) - _entropy(pxy.ravel())


def composition_check(joint: np.ndarray) -> tuple[float, float]:
    """``(I(A;E), m * max_{i, a_rest} I(A_i;E | A_rest = a_rest))`` for ``joint[a_1..a_m, e]``."""
    joint = np.asarray(joint, dtype=float)
    m = joint.ndim - 1
    total = mutual_information(joint.reshape(1 << m, -1))
    worst = 0.0
    for i in range(m):
        moved = np.moveaxis(joint, i, 0).reshape(2, 1 << (m - 1), -1)
        for rest in range(1 << (m - 1)):
            block = moved[:, rest, :]
            z = block.sum()
            if z > 0:
                worst = max(worst, mutual_information(block / z))
    return total, m * worst


__all__ = [
    "ParityEnsembles", "BoundReport", "parity_density_matrices", "trace_distinguishability",
    "coarse_weights", "pair_sum", "tail_mass", "sd_bound_tight", "sd_bound_loose",
    "total_info_bound", "bound_report", "gamma_record", "mutual_information",
    "composition_check",
]
