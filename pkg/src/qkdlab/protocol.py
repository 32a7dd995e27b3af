"""Used-bits BB84 end to end, plus full BB84 with sifting reduced to it."""
from __future__ import annotations

import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from . import gf2codes as gf2
from . import qstate
from .errors import InputError
from .evesim.attacks import AttackSpec, PerQubitAttack, identity_attack

ROLES = ("alice", "bob", "eve", "sampler")


class ContractWarning(UserWarning):
    """A code or PA choice too weak for the stated parameters."""


@dataclass(frozen=True)
class ProtocolParams:
    n: int
    p_allowed: float = 0.1
    eps_rel: float = 0.05
    eps_sec: float = 0.05
    m: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise InputError("n must be positive")
        if not 0 < self.p_allowed < 0.5:
            raise InputError("p_allowed must lie in (0, 1/2)")
        if self.eps_rel <= 0 or self.eps_sec <= 0:
            raise InputError("eps_rel and eps_sec must be positive")
        if self.m < 1:
            raise InputError("m must be at least 1")


@dataclass(frozen=True)
class FullBb84Params:
    n: int
    delta_num: float
    p_allowed: float = 0.1
    eps_rel: float = 0.05
    eps_sec: float = 0.05
    m: int = 1

    def __post_init__(self):
        self.used_bits()
        if self.delta_num < 0:
            raise InputError("delta_num must be non-negative")
        if not 1 / sqrt(2 * self.n) < self.delta_num < 1:
            warnings.warn(f"delta_num={self.delta_num} is outside (1/sqrt(2n), 1)", ContractWarning,
                          stacklevel=3)

    @property
    def n_pp(self) -> int:
        return int(round((4 + self.delta_num) * self.n))

    def used_bits(self) -> ProtocolParams:
        return ProtocolParams(self.n, self.p_allowed, self.eps_rel, self.eps_sec, self.m)


@dataclass(frozen=True)
class Transcript:
    n: int
    b: np.ndarray
    i: np.ndarray
    j: np.ndarray
    s: np.ndarray
    i_T: np.ndarray
    j_T: np.ndarray
    c_T: np.ndarray
    xi_alice: np.ndarray | None = None
    xi_bob: np.ndarray | None = None
    test_passed: bool = False
    abort_reason: str | None = None
    alice_key: np.ndarray | None = None
    bob_key: np.ndarray | None = None
    decode_failed: bool = False
    # kept out of the JSON form
    j_hat: np.ndarray | None = field(default=None, repr=False)
    measured_after_announcement: bool = field(default=True, repr=False)

    JSON_FIELDS = ("n", "b", "i", "j", "s", "i_T", "j_T", "c_T", "xi_alice", "xi_bob",
                   "test_passed", "abort_reason", "alice_key", "bob_key", "decode_failed")

    @property
    def keys_match(self) -> bool:
        return self.alice_key is not None and np.array_equal(self.alice_key, self.bob_key)

    def to_dict(self) -> dict:
        out = {}
        for k in self.JSON_FIELDS:
            v = getattr(self, k)
            out[k] = gf2.to_str(v) if isinstance(v, np.ndarray) else v
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def role_streams(seed, trial: int = 0) -> dict[str, np.random.Generator]:
    """Independent generators for each party, derived from one seed and a trial index."""
    if isinstance(seed, np.random.SeedSequence):
        entropy, base = seed.entropy, tuple(seed.spawn_key)
    else:
        entropy, base = int(seed), ()
    return {role: np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=base + (trial, k)))
            for k, role in enumerate(ROLES)}


def sample_split(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform 2n-bit string with exactly n ones (ones mark information bits)."""
    s = np.zeros(2 * n, dtype=np.uint8)
    s[rng.permutation(2 * n)[:n]] = 1
    return s


def verify_test(c_T, p_allowed: float, n: int) -> bool:
    c_T = gf2.bits(c_T)
    if c_T.size != n:
        raise InputError(f"c_T has {c_T.size} bits, expected {n}")
    return gf2.weight(c_T) <= p_allowed * n


def default_code(params: ProtocolParams) -> tuple[gf2.CodeSpec, gf2.PaSpec]:
    """No error correction and ``m`` disjoint all-ones parity masks."""
    n, m = params.n, params.m
    if m > n:
        raise InputError("m cannot exceed n")
    edges = np.linspace(0, n, m + 1).round().astype(int)
    masks = np.zeros((m, n), dtype=np.uint8)
    for k in range(m):
        masks[k, edges[k]:edges[k + 1]] = 1
    code = gf2.CodeSpec.full_space(n)
    return code, gf2.make_pa(code, masks)


def check_contracts(params: ProtocolParams, code: gf2.CodeSpec, pa: gf2.PaSpec) -> list[str]:
    """Warn (never raise) when the code or masks are weaker than the parameters ask for."""
    problems = []
    if code.n != params.n:
        raise InputError(f"code length {code.n} differs from n={params.n}")
    if pa.m != params.m:
        raise InputError(f"{pa.m} masks given for m={params.m}")
    if code.t is not None and code.t < (params.p_allowed + params.eps_rel) * params.n:
        problems.append(f"code corrects t={code.t} < (p_allowed+eps_rel)n")
    if pa.hat_v is not None and min(pa.hat_v) < 2 * (params.p_allowed + params.eps_sec) * params.n:
        problems.append(f"mask distance {min(pa.hat_v)} < 2(p_allowed+eps_sec)n")
    for msg in problems:
        warnings.warn(msg, ContractWarning, stacklevel=3)
    return problems


class BobMemory:
    """Bob's stored qubits; they can be measured only once the bases are public."""

    def __init__(self, measure):
        self._measure = measure
        self._bases = None

    def announce(self, bases):
        self._bases = np.array(bases, dtype=np.uint8)

    def measure(self, rng) -> np.ndarray:
        if self._bases is None:
            raise RuntimeError("Bob cannot measure before the bases are announced")
        return self._measure(self._bases, rng)

    def measure_in(self, bases, rng) -> np.ndarray:
        """Immediate measurement in Bob's own guessed bases (full BB84)."""
        return self._measure(np.array(bases, dtype=np.uint8), rng)


def _joint_channel(attack: AttackSpec, a_bases, i_bits):
    """Run a joint attack; return ``measure(bob_bases, rng) -> j``."""
    data = qstate.bb84_encode(int(i_bits[0]), int(a_bases[0]))
    for bit, basis in zip(i_bits[1:], a_bases[1:]):
        data = data.tensor(qstate.bb84_encode(int(bit), int(basis)))
    out = attack.apply(data)
    Q, D = attack.probe_qubits, attack.data_qubits

    def measure(bases, rng):
        p = qstate.measure_distribution(out, list(range(Q, Q + D)), list(bases))
        idx = rng.choice(p.size, p=p / p.sum())
        return gf2.from_int(int(idx), D)
    return measure


def _local_channel(attack: PerQubitAttack, a_bases, i_bits):
    table = attack.transition_table()

    def measure(bases, rng):
        p_one = table[a_bases, bases, i_bits, 1]
        return (rng.random(len(bases)) < p_one).astype(np.uint8)
    return measure


def transmit(adversary, a_bases, i_bits) -> BobMemory:
    """Alice's qubits after the adversary, held in Bob's memory."""
    if isinstance(adversary, PerQubitAttack):
        return BobMemory(_local_channel(adversary, a_bases, i_bits))
    if isinstance(adversary, AttackSpec):
        if adversary.data_qubits != len(i_bits):
            raise InputError(f"joint attack acts on {adversary.data_qubits} qubits, {len(i_bits)} sent")
        return BobMemory(_joint_channel(adversary, a_bases, i_bits))
    raise InputError(f"unsupported adversary {type(adversary).__name__}")


def correct_and_extract(i_I, j_I, code: gf2.CodeSpec, pa: gf2.PaSpec):
    """Syndrome exchange, minimum-weight correction and parity extraction.

    Returns ``(xi_alice, xi_bob, j_hat, alice_key, bob_key, decode_failed)``.
    """
    xi_a = gf2.syndrome(code.H, i_I)
    xi_b = gf2.syndrome(code.H, j_I)
    err, w = gf2.coset_leader(code, xi_a ^ xi_b)
    j_hat = j_I ^ err
    t = code.t if code.t is not None else code.certified().t
    masks = np.asarray(pa.masks, dtype=np.uint8)
    alice = (masks.astype(np.int64) @ i_I % 2).astype(np.uint8)
    bob = (masks.astype(np.int64) @ j_hat % 2).astype(np.uint8)
    return xi_a, xi_b, j_hat, alice, bob, bool(w > t)


def _after_measurement(params, code, pa, b, i, j, sampler, ordered=True) -> Transcript:
    n = params.n
    s = sample_split(n, sampler)
    test, info = s == 0, s == 1
    i_T, j_T = i[test], j[test]
    c_T = i_T ^ j_T
    base = dict(n=n, b=b, i=i, j=j, s=s, i_T=i_T, j_T=j_T, c_T=c_T, measured_after_announcement=ordered)
    if not verify_test(c_T, params.p_allowed, n):
        return Transcript(**base, test_passed=False, abort_reason="test-failed")
    xi_a, xi_b, j_hat, ka, kb, failed = correct_and_extract(i[info], j[info], code, pa)
    return Transcript(**base, xi_alice=xi_a, xi_bob=xi_b, test_passed=True, alice_key=ka,
                      bob_key=kb, decode_failed=failed, j_hat=j_hat)


def run_used_bits(params: ProtocolParams, code=None, pa=None, adversary=None, rng=0,
                  trial: int = 0, check: bool = True) -> Transcript:
    """One execution of used-bits BB84 against ``adversary``.

    ``rng`` is a seed (int or SeedSequence); the streams for each party are
    derived from it and ``trial``.
    """
    if code is None or pa is None:
        code, pa = default_code(params)
    if code.d is None:
        code = code.certified()
    if check:
        check_contracts(params, code, pa)
    adversary = adversary if adversary is not None else identity_attack()
    st = role_streams(rng, trial)
    N = 2 * params.n
    b = st["alice"].integers(0, 2, N, dtype=np.uint8)
    i = st["alice"].integers(0, 2, N, dtype=np.uint8)
    memory = transmit(adversary, b, i)
    memory.announce(b)
    j = memory.measure(st["bob"])
    return _after_measurement(params, code, pa, b, i, j, st["sampler"])


@dataclass(frozen=True)
class ReductionLog:
    n_pp: int
    alice_bases: np.ndarray
    bob_bases: np.ndarray
    kept: np.ndarray
    discarded: np.ndarray
    n_prime: int

    def to_dict(self) -> dict:
        return {"n_pp": self.n_pp, "alice_bases": gf2.to_str(self.alice_bases),
                "bob_bases": gf2.to_str(self.bob_bases), "kept": self.kept.tolist(),
                "discarded": self.discarded.tolist(), "n_prime": self.n_prime}


def run_full_bb84(params: FullBb84Params, code=None, pa=None, adversary=None, rng=0,
                  trial: int = 0, force_equal_bases: bool = False, check: bool = True):
    """Full BB84: Bob guesses bases, mismatches are discarded, the first 2n matches are used.

    Returns ``(transcript, reduction_log)``; the transcript is ``None``-free even
    on abort (abort_reason ``insufficient-sifted-bits``).
    """
    up = params.used_bits()
    if code is None or pa is None:
        code, pa = default_code(up)
    if code.d is None:
        code = code.certified()
    if check:
        check_contracts(up, code, pa)
    adversary = adversary if adversary is not None else identity_attack()
    st = role_streams(rng, trial)
    N = params.n_pp
    b = st["alice"].integers(0, 2, N, dtype=np.uint8)
    i = st["alice"].integers(0, 2, N, dtype=np.uint8)
    b_bob = b.copy() if force_equal_bases else st["bob"].integers(0, 2, N, dtype=np.uint8)
    j_all = transmit(adversary, b, i).measure_in(b_bob, st["bob"])
    match = np.nonzero(b == b_bob)[0]
    kept = match[: 2 * params.n]
    log = ReductionLog(N, b, b_bob, kept, np.setdiff1d(np.arange(N), kept), int(match.size))
    if match.size < 2 * params.n:
        empty = np.zeros(0, dtype=np.uint8)
        tr = Transcript(params.n, b[kept], i[kept], j_all[kept], empty, empty, empty, empty,
                        abort_reason="insufficient-sifted-bits", measured_after_announcement=False)
        return tr, log
    tr = _after_measurement(up, code, pa, b[kept], i[kept], j_all[kept], st["sampler"], ordered=False)
    return tr, log


# --------------------------------------------------------------------------
# campaigns

def _run_chunk(args):
    params, code, pa, adversary, seed, trials = args
    return [run_used_bits(params, code, pa, adversary, seed, trial=t, check=False) for t in trials]


def run_campaign(params: ProtocolParams, code=None, pa=None, adversary=None, seed=0,
                 trials: int = 100, workers: int = 1, progress=None) -> list[Transcript]:
    """``trials`` independent runs; results are ordered by trial index regardless of ``workers``."""
    if code is None or pa is None:
        code, pa = default_code(params)
    if code.d is None:
        code = code.certified()
    check_contracts(params, code, pa)
    if workers <= 1:
        out = []
        for t in range(trials):
            out.append(run_used_bits(params, code, pa, adversary, seed, trial=t, check=False))
            if progress and (t + 1) % max(1, trials // 10) == 0:
                progress(t + 1, trials)
        return out
    chunks = np.array_split(np.arange(trials), workers * 4)
    jobs = [(params, code, pa, adversary, seed, c.tolist()) for c in chunks if len(c)]
    with ProcessPoolExecutor(workers) as pool:
        parts = list(pool.map(_run_chunk, jobs))
    return [tr for part in parts for tr in part]


def summarize(transcripts: list[Transcript]) -> dict:
    passed = [t for t in transcripts if t.test_passed]
    n = transcripts[0].n if transcripts else 1
    return {
        "trials": len(transcripts),
        "pass_rate": len(passed) / max(1, len(transcripts)),
        "mean_test_error": float(np.mean([gf2.weight(t.c_T) / n for t in transcripts])) if transcripts else 0.0,
        "reliability_failures": sum(not t.keys_match for t in passed),
        "decode_failures": sum(t.decode_failed for t in passed),
    }


__all__ = [
    "ProtocolParams", "FullBb84Params", "Transcript", "ReductionLog", "ContractWarning",
    "BobMemory", "role_streams", "sample_split", "verify_test", "default_code",
    "check_contracts", "transmit", "correct_and_extract", "run_used_bits", "run_full_bb84",
    "run_campaign", "summarize",
]
