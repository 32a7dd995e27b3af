"""Closed-form bounds of the security argument and exact or Monte Carlo checks of them."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from math import ceil, comb, exp, inf, isfinite, log, log2, pi, sqrt

import numpy as np
from scipy import stats

from . import gf2codes as gf2
from .errors import InputError
from .evesim import attacks as atk
from .evesim import conditional as cond
from .evesim import parity


def h2(p: float) -> float:
    """Binary entropy in bits."""
    if not 0 <= p <= 1:
        raise InputError(f"h2 needs p in [0, 1], got {p}")
    if p in (0, 1):
        return 0.0
    return -p * log2(p) - (1 - p) * log2(1 - p)


def threshold_solve(iters: int = 200) -> float:
    """Root of ``h2(2p) + h2(p) = 1`` on (0, 1/4) by bisection."""
    lo, hi = 1e-12, 0.25
    for _ in range(iters):
        mid = (lo + hi) / 2
        if h2(2 * mid) + h2(mid) < 1:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def secret_rate(p_a: float) -> float:
    """Asymptotic secret fraction ``1 - h2(2 p_a) - h2(p_a)`` (may be negative)."""
    if not 0 <= p_a <= 0.5:
        raise InputError("p_a must lie in [0, 1/2]")
    return 1 - h2(2 * p_a) - h2(p_a)


def _h2_or_none(p):
    # Arguments at or above 1/2 cannot give a usable code distance.
    return h2(p) if 0 <= p < 0.5 else None


def rate_feasible(p_a, eps_rel, eps_sec, r_over_n, m_over_n, n) -> bool:
    """Both finite-n code-existence inequalities hold strictly."""
    rel = _h2_or_none(p_a + eps_rel + 1 / n)
    sec = _h2_or_none(2 * p_a + 2 * eps_sec)
    if rel is None or sec is None:
        return False
    return rel < r_over_n and sec < 1 - r_over_n - m_over_n


def gallager_constant(delta: float) -> float:
    if not 0 < delta < 0.5:
        raise InputError("delta must lie in (0, 1/2)")
    return 1 / (1 - 2 * delta) * sqrt((1 - delta) / (2 * pi * delta))


def gallager_failure(n: int, r_over_n: float, delta: float, raw: bool = False) -> float:
    """Upper bound on P(d/n < delta) for a random linear code with ``r`` parity checks."""
    log_value = log(gallager_constant(delta) / sqrt(n)) + n * (h2(delta) - r_over_n) * log(2)
    value = exp(log_value) if log_value < 700 else inf
    return value if raw else min(1.0, value)


def hoeffding_tail(n: int, eps: float, one_sided: bool = False) -> float:
    """``2 exp(-n eps^2 / 2)``, or half of it when ``one_sided``."""
    if n < 1 or eps <= 0:
        raise InputError("need n >= 1 and eps > 0")
    v = exp(-n * eps * eps / 2)
    return v if one_sided else 2 * v


@dataclass(frozen=True)
class RateReport:
    p_a: float
    delta: float
    delta_perp: float
    g1: float
    g2: float
    h1: float
    f1: float
    r_secret: float
    feasible: bool
    raw: dict

    def to_json(self) -> str:
        d = asdict(self)
        # unclamped values can overflow; JSON has no infinity
        d["raw"] = {k: v if v is None or isfinite(v) else None for k, v in d["raw"].items()}
        return json.dumps(d)


def balanced_r_over_n(p_a, n, m_over_n, eps_rel, eps_sec) -> float:
    """Midpoint of the admissible ``r/n`` window, so that g1 and g2 shrink together."""
    lo = h2(min(0.5, p_a + eps_rel + 1 / n))
    hi = 1 - m_over_n - h2(min(0.5, 2 * (p_a + eps_sec)))
    return min(1.0, max(0.0, (lo + hi) / 2))


def rate_report(p_a, n, r_over_n=None, m_over_n=0.0, eps_rel=0.01, eps_sec=0.01) -> RateReport:
    """Code-existence report at one ``p_a``; ``r_over_n=None`` picks the balanced value."""
    delta = p_a + eps_rel + 1 / n
    delta_perp = 2 * (p_a + eps_sec)
    if r_over_n is None:
        r_over_n = balanced_r_over_n(p_a, n, m_over_n, eps_rel, eps_sec)
    raw = {}
    for key, (rn, d) in {"g1": (r_over_n, delta), "g2": (1 - r_over_n - m_over_n, delta_perp)}.items():
        raw[key] = gallager_failure(n, rn, d, raw=True) if 0 < d < 0.5 else None
    raw["h1"] = raw["f1"] = hoeffding_tail(n, eps_rel)
    clamp = {k: 1.0 if v is None else min(1.0, max(0.0, v)) for k, v in raw.items()}
    return RateReport(p_a, delta, delta_perp, clamp["g1"], clamp["g2"], clamp["h1"], clamp["f1"],
                      m_over_n, rate_feasible(p_a, eps_rel, eps_sec, r_over_n, m_over_n, n), raw)


# --------------------------------------------------------------------------
# sampling

def sampling_tail_mc(n: int, total_errors: int, eps: float, trials: int,
                     rng: np.random.Generator, batch: int = 10_000) -> float:
    """Frequency of ``|c_I| > |c|/2 + n eps/2`` over uniform splits of a fixed error string."""
    if not 0 <= total_errors <= 2 * n:
        raise InputError("total_errors must lie in [0, 2n]")
    thresh = total_errors / 2 + n * eps / 2
    hits = 0
    done = 0
    while done < trials:
        B = min(batch, trials - done)
        keys = rng.random((B, 2 * n))
        info = np.argpartition(keys, n - 1, axis=1)[:, :n]   # n uniformly chosen positions
        c_I = (info < total_errors).sum(axis=1)              # errors sit in the first |c| slots
        hits += int((c_I > thresh).sum())
        done += B
    return hits / trials


def hypergeometric_tail(n: int, total_errors: int, eps: float) -> float:
    """Exact ``P(|c_I| > |c|/2 + n eps/2)`` when n of 2n positions are drawn."""
    thresh = total_errors / 2 + n * eps / 2
    k = int(np.floor(thresh))
    return float(stats.hypergeom.sf(k, 2 * n, total_errors, n))


def sifting_abort_bound(params) -> dict:
    """Abort probability of full BB84 (fewer than 2n matching bases) with its Hoeffding bound."""
    n_pp, need = params.n_pp, 2 * params.n
    margin = n_pp / 2 - need
    hoeff = exp(-2 * margin ** 2 / n_pp) if margin > 0 else 1.0
    exact = float(stats.binom.cdf(need - 1, n_pp, 0.5))
    return {"n_pp": n_pp, "margin": margin, "hoeffding": hoeff, "exact": exact}


# --------------------------------------------------------------------------
# criterion

@dataclass(frozen=True)
class CriterionConstants:
    A: float
    beta: float
    A_info: float
    beta_info: float
    A_luck: float
    beta_luck: float
    A_rel: float
    beta_rel: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def criterion_constants(m: int, eps_sec: float, eps_rel: float) -> CriterionConstants:
    if m <= 0 or eps_sec <= 0 or eps_rel <= 0:
        raise InputError("m, eps_sec and eps_rel must be positive")
    A = 2 * m * sqrt(2)
    beta = eps_sec ** 2 / 4
    return CriterionConstants(A, beta, sqrt(A), beta / 2, sqrt(A), beta / 2, 2.0, eps_rel ** 2 / 2)


def security_criterion_check(weighted_pairs) -> tuple[float, float, float, bool]:
    """Markov step: mass of atoms with info at least ``sqrt(S)`` is at most ``sqrt(S)``.

    Returns ``(S, I_star, lhs, holds)``.  When ``S = 0`` only atoms with
    positive information count toward ``lhs``.
    """
    pairs = [(float(p), float(i)) for p, i in weighted_pairs]
    if any(p < 0 or i < 0 for p, i in pairs) or sum(p for p, _ in pairs) > 1 + 1e-12:
        raise InputError("need non-negative probabilities summing to at most 1, info >= 0")
    S = sum(p * i for p, i in pairs)
    I_star = sqrt(S)
    if I_star > 0:
        lhs = sum(p for p, i in pairs if i >= I_star)
    else:
        lhs = sum(p for p, i in pairs if i > 0)
    return S, I_star, lhs, lhs <= I_star + 1e-12


# --------------------------------------------------------------------------
# exhaustive averaged information at n = 1, 2

@dataclass(frozen=True)
class AveragedInfoReport:
    n: int
    m: int
    hat_v: int
    lhs: float            # sum over passing contexts of P(context) * m(alpha + tail/alpha), alpha = sqrt(tail)
    lhs_trace: float      # same weights with m * half trace distance (actual one-bit distinguishability)
    rhs: float            # 2m sqrt(2^-2n sum_b h_b)
    conj_tail_mass: float
    plain_tail_mass: float
    holds: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def averaging_residual(self) -> float:
        return abs(self.conj_tail_mass - self.plain_tail_mass)


def empirical_average_information(n: int, attack, p_a: float = 0.25, eps: float = 0.2,
                                  m: int = 1, code=None, pa=None) -> AveragedInfoReport:
    """Enumerate every b, s, i_T, j_T and compare the averaged bound with its closed form.

    ``attack`` may be per-qubit or joint; it is symmetrized if it is not already.
    """
    if n not in (1, 2):
        raise InputError("exhaustive enumeration is limited to n in {1, 2}")
    attack = atk.ensure_symmetrized(atk.as_joint(attack, 2 * n))
    if code is None or pa is None:
        code = gf2.CodeSpec.full_space(n)
        pa = gf2.make_pa(code, [np.ones(n, dtype=np.uint8)] if m == 1 else np.eye(m, n, dtype=np.uint8))
    m = pa.m
    hat_v = min(pa.hat_v)
    if ceil(hat_v / 2) <= n * (p_a + eps):
        raise InputError("mask distance too small: need ceil(hat_v/2) > n(p_a + eps)")
    ch = cond.AttackChannel(attack)
    N = 1 << n
    weights = np.bitwise_count(np.arange(N))
    n_splits = comb(2 * n, n)
    p_ctx = 1 / (4 ** n * n_splits * N)
    lhs = lhs_trace = conj_mass = 0.0
    h_sum = plain_mass = 0.0
    v0 = np.asarray(pa.masks[0], dtype=np.uint8)
    for b in range(1 << (2 * n)):
        err = cond.error_distribution(attack, b, channel=ch)
        for s in cond.all_splits(2 * n):
            test, info = cond.split_positions(s)
            for c in range(1 << (2 * n)):
                cb = gf2.from_int(c, 2 * n)
                wT, wI = int(cb[test].sum()), int(cb[info].sum())
                if wT <= p_a * n:
                    h_sum += err[c] * (wI > n * (p_a + eps)) / n_splits
                    plain_mass += err[c] * (2 * wI >= hat_v) / n_splits
            for i_T in range(N):
                P = cond.test_outcome_probabilities(attack, b, s, i_T, channel=ch).mean(axis=0)
                for j_T in range(N):
                    if weights[i_T ^ j_T] > p_a * n or P[j_T] <= 1e-14:
                        continue
                    tab = cond.conditional_states(attack, b, s, i_T, j_T, channel=ch)
                    phis = cond.purify(tab)
                    eta = cond.eta_decompose(phis)
                    tail = parity.tail_mass(eta, hat_v)
                    w = p_ctx * P[j_T]
                    lhs += w * parity.total_info_bound(m, None, tail)
                    conj_mass += w * tail
                    ens = parity.parity_density_matrices(phis, code, np.zeros(code.r, np.uint8), v0)
                    lhs_trace += w * m * parity.trace_distinguishability(ens)
    rhs = 2 * m * sqrt(h_sum / 4 ** n)
    plain_mass /= 4 ** n
    return AveragedInfoReport(n, m, hat_v, float(lhs), float(lhs_trace), float(rhs), float(conj_mass),
                              float(plain_mass), bool(lhs <= rhs + 1e-12))


__all__ = [
    "h2", "threshold_solve", "secret_rate", "rate_feasible", "gallager_constant",
    "gallager_failure", "hoeffding_tail", "RateReport", "rate_report", "balanced_r_over_n", "sampling_tail_mc",
    "hypergeometric_tail", "sifting_abort_bound", "CriterionConstants", "criterion_constants",
    "security_criterion_check", "AveragedInfoReport", "empirical_average_information",
]
