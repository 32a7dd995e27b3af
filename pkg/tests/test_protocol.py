import itertools
import json
from math import comb, sqrt

import numpy as np
import pytest
from scipy import stats

from qkdlab import bounds
from qkdlab import evesim as ev
from qkdlab import gf2codes as gf2
from qkdlab import protocol as pr
from qkdlab.errors import InputError


@pytest.fixture(autouse=True)
def _quiet_contracts():
    # the small codes used here are deliberately weaker than the parameters ask for
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", pr.ContractWarning)
        yield


def test_params_validation():
    with pytest.raises(InputError):
        pr.ProtocolParams(0)
    with pytest.raises(InputError):
        pr.ProtocolParams(4, p_allowed=0.6)
    with pytest.raises(InputError):
        pr.ProtocolParams(4, eps_rel=0)
    with pytest.raises(InputError):
        pr.ProtocolParams(4, m=0)


@pytest.mark.parametrize("weights, n, p, ok", [
    ("0000000000", 10, 0.1, True),
    ("1000000000", 10, 0.1, True),      # exactly p_allowed * n passes
    ("1100000000", 10, 0.1, False),
    ("1111", 4, 0.25, True),
    ("", 0, 0.1, None),
])
def test_verify_test_boundary(weights, n, p, ok):
    if ok is None:
        assert pr.verify_test(np.zeros(0, np.uint8), p, 0)
        with pytest.raises(InputError):
            pr.verify_test("1", p, 2)
        return
    c = gf2.bits(weights)
    if weights == "1111":
        c = gf2.bits("1000")
    assert pr.verify_test(c, p, n) is ok


def test_identity_run():
    params = pr.ProtocolParams(8, m=2)
    tr = pr.run_used_bits(params, rng=5)
    assert tr.test_passed and tr.abort_reason is None
    assert tr.keys_match and not tr.decode_failed
    assert np.array_equal(tr.i, tr.j)
    assert tr.alice_key.size == 2


def test_transcript_consistency(rng):
    params = pr.ProtocolParams(12, p_allowed=0.4)
    for seed in range(20):
        tr = pr.run_used_bits(params, adversary=ev.intercept_resend_attack(), rng=seed)
        assert tr.s.sum() == 12
        assert np.array_equal(tr.c_T, tr.i_T ^ tr.j_T)
        assert np.array_equal(tr.i_T, tr.i[tr.s == 0])
        assert np.array_equal(tr.j_T, tr.j[tr.s == 0])
        assert tr.test_passed == (tr.c_T.sum() <= 0.4 * 12)
        if not tr.test_passed:
            assert tr.abort_reason == "test-failed" and tr.alice_key is None


def test_transcript_json_fields():
    tr = pr.run_used_bits(pr.ProtocolParams(4), rng=1)
    d = json.loads(tr.to_json())
    assert list(d) == ["n", "b", "i", "j", "s", "i_T", "j_T", "c_T", "xi_alice", "xi_bob",
                       "test_passed", "abort_reason", "alice_key", "bob_key", "decode_failed"]
    assert len(d["b"]) == 8 and set(d["b"]) <= {"0", "1"}
    assert d["xi_alice"] == ""          # full-space code has an empty syndrome


def test_determinism():
    params = pr.ProtocolParams(10, p_allowed=0.3)
    a = [pr.run_used_bits(params, adversary=ev.swap_attack(), rng=77, trial=t).to_json() for t in range(5)]
    b = [pr.run_used_bits(params, adversary=ev.swap_attack(), rng=77, trial=t).to_json() for t in range(5)]
    assert a == b
    assert len(set(a)) == 5


def test_campaign_workers_do_not_change_results():
    params = pr.ProtocolParams(6, p_allowed=0.3)
    one = pr.run_campaign(params, adversary=ev.intercept_resend_attack(), seed=3, trials=40)
    two = pr.run_campaign(params, adversary=ev.intercept_resend_attack(), seed=3, trials=40, workers=2)
    assert [t.to_json() for t in one] == [t.to_json() for t in two]


def test_role_streams_independent_per_role():
    st = pr.role_streams(9, 0)
    draws = {k: g.integers(0, 2**62) for k, g in st.items()}
    assert len(set(draws.values())) == 4
    assert pr.role_streams(9, 0)["alice"].integers(0, 2**62) == draws["alice"]


def test_split_uniform():
    rng = np.random.default_rng(0)
    n, trials = 3, 20_000
    counts = {}
    for _ in range(trials):
        counts[gf2.to_str(pr.sample_split(n, rng))] = counts.get(gf2.to_str(pr.sample_split(n, rng)), 0) + 1
    assert len(counts) == comb(6, 3)
    assert all(k.count("1") == 3 for k in counts)
    p = stats.chisquare(list(counts.values())).pvalue
    assert p > 1e-3


def test_bob_memory_order():
    mem = pr.transmit(ev.identity_attack(), np.zeros(4, np.uint8), gf2.bits("1010"))
    with pytest.raises(RuntimeError):
        mem.measure(np.random.default_rng(0))
    mem.announce(np.zeros(4, np.uint8))
    assert gf2.to_str(mem.measure(np.random.default_rng(0))) == "1010"


def test_transmit_rejects_wrong_size(rng):
    with pytest.raises(InputError):
        pr.transmit(ev.random_attack(2, 1, rng), np.zeros(4, np.uint8), np.zeros(4, np.uint8))
    with pytest.raises(InputError):
        pr.transmit("swap", np.zeros(4, np.uint8), np.zeros(4, np.uint8))


def test_swap_pass_rate():
    # every test bit is wrong with probability 1/2: pass iff at most one error in 10
    params = pr.ProtocolParams(10, p_allowed=0.1)
    runs = pr.run_campaign(params, adversary=ev.swap_attack(), seed=11, trials=20_000)
    rate = pr.summarize(runs)["pass_rate"]
    p = 11 / 1024
    assert abs(rate - p) < 4 * sqrt(p * (1 - p) / 20_000)


def test_intercept_resend_error_rate():
    params = pr.ProtocolParams(100, p_allowed=0.1)
    runs = pr.run_campaign(params, adversary=ev.intercept_resend_attack(), seed=2, trials=1000)
    assert pr.summarize(runs)["mean_test_error"] == pytest.approx(0.25, abs=0.01)


def test_joint_attack_path():
    params = pr.ProtocolParams(1, p_allowed=0.4)
    joint = ev.intercept_resend_attack().joint(2)
    runs = [pr.run_used_bits(params, adversary=joint, rng=4, trial=t) for t in range(3000)]
    err = np.mean([(t.i ^ t.j).mean() for t in runs])
    assert err == pytest.approx(0.25, abs=0.02)
    sym = ev.symmetrize(ev.identity_attack().joint(2))
    assert all(pr.run_used_bits(params, adversary=sym, rng=1, trial=t).keys_match for t in range(50))


# error correction ------------------------------------------------------------

REP3 = gf2.CodeSpec(gf2.bitmatrix(["110", "011"]), 3).certified()


def test_correction_exhaustive_repetition():
    pa = gf2.make_pa(REP3, ["111"])
    for i in itertools.product((0, 1), repeat=3):
        i = np.array(i, np.uint8)
        for e in ("000", "100", "010", "001"):
            j = i ^ gf2.bits(e)
            xa, xb, j_hat, ka, kb, failed = pr.correct_and_extract(i, j, REP3, pa)
            assert np.array_equal(j_hat, i)
            assert np.array_equal(ka, kb) and not failed
            assert np.array_equal(xa ^ xb, gf2.syndrome(REP3.H, gf2.bits(e)))


def test_correction_exhaustive_random_codes(rng):
    for _ in range(5):
        code = gf2.search_code(8, 5, 3, rng)
        pa = gf2.make_pa(code, [gf2.nullspace(code.H)[0]])
        for iv in range(0, 256, 17):
            i = gf2.from_int(iv, 8)
            for k in range(8):
                e = np.zeros(8, np.uint8)
                e[k] = 1
                *_, ka, kb, failed = pr.correct_and_extract(i, i ^ e, code, pa)
                assert np.array_equal(ka, kb) and not failed


def test_weight_above_t_flagged():
    # extended Hamming [8,4,4]: t = 1 and every weight-2 error leads a coset of its own weight
    H = gf2.bitmatrix(["11111111", "00001111", "00110011", "01010101"])
    code = gf2.CodeSpec(H, 8).certified()
    assert code.d == 4 and code.t == 1
    pa = gf2.make_pa(code, ["11000000"])
    i = np.zeros(8, np.uint8)
    for a, b in itertools.combinations(range(8), 2):
        e = np.zeros(8, np.uint8)
        e[[a, b]] = 1
        *_, failed = pr.correct_and_extract(i, e, code, pa)
        assert failed


def test_run_with_code_reliable():
    params = pr.ProtocolParams(3, p_allowed=0.34)
    pa = gf2.make_pa(REP3, ["111"])
    runs = pr.run_campaign(params, REP3, pa, ev.depolarizing_attack(0.05), seed=8, trials=500)
    s = pr.summarize(runs)
    assert s["reliability_failures"] <= s["decode_failures"] + sum(
        1 for t in runs if t.test_passed and (t.i[t.s == 1] ^ t.j[t.s == 1]).sum() > 1)


def test_contract_warnings():
    import warnings
    params = pr.ProtocolParams(10, p_allowed=0.1)
    code, pa = pr.default_code(params)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        problems = pr.check_contracts(params, code, pa)
    assert len(problems) == 1 and all(issubclass(x.category, pr.ContractWarning) for x in w)
    # a short mask also trips the distance contract
    weak = gf2.make_pa(code, ["1100000000"])
    with pytest.warns(pr.ContractWarning):
        assert len(pr.check_contracts(params, code, weak)) == 2
    with pytest.raises(InputError):
        pr.check_contracts(pr.ProtocolParams(9), code, pa)
    with pytest.raises(InputError):
        pr.check_contracts(pr.ProtocolParams(10, m=2), code, pa)


def test_default_code_masks():
    code, pa = pr.default_code(pr.ProtocolParams(10, m=3))
    assert code.r == 0
    assert pa.masks.sum(axis=0).tolist() == [1] * 10
    with pytest.raises(InputError):
        pr.default_code(pr.ProtocolParams(2, m=3))


# full BB84 --------------------------------------------------------------------

def test_full_bb84_forced_equal_bases():
    params = pr.FullBb84Params(6, 0.5)
    tr, log = pr.run_full_bb84(params, rng=3, force_equal_bases=True)
    assert params.n_pp == 27
    assert log.n_prime == 27
    assert log.kept.tolist() == list(range(12))
    assert tr.test_passed and tr.keys_match
    assert not tr.measured_after_announcement


def test_full_bb84_identity_keys_match():
    params = pr.FullBb84Params(8, 0.5)
    for t in range(50):
        tr, log = pr.run_full_bb84(params, rng=4, trial=t)
        if tr.abort_reason is None:
            assert tr.keys_match
            assert np.array_equal(log.alice_bases[log.kept], log.bob_bases[log.kept])
        else:
            assert tr.abort_reason == "insufficient-sifted-bits"
            assert log.n_prime < 16
        assert sorted(log.kept.tolist() + log.discarded.tolist()) == list(range(params.n_pp))


def test_full_bb84_abort_rate():
    params = pr.FullBb84Params(10, 0.3)
    bound = bounds.sifting_abort_bound(params)
    trials = 10_000
    aborts = sum(pr.run_full_bb84(params, rng=21, trial=t, check=False)[0].abort_reason is not None
                 for t in range(trials))
    rate = aborts / trials
    p = bound["exact"]
    assert abs(rate - p) < 4 * sqrt(p * (1 - p) / trials)
    assert rate <= bound["hoeffding"]


def test_full_bb84_delta_warning():
    with pytest.warns(pr.ContractWarning):
        pr.FullBb84Params(10, 0.05)
    with pytest.raises(InputError):
        pr.FullBb84Params(10, -1)


def test_reduction_log_json():
    _, log = pr.run_full_bb84(pr.FullBb84Params(4, 0.5), rng=0)
    d = json.loads(json.dumps(log.to_dict()))
    assert d["n_pp"] == 18 and len(d["alice_bases"]) == 18
