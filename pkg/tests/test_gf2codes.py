import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qkdlab import gf2codes as gf2
from qkdlab.errors import CapacityError, InputError


# brute-force oracles ------------------------------------------------------

def all_strings(n):
    return [np.array(t, dtype=np.uint8) for t in itertools.product((0, 1), repeat=n)]


def span_brute(M):
    out = set()
    for coeffs in itertools.product((0, 1), repeat=M.shape[0]):
        v = np.zeros(M.shape[1], dtype=np.uint8)
        for c, row in zip(coeffs, M):
            if c:
                v ^= row
        out.add(tuple(v))
    return out


def rank_brute(M):
    return int(np.log2(len(span_brute(M)))) if M.shape[0] else 0


def codewords_brute(H):
    return [x for x in all_strings(H.shape[1]) if not (H.astype(int) @ x % 2).any()]


def dmin_brute(H):
    return min(int(x.sum()) for x in codewords_brute(H) if x.any())


def random_full_rank(rng, r, n):
    while True:
        H = rng.integers(0, 2, (r, n), dtype=np.uint8)
        if rank_brute(H) == r:
            return H


matrices = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=1, max_size=5))


# rank ------------------------------------------------------------------------

def test_rank_identity_and_zero():
    assert gf2.rank(np.eye(4, dtype=np.uint8)) == 4
    assert gf2.rank(np.zeros((3, 5), dtype=np.uint8)) == 0


def test_rank_dependent_rows():
    assert gf2.rank(gf2.bitmatrix(["110", "011", "101"])) == 2


@given(matrices)
def test_rank_matches_span_size(rows):
    M = np.array(rows, dtype=np.uint8)
    assert gf2.rank(M) == rank_brute(M)


# syndrome --------------------------------------------------------------------

H_REP = gf2.bitmatrix(["110", "011"])


def test_syndrome_examples():
    assert gf2.to_str(gf2.syndrome(H_REP, gf2.bits("111"))) == "00"
    assert gf2.to_str(gf2.syndrome(H_REP, gf2.bits("100"))) == "10"
    assert not gf2.syndrome(H_REP, gf2.bits("000")).any()


def test_syndrome_length_mismatch():
    with pytest.raises(InputError):
        gf2.syndrome(H_REP, gf2.bits("1010"))


@given(st.integers(0, 7), st.integers(0, 7))
def test_syndrome_linear(a, b):
    x, y = gf2.from_int(a, 3), gf2.from_int(b, 3)
    assert np.array_equal(gf2.syndrome(H_REP, x ^ y), gf2.syndrome(H_REP, x) ^ gf2.syndrome(H_REP, y))


def test_nullspace_vectors_are_codewords(rng):
    for _ in range(20):
        n = int(rng.integers(3, 10))
        r = int(rng.integers(1, n))
        code = gf2.sample_random_linear_code(n, r, rng)
        G = code.generator()
        assert G.shape == (n - r, n)
        for c in G:
            assert not gf2.syndrome(code.H, c).any()


def test_dual_of_dual_row_space(rng):
    for _ in range(20):
        code = gf2.sample_random_linear_code(8, 3, rng)
        dual = gf2.nullspace(code.H)
        back = gf2.nullspace(dual)
        assert gf2.row_space_equal(back, code.H)
        assert gf2.rank(np.vstack([back, code.H])) == code.r


# min distance ----------------------------------------------------------------

HAMMING = gf2.bitmatrix(["0001111", "0110011", "1010101"])


def test_min_distance_examples():
    assert gf2.min_distance(gf2.CodeSpec(H_REP, 3)) == 3
    assert gf2.min_distance(gf2.CodeSpec(np.zeros((0, 5), np.uint8), 5)) == 1
    assert gf2.min_distance(gf2.CodeSpec(HAMMING, 7)) == 3


@pytest.mark.parametrize("n", range(3, 13))
def test_min_distance_matches_exhaustive(n, rng):
    for r in sorted({1, n // 3, n // 2, n - 2, n - 1} - {0}):
        H = random_full_rank(rng, r, n)
        assert gf2.min_distance(gf2.CodeSpec(H, n)) == dmin_brute(H), (n, r)


def test_weight_distribution_macwilliams(rng):
    # dual-side transform reproduces the direct codeword count
    H = random_full_rank(rng, 3, 9)
    code = gf2.CodeSpec(H, 9)
    direct = np.bincount([int(c.sum()) for c in codewords_brute(H)], minlength=10)
    via_dual = gf2.macwilliams(gf2.weight_distribution(H), 9)
    assert np.array_equal(direct, via_dual)
    assert np.array_equal(direct, gf2.weight_distribution(code.generator()))


def test_min_distance_capacity():
    n = 60
    H = np.hstack([np.eye(30, dtype=np.uint8), np.eye(30, dtype=np.uint8)])
    with pytest.raises(CapacityError):
        gf2.min_distance(gf2.CodeSpec(H, n))


# coset representative ------------------------------------------------------

def test_coset_zero_syndrome():
    assert not gf2.coset_representative(H_REP, gf2.bits("00")).any()


def test_coset_lex_least_example():
    want = min(gf2.to_str(x) for x in all_strings(3) if gf2.to_str(gf2.syndrome(H_REP, x)) == "10")
    got = gf2.coset_representative(H_REP, gf2.bits("10"))
    assert gf2.to_str(got) == want == "011"


@pytest.mark.parametrize("seed", range(8))
def test_coset_representative_is_lex_least(seed):
    rng = np.random.default_rng(seed)
    n, r = 7, int(rng.integers(1, 5))
    H = random_full_rank(rng, r, n)
    by_syn = {}
    for x in all_strings(n):
        by_syn.setdefault(gf2.to_str(gf2.syndrome(H, x)), []).append(gf2.to_str(x))
    for syn, members in by_syn.items():
        got = gf2.coset_representative(H, gf2.bits(syn))
        assert gf2.to_str(got) == min(members)
        assert gf2.to_str(gf2.syndrome(H, got)) == syn
        assert np.array_equal(got, gf2.coset_representative(H, gf2.bits(syn)))


def test_coset_rejects_bad_input():
    with pytest.raises(InputError):
        gf2.coset_representative(H_REP, gf2.bits("1"))
    with pytest.raises(InputError):
        gf2.coset_representative(gf2.bitmatrix(["110", "110"]), gf2.bits("10"))


# PA distances --------------------------------------------------------------

def test_pa_no_ecc_rows():
    code = gf2.CodeSpec.full_space(5)
    hv, dd = gf2.pa_distances(code, gf2.PaSpec(gf2.bitmatrix(["01101"])))
    assert hv == [3] and dd == 3


def test_pa_single_row_example():
    code = gf2.CodeSpec(gf2.bitmatrix(["1100"]), 4)
    hv, dd = gf2.pa_distances(code, gf2.PaSpec(gf2.bitmatrix(["0110"])))
    assert hv == [2]
    assert dd == 2


def test_pa_d_dagger_is_span_distance(rng):
    for _ in range(10):
        H = random_full_rank(rng, 5, 9)
        code = gf2.CodeSpec(H[:3], 9)
        pa = gf2.PaSpec(H[3:])
        hv, dd = gf2.pa_distances(code, pa)
        assert dd == min(sum(w) for w in span_brute(H) if any(w))
        # span-based oracle for each hat v
        for j in range(2):
            others = np.vstack([H[:3], np.delete(H[3:], j, axis=0)])
            assert hv[j] == min(sum(np.array(w) ^ H[3 + j]) for w in span_brute(others))
        assert all(h >= dd for h in hv)


def test_pa_dependent_masks():
    code = gf2.CodeSpec(gf2.bitmatrix(["1100"]), 4)
    with pytest.raises(InputError):
        gf2.pa_distances(code, gf2.PaSpec(gf2.bitmatrix(["1100"])))
    with pytest.raises(InputError):
        gf2.pa_distances(code, gf2.PaSpec(gf2.bitmatrix(["0011", "0011"])))


def test_complement_basis_order():
    B = gf2.complement_basis(gf2.bitmatrix(["1100"]), gf2.bits("0110"))
    assert gf2.to_str(B[0]) == "0110"
    assert [gf2.to_str(b) for b in B[1:]] == ["1000", "0001"]
    with pytest.raises(InputError):
        gf2.complement_basis(gf2.bitmatrix(["1100"]), gf2.bits("1100"))


# random codes ----------------------------------------------------------------

def test_random_code_r_zero_is_full_space(rng):
    code = gf2.sample_random_linear_code(6, 0, rng)
    assert code.r == 0 and code.k == 6
    assert gf2.min_distance(code) == 1


def test_random_code_reproducible():
    a = gf2.sample_random_linear_code(10, 4, np.random.default_rng(99))
    b = gf2.sample_random_linear_code(10, 4, np.random.default_rng(99))
    assert np.array_equal(a.H, b.H)
    assert gf2.rank(a.H) == 4


def test_search_code_certifies(rng):
    code = gf2.search_code(10, 6, 3, rng)
    assert code.d >= 3 and code.d == dmin_brute(code.H)


# decoding --------------------------------------------------------------------

def test_coset_leader_is_minimum_weight(rng):
    H = random_full_rank(rng, 4, 8)
    code = gf2.CodeSpec(H, 8)
    best = {}
    for x in all_strings(8):
        s = gf2.to_str(gf2.syndrome(H, x))
        best[s] = min(best.get(s, 99), int(x.sum()))
    for s, w in best.items():
        err, lw = gf2.coset_leader(code, gf2.bits(s))
        assert lw == w == err.sum()
        assert gf2.to_str(gf2.syndrome(H, err)) == s


# text format -----------------------------------------------------------------

def test_code_text_roundtrip(tmp_path):
    code = gf2.CodeSpec(HAMMING, 7)
    pa = gf2.make_pa(code, ["1110000"])
    text = gf2.dumps_code(code, pa)
    assert text.splitlines()[0] == "7 4"
    assert "PA 1" in text
    path = tmp_path / "c.txt"
    gf2.write_code(path, code, pa)
    back, back_pa = gf2.read_code(path)
    assert np.array_equal(back.H, code.H)
    assert np.array_equal(back_pa.masks, pa.masks)
    assert back_pa.hat_v == pa.hat_v


@pytest.mark.parametrize("text", ["", "3\n", "3 1\n110\n", "3 2\n110\nPA\n", "3 2\n110\nPA 2\n011\n",
                                  "3 2\n1a0\n"])
def test_code_text_errors(text):
    with pytest.raises(InputError):
        gf2.loads_code(text)


def test_bit_helpers():
    assert gf2.to_int(gf2.bits("0110")) == 6
    assert gf2.to_str(gf2.from_int(6, 4)) == "0110"
    assert gf2.weight(gf2.bits("0110")) == 2 and gf2.weight(7) == 3
    x = gf2.bits("1011")
    assert not (x ^ x).any()
    with pytest.raises(InputError):
        gf2.bits("012")
    with pytest.raises(InputError):
        gf2.from_int(16, 4)


def test_pa_distances_long_blocks():
    # beyond one packed word
    n = 150
    code = gf2.CodeSpec(np.eye(n, dtype=np.uint8)[:3] ^ np.eye(n, dtype=np.uint8)[1:4], n)
    masks = np.zeros((2, n), np.uint8)
    masks[0, 70:] = 1
    masks[1, 5:9] = 1
    pa = gf2.make_pa(code, masks)
    assert pa.hat_v == (80, 4)
    assert pa.d_dagger == 2
    assert gf2.hat_v_of(code.H, masks[0]) == 80
    assert gf2.weight_distribution(code.H).tolist() == [1, 0, 6, 0, 1] + [0] * (n - 4)
