"""GF(2) linear algebra, linear codes and privacy-amplification masks.

Bit strings are ``uint8`` numpy arrays of 0/1 values and bit matrices are 2-D
``uint8`` arrays.  Index 0 is the leftmost character of a printed string and
the most significant bit when a string is packed into an integer.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import CapacityError, InputError

# Largest span dimension that is ever enumerated explicitly.
MAX_ENUM_DIM = 24

BitString = np.ndarray
BitMatrix = np.ndarray


def bits(value, n: int | None = None) -> BitString:
    """Build a bit string from ``"0110"``, a 0/1 sequence, or an int (needs ``n``)."""
    if isinstance(value, str):
        s = value.strip()
        if s and set(s) - {"0", "1"}:
            raise InputError(f"not a bit string: {value!r}")
        return np.array([int(c) for c in s], dtype=np.uint8)
    if isinstance(value, (int, np.integer)):
        if n is None:
            raise InputError("integer bit strings need an explicit length")
        return from_int(int(value), n)
    arr = np.asarray(value).astype(np.uint8).ravel()
    if np.any(arr > 1):
        raise InputError("bit strings may only contain 0 and 1")
    return arr


def bitmatrix(rows, n: int | None = None) -> BitMatrix:
    """Stack row specifications (strings or sequences) into a bit matrix."""
    rows = list(rows)
    if not rows:
        if n is None:
            raise InputError("empty matrix needs an explicit column count")
        return np.zeros((0, n), dtype=np.uint8)
    M = np.array([bits(r) for r in rows], dtype=np.uint8)
    if n is not None and M.shape[1] != n:
        raise InputError(f"expected {n} columns, got {M.shape[1]}")
    return M


def to_str(x: BitString) -> str:
    return "".join("1" if b else "0" for b in np.asarray(x).ravel())


def weight(x) -> int:
    """Hamming weight of a bit string (or popcount of an int)."""
    if isinstance(x, (int, np.integer)):
        return int(x).bit_count()
    return int(np.count_nonzero(x))


def to_int(x: BitString) -> int:
    v = 0
    for b in np.asarray(x).ravel():
        v = (v << 1) | int(b)
    return v


def from_int(v: int, n: int) -> BitString:
    if v < 0 or v >> n:
        raise InputError(f"{v} does not fit in {n} bits")
    return np.array([(v >> (n - 1 - k)) & 1 for k in range(n)], dtype=np.uint8)


def pack_rows(M: BitMatrix) -> np.ndarray:
    """Pack each row of ``M`` into a uint64 (row bit 0 is the MSB)."""
    M = np.asarray(M, dtype=np.uint8)
    if M.ndim != 2:
        raise InputError("expected a 2-D bit matrix")
    n = M.shape[1]
    if n > 64:
        raise CapacityError("packed enumeration supports at most 64 columns")
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    return (M.astype(np.uint64) << shifts).sum(axis=1, dtype=np.uint64)


def dot(a, b) -> int:
    """GF(2) inner product of two bit strings or two packed ints."""
    if isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer)):
        return (int(a) & int(b)).bit_count() & 1
    return int(np.bitwise_and(np.asarray(a), np.asarray(b)).sum() & 1)


# --------------------------------------------------------------------------
# elimination

def rref(M: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row-echelon form over GF(2) and its pivot columns."""
    A = (np.array(M, dtype=np.uint8) & 1).copy()
    if A.ndim != 2:
        raise InputError("expected a 2-D bit matrix")
    nrows, ncols = A.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        hits = np.nonzero(A[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
        others = np.nonzero(A[:, c])[0]
        others = others[others != r]
        A[others] ^= A[r]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M: BitMatrix) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(rref(M)[1])


def syndrome(H: BitMatrix, x: BitString) -> BitString:
    """``H·x`` over GF(2)."""
    H = np.asarray(H, dtype=np.uint8)
    x = np.asarray(x, dtype=np.uint8).ravel()
    if H.ndim != 2 or H.shape[1] != x.size:
        raise InputError(f"syndrome: H has {H.shape[-1]} columns, x has length {x.size}")
    return ((H.astype(np.int64) @ x.astype(np.int64)) & 1).astype(np.uint8)


def nullspace(H: BitMatrix) -> BitMatrix:
    """Basis (as rows) of ``{x : H·x = 0}``, i.e. a generator matrix of the code."""
    H = np.asarray(H, dtype=np.uint8)
    n = H.shape[1]
    R, piv = rref(H) if H.shape[0] else (H, [])
    free = [c for c in range(n) if c not in piv]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for row, f in enumerate(free):
        basis[row, f] = 1
        for i, p in enumerate(piv):
            basis[row, p] = R[i, f]
    return basis


def row_space_equal(A: BitMatrix, B: BitMatrix) -> bool:
    ra, rb = rank(A), rank(B)
    return ra == rb == rank(np.vstack([A, B]))


def in_row_space(v: BitString, M: BitMatrix) -> bool:
    M = np.asarray(M, dtype=np.uint8)
    if M.shape[0] == 0:
        return not np.any(v)
    return rank(np.vstack([M, bits(v)])) == rank(M)


def span_ints(M: BitMatrix) -> np.ndarray:
    """All ``2^rows`` XOR combinations of the rows of ``M`` as packed uint64."""
    M = np.asarray(M, dtype=np.uint8)
    if M.shape[0] > MAX_ENUM_DIM:
        raise CapacityError(f"span of {M.shape[0]} generators exceeds 2^{MAX_ENUM_DIM}")
    words = np.zeros(1, dtype=np.uint64)
    for g in pack_rows(M) if M.shape[0] else []:
        words = np.concatenate([words, words ^ g])
    return words


def pack_words(M: BitMatrix) -> np.ndarray:
    """Pack rows of any length into ``(rows, ceil(n/64))`` uint64 words, zero padded."""
    M = np.asarray(M, dtype=np.uint8)
    if M.ndim != 2:
        raise InputError("expected a 2-D bit matrix")
    pad = -M.shape[1] % 64
    M = np.pad(M, ((0, 0), (0, pad)))
    return np.stack([pack_rows(M[:, k:k + 64]) for k in range(0, M.shape[1], 64)], axis=1) \
        if M.shape[1] else np.zeros((M.shape[0], 0), dtype=np.uint64)


def span_weights(M: BitMatrix, offset=None) -> np.ndarray:
    """Weights of every span element of ``M`` (XORed with ``offset`` if given), any length."""
    M = np.asarray(M, dtype=np.uint8)
    if M.shape[0] > MAX_ENUM_DIM:
        raise CapacityError(f"span of {M.shape[0]} generators exceeds 2^{MAX_ENUM_DIM}")
    gens = pack_words(M)
    words = pack_words(bits(offset)[None, :]) if offset is not None else \
        np.zeros((1, gens.shape[1]), dtype=np.uint64)
    for g in gens:
        words = np.concatenate([words, words ^ g])
    return np.bitwise_count(words).sum(axis=1, dtype=np.int64)


def weight_distribution(M: BitMatrix) -> np.ndarray:
    """Counts ``A[w]`` of span elements of weight ``w`` (rows assumed independent)."""
    n = np.asarray(M).shape[1]
    return np.bincount(span_weights(M), minlength=n + 1)


# --------------------------------------------------------------------------
# codes

@dataclass(frozen=True, eq=False)
class CodeSpec:
    """Linear ``[n, k]`` code given by an ``r x n`` full-rank parity-check matrix."""

    H: BitMatrix
    n: int
    d: int | None = None

    def __post_init__(self):
        H = np.array(self.H, dtype=np.uint8).reshape(-1, self.n)
        if rank(H) != H.shape[0]:
            raise InputError("parity-check rows must be linearly independent")
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

    @property
    def r(self) -> int:
        return self.H.shape[0]

    @property
    def k(self) -> int:
        return self.n - self.r

    @property
    def t(self) -> int | None:
        return None if self.d is None else (self.d - 1) // 2

    @property
    def key(self) -> tuple:
        return (self.n, self.H.tobytes())

    def generator(self) -> BitMatrix:
        return nullspace(self.H)

    def certified(self) -> "CodeSpec":
        """Copy with ``d`` filled in by exhaustive computation."""
        return CodeSpec(self.H, self.n, min_distance(self))

    @classmethod
    def full_space(cls, n: int) -> "CodeSpec":
        return cls(np.zeros((0, n), dtype=np.uint8), n, 1)


def min_distance(code: CodeSpec) -> int:
    """Exact minimum weight of a nonzero codeword.

    Enumerates the ``2^k`` codewords when ``k <= r``; otherwise enumerates the
    ``2^r`` dual words and applies the MacWilliams transform.
    """
    n, k, r = code.n, code.k, code.r
    if k == 0:
        raise InputError("the zero code has no nonzero codeword")
    if min(k, r) > MAX_ENUM_DIM:
        raise CapacityError(f"min_distance needs 2^{min(k, r)} words, cap is 2^{MAX_ENUM_DIM}")
    if k <= r:
        A = weight_distribution(code.generator())
    else:
        A = macwilliams(weight_distribution(code.H), n)
    return int(np.nonzero(A[1:])[0][0]) + 1


def krawtchouk(w: int, j: int, n: int) -> int:
    return sum((-1) ** s * comb(j, s) * comb(n - j, w - s) for s in range(0, min(w, j) + 1))


def macwilliams(dual_dist, n: int) -> np.ndarray:
    """Weight distribution of ``C`` from that of ``C^perp`` (exact integers)."""
    B = [int(b) for b in dual_dist]
    size = sum(B)
    out = []
    for w in range(n + 1):
        total = sum(B[j] * krawtchouk(w, j, n) for j in range(n + 1) if B[j])
        if total % size:
            raise ArithmeticError("MacWilliams transform did not divide evenly")
        out.append(total // size)
    return np.array(out, dtype=np.int64)


def coset_representative(H: BitMatrix, xi: BitString) -> BitString:
    """Lexicographically least ``x`` (index 0 most significant) with ``H·x = xi``."""
    H = np.asarray(H, dtype=np.uint8)
    xi = bits(xi)
    r, n = H.shape
    if xi.size != r:
        raise InputError(f"syndrome length {xi.size} does not match {r} parity rows")
    if r == 0:
        return np.zeros(n, dtype=np.uint8)
    R, piv = rref(np.hstack([H, xi[:, None]]))
    if n in piv:
        raise InputError("inconsistent system: syndrome outside the column space of H")
    if len(piv) != r:
        raise InputError("parity-check matrix is rank deficient")
    x = np.zeros(n, dtype=np.uint8)
    for i, p in enumerate(piv):
        x[p] = R[i, n]
    # Reduce by a reduced-echelon basis of the code: clears every leading position.
    G = nullspace(H)
    if G.shape[0]:
        G, lead = rref(G)
        for i, p in enumerate(lead):
            if x[p]:
                x ^= G[i]
    return x


def sample_random_linear_code(n: int, r: int, rng: np.random.Generator) -> CodeSpec:
    """Uniform random ``r x n`` parity checks, redrawn until full rank."""
    if not 0 <= r <= n:
        raise InputError("need 0 <= r <= n")
    while True:
        H = rng.integers(0, 2, size=(r, n), dtype=np.uint8)
        if rank(H) == r:
            return CodeSpec(H, n)


def search_code(n: int, r: int, min_d: int, rng: np.random.Generator,
                max_tries: int = 100_000) -> CodeSpec:
    """Draw random codes until one has certified distance ``>= min_d``."""
    for _ in range(max_tries):
        code = sample_random_linear_code(n, r, rng).certified()
        if code.d >= min_d:
            return code
    raise RuntimeError(f"no [{n},{n - r}] code with d >= {min_d} in {max_tries} draws")


# --------------------------------------------------------------------------
# privacy amplification

@dataclass(frozen=True, eq=False)
class PaSpec:
    """PA masks; ``hat_v`` and ``d_dagger`` are filled by :func:`make_pa`."""

    masks: BitMatrix
    hat_v: tuple[int, ...] | None = None
    d_dagger: int | None = None

    def __post_init__(self):
        M = np.array(self.masks, dtype=np.uint8)
        if M.ndim != 2:
            raise InputError("masks must be a 2-D bit matrix")
        M.setflags(write=False)
        object.__setattr__(self, "masks", M)

    @property
    def m(self) -> int:
        return self.masks.shape[0]


def pa_distances(ecc: CodeSpec, pa: PaSpec) -> tuple[list[int], int]:
    """Per-mask distance to the span of everything else, and the span's min distance."""
    masks = pa.masks
    if masks.shape[1] != ecc.n:
        raise InputError("mask length differs from block length")
    everything = np.vstack([ecc.H, masks])
    if rank(everything) != everything.shape[0]:
        raise InputError("masks must be independent of the ECC rows and of each other")
    if everything.shape[0] > MAX_ENUM_DIM:
        raise CapacityError("r + m exceeds the enumeration cap")
    hat_v = []
    for j in range(pa.m):
        others = np.vstack([ecc.H, np.delete(masks, j, axis=0)])
        hat_v.append(int(span_weights(others, masks[j]).min()))
    d_dagger = int(span_weights(everything)[1:].min())
    assert all(h >= d_dagger for h in hat_v)
    return hat_v, d_dagger


def make_pa(ecc: CodeSpec, masks) -> PaSpec:
    pa = PaSpec(bitmatrix(masks, ecc.n) if not isinstance(masks, np.ndarray) else masks)
    hat_v, d_dagger = pa_distances(ecc, pa)
    return PaSpec(pa.masks, tuple(hat_v), d_dagger)


def hat_v_of(H: BitMatrix, v: BitString) -> int:
    """Minimum weight of ``v`` XOR the row span of ``H``."""
    return int(span_weights(H, v).min())


def complement_basis(H: BitMatrix, v: BitString) -> BitMatrix:
    """Basis of a complement of row-span(H) containing ``v``.

    ``v`` comes first, then standard unit vectors inserted greedily in index order.
    """
    H = np.asarray(H, dtype=np.uint8)
    n = H.shape[1]
    v = bits(v)
    if in_row_space(v, H):
        raise InputError("mask lies in the span of the parity checks")
    chosen = [v]
    current = np.vstack([H, v])
    for k in range(n):
        if current.shape[0] == n:
            break
        e = np.zeros(n, dtype=np.uint8)
        e[k] = 1
        trial = np.vstack([current, e])
        if rank(trial) == trial.shape[0]:
            chosen.append(e)
            current = trial
    return np.array(chosen, dtype=np.uint8)


# --------------------------------------------------------------------------
# decoding

@functools.lru_cache(maxsize=64)
def _leader_table(n: int, Hbytes: bytes) -> tuple[np.ndarray, np.ndarray]:
    r = len(Hbytes) // n if n else 0
    H = np.frombuffer(Hbytes, dtype=np.uint8).reshape(r, n)
    if r > 20:
        raise CapacityError("coset-leader table limited to r <= 20")
    size = 1 << r
    leaders = np.zeros((size, n), dtype=np.uint8)
    lw = np.full(size, -1, dtype=np.int64)
    # Syndrome contribution of each column, as an int in [0, 2^r).
    cols = np.array([to_int(H[:, j]) for j in range(n)], dtype=np.int64) if r else np.zeros(n, np.int64)
    lw[0] = 0
    filled = 1
    for w in range(1, n + 1):
        if filled == size:
            break
        for support in itertools.combinations(range(n), w):
            s = 0
            for j in support:
                s ^= int(cols[j])
            if lw[s] < 0:
                lw[s] = w
                leaders[s, list(support)] = 1
                filled += 1
                if filled == size:
                    break
    leaders.setflags(write=False)
    lw.setflags(write=False)
    return leaders, lw


def coset_leader(code: CodeSpec, syn: BitString) -> tuple[BitString, int]:
    """Minimum-weight error pattern with the given syndrome (first in index order)."""
    leaders, lw = _leader_table(code.n, code.H.tobytes())
    s = to_int(syn) if code.r else 0
    return leaders[s].copy(), int(lw[s])


# --------------------------------------------------------------------------
# text format: "n k", r rows, optional "PA m" + m rows

def dumps_code(code: CodeSpec, pa: PaSpec | None = None) -> str:
    lines = [f"{code.n} {code.k}"]
    lines += [to_str(row) for row in code.H]
    if pa is not None:
        lines.append(f"PA {pa.m}")
        lines += [to_str(row) for row in pa.masks]
    return "\n".join(lines) + "\n"


def loads_code(text: str) -> tuple[CodeSpec, PaSpec | None]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    try:
        n, k = (int(tok) for tok in lines[0].split())
    except (IndexError, ValueError) as exc:
        raise InputError("first line must be 'n k'") from exc
    r = n - k
    rows = lines[1:1 + r]
    if len(rows) != r:
        raise InputError(f"expected {r} parity rows")
    code = CodeSpec(bitmatrix(rows, n), n)
    rest = lines[1 + r:]
    if not rest:
        return code, None
    head = rest[0].split()
    if len(head) != 2 or head[0] != "PA":
        raise InputError("mask block must start with 'PA m'")
    m = int(head[1])
    if len(rest) - 1 != m:
        raise InputError(f"expected {m} PA rows")
    return code, make_pa(code, bitmatrix(rest[1:], n))


def read_code(path) -> tuple[CodeSpec, PaSpec | None]:
    with open(path) as fh:
        return loads_code(fh.read())


def write_code(path, code: CodeSpec, pa: PaSpec | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_code(code, pa))
