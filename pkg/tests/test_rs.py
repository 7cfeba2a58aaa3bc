import itertools
import random

import numpy as np
import pytest

from motifarc.gf import GF2m
from motifarc.rs import ReedSolomon


class TinyGF16:
    """Independent GF(16) oracle built from first principles (poly 0x13)."""

    def mul(self, a, b):
        r = 0
        while b:
            if b & 1:
                r ^= a
            a <<= 1
            if a & 0x10:
                a ^= 0x13
            b >>= 1
        return r


def oracle_parity_gf16(data, n, k):
    """Parity via plain polynomial long division over GF(16)."""
    gf = TinyGF16()
    # generator = prod (x - alpha^j), alpha = 2, computed by schoolbook conv
    gen = [1]
    alpha_pow = 1
    for _ in range(n - k):
        nxt = [0] * (len(gen) + 1)
        for i, c in enumerate(gen):
            nxt[i] ^= gf.mul(c, alpha_pow)
            nxt[i + 1] ^= c
        gen = nxt
        alpha_pow = gf.mul(alpha_pow, 2)
    gen = gen[::-1]  # descending: monic first
    work = list(data) + [0] * (n - k)
    for i in range(k):
        coef = work[i]
        if coef:
            for j in range(1, len(gen)):
                work[i + j] ^= gf.mul(gen[j], coef)
    return work[k:]


def test_gf_tables_match_schoolbook():
    gf = GF2m(4)
    oracle = TinyGF16()
    for a in range(16):
        for b in range(16):
            assert gf.mul(a, b) == oracle.mul(a, b)


def test_parity_matches_long_division_oracle():
    rs = ReedSolomon(4, 15, 11)
    rng = random.Random(7)
    zero = np.zeros(11, dtype=np.int64)
    assert (rs.encode(zero)[11:] == 0).all()  # all-zero data -> all-zero parity
    for _ in range(25):
        data = [rng.randrange(16) for _ in range(11)]
        cw = rs.encode(np.array(data, dtype=np.int64))
        assert list(cw[11:]) == oracle_parity_gf16(data, 15, 11)


def test_noiseless_round_trip():
    rs = ReedSolomon(4, 15, 11)
    rng = np.random.default_rng(1)
    for _ in range(20):
        data = rng.integers(0, 16, 11).astype(np.int64)
        out = rs.decode(rs.encode(data))
        assert out is not None and (out[0] == data).all()


def test_parity_symbol_count():
    rs = ReedSolomon(8, 255, 223)
    assert rs.nsym == 32
    assert len(rs.encode(np.zeros(223, dtype=np.int64))) == 255


def test_two_errors_exhaustive_positions():
    rs = ReedSolomon(4, 15, 11)
    rng = random.Random(13)
    data = np.array([rng.randrange(16) for _ in range(11)], dtype=np.int64)
    cw = rs.encode(data)
    for p1, p2 in itertools.combinations(range(15), 2):
        r = cw.copy()
        r[p1] ^= rng.randrange(1, 16)
        r[p2] ^= rng.randrange(1, 16)
        out = rs.decode(r)
        assert out is not None and (out[0] == data).all(), (p1, p2)


def test_all_four_erasure_subsets():
    rs = ReedSolomon(4, 15, 11)
    rng = random.Random(17)
    data = np.array([rng.randrange(16) for _ in range(11)], dtype=np.int64)
    cw = rs.encode(data)
    for pos in itertools.combinations(range(15), 4):
        r = cw.copy()
        erased = np.zeros(15, dtype=bool)
        for p in pos:
            r[p] = rng.randrange(16)
            erased[p] = True
        out = rs.decode(r, erased)
        assert out is not None and (out[0] == data).all(), pos


def test_mixed_error_erasure_budget():
    # 2*errors + erasures <= n - k = 4: one error plus two erasures
    rs = ReedSolomon(4, 15, 11)
    rng = random.Random(19)
    data = np.array([rng.randrange(16) for _ in range(11)], dtype=np.int64)
    cw = rs.encode(data)
    for e1 in range(15):
        for s1, s2 in itertools.combinations(range(15), 2):
            if e1 in (s1, s2):
                continue
            r = cw.copy()
            r[e1] ^= rng.randrange(1, 16)
            erased = np.zeros(15, dtype=bool)
            erased[s1] = erased[s2] = True
            r[s1] = rng.randrange(16)
            r[s2] = rng.randrange(16)
            out = rs.decode(r, erased)
            assert out is not None and (out[0] == data).all()


def test_beyond_budget_never_silently_inconsistent():
    """At t+1 errors the decoder may land on a different valid codeword
    (undetectable) but must never return a word failing its own checks."""
    rs = ReedSolomon(4, 15, 11)
    rng = random.Random(23)
    data = np.array([rng.randrange(16) for _ in range(11)], dtype=np.int64)
    cw = rs.encode(data)
    wrong_but_valid = 0
    for _ in range(300):
        r = cw.copy()
        for p in rng.sample(range(15), 3):
            r[p] ^= rng.randrange(1, 16)
        out = rs.decode(r)
        if out is None:
            continue
        _, corrected = out
        assert not rs.syndromes(corrected).any()
        if not (out[0] == data).all():
            wrong_but_valid += 1
    # with distance 5, some 3-error patterns must decode to other codewords
    assert wrong_but_valid > 0


def test_too_many_erasures_fail_explicitly():
    rs = ReedSolomon(4, 15, 11)
    data = np.arange(11, dtype=np.int64) % 16
    cw = rs.encode(data)
    erased = np.zeros(15, dtype=bool)
    erased[:5] = True
    r = cw.copy()
    r[:5] = 0
    assert rs.decode(r, erased) is None


def test_shortened_large_field():
    rs = ReedSolomon(12, 1000, 900)
    rng = np.random.default_rng(5)
    data = rng.integers(0, 4096, 900).astype(np.int64)
    cw = rs.encode(data)
    r = cw.copy()
    pos = rng.choice(1000, 100, replace=False)
    erased = np.zeros(1000, dtype=bool)
    erased[pos] = True
    r[pos] = 0
    out = rs.decode(r, erased)
    assert out is not None and (out[0] == data).all()
    # 50 errors: exactly at the 2e <= 100 budget
    r = cw.copy()
    pos = rng.choice(1000, 50, replace=False)
    r[pos] ^= rng.integers(1, 4096, 50)
    out = rs.decode(r)
    assert out is not None and (out[0] == data).all()


def test_bad_parameters():
    with pytest.raises(ValueError):
        ReedSolomon(4, 16, 11)
    with pytest.raises(ValueError):
        ReedSolomon(4, 10, 10)
