"""Cross-lane equivalence: the compiled kernels and the pure-Python twins
must agree bit for bit, and both must match brute-force oracles."""

import random

import numpy as np
import pytest

from motifarc._kernels import IMPLEMENTATION, pyfallback as P

try:
    from motifarc._kernels import _ckern as C

    HAVE_COMPILED = True
except ImportError:
    C = P
    HAVE_COMPILED = False

pytestmark = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled kernels not built; nothing to compare"
)


def rand_seq(rng, n):
    return np.array([rng.randrange(4) for _ in range(n)], dtype=np.uint8)


def ed_oracle(a, b):
    la, lb = len(a), len(b)
    dp = list(range(lb + 1))
    for i in range(1, la + 1):
        prev = dp[0]
        dp[0] = i
        for j in range(1, lb + 1):
            tmp = dp[j]
            dp[j] = min(dp[j] + 1, dp[j - 1] + 1, prev + (a[i - 1] != b[j - 1]))
            prev = tmp
    return dp[lb]


def test_edit_distance_against_oracle():
    rng = random.Random(0)
    for _ in range(200):
        a = rand_seq(rng, rng.randrange(0, 30))
        b = rand_seq(rng, rng.randrange(0, 30))
        o = ed_oracle(list(a), list(b))
        assert C.edit_distance(a, b) == o == P.edit_distance(a, b)


def test_banded_edit_distance_exact_within_band():
    rng = random.Random(1)
    for _ in range(300):
        a = rand_seq(rng, rng.randrange(0, 30))
        b = rand_seq(rng, rng.randrange(0, 30))
        band = rng.randrange(0, 12)
        o = ed_oracle(list(a), list(b))
        cb = C.edit_distance_banded(a, b, band)
        assert cb == P.edit_distance_banded(a, b, band)
        if o <= band:
            assert cb == o
        else:
            assert cb >= o or cb > band  # upper bound above the band


def test_prefix_match_equivalence():
    rng = random.Random(2)
    for _ in range(300):
        pat = rand_seq(rng, rng.randrange(1, 24))
        txt = rand_seq(rng, rng.randrange(0, 60))
        ks = rng.randrange(0, 6)
        assert C.prefix_match_cost(pat, txt, ks) == P.prefix_match_cost(pat, txt, ks)


def test_realign_equivalence():
    rng = random.Random(3)
    for _ in range(400):
        read = rand_seq(rng, rng.randrange(0, 48))
        motif = rand_seq(rng, rng.randrange(1, 12))
        off = rng.randrange(0, 40)
        slack = rng.randrange(1, 5)
        reject = rng.randrange(0, 8)
        assert C.realign(read, off, motif, slack, reject) == P.realign(
            read, off, motif, slack, reject
        )


def _random_cluster_case(rng):
    n_reads = rng.randrange(1, 12)
    reads = [rand_seq(rng, rng.randrange(0, 40)) for _ in range(n_reads)]
    flat = (
        np.concatenate(reads) if n_reads else np.zeros(0, dtype=np.uint8)
    ).astype(np.uint8)
    ptr = np.zeros(n_reads + 1, dtype=np.int64)
    for i, r in enumerate(reads):
        ptr[i + 1] = ptr[i] + len(r)
    n_clusters = rng.randrange(1, 4)
    ids = list(range(n_reads))
    rng.shuffle(ids)
    members, cptr = [], [0]
    for c in range(n_clusters):
        take = rng.randrange(0, len(ids) + 1) if c < n_clusters - 1 else len(ids)
        members += ids[:take]
        ids = ids[take:]
        cptr.append(len(members))
    offsets = np.array([rng.randrange(0, 40) for _ in range(n_reads)], dtype=np.int64)
    return (
        flat,
        ptr,
        np.array(members, dtype=np.int64),
        np.array(cptr, dtype=np.int64),
        offsets,
    )


def test_consensus_and_realign_columns_equivalence():
    rng = random.Random(4)
    for trial in range(150):
        flat, ptr, members, cptr, offsets = _random_cluster_case(rng)
        n_clusters = len(cptr) - 1
        mlen = rng.randrange(2, 9)
        slack = rng.randrange(0, 4)
        mc = np.zeros((n_clusters, mlen), dtype=np.uint8)
        okc = np.zeros(n_clusters, dtype=np.uint8)
        mp = np.zeros((n_clusters, mlen), dtype=np.uint8)
        okp = np.zeros(n_clusters, dtype=np.uint8)
        C.consensus_columns(flat, ptr, members, cptr, offsets, mlen, slack, mc, okc)
        P.consensus_columns(flat, ptr, members, cptr, offsets, mlen, slack, mp, okp)
        assert (okc == okp).all() and (mc == mp).all(), trial
        offc, offp = offsets.copy(), offsets.copy()
        C.realign_columns(flat, ptr, members, cptr, offc, mc, okc, slack, 4)
        P.realign_columns(flat, ptr, members, cptr, offp, mp, okp, slack, 4)
        assert (offc == offp).all(), trial


def test_cgk_embed_equivalence():
    rng = random.Random(5)
    for _ in range(50):
        n_reads = rng.randrange(1, 6)
        reads = [rand_seq(rng, rng.randrange(0, 30)) for _ in range(n_reads)]
        flat = np.concatenate(reads).astype(np.uint8)
        ptr = np.zeros(n_reads + 1, dtype=np.int64)
        for i, r in enumerate(reads):
            ptr[i + 1] = ptr[i] + len(r)
        out_len = rng.randrange(1, 90)
        rbits = np.array(
            [[rng.randrange(2) for _ in range(4)] for _ in range(out_len)],
            dtype=np.uint8,
        )
        oc = np.zeros((n_reads, out_len), dtype=np.uint8)
        op = np.zeros((n_reads, out_len), dtype=np.uint8)
        C.cgk_embed_batch(flat, ptr, rbits, oc)
        P.cgk_embed_batch(flat, ptr, rbits, op)
        assert (oc == op).all()


def test_align_ops_equivalence_and_distance():
    rng = random.Random(6)
    for _ in range(120):
        read = rand_seq(rng, rng.randrange(0, 30))
        ref = rand_seq(rng, rng.randrange(1, 30))
        sc, ic, dc = (np.zeros(len(ref), dtype=np.int64) for _ in range(3))
        sp, ip, dp_ = (np.zeros(len(ref), dtype=np.int64) for _ in range(3))
        d1 = C.align_ops(read, ref, sc, ic, dc)
        d2 = P.align_ops(read, ref, sp, ip, dp_)
        assert d1 == d2 == ed_oracle(list(ref), list(read))
        assert (sc == sp).all() and (ic == ip).all() and (dc == dp_).all()


def test_corrupt_read_equivalence():
    rng = random.Random(7)
    for _ in range(300):
        codes = rand_seq(rng, rng.randrange(0, 60))
        rate = rng.choice([0.0, 0.01, 0.05, 0.12, 0.3])
        seed = rng.getrandbits(64)
        a = C.corrupt_read(codes, rate, 0.5, 1.0, 1.0, 1.0, seed)
        b = P.corrupt_read(codes, rate, 0.5, 1.0, 1.0, 1.0, seed)
        assert (a[0] == b[0]).all() and a[1:] == b[1:]


def test_implementation_tag():
    assert IMPLEMENTATION in ("compiled", "python")
    assert C.IMPLEMENTATION == "compiled"
    assert P.IMPLEMENTATION == "python"
