import numpy as np
import pytest

from motifarc.ldpc import LdpcCode


def test_construction_is_regular_and_reproducible():
    code = LdpcCode(600, 300, seed=5)
    again = LdpcCode(600, 300, seed=5)
    assert (code._edge_var == again._edge_var).all()
    assert code.n == 900
    # every variable appears exactly var_degree times across check edges
    counts = np.bincount(code._edge_var[code._edge_mask], minlength=code.n)
    assert (counts == 3).all()


def test_encode_satisfies_all_checks():
    code = LdpcCode(600, 300, seed=5)
    rng = np.random.default_rng(0)
    for _ in range(10):
        cw = code.encode(rng.integers(0, 2, 600).astype(np.uint8))
        assert code.syndrome_ok(cw)


def test_noiseless_round_trip():
    code = LdpcCode(400, 200, seed=9)
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, 400).astype(np.uint8)
    out = code.decode(code.encode(bits))
    assert out is not None and (out[0] == bits).all()


def test_erasure_recovery_threshold_property():
    """Erasure-only channel at 0.7 of the parity fraction: >= 99% of
    seeded trials must recover (n >= 2048)."""
    code = LdpcCode(1024, 1024, seed=21)  # (3,6)-regular, n = 2048
    n = code.n
    n_erase = int(0.7 * code.m / n * n)
    rng = np.random.default_rng(117)
    bits = rng.integers(0, 2, code.k).astype(np.uint8)
    cw = code.encode(bits)
    ok = 0
    trials = 1000
    for _ in range(trials):
        erased = np.zeros(n, dtype=bool)
        erased[rng.choice(n, n_erase, replace=False)] = True
        noisy = cw.copy()
        noisy[erased] = 0
        out = code.decode(noisy, erased)
        if out is not None and (out[0] == bits).all():
            ok += 1
    assert ok >= 0.99 * trials, f"recovered {ok}/{trials}"


def test_bit_error_recovery():
    code = LdpcCode(1200, 360, seed=4)  # 30% parity overhead
    rng = np.random.default_rng(8)
    bits = rng.integers(0, 2, 1200).astype(np.uint8)
    cw = code.encode(bits)
    noisy = cw.copy()
    flips = rng.choice(code.n, int(0.01 * code.n), replace=False)
    noisy[flips] ^= 1
    out = code.decode(noisy)
    assert out is not None and (out[0] == bits).all()


def test_failure_is_explicit():
    code = LdpcCode(400, 120, seed=11)
    rng = np.random.default_rng(12)
    bits = rng.integers(0, 2, 400).astype(np.uint8)
    cw = code.encode(bits)
    noisy = cw.copy()
    flips = rng.choice(code.n, code.n // 3, replace=False)  # hopeless
    noisy[flips] ^= 1
    assert code.decode(noisy, max_iters=30) is None


def test_codeword_length_rounds_to_motifs():
    from motifarc.ecc import EccConfig, LDPC, build_codec

    cfg = EccConfig(scheme=LDPC, data_bits=1000, redundancy=0.3, construction_seed=2)
    codec = build_codec(cfg, 12)
    assert codec.code.n % 12 == 0
    assert codec.n_symbols == codec.code.n // 12


def test_rejects_bad_sizes():
    with pytest.raises(ValueError):
        LdpcCode(0, 10, seed=1)
    code = LdpcCode(100, 50, seed=1)
    with pytest.raises(ValueError):
        code.encode(np.zeros(99, dtype=np.uint8))
    with pytest.raises(ValueError):
        code.decode(np.zeros(10, dtype=np.uint8))
