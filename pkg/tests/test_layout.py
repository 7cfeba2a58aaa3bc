import json
import math

import numpy as np
import pytest

from motifarc.ecc import EccConfig, RS, build_codec
from motifarc.layout import (
    COLUMNAR,
    ROW_BASED,
    LayoutParams,
    PoolManifest,
    crc32,
    encode_pool,
    encode_pool_rowwise,
    generate_primers,
    plan_layout,
)
from motifarc.motifs import MotifConstraints, MotifDictionary, validate_motif

DICT = MotifDictionary(MotifConstraints(8, 2, 0.25, 0.75), 12)
ECC = EccConfig(scheme=RS, data_bits=16 * 12, redundancy=0.25, symbol_bits=12)


def make_layout(mode=COLUMNAR, dc=4, obe=2, n_pairs=6, seed=7):
    return LayoutParams(dc, obe, 20, generate_primers(n_pairs, 20, seed), mode)


def test_plan_arithmetic_example():
    # coded_bits=240, bits_per_motif=30 -> 8 oligos per OB: same arithmetic
    # checked through ceil division directly
    assert math.ceil(240 / 30) == 8
    data_len = 500
    man = plan_layout(data_len, make_layout(), ECC, DICT, seed=1)
    blocks = math.ceil(data_len * 8 / ECC.data_bits)
    assert man.blocks_needed == blocks == 21
    assert man.ob_count == math.ceil(blocks / 4) == 6
    assert man.oe_count == 3
    assert man.oligos_per_ob == build_codec(ECC, 12).n_symbols == 20
    assert man.total_oligo_count == man.ob_count * man.oligos_per_ob


def test_plan_single_block_single_ob():
    ecc = EccConfig(scheme=RS, data_bits=16 * 12, redundancy=0.25, symbol_bits=12)
    lay = make_layout(dc=1, obe=1, n_pairs=1)
    man = plan_layout(ecc.data_bits // 8, lay, ecc, DICT, seed=1)
    assert man.blocks_needed == 1
    assert man.ob_count == 1
    assert man.oe_count == 1


def test_desk_scale_plan_arithmetic():
    # 1 MiB input, RS(1000,900) over GF(2^12), 16 data columns
    ecc = EccConfig(scheme=RS, data_bits=10800, redundancy=1 / 9, symbol_bits=12)
    lay = LayoutParams(16, 4, 20, generate_primers(13, 20, 3))
    man = plan_layout(1 << 20, lay, ecc, DICT, seed=1)
    assert man.blocks_needed == math.ceil((1 << 20) * 8 / 10800) == 777
    assert man.ob_count == math.ceil(777 / 16) == 49
    assert man.oligos_per_ob == 1000
    assert man.payload_nt_per_oligo == 17 * 8


def test_plan_rejects_bad_inputs():
    with pytest.raises(ValueError):
        plan_layout(0, make_layout(), ECC, DICT)
    with pytest.raises(ValueError):
        plan_layout(500, make_layout(n_pairs=1), ECC, DICT)  # not enough primers
    # index space: an extent may not exceed 2^bits_per_motif ordinals
    small_dict = MotifDictionary(MotifConstraints(8, 2, 0.25, 0.75), 4)
    with pytest.raises(ValueError):
        plan_layout(500, make_layout(obe=2), ECC, small_dict)


def test_primer_generation_properties():
    from motifarc._kernels import edit_distance
    from motifarc.motifs import seq_to_codes

    pairs = generate_primers(4, 20, 11)
    flat = [p for pair in pairs for p in pair]
    assert len(set(flat)) == 8
    rules = MotifConstraints(20, 2, 0.25, 0.75)
    for p in flat:
        assert validate_motif(rules, p)
    min_d = math.ceil(20 / 3)
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            d = edit_distance(seq_to_codes(flat[i]), seq_to_codes(flat[j]))
            assert d >= min_d


def test_encode_pool_structure():
    data = bytes(np.random.default_rng(0).integers(0, 256, 500, dtype=np.uint8))
    man = plan_layout(len(data), make_layout(), ECC, DICT, seed=3, input_crc32=crc32(data))
    pool = encode_pool(data, man, DICT)
    assert len(pool) == man.total_oligo_count
    for rec in pool[:50]:
        assert len(rec.payload) == man.payload_nt_per_oligo
        # every motif slice is dictionary-valid
        for k in range(man.columns_per_oligo):
            motif = rec.payload[k * 8 : (k + 1) * 8]
            assert validate_motif(DICT.constraints, motif)
    # index motifs decode to the oligo's ordinal within its extent
    for rec in pool:
        ordinal = DICT.rank(rec.payload[:8])
        ob_local = rec.ob % man.layout.obs_per_oe
        assert ordinal == ob_local * man.oligos_per_ob + rec.row


def test_index_ordinals_example():
    # 2 OBs x 6 oligos in one extent: ordinals 0..5 and 6..11
    ecc = EccConfig(scheme=RS, data_bits=4 * 12, redundancy=0.5, symbol_bits=12)
    lay = make_layout(dc=2, obe=2, n_pairs=2)
    codec = build_codec(ecc, 12)
    assert codec.n_symbols == 6
    data = bytes(range(1, 25))  # exactly 4 blocks of 48 bits
    man = plan_layout(len(data), lay, ecc, DICT, seed=5)
    assert man.ob_count == 2 and man.oligos_per_ob == 6
    pool = encode_pool(data, man, DICT)
    ordinals = [DICT.rank(rec.payload[:8]) for rec in pool]
    assert ordinals == list(range(12))


def test_rowwise_same_oligo_count_and_distinct_layout():
    data = bytes(np.random.default_rng(1).integers(0, 256, 500, dtype=np.uint8))
    lay_c = make_layout(COLUMNAR)
    lay_r = make_layout(ROW_BASED)
    man_c = plan_layout(len(data), lay_c, ECC, DICT, seed=3)
    man_r = plan_layout(len(data), lay_r, ECC, DICT, seed=3)
    pool_c = encode_pool(data, man_c, DICT)
    pool_r = encode_pool_rowwise(data, man_r, DICT)
    assert len(pool_c) == len(pool_r) == man_c.total_oligo_count
    assert any(a.payload != b.payload for a, b in zip(pool_c, pool_r))


def test_encode_is_deterministic():
    data = bytes(np.random.default_rng(2).integers(0, 256, 400, dtype=np.uint8))
    man = plan_layout(len(data), make_layout(), ECC, DICT, seed=4)
    a = encode_pool(data, man, DICT)
    b = encode_pool(data, man, DICT)
    assert [r.sequence for r in a] == [r.sequence for r in b]


def test_encode_threaded_matches_serial():
    data = bytes(np.random.default_rng(3).integers(0, 256, 800, dtype=np.uint8))
    man = plan_layout(len(data), make_layout(), ECC, DICT, seed=4)
    serial = encode_pool(data, man, DICT, threads=1)
    threaded = encode_pool(data, man, DICT, threads=4)
    assert [r.sequence for r in serial] == [r.sequence for r in threaded]


def test_write_cost_increases_with_redundancy():
    from motifarc.metrics import CostInputs, write_cost

    data_len = 600
    costs = []
    for red in (0.1, 0.2, 0.4):
        ecc = EccConfig(scheme=RS, data_bits=16 * 12, redundancy=red, symbol_bits=12)
        man = plan_layout(data_len, make_layout(), ecc, DICT, seed=3)
        pool = encode_pool(bytes(data_len), man, DICT)
        nt = len(pool[0].sequence)
        costs.append(
            write_cost(CostInputs(len(pool), nt, data_len * 8))
        )
    assert costs[0] < costs[1] < costs[2]


def test_manifest_round_trip(tmp_path):
    data = b"x" * 500
    man = plan_layout(len(data), make_layout(), ECC, DICT, seed=9, input_crc32=crc32(data))
    path = tmp_path / "m.json"
    man.save(path)
    back = PoolManifest.load(path)
    assert back.to_dict() == man.to_dict()
    raw = json.loads(path.read_text())
    for key in ("version", "input_byte_len", "input_crc32", "seed", "geometry"):
        assert key in raw


def test_extent_byte_ranges_cover_input():
    data = b"y" * 1000
    man = plan_layout(len(data), make_layout(), ECC, DICT, seed=9)
    spans = [man.extent_byte_range(e) for e in range(man.oe_count)]
    assert spans[0][0] == 0
    for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
        assert a1 == b0
    assert spans[-1][1] == len(data)
