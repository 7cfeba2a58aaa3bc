import numpy as np

from motifarc.channel import ChannelParams, sample_reads
from motifarc.clustering import ClusterParams
from motifarc.decoding import DecodeParams, decode_pool, demux_reads
from motifarc.ecc import EccConfig, RS
from motifarc.layout import (
    COLUMNAR,
    ROW_BASED,
    LayoutParams,
    crc32,
    encode_pool,
    encode_pool_rowwise,
    generate_primers,
    plan_layout,
)
from motifarc.motifs import MotifConstraints, MotifDictionary
from motifarc.sequences import ReadRecord
from motifarc._kernels import realign

DICT = MotifDictionary(MotifConstraints(8, 2, 0.25, 0.75), 12)
ECC = EccConfig(scheme=RS, data_bits=16 * 12, redundancy=0.25, symbol_bits=12)
PRIMERS = generate_primers(6, 20, 7)


def build_pool(data, mode=COLUMNAR, dc=4, obe=2, seed=11):
    lay = LayoutParams(dc, obe, 20, PRIMERS, mode)
    man = plan_layout(len(data), lay, ECC, DICT, seed=seed, input_crc32=crc32(data))
    enc = encode_pool_rowwise if mode == ROW_BASED else encode_pool
    return man, enc(data, man, DICT)


def random_bytes(n, seed=0):
    return bytes(np.random.default_rng(seed).integers(0, 256, n, dtype=np.uint8))


def test_demux_exact_primers():
    data = random_bytes(500)
    man, pool = build_pool(data)
    reads = sample_reads(pool, ChannelParams(coverage=1, error_rate=0, seed=1))
    result = demux_reads(reads, man, DecodeParams())
    assert result.assigned == len(reads)
    assert result.discarded_no_match == 0
    for e, ids in enumerate(result.per_extent):
        for i in ids:
            assert reads[i].src[1] // man.layout.obs_per_oe == e
            assert result.payloads[i] == pool[0].payload[:0] + reads[i].sequence[20:-20]


def test_demux_discards_garbage():
    data = random_bytes(300)
    man, pool = build_pool(data)
    reads = sample_reads(pool, ChannelParams(coverage=1, error_rate=0, seed=1))
    reads.append(ReadRecord("ACGT" * 40, None))
    result = demux_reads(reads, man, DecodeParams())
    assert result.discarded_no_match == 1


def test_demux_ambiguous_discard():
    data = random_bytes(300)
    man, pool = build_pool(data)
    # force two extents to share a left primer within threshold: craft a read
    # equidistant from both by mutating the real primer toward another one
    reads = sample_reads(pool, ChannelParams(coverage=1, error_rate=0, seed=1))
    base = reads[0]
    l0, r0 = man.layout.primer_table[0]
    l1, _ = man.layout.primer_table[1]
    hybrid = "".join(a if i % 2 == 0 else b for i, (a, b) in enumerate(zip(l0, l1)))
    fake = ReadRecord(hybrid + base.sequence[20:], None)
    params = DecodeParams(primer_max_dist=12)
    result = demux_reads([fake], man, params)
    assert result.discarded_ambiguous == 1


def test_zero_noise_round_trip_oracle_and_clustered():
    data = random_bytes(700, seed=3)
    man, pool = build_pool(data)
    reads = sample_reads(pool, ChannelParams(coverage=1, error_rate=0, seed=2))
    out, rep = decode_pool(reads, man, DICT, DecodeParams(), use_oracle_clusters=True)
    assert out == data
    assert rep.crc_ok is True
    assert rep.blocks_failed == 0
    assert sum(rep.erasures_per_block) == 0
    out2, rep2 = decode_pool(
        reads, man, DICT, DecodeParams(), cluster_params=ClusterParams(seed=5)
    )
    assert out2 == data and rep2.crc_ok is True


def test_erasure_budget_whole_oligos():
    """Any n-k missing oligos in one OB stay fully recoverable."""
    data = random_bytes(700, seed=4)
    man, pool = build_pool(data)
    nsym = man.oligos_per_ob  # RS(20, 16): budget 4
    reads = sample_reads(pool, ChannelParams(coverage=1, error_rate=0, seed=2))
    rng = np.random.default_rng(9)
    for trial in range(6):
        rows = rng.choice(nsym, 4, replace=False)
        keep = [r for r in reads if not (r.src[1] == 1 and r.src[2] in rows)]
        out, rep = decode_pool(keep, man, DICT, DecodeParams(), use_oracle_clusters=True)
        assert out == data and rep.crc_ok
        for b in range(4, 8):  # OB 1 owns blocks 4..7
            assert rep.erasures_per_block[b] == 4
    # one more than the budget must fail loudly, never silently corrupt
    rows = rng.choice(nsym, 5, replace=False)
    keep = [r for r in reads if not (r.src[1] == 1 and r.src[2] in rows)]
    out, rep = decode_pool(keep, man, DICT, DecodeParams(), use_oracle_clusters=True)
    assert rep.crc_ok is False
    assert rep.blocks_failed == 4


def test_moderate_noise_round_trip():
    data = random_bytes(700, seed=5)
    man, pool = build_pool(data)
    reads = sample_reads(pool, ChannelParams(coverage=8, error_rate=0.03, seed=6))
    out, rep = decode_pool(reads, man, DICT, DecodeParams(), use_oracle_clusters=True)
    assert out == data and rep.crc_ok


def test_realign_example_from_deletion():
    """After a deletion inside column 1, realignment lands the next column
    on the true boundary: GTACAC-TGATCT loses its C at index 5 and the
    corrected motif GTACAC must end at offset 5 in the damaged read."""
    read = np.frombuffer(b"GTACATGATCT", dtype=np.uint8)
    from motifarc.motifs import seq_to_codes

    read_codes = seq_to_codes("GTACATGATCT")
    motif = seq_to_codes("GTACAC")
    end, cost = realign(read_codes, 0, motif, 3, 3)
    assert cost == 1
    assert end == 5  # column 2 then reads TGATCT correctly


def test_realign_reject_falls_back():
    from motifarc.motifs import seq_to_codes

    read_codes = seq_to_codes("TTTTTTTTTTTT")
    motif = seq_to_codes("GACGAC")
    end, cost = realign(read_codes, 2, motif, 2, 2)
    assert cost > 2
    assert end == 2 + 6  # expected_offset + motif_len


def test_error_free_realign_advances_exactly():
    from motifarc.motifs import seq_to_codes

    read_codes = seq_to_codes("GTACACTGATCT")
    motif = seq_to_codes("GTAC")
    end, cost = realign(read_codes, 0, motif, 3, 2)
    assert (end, cost) == (4, 0)


def test_indel_containment_with_and_without_realign():
    data = random_bytes(700, seed=8)
    man, pool = build_pool(data)
    reads = sample_reads(pool, ChannelParams(coverage=1, error_rate=0, seed=2))
    target = (0, 0, 0)
    for r in reads:
        if r.src == target:
            s = r.sequence
            pos = 20 + 12  # inside column 1's motif, past the index column
            r.sequence = s[:pos] + s[pos + 1 :]
            break
    on, rep_on = decode_pool(
        reads, man, DICT, DecodeParams(realign=True), use_oracle_clusters=True
    )
    off, rep_off = decode_pool(
        reads, man, DICT, DecodeParams(realign=False), use_oracle_clusters=True
    )
    assert on == data and rep_on.crc_ok
    # downstream columns of that read stay aligned with realign on...
    assert sum(rep_on.invalid_motifs_per_block) == 0
    # ...and drift into invalid motifs without it (columns 2..dc of OB 0)
    assert sum(rep_off.invalid_motifs_per_block) >= man.layout.data_columns_per_oligo - 2
    assert off == data  # the code still absorbs one bad row per block here


def test_row_based_round_trip_and_erasure_locality():
    data = random_bytes(700, seed=9)
    man, pool = build_pool(data, mode=ROW_BASED)
    reads = sample_reads(pool, ChannelParams(coverage=1, error_rate=0, seed=2))
    out, rep = decode_pool(reads, man, DICT, DecodeParams(), use_oracle_clusters=True)
    assert out == data and rep.crc_ok
    # drop one oligo: its dc symbols erase inside a single block
    victim = pool[3]
    keep = [r for r in reads if r.src != (victim.oe, victim.ob, victim.row)]
    out, rep = decode_pool(keep, man, DICT, DecodeParams(), use_oracle_clusters=True)
    nz = {b: e for b, e in enumerate(rep.erasures_per_block) if e}
    assert len(nz) == 1
    assert list(nz.values())[0] == man.layout.data_columns_per_oligo


def test_reverse_complement_reads_round_trip():
    data = random_bytes(500, seed=13)
    man, pool = build_pool(data)
    params = ChannelParams(
        coverage=2, error_rate=0.0, emit_reverse_complement=True, seed=5
    )
    reads = sample_reads(pool, params)
    out, rep = decode_pool(
        reads,
        man,
        DICT,
        DecodeParams(orientation_check=True),
        use_oracle_clusters=True,
    )
    assert out == data and rep.crc_ok
    # without the orientation check roughly half the reads are unusable
    blind = demux_reads(reads, man, DecodeParams(orientation_check=False))
    assert blind.discarded_no_match > 0.3 * len(reads)


def test_extent_subset_decode():
    data = random_bytes(1000, seed=10)
    man, pool = build_pool(data)
    reads = sample_reads(pool, ChannelParams(coverage=2, error_rate=0.0, seed=3))
    for oe in range(man.oe_count):
        lo, hi = man.extent_byte_range(oe)
        out, rep = decode_pool(
            reads, man, DICT, DecodeParams(), use_oracle_clusters=True, extents=[oe]
        )
        assert out == data[lo:hi]
        assert rep.crc_ok is None


def test_decode_is_deterministic_across_threads():
    data = random_bytes(900, seed=12)
    man, pool = build_pool(data)
    reads = sample_reads(pool, ChannelParams(coverage=3, error_rate=0.02, seed=4))
    outs = []
    reports = []
    for threads in (1, 3):
        out, rep = decode_pool(
            reads, man, DICT, DecodeParams(), use_oracle_clusters=True, threads=threads
        )
        outs.append(out)
        reports.append(rep.to_dict())
    assert outs[0] == outs[1]
    assert reports[0] == reports[1]
