"""Read pipeline: primer demux, index resolution, motif consensus, and the
integrated decode loop.

Columnar decoding walks each oligo-block column by column: per-cluster
consensus motifs become symbols, the block's error-control code corrects
them, the corrected block is re-expanded into motifs, and every member
read is realigned against its corrected motif so the next column starts
at the right offset. That feedback is what stops indel-induced drift from
propagating. The row-based baseline reconstructs whole oligos first
(realigning only against its own consensus) and decodes afterwards.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterParams, cluster_reads, oracle_cluster
from .ecc import build_codec, randomize_block
from .layout import ROW_BASED, PoolManifest
from .motifs import MotifDictionary, seq_to_codes
from .sequences import ReadRecord, reverse_complement
from ._kernels import consensus_columns, prefix_match_cost, realign_columns


@dataclass
class DecodeParams:
    slack: int = 3
    primer_max_dist: int | None = None  # default ceil(0.2 * primer_len)
    realign_reject_cost: int | None = None  # default ceil(motif_len / 2)
    orientation_check: bool = False
    realign: bool = True

    def to_dict(self) -> dict:
        return {
            "slack": self.slack,
            "primer_max_dist": self.primer_max_dist,
            "realign_reject_cost": self.realign_reject_cost,
            "orientation_check": self.orientation_check,
            "realign": self.realign,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecodeParams":
        return cls(**d)

    def effective_primer_dist(self, primer_len: int) -> int:
        if self.primer_max_dist is not None:
            return self.primer_max_dist
        return math.ceil(0.2 * primer_len)

    def effective_reject_cost(self, motif_len: int) -> int:
        if self.realign_reject_cost is not None:
            return self.realign_reject_cost
        return math.ceil(motif_len / 2)


@dataclass
class DemuxResult:
    per_extent: list[list[int]]  # read indices assigned to each extent
    payloads: list[str]  # trimmed payload per read ("" when unassigned)
    assigned: int = 0
    discarded_no_match: int = 0
    discarded_ambiguous: int = 0

    @property
    def total(self) -> int:
        return self.assigned + self.discarded_no_match + self.discarded_ambiguous


@dataclass
class DecodeReport:
    block_status: list[str] = field(default_factory=list)
    erasures_per_block: list[int] = field(default_factory=list)
    invalid_motifs_per_block: list[int] = field(default_factory=list)
    cluster_count: int = 0
    discarded_clusters: int = 0
    dropout_rows: int = 0
    reads_used: int = 0
    mean_coverage: float = 0.0
    crc_ok: bool | None = None
    output_byte_len: int = 0
    extents: list[int] = field(default_factory=list)
    demux_assigned: int = 0
    demux_discarded: int = 0

    @property
    def blocks_failed(self) -> int:
        return sum(1 for s in self.block_status if s == "failed")

    @property
    def blocks_recovered(self) -> int:
        return sum(1 for s in self.block_status if s == "recovered")

    def to_dict(self) -> dict:
        return {
            "extents": self.extents,
            "blocks_recovered": self.blocks_recovered,
            "blocks_failed": self.blocks_failed,
            "block_status": self.block_status,
            "erasures_per_block": self.erasures_per_block,
            "invalid_motifs_per_block": self.invalid_motifs_per_block,
            "cluster_count": self.cluster_count,
            "discarded_clusters": self.discarded_clusters,
            "dropout_rows": self.dropout_rows,
            "reads_used": self.reads_used,
            "mean_coverage": self.mean_coverage,
            "crc_ok": self.crc_ok,
            "output_byte_len": self.output_byte_len,
            "demux_assigned": self.demux_assigned,
            "demux_discarded": self.demux_discarded,
        }


def demux_reads(
    reads: list[ReadRecord], manifest: PoolManifest, params: DecodeParams
) -> DemuxResult:
    """Assign reads to extents by primer matching at both ends, trimming.

    A read must match exactly one extent's left and right primers within
    the distance budget; matches to two extents are discarded as ambiguous.
    """
    plen = manifest.layout.primer_len
    max_dist = params.effective_primer_dist(plen)
    slack = params.slack
    table = manifest.layout.primer_table[: manifest.oe_count]
    lefts = [seq_to_codes(l) for l, _ in table]
    rights_rev = [seq_to_codes(r)[::-1].copy() for _, r in table]
    exact_ok = _primer_table_separated(table, 2 * max_dist)
    exact_lut = {(l, r): e for e, (l, r) in enumerate(table)} if exact_ok else {}
    result = DemuxResult(per_extent=[[] for _ in table], payloads=[""] * len(reads))
    for i, rec in enumerate(reads):
        seq = rec.sequence
        match = _match_read(
            seq, lefts, rights_rev, plen, slack, max_dist, exact_lut
        )
        if match is None and params.orientation_check:
            rc = reverse_complement(seq)
            match_rc = _match_read(
                rc, lefts, rights_rev, plen, slack, max_dist, exact_lut
            )
            if match_rc is not None and match_rc[0] >= 0:
                seq = rc
                match = match_rc
        if match is None:
            result.discarded_no_match += 1
            continue
        e, start, end = match
        if e < 0:
            result.discarded_ambiguous += 1
            continue
        payload = seq[start:end]
        if not payload:
            result.discarded_no_match += 1
            continue
        result.per_extent[e].append(i)
        result.payloads[i] = payload
        result.assigned += 1
    return result


def _primer_table_separated(table, min_dist: int) -> bool:
    from ._kernels import edit_distance

    prim = [seq_to_codes(p) for pair in table for p in pair]
    for i in range(len(prim)):
        for j in range(i + 1, len(prim)):
            if edit_distance(prim[i], prim[j]) <= min_dist:
                return False
    return True


def _match_read(seq, lefts, rights_rev, plen, slack, max_dist, exact_lut):
    """Returns (extent, payload_start, payload_end), extent=-1 for ambiguous,
    or None when no extent matches."""
    if exact_lut:
        key = (seq[:plen], seq[-plen:] if len(seq) >= plen else "")
        hit = exact_lut.get(key)
        if hit is not None:
            return hit, plen, len(seq) - plen
    codes = seq_to_codes(seq)
    rev = codes[::-1].copy()
    found = None
    for e in range(len(lefts)):
        lc, lend = prefix_match_cost(lefts[e], codes, slack)
        if lc > max_dist:
            continue
        rc, rend = prefix_match_cost(rights_rev[e], rev, slack)
        if rc > max_dist:
            continue
        start, end = lend, len(codes) - rend
        if end <= start:
            continue
        if found is not None:
            return (-1, 0, 0)
        found = (e, start, end)
    return found


class DataBlockFailed(Exception):
    """Raised internally when fail-fast decoding hits a data-carrying block."""


@dataclass
class _ExtentWork:
    """Per-extent read arrays shared by the index phase and column loops."""

    flat: np.ndarray
    ptr: np.ndarray
    offsets: np.ndarray
    clusters: list[list[int]]
    fail_fast_below: int = -1  # abort when a block under this ordinal fails


def _prepare_extent(payloads: list[str]) -> tuple[np.ndarray, np.ndarray]:
    codes = [seq_to_codes(p) for p in payloads]
    ptr = np.zeros(len(codes) + 1, dtype=np.int64)
    for i, c in enumerate(codes):
        ptr[i + 1] = ptr[i] + len(c)
    flat = (
        np.ascontiguousarray(np.concatenate(codes), dtype=np.uint8)
        if codes
        else np.zeros(0, dtype=np.uint8)
    )
    return flat, ptr


def _cluster_arrays(clusters: list[list[int]]):
    members = np.array(
        [m for c in clusters for m in c] or [0], dtype=np.int64
    )[: sum(len(c) for c in clusters)]
    cptr = np.zeros(len(clusters) + 1, dtype=np.int64)
    for i, c in enumerate(clusters):
        cptr[i + 1] = cptr[i] + len(c)
    return members, cptr


def _consensus(work: _ExtentWork, clusters, mlen, slack):
    members, cptr = _cluster_arrays(clusters)
    motifs = np.zeros((len(clusters), mlen), dtype=np.uint8)
    ok = np.zeros(len(clusters), dtype=np.uint8)
    consensus_columns(
        work.flat, work.ptr, members, cptr, work.offsets, mlen, slack, motifs, ok
    )
    return motifs, ok, members, cptr


def _resolve_index(
    work: _ExtentWork,
    dictionary: MotifDictionary,
    manifest: PoolManifest,
    params: DecodeParams,
    oe: int,
) -> tuple[dict[int, list[int]], int]:
    """Index-column consensus: ordinal -> member reads; larger cluster wins
    conflicts (ties to the one with the smallest read id). Returns the
    mapping and the number of discarded clusters."""
    mlen = dictionary.motif_len
    motifs, ok, _, _ = _consensus(work, work.clusters, mlen, params.slack)
    ranks = dictionary.rank_codes(motifs)
    limit = manifest.oligos_in_oe(oe)
    owners: dict[int, int] = {}
    discarded = 0
    for ci, cluster in enumerate(work.clusters):
        ordinal = int(ranks[ci]) if ok[ci] else -1
        if ordinal < 0 or ordinal >= limit:
            discarded += 1
            continue
        prev = owners.get(ordinal)
        if prev is None:
            owners[ordinal] = ci
        else:
            a, b = work.clusters[prev], cluster
            keep_new = (len(b), -min(b)) > (len(a), -min(a))
            owners[ordinal] = ci if keep_new else prev
            discarded += 1
    assigned = {o: work.clusters[ci] for o, ci in owners.items()}
    # realign every surviving cluster's reads against its true index motif
    if assigned:
        ordinals = np.array(sorted(assigned), dtype=np.int64)
        clusters = [assigned[int(o)] for o in ordinals]
        members, cptr = _cluster_arrays(clusters)
        if params.realign:
            idx_motifs = np.ascontiguousarray(dictionary.unrank_values(ordinals))
            realign_columns(
                work.flat,
                work.ptr,
                members,
                cptr,
                work.offsets,
                idx_motifs,
                np.ones(len(clusters), dtype=np.uint8),
                params.slack,
                params.effective_reject_cost(mlen),
            )
        else:
            work.offsets[members] = mlen
    return assigned, discarded


def _decode_ob_columnar(
    work: _ExtentWork,
    row_clusters: dict[int, list[int]],
    manifest: PoolManifest,
    dictionary: MotifDictionary,
    codec,
    params: DecodeParams,
    ob: int,
):
    """Column loop for one oligo-block; returns per-block results."""
    dc = manifest.layout.data_columns_per_oligo
    n_rows = manifest.oligos_per_ob
    mlen = dictionary.motif_len
    reject = params.effective_reject_cost(mlen)
    rows = sorted(row_clusters)
    clusters = [row_clusters[r] for r in rows]
    members, cptr = _cluster_arrays(clusters)
    ones = np.ones(len(clusters), dtype=np.uint8)
    results = []
    for col in range(dc):
        block = ob * dc + col
        motifs = np.zeros((len(clusters), mlen), dtype=np.uint8)
        ok = np.zeros(len(clusters), dtype=np.uint8)
        consensus_columns(
            work.flat, work.ptr, members, cptr, work.offsets, mlen,
            params.slack, motifs, ok,
        )
        ranks = dictionary.rank_codes(motifs)
        values = np.zeros(n_rows, dtype=np.int64)
        erased = np.ones(n_rows, dtype=bool)
        invalid = 0
        for ci, row in enumerate(rows):
            if not ok[ci]:
                continue
            if ranks[ci] < 0:
                invalid += 1
                continue
            values[row] = ranks[ci]
            erased[row] = False
        out = codec.decode_symbols(values, erased)
        if out is None:
            if block < work.fail_fast_below:
                raise DataBlockFailed
            results.append((block, None, int(erased.sum()), invalid))
            work.offsets[members] += mlen
            continue
        data_bits, corrected = out
        payload = randomize_block(data_bits, block, manifest.seed)
        results.append((block, payload, int(erased.sum()), invalid))
        if params.realign:
            corr = np.ascontiguousarray(
                dictionary.unrank_values(corrected[np.array(rows, dtype=np.int64)])
            )
            realign_columns(
                work.flat, work.ptr, members, cptr, work.offsets,
                corr, ones, params.slack, reject,
            )
        else:
            work.offsets[members] += mlen
    return results


def _decode_extent_columnar(
    work, manifest, dictionary, codec, params, oe, threads
):
    assigned, discarded = _resolve_index(work, dictionary, manifest, params, oe)
    n_rows = manifest.oligos_per_ob
    first_ob = oe * manifest.layout.obs_per_oe
    per_ob: dict[int, dict[int, list[int]]] = {}
    for ordinal, members in assigned.items():
        ob_local, row = divmod(ordinal, n_rows)
        per_ob.setdefault(ob_local, {})[row] = members
    obs = range(manifest.obs_in_oe(oe))

    def run(ob_local):
        return _decode_ob_columnar(
            work, per_ob.get(ob_local, {}), manifest, dictionary, codec,
            params, first_ob + ob_local,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            all_results = list(pool.map(run, obs))
    else:
        all_results = [run(ob) for ob in obs]
    dropouts = manifest.oligos_in_oe(oe) - len(assigned)
    reads_used = sum(len(m) for m in assigned.values())
    return (
        [r for ob_res in all_results for r in ob_res],
        len(work.clusters),
        discarded,
        dropouts,
        reads_used,
    )


def _decode_extent_rowwise(
    work, manifest, dictionary, codec, params, oe, threads
):
    assigned, discarded = _resolve_index(work, dictionary, manifest, params, oe)
    dc = manifest.layout.data_columns_per_oligo
    mlen = dictionary.motif_len
    reject = params.effective_reject_cost(mlen)
    n_oligos = manifest.oligos_in_oe(oe)
    ordinals = sorted(assigned)
    clusters = [assigned[o] for o in ordinals]
    members, cptr = _cluster_arrays(clusters)
    sym = np.zeros((n_oligos, dc), dtype=np.int64)
    sym_erased = np.ones((n_oligos, dc), dtype=bool)
    invalid_per_col = [0] * dc
    for col in range(dc):
        motifs = np.zeros((len(clusters), mlen), dtype=np.uint8)
        ok = np.zeros(len(clusters), dtype=np.uint8)
        consensus_columns(
            work.flat, work.ptr, members, cptr, work.offsets, mlen,
            params.slack, motifs, ok,
        )
        ranks = dictionary.rank_codes(motifs)
        for ci, ordv in enumerate(ordinals):
            if not ok[ci]:
                continue
            if ranks[ci] < 0:
                invalid_per_col[col] += 1
                continue
            sym[ordv, col] = ranks[ci]
            sym_erased[ordv, col] = False
        # realign against the consensus motif itself: no code feedback here
        if params.realign:
            realign_columns(
                work.flat, work.ptr, members, cptr, work.offsets,
                np.ascontiguousarray(motifs), ok, params.slack, reject,
            )
        else:
            work.offsets[members] += mlen
    stream = sym.reshape(-1)
    stream_erased = sym_erased.reshape(-1)
    n_sym = codec.n_symbols
    first_block = manifest.first_block_of_oe(oe)
    results = []
    for b_local in range(manifest.blocks_in_oe(oe)):
        block = first_block + b_local
        values = stream[b_local * n_sym : (b_local + 1) * n_sym]
        erased = stream_erased[b_local * n_sym : (b_local + 1) * n_sym]
        out = codec.decode_symbols(values, erased)
        if out is None:
            if block < work.fail_fast_below:
                raise DataBlockFailed
            results.append((block, None, int(erased.sum()), 0))
        else:
            payload = randomize_block(out[0], block, manifest.seed)
            results.append((block, payload, int(erased.sum()), 0))
    dropouts = n_oligos - len(assigned)
    reads_used = sum(len(m) for m in assigned.values())
    return results, len(work.clusters), discarded, dropouts, reads_used


def decode_pool(
    reads: list[ReadRecord],
    manifest: PoolManifest,
    dictionary: MotifDictionary,
    params: DecodeParams,
    cluster_params: ClusterParams | None = None,
    use_oracle_clusters: bool = False,
    extents: list[int] | None = None,
    threads: int = 1,
    fail_fast: bool = False,
    collect_clusters: list | None = None,
) -> tuple[bytes, DecodeReport]:
    """Full read pipeline: demux, cluster, decode every requested extent.

    Returns the recovered bytes (the whole input, or the concatenation of
    the requested extents' byte ranges) plus the decode report. The CRC is
    only checked when every extent is decoded. With fail_fast, decoding
    stops at the first unrecoverable data-carrying block (coverage-sweep
    mode, where any such failure already decides the trial). When
    collect_clusters is a list, (extent, clusters-with-global-read-ids)
    pairs are appended for debugging dumps.
    """
    if extents is None:
        extents = list(range(manifest.oe_count))
    codec = build_codec(manifest.ecc, manifest.bits_per_motif)
    demux = demux_reads(reads, manifest, params)
    report = DecodeReport(
        block_status=["skipped"] * manifest.blocks_padded,
        erasures_per_block=[0] * manifest.blocks_padded,
        invalid_motifs_per_block=[0] * manifest.blocks_padded,
        extents=list(extents),
        demux_assigned=demux.assigned,
        demux_discarded=demux.discarded_no_match + demux.discarded_ambiguous,
    )
    bits = np.zeros(manifest.blocks_padded * manifest.ecc.data_bits, dtype=np.uint8)
    rows_requested = 0
    aborted = False
    for oe in extents:
        ids = demux.per_extent[oe]
        payloads = [demux.payloads[i] for i in ids]
        flat, ptr = _prepare_extent(payloads)
        if use_oracle_clusters:
            subset = [reads[i] for i in ids]
            clusters = oracle_cluster(subset)
        elif cluster_params is not None:
            clusters = cluster_reads(
                payloads, cluster_params, expected_len=manifest.payload_nt_per_oligo
            )
        else:
            raise ValueError("need cluster_params or use_oracle_clusters")
        if collect_clusters is not None:
            collect_clusters.append((oe, [[ids[m] for m in c] for c in clusters]))
        work = _ExtentWork(
            flat=flat,
            ptr=ptr,
            offsets=np.zeros(len(payloads), dtype=np.int64),
            clusters=clusters,
            fail_fast_below=manifest.blocks_needed if fail_fast else -1,
        )
        decode_fn = (
            _decode_extent_rowwise
            if manifest.layout.layout_mode == ROW_BASED
            else _decode_extent_columnar
        )
        try:
            results, n_clusters, discarded, dropouts, used = decode_fn(
                work, manifest, dictionary, codec, params, oe, threads
            )
        except DataBlockFailed:
            aborted = True
            break
        db = manifest.ecc.data_bits
        for block, payload, erasures, invalid in results:
            report.erasures_per_block[block] = erasures
            report.invalid_motifs_per_block[block] = invalid
            if payload is None:
                report.block_status[block] = "failed"
            else:
                report.block_status[block] = "recovered"
                bits[block * db : (block + 1) * db] = payload
        report.cluster_count += n_clusters
        report.discarded_clusters += discarded
        report.dropout_rows += dropouts
        report.reads_used += used
        rows_requested += manifest.oligos_in_oe(oe)
    if aborted:
        report.block_status = [
            "failed" if s == "skipped" else s for s in report.block_status
        ]
        report.crc_ok = False
        report.output_byte_len = 0
        return b"", report
    report.mean_coverage = report.reads_used / rows_requested if rows_requested else 0.0
    all_bytes = np.packbits(bits).tobytes()[: manifest.input_byte_len]
    if len(extents) == manifest.oe_count:
        output = all_bytes
        report.crc_ok = (zlib.crc32(output) & 0xFFFFFFFF) == manifest.input_crc32
    else:
        chunks = []
        for oe in sorted(extents):
            lo, hi = manifest.extent_byte_range(oe)
            chunks.append(all_bytes[lo:hi])
        output = b"".join(chunks)
        report.crc_ok = None
    report.output_byte_len = len(output)
    return output, report
