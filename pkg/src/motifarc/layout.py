"""Write pipeline: map coded blocks onto the columnar motif layout.

Geometry: each coded block fills one column of an oligo-block (OB), one
symbol per oligo row; the first column of every oligo carries an index
motif giving the oligo's ordinal within its oligo-extent (OE). An OE is
one or more OBs wrapped in a primer pair; it is the unit of random
access. The row-based baseline lays each block's symbols consecutively
along oligos instead, with everything else identical.
"""

from __future__ import annotations

import json
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ecc import EccConfig, build_codec, randomize_block
from .motifs import MotifConstraints, MotifDictionary, codes_to_seq, validate_motif
from .prng import Stream, derive_seed
from .sequences import OligoRecord
from ._kernels import edit_distance_banded

MANIFEST_VERSION = "motifarc-pool-1"
COLUMNAR = "columnar"
ROW_BASED = "row_based"


@dataclass
class LayoutParams:
    data_columns_per_oligo: int = 16
    obs_per_oe: int = 4
    primer_len: int = 20
    primer_table: list[tuple[str, str]] = field(default_factory=list)
    layout_mode: str = COLUMNAR

    def __post_init__(self):
        if self.data_columns_per_oligo < 1:
            raise ValueError("data_columns_per_oligo must be >= 1")
        if self.obs_per_oe < 1:
            raise ValueError("obs_per_oe must be >= 1")
        if self.layout_mode not in (COLUMNAR, ROW_BASED):
            raise ValueError(f"unknown layout_mode {self.layout_mode!r}")

    def to_dict(self) -> dict:
        return {
            "data_columns_per_oligo": self.data_columns_per_oligo,
            "obs_per_oe": self.obs_per_oe,
            "primer_len": self.primer_len,
            "primer_table": [list(p) for p in self.primer_table],
            "layout_mode": self.layout_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LayoutParams":
        return cls(
            data_columns_per_oligo=d["data_columns_per_oligo"],
            obs_per_oe=d["obs_per_oe"],
            primer_len=d["primer_len"],
            primer_table=[tuple(p) for p in d["primer_table"]],
            layout_mode=d.get("layout_mode", COLUMNAR),
        )


@dataclass
class PoolManifest:
    """Everything the decoder needs; the complete decode contract."""

    input_byte_len: int
    input_crc32: int
    constraints: MotifConstraints
    bits_per_motif: int
    ecc: EccConfig
    layout: LayoutParams
    seed: int
    # derived geometry
    oligos_per_ob: int = 0
    columns_per_oligo: int = 0
    blocks_needed: int = 0
    blocks_padded: int = 0
    ob_count: int = 0
    oe_count: int = 0
    payload_nt_per_oligo: int = 0
    total_oligo_count: int = 0
    version: str = MANIFEST_VERSION

    def obs_in_oe(self, oe: int) -> int:
        if not 0 <= oe < self.oe_count:
            raise ValueError(f"extent {oe} out of range")
        first = oe * self.layout.obs_per_oe
        return min(self.layout.obs_per_oe, self.ob_count - first)

    def oligos_in_oe(self, oe: int) -> int:
        return self.obs_in_oe(oe) * self.oligos_per_ob

    def blocks_in_oe(self, oe: int) -> int:
        return self.obs_in_oe(oe) * self.layout.data_columns_per_oligo

    def first_block_of_oe(self, oe: int) -> int:
        return oe * self.layout.obs_per_oe * self.layout.data_columns_per_oligo

    def extent_byte_range(self, oe: int) -> tuple[int, int]:
        """Input byte range held by extent `oe` (end clipped to the input)."""
        bpb = self.ecc.data_bits // 8
        start = self.first_block_of_oe(oe) * bpb
        end = min((self.first_block_of_oe(oe) + self.blocks_in_oe(oe)) * bpb,
                  self.input_byte_len)
        return min(start, self.input_byte_len), end

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "input_byte_len": self.input_byte_len,
            "input_crc32": self.input_crc32,
            "constraints": self.constraints.to_dict(),
            "bits_per_motif": self.bits_per_motif,
            "ecc": self.ecc.to_dict(),
            "layout": self.layout.to_dict(),
            "seed": self.seed,
            "geometry": {
                "oligos_per_ob": self.oligos_per_ob,
                "columns_per_oligo": self.columns_per_oligo,
                "blocks_needed": self.blocks_needed,
                "blocks_padded": self.blocks_padded,
                "ob_count": self.ob_count,
                "oe_count": self.oe_count,
                "payload_nt_per_oligo": self.payload_nt_per_oligo,
                "total_oligo_count": self.total_oligo_count,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PoolManifest":
        if d.get("version") != MANIFEST_VERSION:
            raise ValueError(f"unsupported manifest version {d.get('version')!r}")
        g = d["geometry"]
        return cls(
            input_byte_len=d["input_byte_len"],
            input_crc32=d["input_crc32"],
            constraints=MotifConstraints.from_dict(d["constraints"]),
            bits_per_motif=d["bits_per_motif"],
            ecc=EccConfig.from_dict(d["ecc"]),
            layout=LayoutParams.from_dict(d["layout"]),
            seed=d["seed"],
            oligos_per_ob=g["oligos_per_ob"],
            columns_per_oligo=g["columns_per_oligo"],
            blocks_needed=g["blocks_needed"],
            blocks_padded=g["blocks_padded"],
            ob_count=g["ob_count"],
            oe_count=g["oe_count"],
            payload_nt_per_oligo=g["payload_nt_per_oligo"],
            total_oligo_count=g["total_oligo_count"],
        )

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "PoolManifest":
        with open(path) as f:
            return cls.from_dict(json.load(f))


def generate_primers(
    count: int, primer_len: int, seed: int, min_pairwise_dist: int | None = None
) -> list[tuple[str, str]]:
    """Random primer pairs: constraint-valid, mutually distant.

    Rejection-sampled so every primer keeps homopolymer runs <= 2 and GC in
    [0.25, 0.75], and all primers (left and right pooled) stay at pairwise
    edit distance >= ceil(primer_len / 3) unless overridden.
    """
    if min_pairwise_dist is None:
        min_pairwise_dist = math.ceil(primer_len / 3)
    rules = MotifConstraints(primer_len, 2, 0.25, 0.75)
    rng = Stream(derive_seed(seed, 0x9A13E5))
    chosen: list[np.ndarray] = []
    guard = 0
    while len(chosen) < 2 * count:
        guard += 1
        if guard > 200000:
            raise RuntimeError("primer sampling did not converge")
        codes = np.array([rng.randrange(4) for _ in range(primer_len)], dtype=np.uint8)
        seq = codes_to_seq(codes)
        if not validate_motif(rules, seq):
            continue
        if any(
            edit_distance_banded(codes, prev, min_pairwise_dist)
            < min_pairwise_dist
            for prev in chosen
        ):
            continue
        chosen.append(codes)
    return [
        (codes_to_seq(chosen[2 * i]), codes_to_seq(chosen[2 * i + 1]))
        for i in range(count)
    ]


def plan_layout(
    input_byte_len: int,
    params: LayoutParams,
    ecc_config: EccConfig,
    dictionary: MotifDictionary,
    seed: int = 0,
    input_crc32: int = 0,
) -> PoolManifest:
    """Compute the complete pool geometry and fill the manifest."""
    if input_byte_len <= 0:
        raise ValueError("zero-length input")
    if ecc_config.data_bits % 8:
        raise ValueError("data_bits must be a whole number of bytes")
    codec = build_codec(ecc_config, dictionary.bits_per_motif)
    input_bits = input_byte_len * 8
    blocks_needed = math.ceil(input_bits / ecc_config.data_bits)
    dc = params.data_columns_per_oligo
    ob_count = math.ceil(blocks_needed / dc)
    blocks_padded = ob_count * dc
    oe_count = math.ceil(ob_count / params.obs_per_oe)
    oligos_per_ob = codec.n_symbols
    index_space = oligos_per_ob * min(params.obs_per_oe, ob_count)
    if index_space > (1 << dictionary.bits_per_motif):
        raise ValueError(
            f"extent holds {index_space} oligos but the index motif addresses "
            f"only {1 << dictionary.bits_per_motif}"
        )
    if len(params.primer_table) < oe_count:
        raise ValueError(
            f"need {oe_count} primer pairs, table has {len(params.primer_table)}"
        )
    mlen = dictionary.motif_len
    manifest = PoolManifest(
        input_byte_len=input_byte_len,
        input_crc32=input_crc32,
        constraints=dictionary.constraints,
        bits_per_motif=dictionary.bits_per_motif,
        ecc=ecc_config,
        layout=params,
        seed=seed,
        oligos_per_ob=oligos_per_ob,
        columns_per_oligo=1 + dc,
        blocks_needed=blocks_needed,
        blocks_padded=blocks_padded,
        ob_count=ob_count,
        oe_count=oe_count,
        payload_nt_per_oligo=(1 + dc) * mlen,
        total_oligo_count=ob_count * oligos_per_ob,
    )
    return manifest


def _padded_input_bits(data: bytes, manifest: PoolManifest) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    total = manifest.blocks_padded * manifest.ecc.data_bits
    out = np.zeros(total, dtype=np.uint8)
    out[: len(bits)] = bits
    return out


def _encode_block_symbols(
    bits: np.ndarray, b: int, manifest: PoolManifest, codec
) -> np.ndarray:
    db = manifest.ecc.data_bits
    chunk = randomize_block(bits[b * db : (b + 1) * db], b, manifest.seed)
    return codec.encode_to_symbols(chunk)


def _all_block_symbols(
    data: bytes, manifest: PoolManifest, codec, threads: int = 1
) -> np.ndarray:
    """(blocks_padded, n_symbols) coded symbol values for every block."""
    bits = _padded_input_bits(data, manifest)
    blocks = range(manifest.blocks_padded)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(
                pool.map(lambda b: _encode_block_symbols(bits, b, manifest, codec), blocks)
            )
    else:
        cols = [_encode_block_symbols(bits, b, manifest, codec) for b in blocks]
    return np.stack(cols)


def encode_pool(
    data: bytes,
    manifest: PoolManifest,
    dictionary: MotifDictionary,
    threads: int = 1,
) -> list[OligoRecord]:
    """Columnar encoder: block b fills column 1 + (b mod dc) of OB b // dc."""
    if manifest.layout.layout_mode != COLUMNAR:
        raise ValueError("manifest is not columnar")
    codec = build_codec(manifest.ecc, dictionary.bits_per_motif)
    symbols = _all_block_symbols(data, manifest, codec, threads)
    dc = manifest.layout.data_columns_per_oligo
    n_rows = manifest.oligos_per_ob
    mlen = dictionary.motif_len
    pool: list[OligoRecord] = []
    for ob in range(manifest.ob_count):
        oe = ob // manifest.layout.obs_per_oe
        ob_local = ob % manifest.layout.obs_per_oe
        left, right = manifest.layout.primer_table[oe]
        ordinals = ob_local * n_rows + np.arange(n_rows, dtype=np.int64)
        cols = [dictionary.unrank_values(ordinals)]
        for col in range(dc):
            cols.append(dictionary.unrank_values(symbols[ob * dc + col]))
        oligo_codes = np.concatenate(cols, axis=1)  # (n_rows, (1+dc)*mlen)
        for row in range(n_rows):
            pool.append(
                OligoRecord(
                    oe=oe,
                    ob=ob,
                    row=row,
                    payload=codes_to_seq(oligo_codes[row]),
                    left_primer=left,
                    right_primer=right,
                )
            )
    return pool


def encode_pool_rowwise(
    data: bytes,
    manifest: PoolManifest,
    dictionary: MotifDictionary,
    threads: int = 1,
) -> list[OligoRecord]:
    """Row-based baseline: block symbols run consecutively along oligos."""
    if manifest.layout.layout_mode != ROW_BASED:
        raise ValueError("manifest is not row_based")
    codec = build_codec(manifest.ecc, dictionary.bits_per_motif)
    symbols = _all_block_symbols(data, manifest, codec, threads)
    dc = manifest.layout.data_columns_per_oligo
    n_rows = manifest.oligos_per_ob
    pool: list[OligoRecord] = []
    for oe in range(manifest.oe_count):
        first_block = manifest.first_block_of_oe(oe)
        blocks = manifest.blocks_in_oe(oe)
        stream = symbols[first_block : first_block + blocks].reshape(-1)
        oligo_syms = stream.reshape(-1, dc)
        n_oligos = len(oligo_syms)
        left, right = manifest.layout.primer_table[oe]
        ordinals = np.arange(n_oligos, dtype=np.int64)
        idx_codes = dictionary.unrank_values(ordinals)
        data_codes = dictionary.unrank_values(oligo_syms.reshape(-1)).reshape(
            n_oligos, -1
        )
        all_codes = np.concatenate([idx_codes, data_codes], axis=1)
        for q in range(n_oligos):
            pool.append(
                OligoRecord(
                    oe=oe,
                    ob=oe * manifest.layout.obs_per_oe + q // n_rows,
                    row=q % n_rows,
                    payload=codes_to_seq(all_codes[q]),
                    left_primer=left,
                    right_primer=right,
                )
            )
    return pool


def crc32(data: bytes) -> int:
    return zlib.crc32(data) & 0xFFFFFFFF
