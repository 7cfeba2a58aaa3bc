"""Error-control layer: block randomization plus RS/LDPC codecs.

One coded block is the unit of recovery and occupies one column of an
oligo-block. The codec interface speaks motif values: encode turns a
block of payload bits into a column of symbol values, decode accepts the
column back with per-symbol erasure flags and either returns the payload
bits together with the corrected symbol column (feedback for realignment)
or reports failure explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf import PRIMITIVE_POLYS
from .ldpc import LdpcCode
from .prng import GOLDEN, MASK64, splitmix_words
from .rs import ReedSolomon

RS = "rs"
LDPC = "ldpc"


def randomize_block(bits: np.ndarray, block_index: int, seed: int) -> np.ndarray:
    """XOR bits with the keystream of the block's substream; self-inverse."""
    bits = np.asarray(bits, dtype=np.uint8)
    nwords = (len(bits) + 63) // 64
    if nwords == 0:
        return bits.copy()
    ks_seed = (seed ^ (((block_index + 1) * GOLDEN) & MASK64)) & MASK64
    words = splitmix_words(ks_seed, nwords)
    key_bits = np.unpackbits(words.astype(">u8").view(np.uint8))[: len(bits)]
    return bits ^ key_bits


@dataclass
class SymbolVector:
    """A column of symbol values with per-symbol erasure flags."""

    values: np.ndarray
    erased: np.ndarray

    def __post_init__(self):
        if len(self.values) != len(self.erased):
            raise ValueError("values and erasure flags must have equal length")


@dataclass
class EccConfig:
    scheme: str = RS
    data_bits: int = 10800
    redundancy: float = 1.0 / 9.0
    symbol_bits: int = 12
    ldpc_var_degree: int = 3
    ldpc_max_iters: int = 60
    construction_seed: int = 0x5EED_ECC

    def __post_init__(self):
        if self.scheme not in (RS, LDPC):
            raise ValueError(f"unknown ECC scheme {self.scheme!r}")
        if not 0 < self.redundancy < 1:
            raise ValueError("redundancy must be in (0, 1)")
        if self.scheme == RS and self.data_bits % self.symbol_bits:
            raise ValueError("data_bits must be divisible by symbol_bits for RS")

    def to_dict(self) -> dict:
        d = {
            "scheme": self.scheme,
            "data_bits": self.data_bits,
            "redundancy": self.redundancy,
            "symbol_bits": self.symbol_bits,
        }
        if self.scheme == RS:
            d["field_poly"] = PRIMITIVE_POLYS[self.symbol_bits]
        else:
            d["ldpc_var_degree"] = self.ldpc_var_degree
            d["ldpc_max_iters"] = self.ldpc_max_iters
            d["construction_seed"] = self.construction_seed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EccConfig":
        return cls(
            scheme=d["scheme"],
            data_bits=d["data_bits"],
            redundancy=d["redundancy"],
            symbol_bits=d.get("symbol_bits", 12),
            ldpc_var_degree=d.get("ldpc_var_degree", 3),
            ldpc_max_iters=d.get("ldpc_max_iters", 60),
            construction_seed=d.get("construction_seed", 0x5EED_ECC),
        )


def bits_to_values(bits: np.ndarray, width: int) -> np.ndarray:
    """Group bits (MSB first) into integers of `width` bits."""
    bits = np.asarray(bits, dtype=np.int64)
    if len(bits) % width:
        raise ValueError("bit count not divisible by symbol width")
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    return bits.reshape(-1, width) @ weights


def values_to_bits(values: np.ndarray, width: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


class RsBlockCodec:
    """One RS codeword per column; one motif carries one RS symbol."""

    def __init__(self, config: EccConfig, bits_per_motif: int):
        if config.symbol_bits != bits_per_motif:
            raise ValueError(
                "RS symbol_bits must equal bits_per_motif so an oligo dropout "
                "is exactly one symbol erasure per column"
            )
        self.config = config
        k = config.data_bits // config.symbol_bits
        nsym = round(k * config.redundancy)
        if nsym < 1:
            raise ValueError("redundancy too small: no parity symbols")
        self.rs = ReedSolomon(config.symbol_bits, k + nsym, k)
        self.n_symbols = self.rs.n
        self.data_bits = config.data_bits

    def encode_to_symbols(self, bits: np.ndarray) -> np.ndarray:
        if len(bits) != self.data_bits:
            raise ValueError(f"expected {self.data_bits} bits")
        return self.rs.encode(bits_to_values(bits, self.config.symbol_bits))

    def decode_symbols(
        self, values: np.ndarray, erased: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray] | None:
        out = self.rs.decode(np.where(erased, 0, values), erased)
        if out is None:
            return None
        data_syms, codeword = out
        return values_to_bits(data_syms, self.config.symbol_bits), codeword


class LdpcBlockCodec:
    """One LDPC codeword per column; a motif carries bits_per_motif code bits."""

    def __init__(self, config: EccConfig, bits_per_motif: int):
        self.config = config
        self.bits_per_motif = bits_per_motif
        k = config.data_bits
        m = int(np.ceil(k * config.redundancy))
        # round codeword length up to a whole number of motifs
        total = k + m
        rem = total % bits_per_motif
        if rem:
            m += bits_per_motif - rem
        self.code = LdpcCode(k, m, config.construction_seed, config.ldpc_var_degree)
        self.n_symbols = self.code.n // bits_per_motif
        self.data_bits = k

    def encode_to_symbols(self, bits: np.ndarray) -> np.ndarray:
        if len(bits) != self.data_bits:
            raise ValueError(f"expected {self.data_bits} bits")
        return bits_to_values(self.code.encode(bits), self.bits_per_motif)

    def decode_symbols(
        self, values: np.ndarray, erased: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray] | None:
        bits = values_to_bits(np.where(erased, 0, values), self.bits_per_motif)
        bit_erased = np.repeat(np.asarray(erased, dtype=bool), self.bits_per_motif)
        out = self.code.decode(bits, bit_erased, self.config.ldpc_max_iters)
        if out is None:
            return None
        data_bits, codeword = out
        return data_bits, bits_to_values(codeword, self.bits_per_motif)


def build_codec(config: EccConfig, bits_per_motif: int):
    if config.scheme == RS:
        return RsBlockCodec(config, bits_per_motif)
    return LdpcBlockCodec(config, bits_per_motif)


def ecc_encode(config: EccConfig, bits: np.ndarray, bits_per_motif: int | None = None) -> SymbolVector:
    """Single-block convenience wrapper: encode one block to a SymbolVector."""
    codec = build_codec(config, bits_per_motif or config.symbol_bits)
    vals = codec.encode_to_symbols(np.asarray(bits, dtype=np.uint8))
    return SymbolVector(vals, np.zeros(len(vals), dtype=bool))


def ecc_decode(
    config: EccConfig, received: SymbolVector, bits_per_motif: int | None = None
) -> np.ndarray | None:
    """Single-block convenience wrapper: decode a SymbolVector to payload bits."""
    codec = build_codec(config, bits_per_motif or config.symbol_bits)
    out = codec.decode_symbols(received.values, received.erased)
    return None if out is None else out[0]
