"""Synthesis/PCR/sequencing channel simulation.

Copy counts follow a per-oligo lognormal amplification factor (sigma = 0
turns bias off), each copy is corrupted by a truncated-normal number of
uniformly placed substitution/insertion/deletion edits, and extent
amplification adds a configurable fraction of improperly bound reads.
Every oligo owns a substream seeded from splitmix64(seed XOR ordinal), so
read sets are identical regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .motifs import codes_to_seq, seq_to_codes
from .prng import Stream, derive_seed
from .sequences import OligoRecord, ReadRecord, reverse_complement
from ._kernels import corrupt_read

_ALPHA = "ACGT"

# Amplification-skew preset calibrated by sweep so that a 4x-coverage run
# drops roughly 8% of oligos (the dropout regime a biased pool shows at
# minimum workable coverage).
DROPOUT_CALIBRATED_SIGMA = 1.07


@dataclass
class ChannelParams:
    coverage: float = 10.0
    error_rate: float = 0.0
    error_mix: tuple[float, float, float] = (1.0, 1.0, 1.0)  # sub, ins, del
    error_sd_frac: float = 0.5  # sd of the edit-count normal, as mean fraction
    copy_bias_sigma: float = 0.0
    improper_binding_rate: float = 0.0
    emit_reverse_complement: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.coverage <= 0:
            raise ValueError("coverage must be positive")
        if not 0 <= self.error_rate <= 1:
            raise ValueError("error_rate must be in [0, 1]")
        if not 0 <= self.improper_binding_rate < 1:
            raise ValueError("improper_binding_rate must be in [0, 1)")
        if any(w < 0 for w in self.error_mix) or sum(self.error_mix) == 0:
            raise ValueError("error_mix weights must be nonnegative, not all zero")

    def to_dict(self) -> dict:
        return {
            "coverage": self.coverage,
            "error_rate": self.error_rate,
            "error_mix": list(self.error_mix),
            "error_sd_frac": self.error_sd_frac,
            "copy_bias_sigma": self.copy_bias_sigma,
            "improper_binding_rate": self.improper_binding_rate,
            "emit_reverse_complement": self.emit_reverse_complement,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelParams":
        d = dict(d)
        d["error_mix"] = tuple(d.get("error_mix", (1.0, 1.0, 1.0)))
        return cls(**d)


@dataclass
class ChannelStats:
    """Ground-truth edit bookkeeping for closed-loop error metrics."""

    sub: int = 0
    ins: int = 0
    dele: int = 0
    dropouts: int = 0
    per_read_edits: list[int] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.sub + self.ins + self.dele


def inject_errors(
    seq: str, params: ChannelParams, rng: Stream, stats: ChannelStats | None = None
) -> str:
    """Apply a truncated-normal count of uniform random edits, left to right.

    Consumes one state step of `rng` to seed the corruption kernel.
    """
    codes, nsub, nins, ndel = _corrupt_codes(seq_to_codes(seq), params, rng.next_u64())
    if stats is not None:
        stats.sub += nsub
        stats.ins += nins
        stats.dele += ndel
        stats.per_read_edits.append(nsub + nins + ndel)
    return codes_to_seq(codes)


def _corrupt_codes(
    codes: np.ndarray, params: ChannelParams, seed: int
) -> tuple[np.ndarray, int, int, int]:
    wsub, wins, wdel = params.error_mix
    return corrupt_read(
        codes,
        params.error_rate,
        params.error_sd_frac,
        float(wsub),
        float(wins),
        float(wdel),
        seed,
    )


def _copy_counts(
    n_oligos: int, params: ChannelParams, seeds: list[int]
) -> list[int]:
    if params.copy_bias_sigma == 0:
        return [round(params.coverage)] * n_oligos
    weights = [
        Stream(derive_seed(s, 1)).lognormal(params.copy_bias_sigma) for s in seeds
    ]
    mean_w = sum(weights) / len(weights)
    return [round(params.coverage * w / mean_w) for w in weights]


def _emit_copies(
    codes: np.ndarray,
    src: tuple[int, int, int],
    ordinal: int,
    count: int,
    params: ChannelParams,
    stats: ChannelStats | None,
) -> list[ReadRecord]:
    base = derive_seed(params.seed, ordinal)
    reads = []
    for j in range(count):
        copy_seed = derive_seed(base, 100 + j)
        flip = (
            params.emit_reverse_complement
            and Stream(derive_seed(copy_seed, 1)).random() < 0.5
        )
        out, nsub, nins, ndel = _corrupt_codes(codes, params, derive_seed(copy_seed, 2))
        if stats is not None:
            stats.sub += nsub
            stats.ins += nins
            stats.dele += ndel
            stats.per_read_edits.append(nsub + nins + ndel)
        if len(out):
            seq = codes_to_seq(out)
            if flip:
                seq = reverse_complement(seq)
            reads.append(ReadRecord(seq, src))
    return reads


def sample_reads(
    pool: list[OligoRecord],
    params: ChannelParams,
    stats: ChannelStats | None = None,
) -> list[ReadRecord]:
    """Coverage-scaled noisy copies of every oligo, in seeded-shuffle order."""
    seeds = [derive_seed(params.seed, i) for i in range(len(pool))]
    counts = _copy_counts(len(pool), params, seeds)
    reads: list[ReadRecord] = []
    for i, (oligo, count) in enumerate(zip(pool, counts)):
        if count == 0 and stats is not None:
            stats.dropouts += 1
        codes = seq_to_codes(oligo.sequence)
        reads.extend(
            _emit_copies(codes, (oligo.oe, oligo.ob, oligo.row), i, count, params, stats)
        )
    Stream(derive_seed(params.seed, 0x5F0FF1E)).shuffle(reads)
    return reads


def amplify_extent(
    pool: list[OligoRecord],
    target_oe: int,
    params: ChannelParams,
    stats: ChannelStats | None = None,
) -> list[ReadRecord]:
    """PCR selection of one extent, with improper off-target binding.

    Off-target reads split evenly between reads of other extents and
    target reads whose primer regions are scrambled; both are flagged.
    """
    target_ids = [i for i, o in enumerate(pool) if o.oe == target_oe]
    if not target_ids:
        raise ValueError(f"extent {target_oe} not present in pool")
    other_ids = [i for i, o in enumerate(pool) if o.oe != target_oe]
    seeds = [derive_seed(params.seed, i) for i in target_ids]
    counts = _copy_counts(len(target_ids), params, seeds)
    reads: list[ReadRecord] = []
    for i, count in zip(target_ids, counts):
        if count == 0 and stats is not None:
            stats.dropouts += 1
        o = pool[i]
        reads.extend(
            _emit_copies(
                seq_to_codes(o.sequence), (o.oe, o.ob, o.row), i, count, params, stats
            )
        )
    n_on = len(reads)
    rate = params.improper_binding_rate
    n_bad = round(n_on * rate / (1.0 - rate)) if rate > 0 else 0
    bad_rng = Stream(derive_seed(params.seed, 0xBAD))
    for j in range(n_bad):
        rng = Stream(derive_seed(params.seed, 0xBAD_0000 + j))
        if other_ids and bad_rng.random() < 0.5:
            src = pool[other_ids[bad_rng.randrange(len(other_ids))]]
            seq = inject_errors(src.sequence, params, rng)
        else:
            src = pool[target_ids[bad_rng.randrange(len(target_ids))]]
            scrambled = (
                _random_bases(len(src.left_primer), rng)
                + src.payload
                + _random_bases(len(src.right_primer), rng)
            )
            seq = inject_errors(scrambled, params, rng)
        if seq:
            reads.append(ReadRecord(seq, (src.oe, src.ob, src.row), improper=True))
    Stream(derive_seed(params.seed, 0x5F0FF1E)).shuffle(reads)
    return reads


def _random_bases(n: int, rng: Stream) -> str:
    return "".join(_ALPHA[rng.randrange(4)] for _ in range(n))
