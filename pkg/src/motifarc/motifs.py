"""Constraint-valid nucleotide motifs: counting, ranking and unranking.

A motif is a fixed-length word over A/C/G/T restricted by a maximum
homopolymer run length and inclusive GC-content bounds. Valid motifs are
ordered lexicographically (A < C < G < T) and mapped to integers, giving
the payload alphabet for the oligo encoder. Small dictionaries can be
materialized; large ones answer rank/unrank queries from a
completion-count table without ever enumerating (the table that counts
valid suffixes from a given position/run/GC state).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

ALPHABET = "ACGT"
_CODE = {c: i for i, c in enumerate(ALPHABET)}
_IS_GC = (0, 1, 1, 0)  # A, C, G, T

SEQ_TO_CODE = np.full(256, 255, dtype=np.uint8)
for _c, _i in _CODE.items():
    SEQ_TO_CODE[ord(_c)] = _i
    SEQ_TO_CODE[ord(_c.lower())] = _i


def seq_to_codes(seq: str) -> np.ndarray:
    """ASCII nucleotides -> uint8 codes 0..3 (raises on anything else)."""
    raw = np.frombuffer(seq.encode("ascii"), dtype=np.uint8)
    codes = SEQ_TO_CODE[raw]
    if codes.max(initial=0) > 3:
        raise ValueError(f"non-ACGT character in sequence: {seq!r}")
    return codes


def codes_to_seq(codes: np.ndarray) -> str:
    lut = np.frombuffer(ALPHABET.encode(), dtype=np.uint8)
    return lut[np.asarray(codes, dtype=np.uint8)].tobytes().decode("ascii")


@dataclass(frozen=True)
class MotifConstraints:
    """Biological validity rules for one motif."""

    motif_len: int = 8
    max_run: int = 2
    gc_min: float = 0.25
    gc_max: float = 0.75

    def __post_init__(self):
        if self.motif_len < 1:
            raise ValueError("motif_len must be >= 1")
        if not 1 <= self.max_run <= self.motif_len:
            raise ValueError("max_run must be in [1, motif_len]")
        if not 0.0 <= self.gc_min <= self.gc_max <= 1.0:
            raise ValueError("need 0 <= gc_min <= gc_max <= 1")

    @property
    def gc_lo_count(self) -> int:
        return math.ceil(self.gc_min * self.motif_len - 1e-9)

    @property
    def gc_hi_count(self) -> int:
        return math.floor(self.gc_max * self.motif_len + 1e-9)

    def to_dict(self) -> dict:
        return {
            "motif_len": self.motif_len,
            "max_run": self.max_run,
            "gc_min": self.gc_min,
            "gc_max": self.gc_max,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MotifConstraints":
        return cls(d["motif_len"], d["max_run"], d["gc_min"], d["gc_max"])


def validate_motif(constraints: MotifConstraints, motif: str) -> bool:
    """True iff length, homopolymer-run and GC rules all hold."""
    if len(motif) != constraints.motif_len:
        return False
    run = 1
    gc = 0
    prev = ""
    for ch in motif:
        if ch not in _CODE:
            return False
        if ch == prev:
            run += 1
            if run > constraints.max_run:
                return False
        else:
            run = 1
        if ch in "CG":
            gc += 1
        prev = ch
    return constraints.gc_lo_count <= gc <= constraints.gc_hi_count


def _completion_table(c: MotifConstraints) -> np.ndarray:
    """T[pos, last, run, gc] = number of valid suffixes of length L-pos.

    `last`/`run`/`gc` describe the prefix already emitted; run is clamped
    to max_run (a state that already exceeded it is simply unreachable).
    """
    L, R = c.motif_len, c.max_run
    lo, hi = c.gc_lo_count, c.gc_hi_count
    T = np.zeros((L + 1, 4, R + 1, L + 2), dtype=np.int64)
    gc_axis = np.arange(L + 2)
    ok = (gc_axis >= lo) & (gc_axis <= hi)
    T[L, :, :, :] = ok[None, None, :]
    for pos in range(L - 1, 0, -1):
        for last in range(4):
            for run in range(1, R + 1):
                for gc in range(0, pos + 1):
                    total = 0
                    for nxt in range(4):
                        g2 = gc + _IS_GC[nxt]
                        if nxt == last:
                            if run + 1 <= R:
                                total += T[pos + 1, nxt, run + 1, g2]
                        else:
                            total += T[pos + 1, nxt, 1, g2]
                    T[pos, last, run, gc] = total
    return T


def count_valid(constraints: MotifConstraints) -> int:
    """Exact number of valid motifs, by dynamic programming (no enumeration)."""
    T = _completion_table(constraints)
    return int(sum(T[1, c, 1, _IS_GC[c]] for c in range(4)))


class MotifDictionary:
    """Bijection between integers [0, capacity) and valid motifs.

    mode "computed" walks the completion table per query (vectorizable);
    mode "materialized" enumerates and stores the full sorted list. Both
    give identical ranks. bits_per_motif caps the payload value range at
    2^bits <= capacity; ranks at or above the cap decode as invalid so the
    downstream error-control layer sees them as erasures.
    """

    MATERIALIZE_MAX_LEN = 10

    def __init__(
        self,
        constraints: MotifConstraints,
        bits_per_motif: int | None = None,
        mode: str = "auto",
    ):
        self.constraints = constraints
        L = constraints.motif_len
        self._table = _completion_table(constraints)
        self.capacity = int(sum(self._table[1, c, 1, _IS_GC[c]] for c in range(4)))
        if self.capacity == 0:
            raise ValueError("constraints admit no valid motif")
        max_bits = int(self.capacity).bit_length() - 1
        self.bits_per_motif = max_bits if bits_per_motif is None else bits_per_motif
        if not 1 <= self.bits_per_motif <= max_bits:
            raise ValueError(
                f"bits_per_motif={self.bits_per_motif} needs 2^bits <= capacity "
                f"{self.capacity}"
            )
        if mode == "auto":
            mode = "materialized" if L <= self.MATERIALIZE_MAX_LEN else "computed"
        if mode not in ("materialized", "computed"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self._motifs: np.ndarray | None = None
        self._keys: np.ndarray | None = None
        if mode == "materialized":
            self._materialize()

    @property
    def motif_len(self) -> int:
        return self.constraints.motif_len

    @property
    def density(self) -> float:
        """Payload bits per nucleotide."""
        return self.bits_per_motif / self.motif_len

    def _materialize(self) -> None:
        c = self.constraints
        motifs = [
            m
            for m in ("".join(p) for p in product(ALPHABET, repeat=c.motif_len))
            if validate_motif(c, m)
        ]
        rows = [[_CODE[ch] for ch in m] for m in motifs]
        self._motifs = np.array(rows, dtype=np.uint8).reshape(-1, c.motif_len)
        if len(self._motifs) != self.capacity:
            raise AssertionError("enumeration disagrees with DP count")
        self._keys = self._pack(self._motifs)

    @staticmethod
    def _pack(codes: np.ndarray) -> np.ndarray:
        """Base-4 packing of motif codes; preserves lexicographic order."""
        key = np.zeros(len(codes), dtype=np.int64)
        for j in range(codes.shape[1]):
            key = key * 4 + codes[:, j]
        return key

    # scalar API ---------------------------------------------------------

    def unrank(self, value: int) -> str:
        """The value-th valid motif in A<C<G<T lexicographic order."""
        if not 0 <= value < self.capacity:
            raise ValueError(f"rank {value} out of range [0, {self.capacity})")
        return codes_to_seq(self.unrank_values(np.array([value], dtype=np.int64))[0])

    def rank(self, motif: str, payload_only: bool = True) -> int | None:
        """Rank of `motif`, or None if invalid (or beyond the payload cap)."""
        if len(motif) != self.motif_len:
            raise ValueError(
                f"motif length {len(motif)} != motif_len {self.motif_len}"
            )
        try:
            codes = seq_to_codes(motif)
        except ValueError:
            return None
        r = int(self.rank_codes(codes.reshape(1, -1), payload_only=payload_only)[0])
        return None if r < 0 else r

    # vectorized API ------------------------------------------------------

    def unrank_values(self, values: np.ndarray) -> np.ndarray:
        """(N,) ranks -> (N, motif_len) uint8 codes."""
        values = np.asarray(values, dtype=np.int64)
        if values.size and (values.min() < 0 or values.max() >= self.capacity):
            raise ValueError("rank out of range")
        if self._motifs is not None:
            return self._motifs[values]
        return self._unrank_walk(values)

    def rank_codes(self, codes: np.ndarray, payload_only: bool = True) -> np.ndarray:
        """(N, motif_len) codes -> (N,) int64 ranks, -1 where invalid."""
        codes = np.asarray(codes, dtype=np.uint8)
        if codes.ndim != 2 or codes.shape[1] != self.motif_len:
            raise ValueError("codes must be (N, motif_len)")
        if self._keys is not None:
            keys = self._pack(codes)
            pos = np.searchsorted(self._keys, keys)
            pos_c = np.minimum(pos, len(self._keys) - 1)
            ranks = np.where(self._keys[pos_c] == keys, pos_c, -1).astype(np.int64)
        else:
            ranks = self._rank_walk(codes)
        if payload_only:
            ranks[ranks >= (1 << self.bits_per_motif)] = -1
        return ranks

    def _unrank_walk(self, values: np.ndarray) -> np.ndarray:
        T = self._table
        L, R = self.motif_len, self.constraints.max_run
        n = len(values)
        v = values.copy()
        out = np.zeros((n, L), dtype=np.uint8)
        last = np.full(n, -1, dtype=np.int64)
        run = np.zeros(n, dtype=np.int64)
        gc = np.zeros(n, dtype=np.int64)
        for pos in range(L):
            chosen = np.full(n, -1, dtype=np.int64)
            for c in range(4):
                same = last == c
                run_c = np.where(same, run + 1, 1)
                feasible = run_c <= R
                g2 = gc + _IS_GC[c]
                cnt = np.where(feasible, T[pos + 1, c, np.minimum(run_c, R), g2], 0)
                pick = (chosen < 0) & (v < cnt)
                chosen[pick] = c
                v = np.where((chosen < 0), v - cnt, v)
            out[:, pos] = chosen
            run = np.where(last == chosen, run + 1, 1)
            gc = gc + np.take(np.array(_IS_GC), chosen)
            last = chosen
        return out

    def _rank_walk(self, codes: np.ndarray) -> np.ndarray:
        T = self._table
        L, R = self.motif_len, self.constraints.max_run
        lo, hi = self.constraints.gc_lo_count, self.constraints.gc_hi_count
        n = len(codes)
        rank = np.zeros(n, dtype=np.int64)
        valid = np.ones(n, dtype=bool)
        last = np.full(n, -1, dtype=np.int64)
        run = np.zeros(n, dtype=np.int64)
        gc = np.zeros(n, dtype=np.int64)
        for pos in range(L):
            cur = codes[:, pos].astype(np.int64)
            for c in range(4):
                below = cur > c
                same = last == c
                run_c = np.where(same, run + 1, 1)
                feasible = run_c <= R
                g2 = gc + _IS_GC[c]
                cnt = np.where(feasible, T[pos + 1, c, np.minimum(run_c, R), g2], 0)
                rank += np.where(below & valid, cnt, 0)
            run_new = np.where(last == cur, run + 1, 1)
            valid &= run_new <= R
            run = np.minimum(run_new, R)
            gc = gc + np.take(np.array(_IS_GC), cur)
            last = cur
        valid &= (gc >= lo) & (gc <= hi)
        rank[~valid] = -1
        return rank

    def to_dict(self) -> dict:
        return {
            "constraints": self.constraints.to_dict(),
            "bits_per_motif": self.bits_per_motif,
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MotifDictionary":
        return cls(
            MotifConstraints.from_dict(d["constraints"]),
            d["bits_per_motif"],
            d.get("mode", "auto"),
        )


def homopolymer_reading_study(motif_len: int = 16) -> dict[str, int]:
    """Counts for the natural readings of 'at most two homopolymer repeats'.

    Returned keys: run length capped at 2; total adjacent-equal pairs
    capped at 2; run length capped at 3. All with GC in [0.25, 0.75].
    """
    base = dict(motif_len=motif_len, gc_min=0.25, gc_max=0.75)
    out = {
        "max_run_2": count_valid(MotifConstraints(max_run=2, **base)),
        "max_run_3": count_valid(MotifConstraints(max_run=3, **base)),
    }
    out["adjacent_pairs_le_2"] = _count_pair_budget(
        motif_len,
        2,
        MotifConstraints(max_run=motif_len, **base),
    )
    return out


def _count_pair_budget(L: int, max_pairs: int, c: MotifConstraints) -> int:
    """Strings with at most `max_pairs` positions where s[i] == s[i-1]."""
    lo, hi = c.gc_lo_count, c.gc_hi_count
    cur: dict[tuple[int, int, int], int] = {}
    for ch in range(4):
        cur[(ch, 0, _IS_GC[ch])] = cur.get((ch, 0, _IS_GC[ch]), 0) + 1
    for _ in range(L - 1):
        nxt: dict[tuple[int, int, int], int] = {}
        for (last, pairs, gc), w in cur.items():
            for ch in range(4):
                p2 = pairs + (1 if ch == last else 0)
                if p2 > max_pairs:
                    continue
                key = (ch, p2, gc + _IS_GC[ch])
                nxt[key] = nxt.get(key, 0) + w
        cur = nxt
    return sum(w for (ch, p, gc), w in cur.items() if lo <= gc <= hi)
