"""Quantitative evaluation: read/write cost, coverage-bias statistics,
per-position error profiles, and the minimum-coverage search."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .motifs import seq_to_codes
from .prng import derive_seed
from .sequences import OligoRecord, ReadRecord
from ._kernels import align_ops


@dataclass
class CostInputs:
    oligo_count: int
    oligo_len_nt: int
    input_bits: int
    read_nt_total: int | None = None
    coverage: float | None = None

    def __post_init__(self):
        if self.oligo_count <= 0 or self.oligo_len_nt <= 0 or self.input_bits <= 0:
            raise ValueError("cost inputs must be positive")


def write_cost(inputs: CostInputs) -> float:
    """Synthesized nucleotides per stored bit."""
    return inputs.oligo_count * inputs.oligo_len_nt / inputs.input_bits


def read_cost(inputs: CostInputs) -> float:
    """Sequenced nucleotides per recovered bit.

    Uses read_nt_total when given, else the coverage shortcut (valid when
    reads are full oligo copies).
    """
    if inputs.read_nt_total is not None:
        return inputs.read_nt_total / inputs.input_bits
    if inputs.coverage is None:
        raise ValueError("need read_nt_total or coverage")
    return inputs.coverage * write_cost(inputs)


@dataclass
class FractionChangeReport:
    objects: list[str]
    raw_counts: list[int]
    read_counts: list[int]
    p_raw: list[float]
    p_seq: list[float]
    frac_change: list[float]

    @property
    def minimum(self) -> float:
        return min(self.frac_change)

    @property
    def maximum(self) -> float:
        return max(self.frac_change)

    @property
    def mean(self) -> float:
        return sum(self.frac_change) / len(self.frac_change)

    @property
    def std(self) -> float:
        m = self.mean
        return math.sqrt(sum((c - m) ** 2 for c in self.frac_change) / len(self.frac_change))

    def csv_rows(self) -> list[str]:
        rows = ["object,raw_count,read_count,p_raw,p_seq,frac_change"]
        for i, name in enumerate(self.objects):
            rows.append(
                f"{name},{self.raw_counts[i]},{self.read_counts[i]},"
                f"{self.p_raw[i]:.6f},{self.p_seq[i]:.6f},{self.frac_change[i]:.6f}"
            )
        return rows


def population_fraction_change(
    raw_counts: dict[str, int] | Sequence[int],
    read_counts: dict[str, int] | Sequence[int],
) -> FractionChangeReport:
    """Per-object share of the pool before vs after sequencing.

    frac_change = p_seq / p_raw: 1 everywhere means unbiased coverage.
    """
    if isinstance(raw_counts, dict):
        names = list(raw_counts.keys())
        raw = [raw_counts[k] for k in names]
        reads = [read_counts[k] for k in names]
    else:
        raw = list(raw_counts)
        reads = list(read_counts)
        names = [str(i) for i in range(len(raw))]
    if len(raw) != len(reads) or not raw:
        raise ValueError("raw and read counts must be same nonempty length")
    if any(c <= 0 for c in raw):
        raise ValueError("every object needs a positive raw count")
    tot_raw = sum(raw)
    tot_reads = sum(reads)
    if tot_reads <= 0:
        raise ValueError("no reads")
    p_raw = [c / tot_raw for c in raw]
    p_seq = [c / tot_reads for c in reads]
    change = [s / r for r, s in zip(p_raw, p_seq)]
    return FractionChangeReport(names, raw, reads, p_raw, p_seq, change)


@dataclass
class ErrorProfile:
    positions: int
    sub_rates: np.ndarray
    ins_rates: np.ndarray
    del_rates: np.ndarray
    total_edits: int
    sub_total: int
    ins_total: int
    del_total: int
    aligned_reads: int

    def aggregate_rates(self, read_nt: int) -> tuple[float, float, float]:
        return (
            self.sub_total / read_nt,
            self.ins_total / read_nt,
            self.del_total / read_nt,
        )

    def csv_rows(self) -> list[str]:
        rows = ["position,sub_rate,ins_rate,del_rate"]
        for p in range(self.positions):
            rows.append(
                f"{p},{self.sub_rates[p]:.6f},{self.ins_rates[p]:.6f},"
                f"{self.del_rates[p]:.6f}"
            )
        return rows


def error_profile(reads: list[ReadRecord], pool: list[OligoRecord]) -> ErrorProfile:
    """Align each read to its source oligo and count edits per position."""
    by_addr = {(o.oe, o.ob, o.row): o for o in pool}
    max_len = max(len(o.sequence) for o in pool)
    subs = np.zeros(max_len, dtype=np.int64)
    inss = np.zeros(max_len, dtype=np.int64)
    dels = np.zeros(max_len, dtype=np.int64)
    covered = np.zeros(max_len, dtype=np.int64)
    total = 0
    aligned = 0
    for rec in reads:
        if rec.src is None:
            raise ValueError("error profile requires provenance")
        ref = by_addr.get(rec.src)
        if ref is None:
            continue
        ref_codes = seq_to_codes(ref.sequence)
        read_codes = seq_to_codes(rec.sequence)
        n = len(ref_codes)
        total += align_ops(read_codes, ref_codes, subs[:n], inss[:n], dels[:n])
        covered[:n] += 1
        aligned += 1
    with np.errstate(divide="ignore", invalid="ignore"):
        sub_r = np.where(covered > 0, subs / np.maximum(covered, 1), 0.0)
        ins_r = np.where(covered > 0, inss / np.maximum(covered, 1), 0.0)
        del_r = np.where(covered > 0, dels / np.maximum(covered, 1), 0.0)
    return ErrorProfile(
        positions=max_len,
        sub_rates=sub_r,
        ins_rates=ins_r,
        del_rates=del_r,
        total_edits=total,
        sub_total=int(subs.sum()),
        ins_total=int(inss.sum()),
        del_total=int(dels.sum()),
        aligned_reads=aligned,
    )


@dataclass
class CoverageCell:
    error_rate: float
    coverage: int
    trial: int
    recovered: bool
    blocks_failed: int


@dataclass
class MinCoverageResult:
    error_rates: list[float]
    min_coverage: dict[float, int | None]  # None = unbounded in range
    grid: list[CoverageCell] = field(default_factory=list)

    def csv_rows(self) -> list[str]:
        rows = ["error_rate,coverage,trial,recovered,blocks_failed"]
        for cell in self.grid:
            rows.append(
                f"{cell.error_rate},{cell.coverage},{cell.trial},"
                f"{int(cell.recovered)},{cell.blocks_failed}"
            )
        return rows


def min_coverage_search(
    run_trial: Callable[[float, int, int], tuple[bool, int]],
    error_rates: Iterable[float],
    max_coverage: int,
    trials: int = 3,
    threads: int = 1,
    start_coverage: int = 1,
) -> MinCoverageResult:
    """Ascending scan per error rate for the first coverage where every
    seeded trial recovers; success is stochastic so the scan is linear,
    and monotonicity in the error rate is checked by the caller's tests,
    not assumed."""
    rates = list(error_rates)
    result = MinCoverageResult(rates, {r: None for r in rates})
    pending = set(range(len(rates)))
    for coverage in range(start_coverage, max_coverage + 1):
        if not pending:
            break
        # one failed trial settles a level, so later trials only run for
        # rates that are still passing at this coverage
        alive = sorted(pending)
        for t in range(trials):
            if not alive:
                break

            def run(ri):
                okay, failed = run_trial(rates[ri], coverage, t)
                return ri, okay, failed

            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    outcomes = list(pool.map(run, alive))
            else:
                outcomes = [run(ri) for ri in alive]
            nxt = []
            for ri, okay, failed in outcomes:
                result.grid.append(CoverageCell(rates[ri], coverage, t, okay, failed))
                if okay:
                    nxt.append(ri)
            alive = nxt
            if t == trials - 1:
                for ri in alive:
                    result.min_coverage[rates[ri]] = coverage
                    pending.discard(ri)
    return result


def trial_seed(base_seed: int, rate_index: int, coverage: int, trial: int) -> int:
    """Deterministic per-cell channel seed for the coverage grid."""
    return derive_seed(
        derive_seed(base_seed, rate_index * 1_000_003 + coverage), trial
    )
