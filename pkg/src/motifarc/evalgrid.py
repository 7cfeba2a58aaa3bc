"""Process-parallel minimum-coverage grid search.

The scan is the same ascending, per-error-rate search as
metrics.min_coverage_search, but each (error_rate, coverage, trial) cell
runs in a forked worker so the whole grid saturates the machine. Cell
outcomes depend only on their derived seeds, so the result is identical
for any worker count, including the inline single-process path.
"""

from __future__ import annotations

import os
from multiprocessing import get_context

from .channel import ChannelParams, sample_reads
from .decoding import DecodeParams, decode_pool
from .layout import PoolManifest
from .metrics import CoverageCell, MinCoverageResult, trial_seed
from .motifs import MotifDictionary
from .sequences import OligoRecord

_CTX: dict = {}  # populated before the fork; workers inherit it read-only


def _run_cell(task: tuple[int, int, int]) -> tuple[int, int, int, bool, int]:
    rate_idx, coverage, trial = task
    pool: list[OligoRecord] = _CTX["pool"]
    manifest: PoolManifest = _CTX["manifest"]
    dictionary: MotifDictionary = _CTX["dictionary"]
    decode_params: DecodeParams = _CTX["decode_params"]
    rates: list[float] = _CTX["rates"]
    params = ChannelParams(
        coverage=coverage,
        error_rate=rates[rate_idx],
        seed=trial_seed(_CTX["seed"], rate_idx, coverage, trial),
    )
    reads = sample_reads(pool, params)
    _, report = decode_pool(
        reads,
        manifest,
        dictionary,
        decode_params,
        use_oracle_clusters=True,
        threads=1,
        fail_fast=True,
    )
    return rate_idx, coverage, trial, bool(report.crc_ok), report.blocks_failed


def coverage_grid_search(
    pool: list[OligoRecord],
    manifest: PoolManifest,
    dictionary: MotifDictionary,
    decode_params: DecodeParams,
    error_rates: list[float],
    seed: int,
    max_coverage: int = 30,
    trials: int = 3,
    processes: int = 1,
    start_coverage: int = 1,
) -> MinCoverageResult:
    """Smallest coverage per error rate where every seeded trial is CRC-exact."""
    rates = list(error_rates)
    _CTX.clear()
    _CTX.update(
        pool=pool,
        manifest=manifest,
        dictionary=dictionary,
        decode_params=decode_params,
        rates=rates,
        seed=seed,
    )
    result = MinCoverageResult(rates, {r: None for r in rates})
    pending = set(range(len(rates)))
    proc_pool = None
    if processes > 1 and hasattr(os, "fork"):
        proc_pool = get_context("fork").Pool(processes)

    def run_wave(tasks):
        if proc_pool is not None:
            return proc_pool.map(_run_cell, tasks)
        return [_run_cell(t) for t in tasks]

    try:
        for coverage in range(start_coverage, max_coverage + 1):
            if not pending:
                break
            # trial waves: one failed trial settles the level, so later
            # trials only run for rates still unbeaten at this coverage
            alive = sorted(pending)
            for t in range(trials):
                if not alive:
                    break
                outcomes = run_wave([(ri, coverage, t) for ri in alive])
                nxt = []
                for ri, cov, trial, okay, failed in outcomes:
                    result.grid.append(
                        CoverageCell(rates[ri], coverage, trial, okay, failed)
                    )
                    if okay:
                        nxt.append(ri)
                alive = nxt
                if t == trials - 1:
                    for ri in alive:
                        result.min_coverage[rates[ri]] = coverage
                        pending.discard(ri)
    finally:
        if proc_pool is not None:
            proc_pool.close()
            proc_pool.join()
        _CTX.clear()
    return result
