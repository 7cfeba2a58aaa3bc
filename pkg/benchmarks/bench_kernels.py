#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the hot decode-path operations on synthetic workloads and prints a
per-kernel timing table with speedups. Invoke from the repo root:

    python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import random
import time

import numpy as np

from motifarc._kernels import pyfallback as pure

try:
    from motifarc._kernels import _ckern as compiled
except ImportError:
    compiled = None


def rand_codes(rng, n):
    return np.array([rng.randrange(4) for _ in range(n)], dtype=np.uint8)


def make_cluster_case(rng, n_reads, read_len, cov):
    reads = [rand_codes(rng, read_len) for _ in range(n_reads)]
    flat = np.concatenate(reads).astype(np.uint8)
    ptr = np.zeros(n_reads + 1, dtype=np.int64)
    for i, r in enumerate(reads):
        ptr[i + 1] = ptr[i] + len(r)
    n_clusters = max(1, n_reads // cov)
    members = np.arange(n_reads, dtype=np.int64)
    cptr = np.linspace(0, n_reads, n_clusters + 1).astype(np.int64)
    offsets = np.full(n_reads, 24, dtype=np.int64)
    return flat, ptr, members, cptr, offsets, n_clusters


def time_fn(fn, repeat):
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def bench(quick: bool):
    rng = random.Random(0)
    scale = 0.2 if quick else 1.0
    rows = []

    # pairwise edit distance, read-sized
    a, b = rand_codes(rng, 150), rand_codes(rng, 150)
    rows.append(("edit_distance 150x150", 50,
                 lambda k: lambda: k.edit_distance(a, b)))

    # banded verification, clustering-sized
    rows.append(("edit_distance_banded 150 band=22", 200,
                 lambda k: lambda: k.edit_distance_banded(a, b, 22)))

    # primer matching
    primer = rand_codes(rng, 20)
    read = rand_codes(rng, 176)
    rows.append(("prefix_match_cost primer=20", 2000,
                 lambda k: lambda: k.prefix_match_cost(primer, read, 3)))

    # realignment
    motif = rand_codes(rng, 8)
    rows.append(("realign motif=8 slack=3", 2000,
                 lambda k: lambda: k.realign(read, 60, motif, 3, 4)))

    # one consensus + realign column over a coverage-8 workload
    n_reads = int(8000 * scale)
    flat, ptr, members, cptr, offsets, n_clusters = make_cluster_case(
        rng, n_reads, 136, 8
    )
    motifs = np.zeros((n_clusters, 8), dtype=np.uint8)
    ok = np.zeros(n_clusters, dtype=np.uint8)

    def consensus_with(k):
        def run():
            k.consensus_columns(flat, ptr, members, cptr, offsets, 8, 3, motifs, ok)
        return run

    rows.append((f"consensus_columns {n_reads} reads", 3, consensus_with))

    def realign_with(k):
        def run():
            off = offsets.copy()
            k.realign_columns(flat, ptr, members, cptr, off, motifs, ok, 3, 4)
        return run

    rows.append((f"realign_columns {n_reads} reads", 3, realign_with))

    # CGK embedding batch
    n_emb = int(4000 * scale)
    eflat, eptr, *_ = make_cluster_case(rng, n_emb, 136, 8)
    rbits = np.array(
        [[rng.randrange(2) for _ in range(4)] for _ in range(3 * 136)], dtype=np.uint8
    )
    out = np.zeros((n_emb, 3 * 136), dtype=np.uint8)

    def cgk_with(k):
        def run():
            k.cgk_embed_batch(eflat, eptr, rbits, out)
        return run

    rows.append((f"cgk_embed_batch {n_emb} reads", 3, cgk_with))

    # channel corruption
    oligo = rand_codes(rng, 176)

    def corrupt_with(k):
        def run():
            for s in range(200):
                k.corrupt_read(oligo, 0.05, 0.5, 1.0, 1.0, 1.0, s)
        return run

    rows.append(("corrupt_read x200 rate=5%", 5, corrupt_with))

    # error-profile alignment
    ref = rand_codes(rng, 176)
    noisy = np.concatenate([ref[:90], ref[91:]])
    sc = np.zeros(176, dtype=np.int64)

    def align_with(k):
        def run():
            k.align_ops(noisy, ref, sc, sc.copy(), sc.copy())
        return run

    rows.append(("align_ops 176x175", 50, align_with))

    name_w = max(len(r[0]) for r in rows)
    header = f"{'kernel':<{name_w}}  {'python':>12}  {'compiled':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, repeat, make in rows:
        t_py = time_fn(make(pure), max(1, int(repeat * (0.2 if quick else 1))))
        if compiled is not None:
            t_c = time_fn(make(compiled), repeat * 5)
            speed = t_py / t_c if t_c > 0 else float("inf")
            print(f"{name:<{name_w}}  {t_py*1e3:>10.3f}ms  {t_c*1e3:>10.3f}ms  {speed:>7.1f}x")
        else:
            print(f"{name:<{name_w}}  {t_py*1e3:>10.3f}ms  {'n/a':>12}  {'n/a':>8}")
    if compiled is None:
        print("\ncompiled extension not built; run `pip install -e .` first")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    bench(parser.parse_args().quick)
