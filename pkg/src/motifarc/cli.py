"""Command-line interface tying the pipeline together.

Exit codes: 0 success, 1 usage or configuration error, 2 recoverable data
error (decode finished but the output failed its integrity check).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .channel import amplify_extent, sample_reads
from .config import RunConfig, write_sidecar
from .decoding import decode_pool
from .ecc import LDPC, RS
from .evalgrid import coverage_grid_search
from .layout import (
    ROW_BASED,
    PoolManifest,
    crc32,
    encode_pool,
    encode_pool_rowwise,
    generate_primers,
    plan_layout,
)
from .metrics import (
    CostInputs,
    error_profile,
    population_fraction_change,
    read_cost,
    write_cost,
)
from .motifs import (
    MotifConstraints,
    MotifDictionary,
    count_valid,
    homopolymer_reading_study,
)
from .sequences import (
    read_pool_fasta,
    read_reads_fasta,
    write_pool_fasta,
    write_reads_fasta,
)


class UsageError(Exception):
    pass


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    over = {
        "seed": "seed",
        "threads": "threads",
    }
    for attr, key in over.items():
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, attr, val)
    if getattr(args, "motif_len", None) is not None or getattr(args, "bits_per_motif", None) is not None:
        c = cfg.constraints
        cfg.constraints = MotifConstraints(
            args.motif_len or c.motif_len, c.max_run, c.gc_min, c.gc_max
        )
        if args.bits_per_motif is not None:
            cfg.bits_per_motif = args.bits_per_motif
    if getattr(args, "scheme", None) is not None:
        cfg.ecc.scheme = args.scheme
    if getattr(args, "redundancy", None) is not None:
        cfg.ecc.redundancy = args.redundancy
    if getattr(args, "data_bits", None) is not None:
        cfg.ecc.data_bits = args.data_bits
    if getattr(args, "data_columns", None) is not None:
        cfg.layout.data_columns_per_oligo = args.data_columns
    if getattr(args, "obs_per_oe", None) is not None:
        cfg.layout.obs_per_oe = args.obs_per_oe
    if getattr(args, "row_based", False):
        cfg.layout.layout_mode = ROW_BASED
    if getattr(args, "coverage", None) is not None:
        cfg.channel.coverage = args.coverage
    if getattr(args, "error_rate", None) is not None:
        cfg.channel.error_rate = args.error_rate
    if getattr(args, "copy_bias_sigma", None) is not None:
        cfg.channel.copy_bias_sigma = args.copy_bias_sigma
    if getattr(args, "improper_rate", None) is not None:
        cfg.channel.improper_binding_rate = args.improper_rate
    if getattr(args, "no_realign", False):
        cfg.decode.realign = False
    cfg.channel.seed = cfg.seed
    cfg.clustering.seed = cfg.seed
    return cfg


def _dictionary(cfg: RunConfig) -> MotifDictionary:
    return MotifDictionary(cfg.constraints, cfg.bits_per_motif)


def cmd_dict_stats(args) -> int:
    cfg = _load_config(args)
    n = count_valid(cfg.constraints)
    print(f"motif_len          {cfg.constraints.motif_len}")
    print(f"max_run            {cfg.constraints.max_run}")
    print(f"gc range           [{cfg.constraints.gc_min}, {cfg.constraints.gc_max}]")
    print(f"valid motifs       {n}")
    if n > 1:
        bits = cfg.bits_per_motif
        print(f"bits_per_motif     {bits}")
        print(f"payload density    {bits / cfg.constraints.motif_len:.4f} bits/nt")
        print(f"max usable bits    {int(n).bit_length() - 1}")
    if args.study:
        print("reading study (16nt, GC 0.25-0.75):")
        for name, cnt in homopolymer_reading_study().items():
            print(f"  {name:22s} {cnt}")
    return 0


def cmd_encode(args) -> int:
    cfg = _load_config(args)
    data = Path(args.input).read_bytes()
    if not data:
        raise UsageError("input file is empty")
    dictionary = _dictionary(cfg)
    probe = plan_for(cfg, len(data), dictionary, input_crc32=crc32(data))
    pool = (
        encode_pool_rowwise(data, probe, dictionary, cfg.threads)
        if cfg.layout.layout_mode == ROW_BASED
        else encode_pool(data, probe, dictionary, cfg.threads)
    )
    out = Path(args.output)
    with open(out, "w") as f:
        write_pool_fasta(f, pool)
    probe.save(str(out) + ".manifest.json")
    write_sidecar(out, cfg, {"input": str(args.input), "oligos": len(pool)})
    print(
        f"encoded {len(data)} bytes -> {len(pool)} oligos "
        f"({probe.ob_count} OBs, {probe.oe_count} OEs, mode {cfg.layout.layout_mode})"
    )
    return 0


def plan_for(
    cfg: RunConfig, input_len: int, dictionary: MotifDictionary, input_crc32: int = 0
) -> PoolManifest:
    import math

    layout = cfg.layout
    blocks = math.ceil(input_len * 8 / cfg.ecc.data_bits)
    obs = math.ceil(blocks / layout.data_columns_per_oligo)
    oes = math.ceil(obs / layout.obs_per_oe)
    if len(layout.primer_table) < oes:
        layout.primer_table = generate_primers(oes, layout.primer_len, cfg.seed)
    return plan_layout(input_len, layout, cfg.ecc, dictionary, cfg.seed, input_crc32)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    manifest = PoolManifest.load(args.manifest)
    with open(args.pool) as f:
        pool = read_pool_fasta(f)
    _attach_primers(pool, manifest)
    reads = sample_reads(pool, cfg.channel)
    out = Path(args.output)
    with open(out, "w") as f:
        write_reads_fasta(f, reads, with_provenance=not args.strip_provenance)
    write_sidecar(out, cfg, {"pool": str(args.pool), "reads": len(reads)})
    print(f"simulated {len(reads)} reads at coverage {cfg.channel.coverage}")
    return 0


def cmd_random_access(args) -> int:
    cfg = _load_config(args)
    manifest = PoolManifest.load(args.manifest)
    with open(args.pool) as f:
        pool = read_pool_fasta(f)
    _attach_primers(pool, manifest)
    reads = amplify_extent(pool, args.extent, cfg.channel)
    out = Path(args.output)
    with open(out, "w") as f:
        write_reads_fasta(f, reads, with_provenance=not args.strip_provenance)
    write_sidecar(out, cfg, {"pool": str(args.pool), "extent": args.extent})
    print(f"amplified extent {args.extent}: {len(reads)} reads")
    return 0


def _attach_primers(pool, manifest: PoolManifest) -> None:
    """Pool FASTA stores full sequences; split primers back out for the
    channel's primer-aware corruption paths."""
    plen = manifest.layout.primer_len
    for rec in pool:
        full = rec.payload
        rec.left_primer = full[:plen]
        rec.right_primer = full[len(full) - plen :]
        rec.payload = full[plen : len(full) - plen]


def cmd_decode(args) -> int:
    cfg = _load_config(args)
    manifest = PoolManifest.load(args.manifest)
    if args.row_based and manifest.layout.layout_mode != ROW_BASED:
        raise UsageError("manifest is columnar but --row-based was requested")
    if not args.row_based and manifest.layout.layout_mode == ROW_BASED:
        raise UsageError("manifest is row_based: pass --row-based to decode it")
    with open(args.reads) as f:
        reads = read_reads_fasta(f)
    dictionary = _dictionary(cfg_from_manifest(cfg, manifest))
    extents = [args.extent] if args.extent is not None else None
    collected = [] if args.dump_clusters else None
    out_bytes, report = decode_pool(
        reads,
        manifest,
        dictionary,
        cfg.decode,
        cluster_params=None if args.oracle_clusters else cfg.clustering,
        use_oracle_clusters=args.oracle_clusters,
        extents=extents,
        threads=cfg.threads,
        collect_clusters=collected,
    )
    if collected is not None:
        from .clustering import dump_clusters

        with open(args.dump_clusters, "w") as f:
            for oe, clusters in collected:
                f.write(f"extent {oe}\n")
                for line in dump_clusters(clusters):
                    f.write(line + "\n")
    Path(args.output).write_bytes(out_bytes)
    import json

    with open(str(args.output) + ".report.json", "w") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    write_sidecar(Path(args.output), cfg, {"reads": str(args.reads)})
    status = "ok" if report.crc_ok in (True, None) else "CRC MISMATCH"
    print(
        f"decoded {report.output_byte_len} bytes; blocks recovered "
        f"{report.blocks_recovered}, failed {report.blocks_failed}; {status}"
    )
    if report.crc_ok is False:
        return 2
    return 0


def cfg_from_manifest(cfg: RunConfig, manifest: PoolManifest) -> RunConfig:
    cfg.constraints = manifest.constraints
    cfg.bits_per_motif = manifest.bits_per_motif
    cfg.ecc = manifest.ecc
    cfg.layout = manifest.layout
    return cfg


def cmd_eval_min_coverage(args) -> int:
    cfg = _load_config(args)
    manifest = PoolManifest.load(args.manifest)
    with open(args.pool) as f:
        pool = read_pool_fasta(f)
    _attach_primers(pool, manifest)
    dictionary = _dictionary(cfg_from_manifest(cfg, manifest))
    rates = [float(x) for x in args.error_rates.split(",")]
    result = coverage_grid_search(
        pool,
        manifest,
        dictionary,
        cfg.decode,
        rates,
        seed=cfg.seed,
        max_coverage=args.max_coverage,
        trials=args.trials,
        processes=cfg.threads,
    )
    out = Path(args.output)
    out.write_text("\n".join(result.csv_rows()) + "\n")
    write_sidecar(out, cfg, {"pool": str(args.pool)})
    for rate in rates:
        mc = result.min_coverage[rate]
        print(f"error_rate {rate}: min coverage {mc if mc is not None else 'unbounded'}")
    return 0


def cmd_metrics_costs(args) -> int:
    inputs = CostInputs(
        oligo_count=args.oligos,
        oligo_len_nt=args.oligo_len,
        input_bits=args.input_bits,
        read_nt_total=args.read_nt,
        coverage=args.coverage,
    )
    wc = write_cost(inputs)
    print(f"write_cost {wc:.4f} nt/bit")
    if args.read_nt is not None or args.coverage is not None:
        print(f"read_cost {read_cost(inputs):.4f} nt/bit")
    return 0


def cmd_metrics_frac_change(args) -> int:
    import csv as csv_mod

    raw: dict[str, int] = {}
    reads: dict[str, int] = {}
    with open(args.counts) as f:
        for row in csv_mod.DictReader(f):
            raw[row["object"]] = int(row["raw_count"])
            reads[row["object"]] = int(row["read_count"])
    report = population_fraction_change(raw, reads)
    text = "\n".join(report.csv_rows()) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    print(
        f"# min {report.minimum:.3f} max {report.maximum:.3f} "
        f"mean {report.mean:.3f} std {report.std:.3f}",
        file=sys.stderr,
    )
    return 0


def cmd_metrics_error_profile(args) -> int:
    with open(args.reads) as f:
        reads = read_reads_fasta(f)
    with open(args.pool) as f:
        pool = read_pool_fasta(f)
    profile = error_profile(reads, pool)
    text = "\n".join(profile.csv_rows()) + "\n"
    Path(args.output).write_text(text)
    nt = sum(len(r.sequence) for r in reads)
    sub, ins, dele = profile.aggregate_rates(nt)
    print(f"aggregate rates: sub {sub:.5f} ins {ins:.5f} del {dele:.5f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="motifarc",
        description="Columnar motif-based DNA archival storage pipeline",
    )
    p.add_argument("--config", help="JSON config file (defaults < file < flags)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap; never affects output bytes")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dict", help="motif dictionary tools")
    dsub = d.add_subparsers(dest="dict_command", required=True)
    ds = dsub.add_parser("stats", help="capacity and density for constraints")
    ds.add_argument("--motif-len", type=int, dest="motif_len")
    ds.add_argument("--bits-per-motif", type=int, dest="bits_per_motif")
    ds.add_argument("--study", action="store_true",
                    help="print counts for alternative homopolymer readings")
    ds.set_defaults(func=cmd_dict_stats)

    e = sub.add_parser("encode", help="encode a file into an oligo pool")
    e.add_argument("input")
    e.add_argument("output", help="pool FASTA path")
    e.add_argument("--motif-len", type=int, dest="motif_len")
    e.add_argument("--bits-per-motif", type=int, dest="bits_per_motif")
    e.add_argument("--scheme", choices=[RS, LDPC])
    e.add_argument("--redundancy", type=float)
    e.add_argument("--data-bits", type=int, dest="data_bits")
    e.add_argument("--data-columns", type=int, dest="data_columns")
    e.add_argument("--obs-per-oe", type=int, dest="obs_per_oe")
    e.add_argument("--row-based", action="store_true", dest="row_based")
    e.set_defaults(func=cmd_encode)

    s = sub.add_parser("simulate", help="simulate the sequencing channel")
    s.add_argument("pool")
    s.add_argument("output", help="reads FASTA path")
    s.add_argument("--manifest", required=True)
    s.add_argument("--coverage", type=float)
    s.add_argument("--error-rate", type=float, dest="error_rate")
    s.add_argument("--copy-bias-sigma", type=float, dest="copy_bias_sigma")
    s.add_argument("--strip-provenance", action="store_true")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("random-access", help="amplify one extent")
    r.add_argument("pool")
    r.add_argument("output")
    r.add_argument("--manifest", required=True)
    r.add_argument("--extent", type=int, required=True)
    r.add_argument("--coverage", type=float)
    r.add_argument("--error-rate", type=float, dest="error_rate")
    r.add_argument("--improper-rate", type=float, dest="improper_rate")
    r.add_argument("--strip-provenance", action="store_true")
    r.set_defaults(func=cmd_random_access)

    dec = sub.add_parser("decode", help="decode reads back to bytes")
    dec.add_argument("reads")
    dec.add_argument("output")
    dec.add_argument("--manifest", required=True)
    dec.add_argument("--oracle-clusters", action="store_true", dest="oracle_clusters")
    dec.add_argument("--row-based", action="store_true", dest="row_based")
    dec.add_argument("--no-realign", action="store_true", dest="no_realign")
    dec.add_argument("--extent", type=int, default=None)
    dec.add_argument("--dump-clusters", default=None, dest="dump_clusters",
                     help="write `cluster <id>: <read ids>` debug lines here")
    dec.set_defaults(func=cmd_decode)

    ev = sub.add_parser("eval", help="evaluation harnesses")
    evsub = ev.add_subparsers(dest="eval_command", required=True)
    mc = evsub.add_parser("min-coverage", help="minimum coverage grid search")
    mc.add_argument("pool")
    mc.add_argument("output", help="grid CSV path")
    mc.add_argument("--manifest", required=True)
    mc.add_argument("--error-rates", default="0.01,0.05,0.12", dest="error_rates")
    mc.add_argument("--max-coverage", type=int, default=30, dest="max_coverage")
    mc.add_argument("--trials", type=int, default=3)
    mc.set_defaults(func=cmd_eval_min_coverage)

    m = sub.add_parser("metrics", help="cost and bias metrics")
    msub = m.add_subparsers(dest="metrics_command", required=True)
    costs = msub.add_parser("costs", help="write/read cost from raw inputs")
    costs.add_argument("--oligos", type=int, required=True)
    costs.add_argument("--oligo-len", type=int, required=True, dest="oligo_len")
    costs.add_argument("--input-bits", type=int, required=True, dest="input_bits")
    costs.add_argument("--read-nt", type=int, default=None, dest="read_nt")
    costs.add_argument("--coverage", type=float, default=None)
    costs.set_defaults(func=cmd_metrics_costs)
    fc = msub.add_parser("frac-change", help="population fraction change")
    fc.add_argument("counts", help="CSV with object,raw_count,read_count")
    fc.add_argument("--output", default=None)
    fc.set_defaults(func=cmd_metrics_frac_change)
    ep = msub.add_parser("error-profile", help="per-position error rates")
    ep.add_argument("reads")
    ep.add_argument("pool")
    ep.add_argument("--output", required=True)
    ep.set_defaults(func=cmd_metrics_error_profile)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
