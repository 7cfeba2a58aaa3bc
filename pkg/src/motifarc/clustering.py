"""Read clustering: CGK edit-to-Hamming embedding plus LSH bucketing.

Reads embed into fixed-length strings whose Hamming distance tracks edit
distance; sampling a handful of embedded positions gives an LSH signature,
and reads sharing a signature are verified against cluster representatives
with a banded edit distance. Merges accumulate across independent
embedding rounds through a union-find, so the result is order- and
scheduling-independent. An oracle mode groups by ground-truth provenance
for isolation testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .motifs import seq_to_codes
from .prng import Stream, derive_seed, splitmix_words
from .sequences import ReadRecord
from ._kernels import cgk_embed_batch, edit_distance_banded


@dataclass
class ClusterParams:
    num_embeddings: int = 6
    signature_positions: int = 24
    verify_threshold_frac: float = 0.3
    band_frac: float = 0.15
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "num_embeddings": self.num_embeddings,
            "signature_positions": self.signature_positions,
            "verify_threshold_frac": self.verify_threshold_frac,
            "band_frac": self.band_frac,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterParams":
        return cls(**d)


class EmbeddingFunction:
    """CGK walk parameters: per (output position, symbol) advance bits."""

    def __init__(self, seed: int, max_input_len: int):
        self.seed = seed
        self.max_input_len = max_input_len
        self.output_len = 3 * max_input_len
        words = splitmix_words(seed, math.ceil(self.output_len * 4 / 64))
        bits = np.unpackbits(words.astype(">u8").view(np.uint8))
        self.random_bits = np.ascontiguousarray(
            bits[: self.output_len * 4].reshape(self.output_len, 4)
        )


def cgk_embed(seq: str, f: EmbeddingFunction) -> np.ndarray:
    """Embed one sequence; raises if it exceeds the function's input cap."""
    if len(seq) > f.max_input_len:
        raise ValueError("sequence longer than the embedding's max_input_len")
    codes = seq_to_codes(seq)
    ptr = np.array([0, len(codes)], dtype=np.int64)
    out = np.zeros((1, f.output_len), dtype=np.uint8)
    cgk_embed_batch(codes, ptr, f.random_bits, out)
    return out[0]


def _flatten(seqs: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(seqs) + 1, dtype=np.int64)
    for i, s in enumerate(seqs):
        ptr[i + 1] = ptr[i] + len(s)
    flat = np.concatenate(seqs) if seqs else np.zeros(0, dtype=np.uint8)
    return np.ascontiguousarray(flat, dtype=np.uint8), ptr


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller id stays the root so representatives are first members
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def cluster_reads(
    payloads: list[str],
    params: ClusterParams,
    expected_len: int | None = None,
) -> list[list[int]]:
    """Partition read indices into clusters of same-oligo reads."""
    n = len(payloads)
    if n == 0:
        return []
    codes = [seq_to_codes(p) for p in payloads]
    flat, ptr = _flatten(codes)
    max_len = int((ptr[1:] - ptr[:-1]).max())
    if expected_len is None:
        expected_len = max_len
    threshold = math.floor(params.verify_threshold_frac * expected_len)
    band = max(1, math.ceil(params.band_frac * expected_len))
    band = max(band, threshold)  # the verify distance must be exact up to it
    uf = _UnionFind(n)
    for round_no in range(params.num_embeddings):
        emb_seed = derive_seed(params.seed, 0xE0B0 + round_no)
        emb = EmbeddingFunction(emb_seed, max_len)
        out = np.zeros((n, emb.output_len), dtype=np.uint8)
        cgk_embed_batch(flat, ptr, emb.random_bits, out)
        pos_rng = Stream(derive_seed(params.seed, 0x51C0 + round_no))
        positions = np.array(
            pos_rng.sample_indices(emb.output_len, params.signature_positions),
            dtype=np.int64,
        )
        signatures = np.ascontiguousarray(out[:, positions])
        buckets: dict[bytes, list[int]] = {}
        for i in range(n):
            buckets.setdefault(signatures[i].tobytes(), []).append(i)
        for bucket in buckets.values():
            if len(bucket) < 2:
                continue
            reps: list[int] = []  # root read ids already seen in this bucket
            seen: set[int] = set()
            for rid in bucket:
                root = uf.find(rid)
                if root in seen:
                    continue
                merged = False
                for rep in reps:
                    d = edit_distance_banded(
                        flat[ptr[rid] : ptr[rid + 1]],
                        flat[ptr[rep] : ptr[rep + 1]],
                        band,
                    )
                    if d <= threshold:
                        uf.union(rep, rid)
                        merged = True
                        break
                if not merged:
                    reps.append(rid)
                seen.add(uf.find(rid))
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)
    return [sorted(members) for _, members in sorted(groups.items())]


def dump_clusters(clusters: list[list[int]]) -> list[str]:
    """Debug dump: one `cluster <id>: <read ids>` line per cluster."""
    return [
        f"cluster {i}: {' '.join(str(m) for m in members)}"
        for i, members in enumerate(clusters)
    ]


def oracle_cluster(reads: list[ReadRecord]) -> list[list[int]]:
    """Perfect grouping by provenance; improper reads are left out."""
    groups: dict[tuple[int, int, int], list[int]] = {}
    for i, rec in enumerate(reads):
        if rec.improper:
            continue
        if rec.src is None:
            raise ValueError("oracle clustering requires provenance on every read")
        groups.setdefault(rec.src, []).append(i)
    return [groups[k] for k in sorted(groups)]


def purity_completeness(
    clusters: list[list[int]], truth: list[tuple[int, int, int] | None]
) -> tuple[float, float]:
    """Cluster quality against ground truth (reads with None truth ignored)."""
    from collections import Counter

    total = 0
    agree = 0
    best_per_group: dict = {}
    group_sizes: "Counter" = Counter(t for t in truth if t is not None)
    for members in clusters:
        labels = Counter(truth[m] for m in members if truth[m] is not None)
        if not labels:
            continue
        label, count = labels.most_common(1)[0]
        total += sum(labels.values())
        agree += count
        for lab, cnt in labels.items():
            if cnt > best_per_group.get(lab, 0):
                best_per_group[lab] = cnt
    purity = agree / total if total else 1.0
    denom = sum(group_sizes.values())
    completeness = (
        sum(best_per_group.get(g, 0) for g in group_sizes) / denom if denom else 1.0
    )
    return purity, completeness
