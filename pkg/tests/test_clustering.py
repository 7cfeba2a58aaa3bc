import numpy as np
import pytest

from motifarc.channel import ChannelParams, sample_reads
from motifarc.clustering import (
    ClusterParams,
    EmbeddingFunction,
    cgk_embed,
    cluster_reads,
    oracle_cluster,
    purity_completeness,
)
from motifarc.sequences import OligoRecord, ReadRecord


def random_pool(n, length, seed, randomized=True):
    rng = np.random.default_rng(seed)
    pool = []
    for i in range(n):
        if randomized:
            seq = "".join("ACGT"[c] for c in rng.integers(0, 4, length))
        else:
            base = "ACGT" * (length // 4)
            pos = rng.integers(0, length)
            seq = base[:pos] + "ACGT"[rng.integers(0, 4)] + base[pos + 1 :]
        pool.append(OligoRecord(0, 0, i, seq))
    return pool


def test_embedding_deterministic_and_length():
    f = EmbeddingFunction(seed=3, max_input_len=50)
    a = cgk_embed("ACGTACGT", f)
    b = cgk_embed("ACGTACGT", f)
    assert len(a) == 150
    assert (a == b).all()


def test_embedding_empty_sequence_is_all_pad():
    f = EmbeddingFunction(seed=3, max_input_len=10)
    emb = cgk_embed("", f)
    assert (emb == 4).all()


def test_embedding_rejects_long_input():
    f = EmbeddingFunction(seed=3, max_input_len=4)
    with pytest.raises(ValueError):
        cgk_embed("ACGTA", f)


def test_embedding_distortion():
    """Pairs at edit distance 1 must embed far closer than random pairs."""
    rng = np.random.default_rng(11)
    f = EmbeddingFunction(seed=5, max_input_len=110)
    near, far = [], []
    for _ in range(1000):
        s = "".join("ACGT"[c] for c in rng.integers(0, 4, 100))
        pos = rng.integers(0, 100)
        mutated = s[:pos] + "ACGT"[rng.integers(0, 4)] + s[pos + 1 :]
        t = "".join("ACGT"[c] for c in rng.integers(0, 4, 100))
        ea, eb, ec = cgk_embed(s, f), cgk_embed(mutated, f), cgk_embed(t, f)
        near.append(int((ea != eb).sum()))
        far.append(int((ea != ec).sum()))
    assert np.mean(near) < 0.25 * np.mean(far)


def test_exact_duplicates_cluster_perfectly():
    pool = random_pool(60, 80, seed=1)
    reads = sample_reads(pool, ChannelParams(coverage=3, error_rate=0.0, seed=2))
    clusters = cluster_reads([r.sequence for r in reads], ClusterParams(seed=4))
    truth = [r.src for r in reads]
    purity, completeness = purity_completeness(clusters, truth)
    assert purity == 1.0 and completeness == 1.0
    assert len(clusters) == 60


def test_clusters_form_partition():
    pool = random_pool(40, 80, seed=2)
    reads = sample_reads(pool, ChannelParams(coverage=5, error_rate=0.02, seed=3))
    payloads = [r.sequence for r in reads]
    clusters = cluster_reads(payloads, ClusterParams(seed=5))
    seen = [m for c in clusters for m in c]
    assert sorted(seen) == list(range(len(payloads)))


def test_quality_degrades_with_error_rate():
    pool = random_pool(80, 80, seed=3)
    qualities = []
    for rate in (0.0, 0.05, 0.20):
        reads = sample_reads(pool, ChannelParams(coverage=5, error_rate=rate, seed=6))
        clusters = cluster_reads([r.sequence for r in reads], ClusterParams(seed=7))
        p, c = purity_completeness(clusters, [r.src for r in reads])
        qualities.append(p * c)
    assert qualities[0] >= qualities[1] >= qualities[2] - 1e-9


def test_randomized_pools_separate_better():
    """Randomized encodings sit farther apart in edit distance, which is
    what makes LSH clustering workable."""
    from motifarc._kernels import edit_distance
    from motifarc.motifs import seq_to_codes

    def min_pairwise(pool):
        codes = [seq_to_codes(o.payload) for o in pool]
        best = 10**9
        for i in range(len(codes)):
            for j in range(i + 1, len(codes)):
                best = min(best, edit_distance(codes[i], codes[j]))
        return best

    randomized = random_pool(100, 60, seed=4, randomized=True)
    correlated = random_pool(100, 60, seed=4, randomized=False)
    assert min_pairwise(randomized) > min_pairwise(correlated)


def test_oracle_cluster_groups_by_provenance():
    reads = [
        ReadRecord("ACGT", (0, 0, 0)),
        ReadRecord("ACGA", (0, 0, 1)),
        ReadRecord("ACGC", (0, 0, 0)),
        ReadRecord("TTTT", (0, 0, 2), improper=True),
    ]
    clusters = oracle_cluster(reads)
    assert clusters == [[0, 2], [1]]
    p, c = purity_completeness(clusters, [r.src for r in reads])
    assert p == 1.0


def test_oracle_requires_provenance():
    with pytest.raises(ValueError):
        oracle_cluster([ReadRecord("ACGT", None)])


def test_dropout_means_no_cluster():
    reads = [ReadRecord("ACGT", (0, 0, 0)), ReadRecord("ACGA", (0, 0, 2))]
    clusters = oracle_cluster(reads)
    assert len(clusters) == 2  # row 1 simply has no cluster
