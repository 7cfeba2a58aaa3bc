"""Pure-Python twin of the compiled kernels.

Same functions, same tie-break rules, bit-identical outputs; only speed
differs. Selected automatically when the extension is unavailable or when
MOTIFARC_PURE=1 is set.
"""

from __future__ import annotations

import math

import numpy as np

IMPLEMENTATION = "python"

_BIG = 1 << 28


def edit_distance(a, b) -> int:
    a = bytes(a)
    b = bytes(b)
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    row = list(range(lb + 1))
    for i in range(1, la + 1):
        prev_diag = row[0]
        row[0] = i
        ai = a[i - 1]
        for j in range(1, lb + 1):
            tmp = row[j]
            cur = min(
                row[j] + 1,
                row[j - 1] + 1,
                prev_diag + (0 if ai == b[j - 1] else 1),
            )
            row[j] = cur
            prev_diag = tmp
    return row[lb]


def edit_distance_banded(a, b, band: int) -> int:
    a = bytes(a)
    b = bytes(b)
    la, lb = len(a), len(b)
    band = max(band, 0)
    if abs(la - lb) > band:
        return abs(la - lb)
    big = la + lb + 1
    prev = [j if j <= band else big for j in range(lb + 2)]
    curr = [big] * (lb + 2)
    for i in range(1, la + 1):
        lo = max(1, i - band)
        hi = min(lb, i + band)
        curr[lo - 1] = i if lo == 1 else big
        ai = a[i - 1]
        for j in range(lo, hi + 1):
            curr[j] = min(
                curr[j - 1] + 1,
                prev[j] + 1,
                prev[j - 1] + (0 if ai == b[j - 1] else 1),
            )
        if hi + 1 <= lb + 1:
            curr[hi + 1] = big
        prev, curr = curr, prev
    return prev[lb]


def _window_costs(pat: bytes, text: bytes) -> list[int]:
    """dp final row: cost of pattern vs every prefix of text."""
    lt = len(text)
    dp = list(range(lt + 1))
    for i in range(1, len(pat) + 1):
        prev_diag = dp[0]
        dp[0] = i
        pi = pat[i - 1]
        for j in range(1, lt + 1):
            tmp = dp[j]
            dp[j] = min(
                dp[j] + 1,
                dp[j - 1] + 1,
                prev_diag + (0 if pi == text[j - 1] else 1),
            )
            prev_diag = tmp
    return dp


def prefix_match_cost(pattern, text, end_slack: int):
    pattern = bytes(pattern)
    text = bytes(text)
    lp = len(pattern)
    win = min(lp + end_slack, len(text))
    row = _window_costs(pattern, text[:win])
    lo = min(max(0, lp - end_slack), win)
    best_cost, best_end = _BIG, lo
    for j in range(lo, win + 1):
        if row[j] < best_cost:
            best_cost = row[j]
            best_end = j
    return best_cost, best_end


def realign(read, expected_offset: int, motif, slack: int, reject_cost: int):
    """Ties on cost prefer the start nearest expected_offset, negative
    drift first, then the shortest end (see the compiled twin)."""
    read = bytes(read)
    motif = bytes(motif)
    lread, lm = len(read), len(motif)
    best_cost = _BIG
    best_end = expected_offset + lm
    for i in range(2 * slack + 1):
        d = (i + 1) >> 1
        p = expected_offset + (-d if (i & 1) else d)
        if i == 0:
            p = expected_offset
        if p < 0 or p > lread:
            continue
        if p + lm <= lread and read[p : p + lm] == motif:
            best_cost = 0
            best_end = p + lm
            break
        win = min(lm + slack, lread - p)
        row = _window_costs(motif, read[p : p + win])
        lo = max(0, lm - slack)
        for j in range(lo, win + 1):
            if row[j] < best_cost:
                best_cost = row[j]
                best_end = p + j
        if best_cost == 0:
            break
    if best_cost > reject_cost:
        best_end = expected_offset + lm
    return best_end, best_cost


def realign_columns(
    reads_flat,
    read_ptr,
    members,
    cluster_ptr,
    offsets,
    motifs,
    motif_ok,
    slack: int,
    reject_cost: int,
) -> None:
    data = bytes(reads_flat)
    lm = motifs.shape[1]
    for c in range(len(cluster_ptr) - 1):
        mot = bytes(motifs[c])
        for k in range(cluster_ptr[c], cluster_ptr[c + 1]):
            r = int(members[k])
            read = data[read_ptr[r] : read_ptr[r + 1]]
            off = int(offsets[r])
            if motif_ok[c]:
                end, _ = realign(read, off, mot, slack, reject_cost)
                offsets[r] = end
            else:
                offsets[r] = off + lm


def _slice_better(a: bytes, b: bytes) -> bool:
    if len(a) != len(b):
        return len(a) > len(b)
    return a < b


def consensus_columns(
    reads_flat,
    read_ptr,
    members,
    cluster_ptr,
    offsets,
    motif_len: int,
    slack: int,
    out_motifs,
    out_ok,
) -> None:
    data = bytes(reads_flat)
    for c in range(len(cluster_ptr) - 1):
        ids = [int(members[k]) for k in range(cluster_ptr[c], cluster_ptr[c + 1])]
        ok, motif = _consensus_one(
            data, read_ptr, ids, offsets, motif_len, slack
        )
        out_ok[c] = 1 if ok else 0
        if ok:
            out_motifs[c, :] = np.frombuffer(motif, dtype=np.uint8)


def _consensus_one(data, read_ptr, ids, offsets, mlen, slack):
    slices = []
    for r in ids:
        read = data[read_ptr[r] : read_ptr[r + 1]]
        off = int(offsets[r])
        if 0 <= off < len(read):
            slices.append(read[off : off + mlen])
        else:
            slices.append(None)
    usable = [s for s in slices if s is not None]
    if not usable:
        return False, b""
    counts: dict[bytes, int] = {}
    for s in usable:
        counts[s] = counts.get(s, 0) + 1
    pivot = b""
    best_count = 0
    for s in usable:
        n = counts[s]
        if n > best_count or (n == best_count and _slice_better(s, pivot)):
            best_count = n
            pivot = s
    if best_count == len(usable) and len(pivot) == mlen:
        return True, pivot
    votes = [[0, 0, 0, 0] for _ in range(mlen)]
    for r in ids:
        read = data[read_ptr[r] : read_ptr[r + 1]]
        base = int(offsets[r])
        best_cost, best_s = _BIG, 0
        for i in range(2 * slack + 1):
            s_abs = (i + 1) >> 1
            s = -s_abs if (i & 1) else s_abs
            off = base + s
            if off < 0 or off >= len(read):
                continue
            window = read[off : off + mlen]
            if window == pivot:
                cost = 0
            else:
                cost = edit_distance(window, pivot)
            if cost < best_cost:
                best_cost, best_s = cost, s
            if best_cost == 0:
                break
        if best_cost >= _BIG:
            continue
        off = base + best_s
        for j, ch in enumerate(read[off : off + mlen]):
            if ch <= 3:
                votes[j][ch] += 1
    out = bytearray(mlen)
    for j in range(mlen):
        best_count = -1
        winner = 0
        for i in range(4):
            if votes[j][i] > best_count:
                best_count = votes[j][i]
                winner = i
        if best_count <= 0:
            winner = pivot[j] if j < len(pivot) else 0
        elif j < len(pivot) and pivot[j] <= 3 and votes[j][pivot[j]] == best_count:
            winner = pivot[j]
        out[j] = winner
    return True, bytes(out)


def corrupt_read(codes, error_rate, sd_frac, wsub, wins, wdel, seed):
    """Seeded read corruption; see the compiled twin for the contract."""
    from ..prng import Stream

    codes = np.asarray(codes, dtype=np.uint8)
    n = len(codes)
    if n == 0 or error_rate == 0.0:
        return codes.copy(), 0, 0, 0
    rng = Stream(seed)
    mean = error_rate * n
    k = int(math.floor(rng.gauss(mean, mean * sd_frac) + 0.5))
    if k <= 0:
        return codes.copy(), 0, 0, 0
    wtot = wsub + wins + wdel
    edits = []
    for order in range(k):
        pos = rng.randrange(n)
        u = rng.random() * wtot
        etype = 0 if u < wsub else (1 if u < wsub + wins else 2)
        edits.append((pos, order, etype))
    edits.sort()
    out = np.zeros(n + k, dtype=np.uint8)
    out_len = 0
    cursor = 0
    ei = 0
    nsub = nins = ndel = 0
    while ei < len(edits):
        p = edits[ei][0]
        span = p - cursor
        out[out_len : out_len + span] = codes[cursor:p]
        out_len += span
        alive = True
        cur = int(codes[p])
        while ei < len(edits) and edits[ei][0] == p:
            etype = edits[ei][2]
            ei += 1
            if etype == 1:
                out[out_len] = rng.randrange(4)
                out_len += 1
                nins += 1
            elif etype == 0 and alive:
                cur = (cur + 1 + rng.randrange(3)) % 4
                nsub += 1
            elif etype == 2 and alive:
                alive = False
                ndel += 1
        if alive:
            out[out_len] = cur
            out_len += 1
        cursor = p + 1
    span = n - cursor
    out[out_len : out_len + span] = codes[cursor:n]
    out_len += span
    return out[:out_len], nsub, nins, ndel


def cgk_embed_batch(reads_flat, read_ptr, rbits, out) -> None:
    data = bytes(reads_flat)
    out_len = rbits.shape[0]
    rb = rbits
    for r in range(len(read_ptr) - 1):
        read = data[read_ptr[r] : read_ptr[r + 1]]
        lread = len(read)
        i = 0
        row = out[r]
        for j in range(out_len):
            if i < lread:
                sym = read[i]
                row[j] = sym
                i += int(rb[j, sym])
            else:
                row[j] = 4
                i += 1


def align_ops(read, ref, sub_counts, ins_counts, del_counts) -> int:
    read = bytes(read)
    ref = bytes(ref)
    lr, lf = len(read), len(ref)
    w = lr + 1
    dp = np.zeros((lf + 1, lr + 1), dtype=np.int32)
    bt = np.zeros((lf + 1, lr + 1), dtype=np.uint8)
    dp[0, :] = np.arange(lr + 1)
    bt[0, 1:] = 2
    dp[:, 0] = np.arange(lf + 1)
    bt[1:, 0] = 1
    ref_arr = np.frombuffer(ref, dtype=np.uint8)
    read_arr = np.frombuffer(read, dtype=np.uint8)
    for i in range(1, lf + 1):
        sub_row = dp[i - 1, :-1] + (ref_arr[i - 1] != read_arr)
        # rolling min per cell: need the running left value, so loop
        prev = dp[i, 0]
        row = dp[i]
        up = dp[i - 1]
        bti = bt[i]
        for j in range(1, lr + 1):
            best = sub_row[j - 1]
            move = 0
            cur = up[j] + 1
            if cur < best:
                best = cur
                move = 1
            cur = prev + 1
            if cur < best:
                best = cur
                move = 2
            row[j] = best
            bti[j] = move
            prev = best
    i, j = lf, lr
    while i > 0 or j > 0:
        move = bt[i, j]
        if move == 0:
            if ref[i - 1] != read[j - 1]:
                sub_counts[i - 1] += 1
            i -= 1
            j -= 1
        elif move == 1:
            del_counts[i - 1] += 1
            i -= 1
        else:
            ins_counts[i - 1 if i > 0 else 0] += 1
            j -= 1
    return int(dp[lf, lr])
