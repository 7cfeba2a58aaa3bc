# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: alignment, consensus voting, CGK embedding.

The pure-Python twin of this module is pyfallback.py; both must return
bit-identical results for any input. Keep the tie-break rules in the two
files in lockstep.
"""

from libc.stdlib cimport malloc, free
from libc.string cimport memset
from libc.math cimport sqrt, log, cos, floor, M_PI

import numpy as np

IMPLEMENTATION = "compiled"

ctypedef unsigned long long u64

DEF MAXPAT = 96      # longest motif/primer a stack DP row must hold
DEF MAXWIN = 160     # pattern window incl. slack


cdef inline int imin3(int a, int b, int c) nogil:
    cdef int m = a
    if b < m:
        m = b
    if c < m:
        m = c
    return m


cdef int _edit_distance_raw(const unsigned char* a, int la,
                            const unsigned char* b, int lb) nogil:
    """Unit-cost Levenshtein, O(la*lb) with one heap row."""
    cdef int i, j, cur, prev_diag, tmp
    cdef int stack_row[MAXWIN + 1]
    cdef int* row
    cdef int heap = 0
    if la == 0:
        return lb
    if lb == 0:
        return la
    if lb <= MAXWIN:
        row = stack_row
    else:
        row = <int*> malloc((lb + 1) * sizeof(int))
        if row == NULL:
            return -1
        heap = 1
    for j in range(lb + 1):
        row[j] = j
    for i in range(1, la + 1):
        prev_diag = row[0]
        row[0] = i
        for j in range(1, lb + 1):
            tmp = row[j]
            cur = imin3(row[j] + 1,
                        row[j - 1] + 1,
                        prev_diag + (0 if a[i - 1] == b[j - 1] else 1))
            row[j] = cur
            prev_diag = tmp
    cur = row[lb]
    if heap:
        free(row)
    return cur


cdef int _edit_distance_banded_raw(const unsigned char* a, int la,
                                   const unsigned char* b, int lb,
                                   int band) nogil:
    """Banded Levenshtein: exact when the true distance is <= band,
    otherwise some value > band (an upper bound)."""
    cdef int i, j, lo, hi, best
    cdef int big
    cdef int* prev
    cdef int* curr
    cdef int* tmp
    cdef int diff = la - lb if la > lb else lb - la
    if band < 0:
        band = 0
    if diff > band:
        return diff
    big = la + lb + 1
    prev = <int*> malloc((lb + 2) * sizeof(int))
    curr = <int*> malloc((lb + 2) * sizeof(int))
    if prev == NULL or curr == NULL:
        if prev != NULL:
            free(prev)
        if curr != NULL:
            free(curr)
        return -1
    for j in range(lb + 2):
        prev[j] = j if j <= band else big
        curr[j] = big
    for i in range(1, la + 1):
        lo = i - band
        if lo < 1:
            lo = 1
        hi = i + band
        if hi > lb:
            hi = lb
        curr[lo - 1] = i if lo == 1 else big
        for j in range(lo, hi + 1):
            curr[j] = imin3(curr[j - 1] + 1,
                            prev[j] + 1,
                            prev[j - 1] + (0 if a[i - 1] == b[j - 1] else 1))
        if hi + 1 <= lb + 1:
            curr[hi + 1] = big
        tmp = prev
        prev = curr
        curr = tmp
    best = prev[lb]
    free(prev)
    free(curr)
    return best if best <= band else best


def edit_distance(const unsigned char[::1] a, const unsigned char[::1] b):
    cdef int out
    with nogil:
        out = _edit_distance_raw(&a[0] if a.shape[0] else NULL, <int> a.shape[0],
                                 &b[0] if b.shape[0] else NULL, <int> b.shape[0])
    if out < 0:
        raise MemoryError
    return out


def edit_distance_banded(const unsigned char[::1] a, const unsigned char[::1] b, int band):
    cdef int out
    with nogil:
        out = _edit_distance_banded_raw(&a[0] if a.shape[0] else NULL, <int> a.shape[0],
                                        &b[0] if b.shape[0] else NULL, <int> b.shape[0],
                                        band)
    if out < 0:
        raise MemoryError
    return out


cdef int _window_costs(const unsigned char* pat, int lp,
                       const unsigned char* text, int lt,
                       int* final_row) nogil:
    """final_row[j] = ED(pat, text[:j]) for j in [0, lt]. -1 on budget."""
    cdef int dp[MAXWIN + 1]
    cdef int i, j, prev_diag, tmp
    if lp > MAXPAT or lt > MAXWIN:
        return -1
    for j in range(lt + 1):
        dp[j] = j
    for i in range(1, lp + 1):
        prev_diag = dp[0]
        dp[0] = i
        for j in range(1, lt + 1):
            tmp = dp[j]
            dp[j] = imin3(dp[j] + 1,
                          dp[j - 1] + 1,
                          prev_diag + (0 if pat[i - 1] == text[j - 1] else 1))
            prev_diag = tmp
    for j in range(lt + 1):
        final_row[j] = dp[j]
    return 0


def prefix_match_cost(const unsigned char[::1] pattern,
                      const unsigned char[::1] text,
                      int end_slack):
    """Best (cost, end) of pattern vs text[:end], end within len(p) +/- slack.

    Ties prefer the smallest end.
    """
    cdef int lp = <int> pattern.shape[0]
    cdef int lt = <int> text.shape[0]
    cdef int win = lp + end_slack
    cdef int final_row[MAXWIN + 1]
    cdef int j, lo, best_cost, best_end, rc
    if win > lt:
        win = lt
    if lp > MAXPAT or win > MAXWIN:
        raise ValueError("pattern too long for kernel budget")
    with nogil:
        rc = _window_costs(&pattern[0] if lp else NULL, lp,
                           &text[0] if win else NULL, win, final_row)
    if rc < 0:
        raise ValueError("pattern too long for kernel budget")
    lo = lp - end_slack
    if lo < 0:
        lo = 0
    if lo > win:
        lo = win  # text shorter than the window: whole text is the candidate
    best_cost = MAXWIN + MAXPAT
    best_end = lo
    for j in range(lo, win + 1):
        if final_row[j] < best_cost:
            best_cost = final_row[j]
            best_end = j
    return best_cost, best_end


cdef void _realign_one(const unsigned char* read, int lread,
                       const unsigned char* motif, int lm,
                       int expected, int slack, int reject_cost,
                       int* out_end, int* out_cost) nogil:
    """Best (p, end) for the motif near the expected offset.

    Ties on cost prefer the start nearest the expected offset (negative
    drift first), then the shortest end. Nearest-first matters: a leftmost
    rule loses sync on short-period motifs that also match a few positions
    early. Falls back to expected+lm above the reject cost.
    """
    cdef int final_row[MAXWIN + 1]
    cdef int best_cost = 1 << 28
    cdef int best_end = expected + lm
    cdef int i, p, d, j, lo, win, cost, equal
    for i in range(2 * slack + 1):
        d = (i + 1) >> 1
        p = expected - d if (i & 1) else expected + d
        if i == 0:
            p = expected
        if p < 0 or p > lread:
            continue
        # exact window match means cost 0 with end p+lm, unbeatable at this p
        if p + lm <= lread:
            equal = 1
            for j in range(lm):
                if read[p + j] != motif[j]:
                    equal = 0
                    break
            if equal:
                best_cost = 0
                best_end = p + lm
                break
        win = lm + slack
        if p + win > lread:
            win = lread - p
        if _window_costs(motif, lm, read + p, win, final_row) < 0:
            continue
        lo = lm - slack
        if lo < 0:
            lo = 0
        for j in range(lo, win + 1):
            cost = final_row[j]
            if cost < best_cost:
                best_cost = cost
                best_end = p + j
        if best_cost == 0:
            break  # no later start can win a cost-0 tie in preference order
    if best_cost > reject_cost:
        best_end = expected + lm
    out_end[0] = best_end
    out_cost[0] = best_cost


def realign(const unsigned char[::1] read, int expected_offset,
            const unsigned char[::1] motif, int slack, int reject_cost):
    """One-read realignment; returns (new_offset, cost)."""
    cdef int end, cost
    with nogil:
        _realign_one(&read[0] if read.shape[0] else NULL, <int> read.shape[0],
                     &motif[0] if motif.shape[0] else NULL, <int> motif.shape[0],
                     expected_offset, slack, reject_cost, &end, &cost)
    return end, cost


def realign_columns(const unsigned char[::1] reads_flat,
                    const long long[::1] read_ptr,
                    const long long[::1] members,
                    const long long[::1] cluster_ptr,
                    long long[::1] offsets,
                    const unsigned char[:, ::1] motifs,
                    const unsigned char[::1] motif_ok,
                    int slack, int reject_cost):
    """Advance every member read's offset past its cluster's corrected motif."""
    cdef int n_clusters = <int> (cluster_ptr.shape[0] - 1)
    cdef int lm = <int> motifs.shape[1]
    cdef int c, k, end, cost, lread, off
    cdef long long r, start
    with nogil:
        for c in range(n_clusters):
            for k in range(<int> cluster_ptr[c], <int> cluster_ptr[c + 1]):
                r = members[k]
                start = read_ptr[r]
                lread = <int> (read_ptr[r + 1] - start)
                off = <int> offsets[r]
                if motif_ok[c]:
                    _realign_one(&reads_flat[start] if lread else NULL, lread,
                                 &motifs[c, 0], lm, off, slack, reject_cost,
                                 &end, &cost)
                    offsets[r] = end
                else:
                    offsets[r] = off + lm


def consensus_columns(const unsigned char[::1] reads_flat,
                      const long long[::1] read_ptr,
                      const long long[::1] members,
                      const long long[::1] cluster_ptr,
                      const long long[::1] offsets,
                      int motif_len, int slack,
                      unsigned char[:, ::1] out_motifs,
                      unsigned char[::1] out_ok):
    """Per-cluster shift-aligned majority consensus over motif windows."""
    cdef int n_clusters = <int> (cluster_ptr.shape[0] - 1)
    cdef int c
    if motif_len > MAXPAT:
        raise ValueError("motif_len too long for kernel budget")
    with nogil:
        for c in range(n_clusters):
            _consensus_one(reads_flat, read_ptr, members,
                           <int> cluster_ptr[c], <int> cluster_ptr[c + 1],
                           offsets, motif_len, slack,
                           out_motifs, out_ok, c)


cdef int _slice_better(const unsigned char* a, int la,
                       const unsigned char* b, int lb) nogil:
    """True when slice a should replace b as pivot on a tied count."""
    cdef int i
    if la != lb:
        return la > lb  # prefer full-length slices
    for i in range(la):
        if a[i] != b[i]:
            return a[i] < b[i]
    return 0


cdef void _consensus_one(const unsigned char[::1] reads_flat,
                         const long long[::1] read_ptr,
                         const long long[::1] members,
                         int mem_lo, int mem_hi,
                         const long long[::1] offsets,
                         int mlen, int slack,
                         unsigned char[:, ::1] out_motifs,
                         unsigned char[::1] out_ok,
                         int c) nogil:
    cdef int votes[MAXPAT][4]
    cdef unsigned char pivot[MAXPAT]
    cdef int pivot_len = 0
    cdef int k, i, j, s, lread, off, sl_len, best_count, count, differs
    cdef long long r, start
    cdef int best_cost, best_s, cost, s_abs, best_abs
    cdef const unsigned char* rp
    cdef const unsigned char* cand
    cdef int cand_len, usable, winner

    if mem_hi <= mem_lo:
        out_ok[c] = 0
        return
    # pivot: most frequent slice at each read's own offset; ties prefer
    # full-length then lexicographically smallest
    usable = 0
    best_count = 0
    for k in range(mem_lo, mem_hi):
        r = members[k]
        start = read_ptr[r]
        lread = <int> (read_ptr[r + 1] - start)
        off = <int> offsets[r]
        if off >= lread or off < 0:
            continue
        usable += 1
        sl_len = lread - off
        if sl_len > mlen:
            sl_len = mlen
        cand = &reads_flat[start + off]
        cand_len = sl_len
        count = 0
        for i in range(mem_lo, mem_hi):
            r = members[i]
            start = read_ptr[r]
            lread = <int> (read_ptr[r + 1] - start)
            off = <int> offsets[r]
            if off >= lread or off < 0:
                continue
            sl_len = lread - off
            if sl_len > mlen:
                sl_len = mlen
            if sl_len != cand_len:
                continue
            rp = &reads_flat[start + off]
            differs = 0
            for j in range(sl_len):
                if rp[j] != cand[j]:
                    differs = 1
                    break
            if not differs:
                count += 1
        if count > best_count or (count == best_count and count > 0 and
                                  _slice_better(cand, cand_len, pivot, pivot_len)):
            best_count = count
            pivot_len = cand_len
            for j in range(cand_len):
                pivot[j] = cand[j]
    if usable == 0:
        out_ok[c] = 0
        return
    if best_count == usable and pivot_len == mlen:
        # unanimous full-length slices: consensus is the pivot itself
        for j in range(mlen):
            out_motifs[c, j] = pivot[j]
        out_ok[c] = 1
        return
    memset(&votes[0][0], 0, mlen * 4 * sizeof(int))
    # choose a shift per member; preference order 0, -1, +1, -2, +2... so the
    # first strict improvement realizes (cost, |s|, negative-first) ties
    for k in range(mem_lo, mem_hi):
        r = members[k]
        start = read_ptr[r]
        lread = <int> (read_ptr[r + 1] - start)
        best_cost = 1 << 28
        best_s = 0
        for i in range(2 * slack + 1):
            s_abs = (i + 1) >> 1
            s = -s_abs if (i & 1) else s_abs
            off = <int> offsets[r] + s
            if off < 0 or off >= lread:
                continue
            sl_len = lread - off
            if sl_len > mlen:
                sl_len = mlen
            if sl_len == mlen and pivot_len == mlen:
                differs = 0
                for j in range(mlen):
                    if reads_flat[start + off + j] != pivot[j]:
                        differs = 1
                        break
                cost = mlen + 1 if differs else 0
                if differs:
                    cost = _edit_distance_raw(&reads_flat[start + off], sl_len,
                                              pivot, pivot_len)
            else:
                cost = _edit_distance_raw(&reads_flat[start + off], sl_len,
                                          pivot, pivot_len)
            if cost < best_cost:
                best_cost = cost
                best_s = s
            if best_cost == 0:
                break
        if best_cost >= (1 << 28):
            continue
        off = <int> offsets[r] + best_s
        sl_len = lread - off
        if sl_len > mlen:
            sl_len = mlen
        rp = &reads_flat[start + off]
        for j in range(sl_len):
            if rp[j] <= 3:
                votes[j][rp[j]] += 1
    for j in range(mlen):
        best_count = -1
        winner = 0
        for i in range(4):
            if votes[j][i] > best_count:
                best_count = votes[j][i]
                winner = i
        if best_count <= 0:
            winner = pivot[j] if j < pivot_len else 0
        elif j < pivot_len and pivot[j] <= 3 and votes[j][pivot[j]] == best_count:
            winner = pivot[j]  # ties resolve to the pivot's symbol
        out_motifs[c, j] = <unsigned char> winner
    out_ok[c] = 1


cdef inline u64 _mix64(u64 state) nogil:
    cdef u64 z = state
    z = (z ^ (z >> 30)) * <u64> 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <u64> 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 _next_u64(u64* state) nogil:
    state[0] = state[0] + <u64> 0x9E3779B97F4A7C15ULL
    return _mix64(state[0])


cdef inline double _u01(u64* state) nogil:
    return <double> (_next_u64(state) >> 11) * (2.0 ** -53)


def corrupt_read(const unsigned char[::1] codes, double error_rate,
                 double sd_frac, double wsub, double wins, double wdel,
                 u64 seed):
    """Seeded substitution/insertion/deletion corruption of one read.

    Edit count ~ round(Normal(rate*len, rate*len*sd_frac)) clamped at 0;
    positions uniform over the original read, applied left to right.
    Returns (corrupted uint8 array, n_sub, n_ins, n_del). Draw order is
    part of the channel contract: count, then (position, type) per edit,
    then payload draws in position order.
    """
    cdef int n = <int> codes.shape[0]
    cdef u64 state = seed
    cdef double mean, sd, u1, u2, g
    cdef int k, i, j
    if n == 0 or error_rate == 0.0:
        return np.asarray(codes).copy(), 0, 0, 0
    mean = error_rate * n
    sd = mean * sd_frac
    u1 = _u01(&state)
    u2 = _u01(&state)
    while u1 <= 1e-300:
        u1 = _u01(&state)
        u2 = _u01(&state)
    g = mean + sd * (sqrt(-2.0 * log(u1)) * cos(2.0 * M_PI * u2))
    k = <int> floor(g + 0.5)
    if k <= 0:
        return np.asarray(codes).copy(), 0, 0, 0
    pos_arr = np.zeros(k, dtype=np.int64)
    typ_arr = np.zeros(k, dtype=np.int64)
    out_arr = np.zeros(n + k, dtype=np.uint8)
    cdef long long[::1] pos = pos_arr
    cdef long long[::1] typ = typ_arr
    cdef unsigned char[::1] out = out_arr
    cdef double wtot = wsub + wins + wdel
    cdef double u
    cdef int out_len = 0, nsub = 0, nins = 0, ndel = 0
    cdef int cursor = 0, ei = 0, alive
    cdef unsigned char cur
    cdef long long p, tmp_p, tmp_t
    with nogil:
        for i in range(k):
            pos[i] = <long long> (_next_u64(&state) % <u64> n)
            u = _u01(&state) * wtot
            typ[i] = 0 if u < wsub else (1 if u < wsub + wins else 2)
        # stable insertion sort by position keeps draw order within a spot
        for i in range(1, k):
            tmp_p = pos[i]
            tmp_t = typ[i]
            j = i - 1
            while j >= 0 and pos[j] > tmp_p:
                pos[j + 1] = pos[j]
                typ[j + 1] = typ[j]
                j -= 1
            pos[j + 1] = tmp_p
            typ[j + 1] = tmp_t
        while ei < k:
            p = pos[ei]
            while cursor < p:
                out[out_len] = codes[cursor]
                out_len += 1
                cursor += 1
            alive = 1
            cur = codes[p]
            while ei < k and pos[ei] == p:
                if typ[ei] == 1:
                    out[out_len] = <unsigned char> (_next_u64(&state) % 4)
                    out_len += 1
                    nins += 1
                elif typ[ei] == 0 and alive:
                    cur = <unsigned char> ((cur + 1 + (_next_u64(&state) % 3)) % 4)
                    nsub += 1
                elif typ[ei] == 2 and alive:
                    alive = 0
                    ndel += 1
                ei += 1
            if alive:
                out[out_len] = cur
                out_len += 1
            cursor = <int> (p + 1)
        while cursor < n:
            out[out_len] = codes[cursor]
            out_len += 1
            cursor += 1
    return out_arr[:out_len], nsub, nins, ndel


def cgk_embed_batch(const unsigned char[::1] reads_flat,
                    const long long[::1] read_ptr,
                    const unsigned char[:, ::1] rbits,
                    unsigned char[:, ::1] out):
    """CGK walk per read; rbits[j, symbol] is the advance bit, pad = 4."""
    cdef int n_reads = <int> (read_ptr.shape[0] - 1)
    cdef int out_len = <int> rbits.shape[0]
    cdef int r, i, j, lread
    cdef long long start
    cdef unsigned char sym
    with nogil:
        for r in range(n_reads):
            start = read_ptr[r]
            lread = <int> (read_ptr[r + 1] - start)
            i = 0
            for j in range(out_len):
                if i < lread:
                    sym = reads_flat[start + i]
                    out[r, j] = sym
                    i += rbits[j, sym]
                else:
                    out[r, j] = 4
                    i += 1


def align_ops(const unsigned char[::1] read, const unsigned char[::1] ref,
              long long[::1] sub_counts, long long[::1] ins_counts,
              long long[::1] del_counts):
    """Global unit-cost alignment with a deterministic traceback (diagonal
    preferred, then deletion, then insertion); counts ops per reference
    position, insertions attaching to the preceding position (0 at start).
    Returns the edit distance."""
    cdef int lr = <int> read.shape[0]
    cdef int lf = <int> ref.shape[0]
    cdef int d
    cdef int* dp
    cdef unsigned char* bt
    dp = <int*> malloc((lr + 1) * (lf + 1) * sizeof(int))
    bt = <unsigned char*> malloc((lr + 1) * (lf + 1))
    if dp == NULL or bt == NULL:
        if dp != NULL:
            free(dp)
        if bt != NULL:
            free(bt)
        raise MemoryError
    with nogil:
        d = _align_ops_raw(&read[0] if lr else NULL, lr,
                           &ref[0] if lf else NULL, lf,
                           dp, bt,
                           &sub_counts[0] if sub_counts.shape[0] else NULL,
                           &ins_counts[0] if ins_counts.shape[0] else NULL,
                           &del_counts[0] if del_counts.shape[0] else NULL)
    free(dp)
    free(bt)
    return d


cdef int _align_ops_raw(const unsigned char* read, int lr,
                        const unsigned char* ref, int lf,
                        int* dp, unsigned char* bt,
                        long long* subc, long long* insc,
                        long long* delc) nogil:
    # axes: i over ref, j over read; bt codes 0=diag, 1=up(del), 2=left(ins)
    cdef int i, j, w, cur, best
    cdef unsigned char move
    w = lr + 1
    dp[0] = 0
    bt[0] = 0
    for j in range(1, lr + 1):
        dp[j] = j
        bt[j] = 2
    for i in range(1, lf + 1):
        dp[i * w] = i
        bt[i * w] = 1
        for j in range(1, lr + 1):
            best = dp[(i - 1) * w + (j - 1)] + (0 if ref[i - 1] == read[j - 1] else 1)
            move = 0
            cur = dp[(i - 1) * w + j] + 1
            if cur < best:
                best = cur
                move = 1
            cur = dp[i * w + (j - 1)] + 1
            if cur < best:
                best = cur
                move = 2
            dp[i * w + j] = best
            bt[i * w + j] = move
    i = lf
    j = lr
    while i > 0 or j > 0:
        move = bt[i * w + j]
        if move == 0:
            if ref[i - 1] != read[j - 1]:
                subc[i - 1] += 1
            i -= 1
            j -= 1
        elif move == 1:
            delc[i - 1] += 1
            i -= 1
        else:
            insc[i - 1 if i > 0 else 0] += 1
            j -= 1
    return dp[lf * w + lr]
