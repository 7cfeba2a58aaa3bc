"""Regular LDPC code with erasure-aware belief-propagation decoding.

Construction is Gallager-style: every variable node has degree 3 and the
3n edge sockets are dealt to checks by a seeded permutation, so the code
is fully reproducible from (data_bits, parity_bits, seed). Encoding is
systematic: a packed GF(2) elimination over the parity-check matrix picks
an invertible parity column set and yields a dense parity generator.
Decoding runs normalized min-sum with erasures entering as zero LLRs and
stops early once every parity check is satisfied.
"""

from __future__ import annotations

import numpy as np

from .prng import Stream, derive_seed

_MINSUM_ALPHA = 0.75
_CHANNEL_LLR = 2.0


class LdpcDecodeFailure(Exception):
    pass


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    """(m, n) 0/1 uint8 -> (m, ceil(n/64)) uint64 little-bit packing."""
    m, n = rows.shape
    words = (n + 63) // 64
    padded = np.zeros((m, words * 64), dtype=np.uint8)
    padded[:, :n] = rows
    bits = padded.reshape(m, words, 64).astype(np.uint64)
    shifts = np.arange(64, dtype=np.uint64)
    return (bits << shifts).sum(axis=2, dtype=np.uint64)


class LdpcCode:
    def __init__(self, data_bits: int, parity_bits: int, seed: int, var_degree: int = 3):
        if data_bits <= 0 or parity_bits <= 0:
            raise ValueError("data_bits and parity_bits must be positive")
        self.k = data_bits
        self.m = parity_bits
        self.n = data_bits + parity_bits
        self.seed = seed
        self.var_degree = var_degree
        built = False
        for attempt in range(64):
            if self._try_build(derive_seed(seed, attempt)):
                built = True
                break
        if not built:
            raise ValueError("could not build a full-rank parity-check matrix")

    def _try_build(self, seed: int) -> bool:
        n, m, dv = self.n, self.m, self.var_degree
        rng = Stream(seed)
        edges = dv * n
        base, extra = divmod(edges, m)
        sockets: list[int] = []
        for c in range(m):
            sockets.extend([c] * (base + (1 if c < extra else 0)))
        rng.shuffle(sockets)
        # deal dv sockets per variable, repairing duplicate checks by
        # swapping with not-yet-dealt sockets only
        var_checks = np.empty((n, dv), dtype=np.int64)
        for v in range(n):
            lo = v * dv
            tri = sockets[lo : lo + dv]
            guard = 0
            while len(set(tri)) < dv:
                rest = edges - (lo + dv)
                if rest <= 0 or guard >= 64:
                    return False
                j = lo + dv + rng.randrange(rest)
                a = rng.randrange(dv)
                sockets[lo + a], sockets[j] = sockets[j], sockets[lo + a]
                tri = sockets[lo : lo + dv]
                guard += 1
            var_checks[v] = tri
        # packed elimination to find an invertible parity column set
        rows = np.zeros((m, n), dtype=np.uint8)
        for v in range(n):
            rows[var_checks[v], v] ^= 1
        packed = _pack_rows(rows)
        pivot_row_of_col: dict[int, int] = {}
        row_used = np.zeros(m, dtype=bool)
        for col in range(n - 1, -1, -1):
            w, b = divmod(col, 64)
            have = ((packed[:, w] >> np.uint64(b)) & np.uint64(1)).astype(bool)
            cand = np.nonzero(have & ~row_used)[0]
            if len(cand) == 0:
                continue
            piv = int(cand[0])
            row_used[piv] = True
            others = np.nonzero(have)[0]
            others = others[others != piv]
            if len(others):
                packed[others] ^= packed[piv]
            pivot_row_of_col[col] = piv
            if len(pivot_row_of_col) == m:
                break
        if len(pivot_row_of_col) < m:
            return False
        parity_cols = sorted(pivot_row_of_col)
        data_cols = sorted(set(range(n)) - set(parity_cols))
        # after full elimination row r says: x[pivcol(r)] = sum of its data bits
        self._data_cols = np.array(data_cols, dtype=np.int64)
        self._parity_cols = np.array(parity_cols, dtype=np.int64)
        gen = np.zeros((self.m, self.k), dtype=np.uint8)
        for j, col in enumerate(parity_cols):
            r = pivot_row_of_col[col]
            w = np.array(data_cols, dtype=np.int64)
            bits = (packed[r, w // 64] >> (w % 64).astype(np.uint64)) & np.uint64(1)
            gen[j] = bits.astype(np.uint8)
        # packed by data column: encode is an XOR-reduce over set data bits
        self._gen_cols_packed = _pack_rows(gen.T)
        # wire position: [data | parity]; natural column -> wire index
        nat_to_wire = np.empty(n, dtype=np.int64)
        nat_to_wire[self._data_cols] = np.arange(self.k)
        nat_to_wire[self._parity_cols] = self.k + np.arange(self.m)
        # group edges by check for the BP message arrays
        check_lists: list[list[int]] = [[] for _ in range(m)]
        for v in range(n):
            wire_v = int(nat_to_wire[v])
            for c in var_checks[v]:
                check_lists[int(c)].append(wire_v)
        dcmax = max(len(lst) for lst in check_lists)
        self._edge_var = np.zeros((m, dcmax), dtype=np.int64)
        self._edge_mask = np.zeros((m, dcmax), dtype=bool)
        for c, lst in enumerate(check_lists):
            self._edge_var[c, : len(lst)] = lst
            self._edge_mask[c, : len(lst)] = True
        self.check_degree_max = dcmax
        return True

    def encode(self, data: np.ndarray) -> np.ndarray:
        """k data bits -> n codeword bits, data first."""
        data = np.asarray(data, dtype=np.uint8)
        if data.shape != (self.k,):
            raise ValueError(f"expected {self.k} bits, got {data.shape}")
        sel = self._gen_cols_packed[data.astype(bool)]
        if len(sel):
            words = np.bitwise_xor.reduce(sel, axis=0)
            shifts = np.arange(64, dtype=np.uint64)
            bits = ((words[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
            parity = bits.reshape(-1)[: self.m]
        else:
            parity = np.zeros(self.m, dtype=np.uint8)
        return np.concatenate([data, parity])

    def syndrome_weight(self, bits: np.ndarray) -> int:
        ev, em = self._edge_var, self._edge_mask
        s = (bits[ev] * em).sum(axis=1) & 1
        return int(s.sum())

    def syndrome_ok(self, bits: np.ndarray) -> bool:
        return self.syndrome_weight(bits) == 0

    def decode(
        self,
        bits: np.ndarray,
        erased: np.ndarray | None = None,
        max_iters: int = 50,
        stall_patience: int = 6,
    ) -> tuple[np.ndarray, np.ndarray] | None:
        """Min-sum BP over hard bits with optional per-bit erasure flags.

        Returns (data_bits, codeword_bits) or None if the parity checks are
        still unsatisfied; gives up early when the unsatisfied-check count
        stops improving for `stall_patience` iterations.
        """
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (self.n,):
            raise ValueError(f"expected {self.n} bits, got {bits.shape}")
        lam = np.where(bits == 0, _CHANNEL_LLR, -_CHANNEL_LLR).astype(np.float32)
        if erased is not None:
            lam[np.asarray(erased, dtype=bool)] = 0.0
        hard = (lam < 0).astype(np.uint8)
        if self.syndrome_ok(hard):
            return hard[: self.k], hard
        ev, em = self._edge_var, self._edge_mask
        v_msg = lam[ev].astype(np.float32)
        c_msg = np.zeros_like(v_msg)
        best_weight = self.n + 1
        stalled = 0
        for _ in range(max_iters):
            mag = np.where(em, np.abs(v_msg), np.float32(np.inf))
            min1_idx = np.argmin(mag, axis=1)
            rows = np.arange(mag.shape[0])
            min1 = mag[rows, min1_idx]
            mag2 = mag.copy()
            mag2[rows, min1_idx] = np.inf
            min2 = mag2.min(axis=1)
            out_mag = np.where(
                np.arange(mag.shape[1])[None, :] == min1_idx[:, None],
                min2[:, None],
                min1[:, None],
            )
            sgn = np.where(v_msg > 0, 1.0, np.where(v_msg < 0, -1.0, 0.0))
            sgn = np.where(em, sgn, 1.0).astype(np.float32)
            zeros = (sgn == 0).sum(axis=1)
            prod_nonzero = np.prod(np.where(sgn == 0, 1.0, sgn), axis=1)
            # sign product excluding edge e: zero unless every other edge is known
            out_sgn = np.where(
                zeros[:, None] == 0,
                prod_nonzero[:, None] * sgn,
                np.where(
                    (zeros[:, None] == 1) & (sgn == 0), prod_nonzero[:, None], 0.0
                ),
            )
            c_msg = (_MINSUM_ALPHA * out_sgn * np.where(np.isinf(out_mag), 0.0, out_mag)).astype(
                np.float32
            )
            c_msg[~em] = 0.0
            flat_v = ev[em]
            totals = lam + np.bincount(
                flat_v, weights=c_msg[em].astype(np.float64), minlength=self.n
            ).astype(np.float32)
            v_msg = np.where(em, totals[ev] - c_msg, 0.0).astype(np.float32)
            hard = (totals < 0).astype(np.uint8)
            weight = self.syndrome_weight(hard)
            if weight == 0:
                return hard[: self.k], hard
            if weight < best_weight:
                best_weight = weight
                stalled = 0
            else:
                stalled += 1
                if stalled >= stall_patience:
                    return None
        return None
