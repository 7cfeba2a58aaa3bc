"""Reed-Solomon over GF(2^m): systematic encode, errors-and-erasures decode.

Codewords are symbol vectors [data | parity] of length n <= 2^m - 1
(shorter n gives the usual shortened code). The decoder corrects any
pattern with 2*errors + erasures <= n - k and reports failure otherwise;
a final syndrome re-check guarantees it never silently returns a wrong
codeword for a detectable pattern.
"""

from __future__ import annotations

import numpy as np

from .gf import GF2m


class ReedSolomon:
    def __init__(self, m: int, n: int, k: int, poly: int | None = None):
        if not 0 < k < n <= (1 << m) - 1:
            raise ValueError(f"need 0 < k < n <= {(1 << m) - 1}, got n={n} k={k}")
        self.field = GF2m(m, poly)
        self.n = n
        self.k = k
        self.nsym = n - k
        gf = self.field
        # generator g(x) = prod_{j=0..nsym-1} (x - alpha^j), ascending coeffs
        g = np.array([1], dtype=np.int64)
        for j in range(self.nsym):
            g = gf.poly_mul(g, np.array([gf.pow_alpha(j), 1], dtype=np.int64))
        self.generator = g
        self._parity_rows = self._build_parity_rows()
        # syndrome exponent table: S_j = sum_i r_i * alpha^(j*(n-1-i))
        j = np.arange(self.nsym, dtype=np.int64)[:, None]
        i = np.arange(self.n, dtype=np.int64)[None, :]
        self._synd_expo = (j * ((self.n - 1) - i)) % gf.order
        self._pos_logs = (-(self.n - 1 - np.arange(self.n, dtype=np.int64))) % gf.order

    def _build_parity_rows(self) -> np.ndarray:
        """Row i = x^(n-1-i) mod g(x): parity contribution of data symbol i."""
        gf = self.field
        nsym = self.nsym
        g = self.generator
        rows = np.zeros((self.k, nsym), dtype=np.int64)
        # start from x^nsym mod g (the last data symbol), then multiply by x
        r = np.zeros(nsym, dtype=np.int64)
        lead = 1  # polynomial x^nsym has leading coefficient 1
        r ^= gf.vmul(np.full(nsym, lead), g[:nsym])
        rows[self.k - 1] = r
        for i in range(self.k - 2, -1, -1):
            lead = r[nsym - 1]
            r2 = np.zeros(nsym, dtype=np.int64)
            r2[1:] = r[: nsym - 1]
            if lead:
                r2 ^= gf.vmul(np.full(nsym, lead), g[:nsym])
            r = r2
            rows[i] = r
        return rows

    def encode(self, data: np.ndarray) -> np.ndarray:
        """k data symbols -> n codeword symbols (systematic)."""
        data = np.asarray(data, dtype=np.int64)
        if data.shape != (self.k,):
            raise ValueError(f"expected {self.k} data symbols, got {data.shape}")
        gf = self.field
        nz = np.nonzero(data)[0]
        parity = np.zeros(self.nsym, dtype=np.int64)
        if len(nz):
            dlog = gf.log[data[nz]]
            rows = self._parity_rows[nz]
            prod = np.where(
                rows != 0, gf.exp[(dlog[:, None] + gf.log[rows]) % gf.order], 0
            )
            parity = np.bitwise_xor.reduce(prod, axis=0)
        # parity rows are ascending in x; wire order puts high powers first
        return np.concatenate([data, parity[::-1]])

    def syndromes(self, received: np.ndarray) -> np.ndarray:
        gf = self.field
        nz = np.nonzero(received)[0]
        if len(nz) == 0:
            return np.zeros(self.nsym, dtype=np.int64)
        rlog = gf.log[received[nz]]
        prod = gf.exp[(rlog[None, :] + self._synd_expo[:, nz]) % gf.order]
        return np.bitwise_xor.reduce(prod, axis=1)

    def decode(
        self, received: np.ndarray, erasures: np.ndarray | None = None
    ) -> tuple[np.ndarray, np.ndarray] | None:
        """Correct `received` in place of unknown errors plus flagged erasures.

        Returns (data_symbols, corrected_codeword) or None on failure.
        """
        received = np.asarray(received, dtype=np.int64)
        if received.shape != (self.n,):
            raise ValueError(f"expected {self.n} symbols, got {received.shape}")
        gf = self.field
        erase_pos = (
            np.nonzero(np.asarray(erasures, dtype=bool))[0]
            if erasures is not None
            else np.array([], dtype=np.int64)
        )
        if len(erase_pos) > self.nsym:
            return None
        work = received.copy()
        work[erase_pos] = 0
        synd = self.syndromes(work)
        if not synd.any():
            return work[: self.k], work
        # erasure locator Gamma(x) = prod (1 + X_l x), X_l = alpha^(n-1-pos)
        gamma = np.array([1], dtype=np.int64)
        for p in erase_pos:
            xl = gf.pow_alpha(self.n - 1 - int(p))
            gamma = gf.poly_mul(gamma, np.array([1, xl], dtype=np.int64))
        e_count = len(erase_pos)
        # Forney syndromes: T = S * Gamma mod x^nsym, BM sees errors only
        t_poly = gf.poly_mul(synd, gamma)[: self.nsym]
        lam = self._berlekamp_massey(t_poly, e_count)
        n_errors = len(lam) - 1
        if 2 * n_errors + e_count > self.nsym:
            return None
        psi = gf.poly_mul(lam, gamma)
        # Chien search over codeword positions: roots of Psi at X_i^(-1)
        vals = gf.poly_eval_many(psi, self._pos_logs)
        err_pos = np.nonzero(vals == 0)[0]
        deg_psi = self._degree(psi)
        if len(err_pos) != deg_psi:
            return None
        omega = gf.poly_mul(synd, psi)[: self.nsym]
        psi_prime = psi.copy()
        psi_prime[::2] = 0  # formal derivative in char 2: odd coeffs shift down
        psi_prime = psi_prime[1:] if len(psi_prime) > 1 else np.array([0], np.int64)
        inv_logs = self._pos_logs[err_pos]
        omega_v = gf.poly_eval_many(omega, inv_logs)
        denom_v = gf.poly_eval_many(psi_prime, inv_logs)
        if np.any(denom_v == 0):
            return None
        # e_l = X_l * Omega(X_l^-1) / Psi'(X_l^-1)
        xl_logs = (self.n - 1 - err_pos) % gf.order
        mags = np.zeros(len(err_pos), dtype=np.int64)
        nz = omega_v != 0
        mags[nz] = gf.exp[
            (gf.log[omega_v[nz]] + xl_logs[nz] - gf.log[denom_v[nz]]) % gf.order
        ]
        work[err_pos] ^= mags
        if self.syndromes(work).any():
            return None
        return work[: self.k], work

    @staticmethod
    def _degree(poly: np.ndarray) -> int:
        nz = np.nonzero(poly)[0]
        return int(nz[-1]) if len(nz) else 0

    def _berlekamp_massey(self, fsynd: np.ndarray, n_erasures: int) -> np.ndarray:
        """Error locator from Forney syndromes (ascending coefficients).

        The first n_erasures entries of the Forney syndrome sequence are
        consumed by the erasure locator, so iteration starts past them.
        """
        gf = self.field

        def scale(p: list[int], c: int) -> list[int]:
            return [gf.mul(c, x) for x in p]

        def add(a: list[int], b: list[int]) -> list[int]:
            if len(a) < len(b):
                a = a + [0] * (len(b) - len(a))
            for j, x in enumerate(b):
                a[j] ^= x
            return a

        lam = [1]
        old = [1]
        for i in range(self.nsym - n_erasures):
            K = i + n_erasures
            delta = int(fsynd[K])
            for j in range(1, len(lam)):
                if lam[j] and K - j >= 0:
                    delta ^= gf.mul(lam[j], int(fsynd[K - j]))
            old = [0] + old
            if delta != 0:
                if len(old) > len(lam):
                    new = scale(old, delta)
                    old = scale(lam, gf.inv(delta))
                    lam = new
                lam = add(lam, scale(old, delta))
        while len(lam) > 1 and lam[-1] == 0:
            lam.pop()
        return np.array(lam, dtype=np.int64)
