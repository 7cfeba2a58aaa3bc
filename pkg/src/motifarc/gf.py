"""GF(2^m) arithmetic via log/antilog tables, with numpy batch helpers."""

from __future__ import annotations

import numpy as np

# One primitive polynomial per supported symbol width. Recorded in the pool
# manifest so both ends of the pipeline always build identical tables.
PRIMITIVE_POLYS = {4: 0x13, 8: 0x11D, 10: 0x409, 12: 0x1053, 16: 0x1100B}


class GF2m:
    """Field tables for GF(2^m) with generator alpha = 2."""

    def __init__(self, m: int, poly: int | None = None):
        if poly is None:
            if m not in PRIMITIVE_POLYS:
                raise ValueError(f"no default primitive polynomial for m={m}")
            poly = PRIMITIVE_POLYS[m]
        self.m = m
        self.poly = poly
        self.order = (1 << m) - 1
        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.zeros(self.order + 1, dtype=np.int64)
        x = 1
        for i in range(self.order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & (1 << m):
                x ^= poly
        if x != 1:
            raise ValueError(f"0x{poly:x} is not primitive for GF(2^{m})")
        exp[self.order :] = exp[: self.order]
        self.exp = exp
        self.log = log

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by zero in GF")
        if a == 0:
            return 0
        return int(self.exp[(self.log[a] - self.log[b]) % self.order])

    def inv(self, a: int) -> int:
        return self.div(1, a)

    def pow_alpha(self, e: int) -> int:
        """alpha**e for any integer exponent."""
        return int(self.exp[e % self.order])

    def vmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise product of two arrays of field elements."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[(self.log[a] + self.log[b]) % self.order]
        return np.where((a == 0) | (b == 0), 0, out)

    def poly_eval_many(self, coeffs: np.ndarray, point_logs: np.ndarray) -> np.ndarray:
        """Evaluate one polynomial (ascending coeffs) at alpha**point_logs.

        Returns an array of field values, one per point.
        """
        coeffs = np.asarray(coeffs, dtype=np.int64)
        point_logs = np.asarray(point_logs, dtype=np.int64)
        nz = np.nonzero(coeffs)[0]
        if len(nz) == 0:
            return np.zeros(len(point_logs), dtype=np.int64)
        clog = self.log[coeffs[nz]]
        expo = (point_logs[:, None] * nz[None, :] + clog[None, :]) % self.order
        terms = self.exp[expo]
        return np.bitwise_xor.reduce(terms, axis=1)

    def poly_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Product of two polynomials (ascending coefficient arrays)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = np.zeros(len(a) + len(b) - 1, dtype=np.int64)
        for i, ai in enumerate(a):
            if ai:
                out[i : i + len(b)] ^= self.vmul(np.full(len(b), ai), b)
        return out
