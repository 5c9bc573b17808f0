"""Binary extension fields GF(2^s) for the Reed-Solomon one-bit extractor.

Elements are nonnegative ints below 2^s whose bits are the coefficients of
a GF(2) polynomial; multiplication reduces modulo a fixed low-weight
irreducible polynomial per field size (the classic published table of
trinomials/pentanomials), so products are bit-exact across platforms.

Besides scalar arithmetic there is a vectorized many-point polynomial
evaluation used by the extractor hot path: one polynomial with thousands
of coefficients evaluated at thousands of points.  For s <= 63 it runs on
uint64 numpy arrays with per-point byte-window multiplication tables;
larger fields fall back to scalar Python-int arithmetic.
"""

from __future__ import annotations

import numpy as np

# Exponents of the middle terms of x^s + ... + 1 (degree s and constant
# term implied).  Low-weight irreducible polynomials over GF(2), degrees
# 1..64; the test suite re-verifies irreducibility independently.
IRREDUCIBLE_TAPS: dict[int, tuple[int, ...]] = {
    1: (), 2: (1,), 3: (1,), 4: (1,), 5: (2,), 6: (1,), 7: (1,),
    8: (4, 3, 1), 9: (1,), 10: (3,), 11: (2,), 12: (3,), 13: (4, 3, 1),
    14: (5,), 15: (1,), 16: (5, 3, 1), 17: (3,), 18: (3,), 19: (5, 2, 1),
    20: (3,), 21: (2,), 22: (1,), 23: (5,), 24: (4, 3, 1), 25: (3,),
    26: (4, 3, 1), 27: (5, 2, 1), 28: (1,), 29: (2,), 30: (1,), 31: (3,),
    32: (7, 3, 2), 33: (10,), 34: (7,), 35: (2,), 36: (9,), 37: (6, 4, 1),
    38: (6, 5, 1), 39: (4,), 40: (5, 4, 3), 41: (3,), 42: (7,),
    43: (6, 4, 3), 44: (5,), 45: (4, 3, 1), 46: (1,), 47: (5,),
    48: (5, 3, 2), 49: (9,), 50: (4, 3, 2), 51: (6, 3, 1), 52: (3,),
    53: (6, 2, 1), 54: (9,), 55: (7,), 56: (7, 4, 2), 57: (4,), 58: (19,),
    59: (7, 4, 2), 60: (1,), 61: (5, 2, 1), 62: (29,), 63: (1,),
    64: (4, 3, 1),
}


def modulus_mask(s: int) -> int:
    """Full bit mask of the degree-s irreducible polynomial."""
    if s not in IRREDUCIBLE_TAPS:
        raise ValueError(f"no irreducible polynomial tabulated for degree {s}")
    return (1 << s) | 1 | sum(1 << e for e in IRREDUCIBLE_TAPS[s])


class BinaryField:
    """Arithmetic in GF(2^s); addition is XOR, handled by callers directly."""

    def __init__(self, s: int):
        if s < 1:
            raise ValueError(f"field degree must be >= 1, got {s}")
        self.s = s
        self.order = 1 << s
        self.poly = modulus_mask(s)

    def mul(self, a: int, b: int) -> int:
        """Carryless multiply then reduce; shift-and-xor schoolbook."""
        if not (0 <= a < self.order and 0 <= b < self.order):
            raise ValueError("operands outside the field")
        res = 0
        top = self.order
        while b:
            if b & 1:
                res ^= a
            a <<= 1
            if a & top:
                a ^= self.poly
            b >>= 1
        return res

    def pow(self, a: int, e: int) -> int:
        res, base = 1, a
        while e:
            if e & 1:
                res = self.mul(res, base)
            base = self.mul(base, base)
            e >>= 1
        return res

    def eval_poly(self, coeffs: list[int], point: int) -> int:
        """Horner evaluation of sum coeffs[j] * X^j at the point."""
        acc = 0
        for c in reversed(coeffs):
            acc = self.mul(acc, point) ^ c
        return acc

    def eval_poly_batch(self, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Evaluate one polynomial at many points.

        Builds, per point, byte-window tables of multiples of that point so
        each Horner step is a handful of table gathers instead of a
        bit-serial multiply.  Exactly matches eval_poly bit for bit.
        """
        if self.s > 63:
            return np.array(
                [self.eval_poly([int(c) for c in coeffs], int(p)) for p in points],
                dtype=object,
            )
        points = np.asarray(points, dtype=np.uint64)
        coeffs = np.asarray(coeffs, dtype=np.uint64)
        n_pts = points.shape[0]
        n_win = (self.s + 7) // 8
        poly = np.uint64(self.poly & ((1 << 64) - 1))
        top = np.uint64(1 << self.s)

        # shifted[j] = points * x^j mod poly, j < 8*n_win
        shifted = np.empty((8 * n_win, n_pts), dtype=np.uint64)
        cur = points.copy()
        for j in range(8 * n_win):
            shifted[j] = cur
            cur = cur << np.uint64(1)
            over = (cur & top) != 0
            cur[over] ^= poly

        # tables[w][b] = (b << 8w) * point, built by peeling the lowest bit
        tables = np.zeros((n_win, 256, n_pts), dtype=np.uint64)
        for w in range(n_win):
            for b in range(1, 256):
                low = b & (-b)
                rest = b ^ low
                tables[w, b] = tables[w, rest] ^ shifted[8 * w + low.bit_length() - 1]

        byte_mask = np.uint64(0xFF)
        idx = np.arange(n_pts)
        acc = np.zeros(n_pts, dtype=np.uint64)
        for c in coeffs[::-1]:
            prod = tables[0, (acc & byte_mask).astype(np.int64), idx]
            for w in range(1, n_win):
                byte = ((acc >> np.uint64(8 * w)) & byte_mask).astype(np.int64)
                prod ^= tables[w, byte, idx]
            acc = prod ^ c
        return acc


def parity_of_and(values: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Inner product mod 2 of bit representations: parity(values & masks)."""
    return (np.bitwise_count(values & masks) & np.uint64(1)).astype(np.uint8)
