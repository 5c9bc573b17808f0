"""Weak designs: families of seed-index sets with bounded cumulative overlap.

A weak (m, t, r, d)-design is a family of m size-t subsets S_i of [d] with
sum_{j<i} 2^{|S_j /\\ S_i|} <= r*m for every i.  Two constructions are
provided:

* the standard polynomial design over a prime field GF(q): the i-th set is
  the graph {(a, p_i(a))} of the i-th polynomial, flattened to a*q + p_i(a);
  achieves overlap r = 2e with seed length d = q^2;
* the block design: a cascade of standard designs on disjoint seed
  segments, geometrically shrinking set counts, achieving r = 1 at seed
  length d = (l+1) q^2.

The verifier checks the defining conditions exhaustively and is the
correctness contract for both constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

OVERLAP_R_STANDARD = 2.0 * math.e
OVERLAP_R_BLOCK = 1.0


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    k = max(n, 2)
    while not is_prime(k):
        k += 1
    return k


@dataclass(frozen=True)
class WeakDesign:
    """m index sets of size t inside [0, d), one per output bit.

    positions[i] lists set S_i; for the polynomial constructions entry k of
    a row lies in its own width-`stripe` window, which the verifier
    exploits.  Rows built from explicit sets carry stripe=None.
    """

    positions: np.ndarray
    t: int
    d: int
    kind: str
    stripe: int | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64)
        if pos.ndim != 2 or pos.shape[1] != self.t:
            raise ValueError(f"positions must be (m, {self.t}), got {pos.shape}")
        if pos.size and (pos.min() < 0 or pos.max() >= self.d):
            raise ValueError("set elements outside [0, d)")
        object.__setattr__(self, "positions", pos)

    @property
    def m(self) -> int:
        return self.positions.shape[0]

    def index_sets(self) -> list[frozenset[int]]:
        return [frozenset(int(v) for v in row) for row in self.positions]

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]], d: int) -> "WeakDesign":
        rows = [sorted(int(v) for v in s) for s in sets]
        t = len(rows[0]) if rows else 0
        if any(len(r) != t for r in rows):
            raise ValueError("all sets must have equal size")
        return cls(np.array(rows, dtype=np.int64).reshape(len(rows), t), t, d, "explicit")


@dataclass(frozen=True)
class DesignReport:
    """Outcome of verify_weak_design: worst overlap sum and its set index."""

    passed: bool
    m: int
    t: int
    r: float
    bound: float
    worst_index: int
    worst_sum: int
    size_ok: bool

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}: m={self.m} t={self.t} r={self.r:.4f} "
            f"worst sum {self.worst_sum} at i={self.worst_index} "
            f"(bound {self.bound:.1f}, sizes {'ok' if self.size_ok else 'BAD'})"
        )


def _poly_values(m: int, q: int) -> np.ndarray:
    """Values p_i(a) for a in [0,q) of the first m polynomials over GF(q).

    Polynomial i has the base-q digits of i as coefficients, lowest degree
    first; degrees stay below the minimal c with q^c >= m.
    """
    if m < 1:
        return np.zeros((0, q), dtype=np.int64)
    top = m - 1
    c = 1
    while q**c <= top:
        c += 1
    ii = np.arange(m, dtype=np.int64)
    digits = np.empty((m, c), dtype=np.int64)
    for k in range(c):
        digits[:, k] = ii % q
        ii //= q
    a = np.arange(q, dtype=np.int64)
    values = np.zeros((m, q), dtype=np.int64)
    for k in range(c - 1, -1, -1):  # Horner in the evaluation points
        values = (values * a + digits[:, k : k + 1]) % q
    return values


def standard_weak_design(m: int, t_prime: int) -> WeakDesign:
    """Polynomial design over GF(t_prime): S_i = {a*q + p_i(a)}, d = q^2."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not is_prime(t_prime):
        raise ValueError(f"t_prime must be prime, got {t_prime}")
    if m > t_prime**t_prime:
        raise ValueError("m exceeds the design capacity")
    q = t_prime
    values = _poly_values(m, q)
    positions = np.arange(q, dtype=np.int64) * q + values
    return WeakDesign(positions, t=q, d=q * q, kind="standard", stripe=q)


def block_schedule(m: int, l: int) -> list[int]:
    """Set counts per segment: ceil(rest / 2e) for the first l, remainder last.

    The geometric cascade keeps each segment's internal overlap contribution
    below what the remaining budget allows; the final remainder is small
    enough to be covered by mutually disjoint (constant-polynomial) sets.
    """
    r_prime = 2.0 * math.e
    counts = []
    rest = m
    for _ in range(l):
        take = min(rest, math.ceil(rest / r_prime))
        counts.append(take)
        rest -= take
    counts.append(rest)
    return counts


def block_weak_design(m: int, t_prime: int, l: int | None = None) -> WeakDesign:
    """Cascade of standard designs on l+1 disjoint seed segments, r = 1.

    When l is not given it is derived from (m, t_prime) by the same formula
    the parameter derivation uses for the sub-seed length.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not is_prime(t_prime):
        raise ValueError(f"t_prime must be prime, got {t_prime}")
    if l is None:
        l = block_depth(m, t_prime)
    q = t_prime
    counts = block_schedule(m, l)
    rows = []
    for seg, count in enumerate(counts):
        if count == 0:
            continue
        values = _poly_values(count, q)
        rows.append(seg * q * q + np.arange(q, dtype=np.int64) * q + values)
    positions = np.concatenate(rows, axis=0)
    return WeakDesign(positions, t=q, d=(l + 1) * q * q, kind="block", stripe=q)


def block_depth(m: int, t: int) -> int:
    """Number of cascade segments minus one for the block design."""
    r_prime = 2.0 * math.e
    if m - r_prime <= 1.0 or t - r_prime <= 1.0:
        return 1
    num = math.log2(m - r_prime) - math.log2(t - r_prime)
    den = math.log2(r_prime) - math.log2(r_prime - 1.0)
    return max(1, math.ceil(num / den))


def _overlap_sums_aligned(pos: np.ndarray, t: int) -> np.ndarray:
    """Exact per-set overlap sums for stripe-aligned designs.

    When every row keeps entry k inside its own stripe window and rows use
    identical or disjoint window ranges, positions can only coincide at
    equal entry index, so elementwise comparison counts intersections.
    Returns sum_{j<i} 2^{|S_j /\\ S_i|} as float (exact for the magnitudes
    the bound allows; overflow would only occur far beyond failure).
    """
    m = pos.shape[0]
    sums = np.zeros(m)
    two = 2.0 ** np.arange(t + 1)
    V = np.ascontiguousarray(pos, dtype=np.int32)
    for i in range(1, m):
        ov = np.count_nonzero(V[:i] == V[i], axis=1)
        sums[i] = two[ov].sum()
    return sums


def _is_stripe_aligned(pos: np.ndarray, stripe: int) -> bool:
    keys = pos // stripe
    t = pos.shape[1]
    if not (keys == keys[:, :1] + np.arange(t, dtype=np.int64)).all():
        return False
    return bool((keys[:, 0] % t == 0).all())


def _overlap_sums_generic(sets: list[frozenset[int]]) -> np.ndarray:
    m = len(sets)
    sums = np.zeros(m)
    for i in range(1, m):
        total = 0.0
        for j in range(i):
            total += 2.0 ** len(sets[i] & sets[j])
        sums[i] = total
    return sums


def verify_weak_design(design: WeakDesign, r: float) -> DesignReport:
    """Check |S_i| = t and the cumulative overlap condition for every i."""
    pos = design.positions
    m, t = pos.shape
    srt = np.sort(pos, axis=1)
    size_ok = bool((np.diff(srt, axis=1) > 0).all()) if t > 1 else True

    if design.stripe is not None and _is_stripe_aligned(pos, design.stripe):
        sums = _overlap_sums_aligned(pos, t)
    else:
        sums = _overlap_sums_generic(design.index_sets())

    bound = r * m
    worst = int(np.argmax(sums)) if m else 0
    worst_sum = int(sums[worst]) if m else 0
    passed = size_ok and bool((sums <= bound).all())
    return DesignReport(
        passed=passed,
        m=m,
        t=t,
        r=r,
        bound=bound,
        worst_index=worst,
        worst_sum=worst_sum,
        size_ok=size_ok,
    )
