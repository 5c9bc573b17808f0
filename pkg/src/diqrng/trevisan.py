"""Trevisan extractor: parameter derivation, RS-Hadamard one-bit core, extraction.

The extractor turns n_in raw bits of claimed min-entropy k into m nearly
uniform bits using a seed of d bits.  A weak design splits the seed into m
overlapping sub-seeds; each sub-seed drives one invocation of the one-bit
extractor, which is a position in the concatenation of a Reed-Solomon code
over GF(2^(t/2)) with a Hadamard code: the first half of the sub-seed
picks the RS evaluation point, the second half picks a bit of the Hadamard
encoding of the evaluated symbol.

Parameter conventions (logs base 2):

    t   = 2*ceil(log n_in + 2 log(2/eps_ext)), bumped by 2 while the RS
          code cannot hold the source at field size 2^(t/2);
    m   = floor((k - 4 log(1/eps_ext) - 6)/r), r = 1 (block) or 2e;
    l   = max{1, ceil((log(m-2e) - log(t-2e)) / (log 2e - log(2e-1)))};
    d   = (l+1)*t'^2 where t' is the smallest prime >= t (the polynomial
          design needs a prime field; the one-bit extractor consumes the
          first t bits of each size-t' sub-seed).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gf2 import BinaryField, parity_of_and
from .weakdesign import (
    OVERLAP_R_BLOCK,
    OVERLAP_R_STANDARD,
    WeakDesign,
    block_depth,
    block_weak_design,
    next_prime,
    standard_weak_design,
)


class InsufficientEntropyError(ValueError):
    """The claimed min-entropy cannot support even one output bit."""


@dataclass(frozen=True)
class ExtractorParams:
    """Derived extractor geometry for one (n_in, k, eps_ext) instance."""

    n_in: int
    k: int
    eps_ext: float
    design_kind: str
    t_raw: int
    t: int
    t_prime: int
    l: int
    d: int
    m: int
    r: float


@dataclass
class BitSource:
    """A finite bit string with a claimed min-entropy."""

    bits: np.ndarray
    claimed_min_entropy: int
    _coeff_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1:
            raise ValueError("bits must be a flat bit array")
        if ((bits != 0) & (bits != 1)).any():
            raise ValueError("bits must be 0/1")
        if self.claimed_min_entropy > bits.size:
            raise ValueError("claimed min-entropy exceeds the source length")
        self.bits = bits

    def __len__(self) -> int:
        return int(self.bits.size)

    def field_coefficients(self, s: int) -> np.ndarray:
        """Source parsed as GF(2^s) elements, big-endian, coefficient 0 first."""
        if s not in self._coeff_cache:
            n = self.bits.size
            n_chunks = (n + s - 1) // s
            padded = np.zeros(n_chunks * s, dtype=np.uint64)
            padded[:n] = self.bits
            chunks = padded.reshape(n_chunks, s)
            coeffs = np.zeros(n_chunks, dtype=np.uint64)
            for j in range(s):
                coeffs |= chunks[:, j] << np.uint64(s - 1 - j)
            self._coeff_cache[s] = coeffs
        return self._coeff_cache[s]


def compute_params(
    n_in: int, k: int | float, eps_ext: float, design_kind: str = "block"
) -> ExtractorParams:
    """Derive (t, l, d, m, r) from source length, min-entropy, and error."""
    if n_in < 2:
        raise ValueError(f"source length must be >= 2, got {n_in}")
    if not 0.0 < eps_ext < 1.0:
        raise ValueError(f"eps_ext must lie in (0,1), got {eps_ext}")
    if not 0 < k <= n_in:
        raise ValueError(f"min-entropy must lie in (0, n_in], got {k}")
    if design_kind not in ("block", "standard"):
        raise ValueError(f"design kind must be block or standard, got {design_kind}")

    k = math.floor(k)
    t_raw = 2 * math.ceil(math.log2(n_in) + 2.0 * math.log2(2.0 / eps_ext))
    t = t_raw
    # raise the code degree rather than truncating the source
    while 2 ** (t // 2) < math.ceil(n_in / (t // 2)):
        t += 2

    r = OVERLAP_R_BLOCK if design_kind == "block" else OVERLAP_R_STANDARD
    m = math.floor((k - 4.0 * math.log2(1.0 / eps_ext) - 6.0) / r)
    if m < 1:
        raise InsufficientEntropyError(
            f"min-entropy {k} supports no output at eps_ext={eps_ext} (r={r:.3f})"
        )

    l = block_depth(m, t) if design_kind == "block" else 0
    t_prime = next_prime(t)
    d = (l + 1) * t_prime * t_prime
    return ExtractorParams(
        n_in=n_in,
        k=k,
        eps_ext=eps_ext,
        design_kind=design_kind,
        t_raw=t_raw,
        t=t,
        t_prime=t_prime,
        l=l,
        d=d,
        m=m,
        r=r,
    )


def build_design(params: ExtractorParams) -> WeakDesign:
    """Construct the weak design matching the derived parameters."""
    if params.design_kind == "block":
        return block_weak_design(params.m, params.t_prime, params.l)
    return standard_weak_design(params.m, params.t_prime)


def one_bit_extract(source: BitSource, subseed) -> int:
    """One output bit from the source and a single even-length sub-seed.

    The first half selects the Reed-Solomon evaluation point, the second
    half the Hadamard mask; the output is the inner product mod 2 of the
    evaluated symbol with the mask.
    """
    subseed = np.asarray(subseed, dtype=np.uint8)
    t = subseed.size
    if t < 2 or t % 2 != 0:
        raise ValueError(f"sub-seed length must be even and >= 2, got {t}")
    s = t // 2
    alpha = 0
    beta = 0
    for j in range(s):
        alpha = (alpha << 1) | int(subseed[j])
        beta = (beta << 1) | int(subseed[s + j])
    fieldo = BinaryField(s)
    coeffs = [int(c) for c in source.field_coefficients(s)]
    value = fieldo.eval_poly(coeffs, alpha)
    return int(bin(value & beta).count("1") & 1)


def extract(
    source: BitSource,
    seed_bits,
    params: ExtractorParams,
    design: WeakDesign | None = None,
) -> np.ndarray:
    """Full extraction: output bit i = one_bit_extract on sub-seed S_i.

    Vectorized across the m output bits; bit-identical to calling
    one_bit_extract per set in order.
    """
    seed = np.asarray(seed_bits, dtype=np.uint8)
    if seed.size != params.d:
        raise ValueError(f"seed must have {params.d} bits, got {seed.size}")
    if len(source) != params.n_in:
        raise ValueError(f"source must have {params.n_in} bits, got {len(source)}")
    if design is None:
        design = build_design(params)
    if design.m != params.m or design.d != params.d or design.t != params.t_prime:
        raise ValueError("design geometry does not match the extractor parameters")

    t = params.t
    s = t // 2
    sub = seed[design.positions[:, :t]]  # (m, t)
    alphas = np.zeros(params.m, dtype=np.uint64)
    betas = np.zeros(params.m, dtype=np.uint64)
    for j in range(s):
        alphas |= sub[:, j].astype(np.uint64) << np.uint64(s - 1 - j)
        betas |= sub[:, s + j].astype(np.uint64) << np.uint64(s - 1 - j)

    fieldo = BinaryField(s)
    coeffs = source.field_coefficients(s)
    if s > 63:
        values = np.array(
            [fieldo.eval_poly([int(c) for c in coeffs], int(a)) for a in alphas],
            dtype=object,
        )
        return np.array(
            [bin(int(v) & int(b)).count("1") & 1 for v, b in zip(values, betas)],
            dtype=np.uint8,
        )
    values = fieldo.eval_poly_batch(coeffs, alphas)
    return parity_of_and(values, betas)


TABLE_HEADER = ("n_in", "eps_ext", "alpha", "t", "l", "d", "m")


def tabulate_params(
    n_in_grid, eps_ext_grid, alpha_grid, design_kind: str = "block"
) -> list[dict]:
    """Parameter table rows over the given grids; k = floor(alpha * n_in).

    Grid cells whose entropy cannot support one output bit are skipped.
    """
    rows = []
    for n_in in n_in_grid:
        for eps_ext in eps_ext_grid:
            for alpha in alpha_grid:
                try:
                    p = compute_params(n_in, alpha * n_in, eps_ext, design_kind)
                except InsufficientEntropyError:
                    continue
                rows.append(
                    {
                        "n_in": n_in,
                        "eps_ext": eps_ext,
                        "alpha": alpha,
                        "t": p.t,
                        "l": p.l,
                        "d": p.d,
                        "m": p.m,
                    }
                )
    return rows


def write_table(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TABLE_HEADER)
        writer.writeheader()
        writer.writerows(rows)
