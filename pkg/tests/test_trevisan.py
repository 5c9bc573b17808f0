import itertools
import math

import numpy as np
import pytest

from diqrng.gf2 import BinaryField
from diqrng.trevisan import (
    BitSource,
    InsufficientEntropyError,
    build_design,
    compute_params,
    extract,
    one_bit_extract,
    tabulate_params,
    write_table,
)
from diqrng.weakdesign import verify_weak_design


class TestComputeParams:
    def test_reference_instance(self):
        # n_in = 2 * 172095 raw bits, k = floor(0.031125 * 172095), block design
        p = compute_params(344190, 5356, 1e-6, "block")
        assert p.m == 5270
        assert p.t_raw == 122 and p.t == 122
        assert p.t_prime == 127
        assert p.l == 19
        assert p.d == 20 * 127 * 127
        assert p.r == 1.0

    def test_standard_variant(self):
        p = compute_params(344190, 5356, 1e-6, "standard")
        assert p.r == pytest.approx(2 * math.e)
        assert p.m == math.floor((5356 - 4 * math.log2(1e6) - 6) / (2 * math.e)) == 969
        assert p.l == 0
        assert p.d == 127 * 127

    def test_zero_output_boundary(self):
        # k exactly 4 log2(1/eps) + 6 gives m = 0
        eps = 2.0**-10
        with pytest.raises(InsufficientEntropyError):
            compute_params(1000, 46, eps, "block")
        p = compute_params(1000, 47, eps, "block")
        assert p.m == 1

    def test_sub_seed_length_invariant(self):
        for n_in in (256, 10_000, 344_190, 2**20):
            for eps in (1e-3, 1e-6, 1e-9):
                p = compute_params(n_in, max(200, int(0.1 * n_in)), eps, "block")
                assert p.t % 2 == 0
                assert p.t // 2 >= math.ceil(math.log2(n_in) + 2 * math.log2(2.0 / eps))
                assert p.t >= p.t_raw

    def test_validation(self):
        with pytest.raises(ValueError):
            compute_params(1, 1, 1e-6)
        with pytest.raises(ValueError):
            compute_params(100, 0, 1e-6)
        with pytest.raises(ValueError):
            compute_params(100, 200, 1e-6)  # claimed entropy above length
        with pytest.raises(ValueError):
            compute_params(100, 50, 1.5)


class TestOneBitExtract:
    def test_all_zero_source(self):
        src = BitSource(np.zeros(64, dtype=np.uint8), claimed_min_entropy=1)
        for bits in itertools.product((0, 1), repeat=8):
            assert one_bit_extract(src, np.array(bits, dtype=np.uint8)) == 0

    def test_zero_mask_half(self):
        rng = np.random.default_rng(1)
        src = BitSource(rng.integers(0, 2, 64).astype(np.uint8), claimed_min_entropy=1)
        for _ in range(20):
            alpha = rng.integers(0, 2, 4).astype(np.uint8)
            subseed = np.concatenate([alpha, np.zeros(4, dtype=np.uint8)])
            assert one_bit_extract(src, subseed) == 0

    def test_constant_polynomial_source(self):
        # source shorter than one field element: P(X) = c, output = parity(c & beta)
        c_bits = [1, 0, 1, 1]  # c = 0b1011
        src = BitSource(np.array(c_bits, dtype=np.uint8), claimed_min_entropy=1)
        for alpha in itertools.product((0, 1), repeat=4):
            for beta in itertools.product((0, 1), repeat=4):
                subseed = np.array(alpha + beta, dtype=np.uint8)
                beta_int = int("".join(map(str, beta)), 2)
                expected = bin(0b1011 & beta_int).count("1") & 1
                assert one_bit_extract(src, subseed) == expected

    def test_odd_subseed_rejected(self):
        src = BitSource(np.zeros(8, dtype=np.uint8), claimed_min_entropy=1)
        with pytest.raises(ValueError):
            one_bit_extract(src, np.zeros(7, dtype=np.uint8))

    def test_balanced_on_uniform_sources(self):
        # for any sub-seed whose mask half is nonzero, the output bit over a
        # uniformly drawn source is unbiased: 1e5 (source, sub-seed) draws
        rng = np.random.default_rng(31415)
        f = BinaryField(8)
        ones = 0
        total = 0
        for _ in range(100):
            bits = rng.integers(0, 2, 64).astype(np.uint8)
            src = BitSource(bits, claimed_min_entropy=8)
            coeffs = src.field_coefficients(8)
            alphas = rng.integers(0, 256, size=1000, dtype=np.uint64)
            betas = rng.integers(1, 256, size=1000, dtype=np.uint64)
            values = f.eval_poly_batch(coeffs, alphas)
            out = np.bitwise_count(values & betas) & np.uint64(1)
            ones += int(out.sum())
            total += out.size
        sigma = math.sqrt(0.25 * total)
        assert abs(ones - total / 2) < 3 * sigma

    def test_matches_direct_field_computation(self):
        # independent reconstruction: parse, Horner, inner product
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, 50).astype(np.uint8)
        src = BitSource(bits, claimed_min_entropy=10)
        f = BinaryField(5)
        chunks = [bits[i : i + 5] for i in range(0, 50, 5)]
        coeffs = [int("".join(map(str, ch)), 2) for ch in chunks]
        for _ in range(30):
            sub = rng.integers(0, 2, 10).astype(np.uint8)
            alpha = int("".join(map(str, sub[:5])), 2)
            beta = int("".join(map(str, sub[5:])), 2)
            acc = 0
            for c in reversed(coeffs):
                acc = f.mul(acc, alpha) ^ c
            assert one_bit_extract(src, sub) == (bin(acc & beta).count("1") & 1)


@pytest.fixture(scope="module")
def small_instance():
    rng = np.random.default_rng(42)
    params = compute_params(400, 150, 1e-2, "block")
    source = BitSource(rng.integers(0, 2, 400).astype(np.uint8), claimed_min_entropy=150)
    design = build_design(params)
    seed = rng.integers(0, 2, params.d).astype(np.uint8)
    return params, source, design, seed


class TestExtract:
    def test_deterministic(self, small_instance):
        params, source, design, seed = small_instance
        a = extract(source, seed, params, design)
        b = extract(source, seed, params, design)
        assert np.array_equal(a, b)

    def test_output_length(self, small_instance):
        params, source, design, seed = small_instance
        assert extract(source, seed, params, design).size == params.m

    def test_batch_matches_per_bit_scalar(self, small_instance):
        params, source, design, seed = small_instance
        batch = extract(source, seed, params, design)
        for i in range(params.m):
            sub = seed[design.positions[i, : params.t]]
            assert batch[i] == one_bit_extract(source, sub)

    def test_single_output_bit_is_first_set(self):
        rng = np.random.default_rng(0)
        params = compute_params(64, 47, 2.0**-10, "block")
        assert params.m == 1
        source = BitSource(rng.integers(0, 2, 64).astype(np.uint8), claimed_min_entropy=47)
        design = build_design(params)
        seed = rng.integers(0, 2, params.d).astype(np.uint8)
        out = extract(source, seed, params, design)
        assert out.size == 1
        assert out[0] == one_bit_extract(source, seed[design.positions[0, : params.t]])

    def test_dimension_mismatches_rejected(self, small_instance):
        params, source, design, seed = small_instance
        with pytest.raises(ValueError):
            extract(source, seed[:-1], params, design)
        short = BitSource(np.zeros(10, dtype=np.uint8), claimed_min_entropy=5)
        with pytest.raises(ValueError):
            extract(short, seed, params, design)

    def test_designs_verify_for_derived_params(self, small_instance):
        params, _, design, _ = small_instance
        assert verify_weak_design(design, params.r).passed


class TestBitSource:
    def test_claimed_entropy_bounded_by_length(self):
        with pytest.raises(ValueError):
            BitSource(np.zeros(8, dtype=np.uint8), claimed_min_entropy=9)

    def test_non_bits_rejected(self):
        with pytest.raises(ValueError):
            BitSource(np.array([0, 1, 2], dtype=np.uint8), claimed_min_entropy=1)

    def test_field_parsing_pads_with_zeros(self):
        src = BitSource(np.array([1, 1, 1], dtype=np.uint8), claimed_min_entropy=1)
        coeffs = src.field_coefficients(4)
        assert coeffs.tolist() == [0b1110]


class TestTabulate:
    def test_sub_seed_steps_down_as_error_grows(self):
        rows = tabulate_params([344190], [1e-9, 1e-7, 1e-5, 1e-3], [0.03], "block")
        ts = [r["t"] for r in rows]
        assert ts == sorted(ts, reverse=True)

    def test_seed_length_nondecreasing_in_input(self):
        rows = tabulate_params([2**12, 2**14, 2**16, 2**18, 2**20], [1e-7], [0.4], "block")
        ds = [r["d"] for r in rows]
        assert ds == sorted(ds)

    def test_output_linear_in_entropy(self):
        rows = tabulate_params([2**16], [1e-6], [0.2, 0.4, 0.6, 0.8], "block")
        ks = [math.floor(r["alpha"] * r["n_in"]) for r in rows]
        ms = [r["m"] for r in rows]
        offset = 4 * math.log2(1e6) + 6
        for k, m in zip(ks, ms):
            assert m == math.floor(k - offset)

    def test_seed_scaling_polylog(self):
        # d = O(log^3 n) along the block-design growth path: the ratio stays
        # bounded and stops growing once t' prime jumps wash out
        ratios = []
        for e in range(10, 31, 4):
            n_in = 2**e
            p = compute_params(n_in, int(0.4 * n_in), 1e-7, "block")
            ratios.append(p.d / math.log2(n_in) ** 3)
        assert max(ratios) < 200.0
        assert ratios[-1] < max(ratios)  # not divergent at the top end

    def test_csv_header(self, tmp_path):
        rows = tabulate_params([1024], [1e-4], [0.5], "block")
        out = tmp_path / "table.csv"
        write_table(rows, out)
        header = out.read_text().splitlines()[0]
        assert header == "n_in,eps_ext,alpha,t,l,d,m"
