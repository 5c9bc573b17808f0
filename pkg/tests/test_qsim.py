import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diqrng.qsim import (
    CLASSICAL_BOUND,
    QUANTUM_MAX,
    SIGMA_X,
    SIGMA_Z,
    InstrumentalDistribution,
    InstrumentalStrategy,
    Observable,
    RunRecord,
    TwoQubitState,
    born_probabilities,
    canonical_strategy,
    classical_max,
    deterministic_distribution,
    instrumental_value,
    noisy_singlet,
    sample_runs,
    state_from_json,
    state_to_json,
    strategy_from_json,
    strategy_to_json,
)


def random_observable(rng) -> Observable:
    # random Bloch direction; dichotomic by construction
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    sy = np.array([[0, -1j], [1j, 0]])
    return Observable(v[0] * SIGMA_X + v[1] * sy + v[2] * SIGMA_Z)


def random_state(rng) -> TwoQubitState:
    # random mixed state from a random 4x8 isometry environment
    m = rng.normal(size=(4, 8)) + 1j * rng.normal(size=(4, 8))
    rho = m @ m.conj().T
    return TwoQubitState(rho / np.trace(rho).real)


def random_strategy(rng) -> InstrumentalStrategy:
    return InstrumentalStrategy(
        alice=tuple(random_observable(rng) for _ in range(3)),
        bob=tuple(random_observable(rng) for _ in range(2)),
    )


class TestNoisySinglet:
    def test_pure_limit(self):
        assert noisy_singlet(1.0).purity() == pytest.approx(1.0, abs=1e-12)

    def test_maximally_mixed_limit(self):
        eig = np.linalg.eigvalsh(noisy_singlet(0.0).rho)
        assert np.allclose(eig, 0.25, atol=1e-12)

    def test_half_visibility_spectrum(self):
        # independent oracle: eigensolver on 0.5*P_singlet + 0.5*I/4
        eig = np.sort(np.linalg.eigvalsh(noisy_singlet(0.5).rho))
        assert np.allclose(eig, [0.125, 0.125, 0.125, 0.625], atol=1e-12)

    @pytest.mark.parametrize("v", [-0.01, 1.01, 2.0])
    def test_out_of_range(self, v):
        with pytest.raises(ValueError):
            noisy_singlet(v)


class TestCanonicalStrategy:
    def test_alice3_is_sigma_z(self):
        assert np.allclose(canonical_strategy().alice_op(3).op, np.diag([1, -1]))

    def test_alice1_squares_to_identity(self):
        op = canonical_strategy().alice_op(1).op
        assert np.allclose(op @ op, np.eye(2), atol=1e-12)

    def test_bob_sum(self):
        s = canonical_strategy()
        total = s.bob_op(0).op + s.bob_op(1).op
        assert np.allclose(total, -math.sqrt(2) * SIGMA_Z, atol=1e-12)

    def test_exact_operators(self):
        s = canonical_strategy()
        s2 = math.sqrt(2)
        assert np.allclose(s.alice_op(1).op, -(SIGMA_Z - SIGMA_X) / s2)
        assert np.allclose(s.alice_op(2).op, -SIGMA_X)
        assert np.allclose(s.bob_op(0).op, (SIGMA_X - SIGMA_Z) / s2)
        assert np.allclose(s.bob_op(1).op, -(SIGMA_X + SIGMA_Z) / s2)


class TestBornProbabilities:
    def test_maximally_mixed_is_uniform(self):
        dist = born_probabilities(noisy_singlet(0.0), canonical_strategy())
        assert np.allclose(dist.p, 0.25, atol=1e-12)

    def test_singlet_reaches_quantum_max(self):
        dist = born_probabilities(noisy_singlet(1.0), canonical_strategy())
        assert instrumental_value(dist) == pytest.approx(QUANTUM_MAX, abs=1e-9)

    def test_visibility_scaling(self):
        dist = born_probabilities(noisy_singlet(0.9), canonical_strategy())
        assert instrumental_value(dist) == pytest.approx(0.9 * QUANTUM_MAX, abs=1e-10)

    def test_linearity_in_visibility(self):
        for v in np.linspace(0.0, 1.0, 101):
            dist = born_probabilities(noisy_singlet(v), canonical_strategy())
            assert instrumental_value(dist) == pytest.approx(v * QUANTUM_MAX, abs=1e-10)

    def test_normalization_random_cases(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            dist = born_probabilities(random_state(rng), random_strategy(rng))
            assert np.abs(dist.p.sum(axis=(1, 2)) - 1.0).max() < 1e-12

    def test_no_signaling_to_past(self):
        # Bob's outcome-dependent choice must not move Alice's marginal
        rng = np.random.default_rng(23)
        for _ in range(20):
            state, strategy = random_state(rng), random_strategy(rng)
            dist = born_probabilities(state, strategy)
            for x in (1, 2, 3):
                for a in (0, 1):
                    proj = np.kron(strategy.alice_op(x).projector(a), np.eye(2))
                    direct = np.trace(proj @ state.rho).real
                    assert dist.alice_marginal(x, a) == pytest.approx(direct, abs=1e-12)


class TestInstrumentalValue:
    def test_uniform_gives_zero(self):
        dist = InstrumentalDistribution(np.full((3, 2, 2), 0.25))
        assert instrumental_value(dist) == pytest.approx(0.0, abs=1e-14)

    def test_hand_computed_deterministic_points(self):
        assert instrumental_value(deterministic_distribution((0, 0, 0), (0, 0))) == 3.0
        assert instrumental_value(deterministic_distribution((1, 1, 1), (1, 1))) == -1.0


class TestClassicalMax:
    def test_maximum_is_three(self):
        best, argmax = classical_max()
        assert best == CLASSICAL_BOUND == 3.0
        assert ((0, 0, 0), (0, 0)) in argmax

    def test_argmax_strategies_reach_max(self):
        best, argmax = classical_max()
        for f, g in argmax:
            assert instrumental_value(deterministic_distribution(f, g)) == best


class TestTsirelsonScan:
    def test_numeric_maximum_never_exceeds_quantum_max(self):
        # coarse multistart maximization over Bloch-vector strategies on the singlet
        import scipy.optimize

        singlet = noisy_singlet(1.0)
        sy = np.array([[0, -1j], [1j, 0]])

        def observable(theta, phi):
            v = np.array(
                [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
            )
            return Observable(v[0] * SIGMA_X + v[1] * sy + v[2] * SIGMA_Z)

        def negative_value(angles):
            alice = tuple(observable(angles[2 * i], angles[2 * i + 1]) for i in range(3))
            bob = tuple(observable(angles[6 + 2 * i], angles[7 + 2 * i]) for i in range(2))
            strat = InstrumentalStrategy(alice=alice, bob=bob)
            return -instrumental_value(born_probabilities(singlet, strat))

        rng = np.random.default_rng(5)
        best = math.inf
        for _ in range(40):
            x0 = rng.uniform(0, math.pi, size=10)
            res = scipy.optimize.minimize(negative_value, x0, method="Nelder-Mead",
                                          options={"maxiter": 2000, "xatol": 1e-8, "fatol": 1e-12})
            best = min(best, res.fun)
        assert -best <= QUANTUM_MAX + 1e-6
        assert -best == pytest.approx(QUANTUM_MAX, abs=1e-4)  # scan actually finds the peak


class TestSampleRuns:
    def test_point_mass(self):
        p = np.zeros((3, 2, 2))
        p[:, 0, 0] = 1.0
        dist = InstrumentalDistribution(p)
        recs = sample_runs(dist, [(1, 1), (2, 0), (3, 1)], seed=9)
        assert all(r.a == 0 and r.b == 0 for r in recs)
        assert [r.x for r in recs] == [1, 2, 3]
        assert [r.t for r in recs] == [1, 0, 1]

    def test_determinism(self):
        dist = InstrumentalDistribution(np.full((3, 2, 2), 0.25))
        settings = [(1 + i % 3, 1) for i in range(500)]
        assert sample_runs(dist, settings, seed=77) == sample_runs(dist, settings, seed=77)

    def test_chunked_matches_sequential(self):
        dist = born_probabilities(noisy_singlet(0.9), canonical_strategy())
        settings = [(1 + i % 3, 1) for i in range(1001)]
        seq = sample_runs(dist, settings, seed=3)
        par = sample_runs(dist, settings, seed=3, chunk_size=256)
        assert seq == par

    def test_uniform_frequencies(self):
        dist = InstrumentalDistribution(np.full((3, 2, 2), 0.25))
        n = 1_000_000
        settings = [(1 + i % 3, 1) for i in range(n)]
        recs = sample_runs(dist, settings, seed=13)
        counts = np.zeros((3, 2, 2))
        for r in recs:
            counts[r.x - 1, r.a, r.b] += 1
        per_x = counts.sum(axis=(1, 2))
        freq = counts / per_x[:, None, None]
        sigma = np.sqrt(0.25 * 0.75 / per_x)[:, None, None]
        assert (np.abs(freq - 0.25) < 5 * sigma).all()

    def test_empty_settings_rejected(self):
        dist = InstrumentalDistribution(np.full((3, 2, 2), 0.25))
        with pytest.raises(ValueError):
            sample_runs(dist, [], seed=1)


class TestValidation:
    def test_distribution_negative_entry_rejected(self):
        p = np.full((3, 2, 2), 0.25)
        p[0, 0, 0] = -1e-3
        p[0, 1, 1] = 0.25 + 1e-3
        with pytest.raises(ValueError):
            InstrumentalDistribution(p)

    def test_distribution_tiny_negatives_clamped(self):
        p = np.full((3, 2, 2), 0.25)
        p[0] = np.array([[-1e-15, 0.5], [0.25, 0.25 + 1e-15]])
        dist = InstrumentalDistribution(p)
        assert dist.p.min() >= 0.0

    def test_observable_must_be_dichotomic(self):
        with pytest.raises(ValueError):
            Observable(np.diag([1.0, -0.5]))

    def test_state_must_be_psd(self):
        m = np.diag([0.5, 0.5, 0.5, -0.5])
        with pytest.raises(ValueError):
            TwoQubitState(m)

    def test_run_record_ranges(self):
        with pytest.raises(ValueError):
            RunRecord(x=0, a=0, b=0, t=0)
        with pytest.raises(ValueError):
            RunRecord(x=1, a=2, b=0, t=0)


class TestJsonRoundtrip:
    def test_state_roundtrip(self):
        state = noisy_singlet(0.7)
        again = state_from_json(state_to_json(state))
        assert np.allclose(state.rho, again.rho, atol=0)

    def test_strategy_roundtrip(self):
        strat = canonical_strategy()
        again = strategy_from_json(strategy_to_json(strat))
        for x in (1, 2, 3):
            assert np.allclose(strat.alice_op(x).op, again.alice_op(x).op, atol=0)
        for a in (0, 1):
            assert np.allclose(strat.bob_op(a).op, again.bob_op(a).op, atol=0)

    def test_complex_entries_as_re_im_pairs(self):
        import json

        payload = json.loads(state_to_json(noisy_singlet(1.0)))
        entry = payload["rho"][1][2]  # row-major [row][col]
        assert entry == pytest.approx([-0.5, 0.0], abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(v=st.floats(min_value=0.0, max_value=1.0))
def test_visibility_linearity_property(v):
    dist = born_probabilities(noisy_singlet(v), canonical_strategy())
    assert instrumental_value(dist) == pytest.approx(v * QUANTUM_MAX, abs=1e-10)
