"""Exact two-qubit statistics for the three-setting instrumental scenario.

Alice measures one of three dichotomic observables selected by the setting
x in {1,2,3}; Bob's observable is selected by Alice's outcome a.  This
module computes the resulting joint distribution p(a,b|x) from the Born
rule, evaluates the instrumental inequality functional on it, enumerates
the deterministic strategies to confirm the classical bound of 3, and
samples raw runs reproducibly.

Outcome convention: bit 0 corresponds to eigenvalue +1, bit 1 to -1, so
that correlators read <AB>_x = sum_{a,b} (-1)^(a+b) p(a,b|x).  Under this
convention the canonical strategy on the singlet reaches 1 + 2*sqrt(2).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
EIGENVALUE_TOL = 1e-10
NEGATIVE_PROB_TOL = 1e-14
NORMALIZATION_TOL = 1e-12

#: Largest value of the instrumental functional reachable by quantum models.
QUANTUM_MAX = 1.0 + 2.0 * math.sqrt(2.0)

#: Largest value reachable by classical causal models (verified by classical_max).
CLASSICAL_BOUND = 3.0

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

# Coefficient of p(a,b|x) in the functional
# I = <A>_1 - <B>_1 + 2<B>_2 - <AB>_1 + 2<AB>_3.
COEFFS = np.zeros((3, 2, 2))
for _a in (0, 1):
    for _b in (0, 1):
        COEFFS[0, _a, _b] = (-1) ** _a - (-1) ** _b - (-1) ** (_a + _b)
        COEFFS[1, _a, _b] = 2 * (-1) ** _b
        COEFFS[2, _a, _b] = 2 * (-1) ** (_a + _b)
del _a, _b


@dataclass(frozen=True)
class TwoQubitState:
    """A 4x4 density operator."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError(f"density operator must be 4x4, got {rho.shape}")
        if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL:
            raise ValueError("density operator is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > TRACE_TOL or abs(np.trace(rho).imag) > TRACE_TOL:
            raise ValueError("density operator does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
            raise ValueError("density operator is not positive semidefinite")
        object.__setattr__(self, "rho", rho)

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)


@dataclass(frozen=True)
class Observable:
    """A 2x2 Hermitian operator with eigenvalues +-1."""

    op: np.ndarray

    def __post_init__(self):
        op = np.asarray(self.op, dtype=complex)
        if op.shape != (2, 2):
            raise ValueError(f"observable must be 2x2, got {op.shape}")
        if np.abs(op - op.conj().T).max() > HERMITIAN_TOL:
            raise ValueError("observable is not Hermitian")
        eig = np.sort(np.linalg.eigvalsh(op))
        if abs(eig[0] + 1.0) > EIGENVALUE_TOL or abs(eig[1] - 1.0) > EIGENVALUE_TOL:
            raise ValueError(f"observable eigenvalues {eig} are not (-1, +1)")
        object.__setattr__(self, "op", op)

    def projector(self, outcome: int) -> np.ndarray:
        """Projector onto the eigenspace selected by the outcome bit."""
        return (np.eye(2, dtype=complex) + (-1) ** outcome * self.op) / 2.0


@dataclass(frozen=True)
class InstrumentalStrategy:
    """Alice's three observables (settings 1..3) and Bob's two (selected by a)."""

    alice: tuple[Observable, Observable, Observable]
    bob: tuple[Observable, Observable]

    def __post_init__(self):
        if len(self.alice) != 3 or len(self.bob) != 2:
            raise ValueError("strategy needs 3 Alice observables and 2 Bob observables")

    def alice_op(self, x: int) -> Observable:
        if x not in (1, 2, 3):
            raise ValueError(f"setting must be in {{1,2,3}}, got {x}")
        return self.alice[x - 1]

    def bob_op(self, a: int) -> Observable:
        if a not in (0, 1):
            raise ValueError(f"outcome bit must be 0 or 1, got {a}")
        return self.bob[a]


@dataclass(frozen=True)
class InstrumentalDistribution:
    """Joint outcome distribution p(a,b|x), stored as p[x-1, a, b]."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (3, 2, 2):
            raise ValueError(f"distribution must have shape (3,2,2), got {p.shape}")
        if p.min() < -NEGATIVE_PROB_TOL:
            raise ValueError(f"negative probability {p.min()}")
        sums = p.sum(axis=(1, 2))
        if np.abs(sums - 1.0).max() > NORMALIZATION_TOL:
            raise ValueError(f"per-setting sums {sums} deviate from 1")
        object.__setattr__(self, "p", np.clip(p, 0.0, None))

    def prob(self, x: int, a: int, b: int) -> float:
        return float(self.p[x - 1, a, b])

    def alice_marginal(self, x: int, a: int) -> float:
        return float(self.p[x - 1, a, :].sum())


@dataclass(frozen=True)
class RunRecord:
    """One raw run: setting, both outcome bits, and the test flag."""

    x: int
    a: int
    b: int
    t: int

    def __post_init__(self):
        if self.x not in (1, 2, 3):
            raise ValueError(f"x must be in {{1,2,3}}, got {self.x}")
        for name in ("a", "b", "t"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be a bit")


def noisy_singlet(v: float) -> TwoQubitState:
    """Singlet mixed with white noise at visibility v."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0,1], got {v}")
    psi = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / math.sqrt(2.0)
    return TwoQubitState(v * np.outer(psi, psi.conj()) + (1.0 - v) * np.eye(4) / 4.0)


def canonical_strategy() -> InstrumentalStrategy:
    """The five measurement operators reaching the quantum maximum on the singlet."""
    s2 = math.sqrt(2.0)
    return InstrumentalStrategy(
        alice=(
            Observable(-(SIGMA_Z - SIGMA_X) / s2),
            Observable(-SIGMA_X),
            Observable(SIGMA_Z),
        ),
        bob=(
            Observable((SIGMA_X - SIGMA_Z) / s2),
            Observable(-(SIGMA_X + SIGMA_Z) / s2),
        ),
    )


def born_probabilities(
    state: TwoQubitState, strategy: InstrumentalStrategy
) -> InstrumentalDistribution:
    """p(a,b|x) = Tr[(P_{a|x} (x) P_{b|y=a}) rho], Bob's setting equal to Alice's outcome."""
    p = np.zeros((3, 2, 2))
    for x in (1, 2, 3):
        for a in (0, 1):
            pa = strategy.alice_op(x).projector(a)
            for b in (0, 1):
                pb = strategy.bob_op(a).projector(b)
                p[x - 1, a, b] = np.trace(np.kron(pa, pb) @ state.rho).real
    return InstrumentalDistribution(p)


def instrumental_value(dist: InstrumentalDistribution) -> float:
    """Evaluate <A>_1 - <B>_1 + 2<B>_2 - <AB>_1 + 2<AB>_3 on the distribution."""
    return float((COEFFS * dist.p).sum())


def deterministic_distribution(
    f: Sequence[int], g: Sequence[int]
) -> InstrumentalDistribution:
    """Point-mass distribution of the deterministic strategy a = f(x), b = g(a)."""
    p = np.zeros((3, 2, 2))
    for x in (1, 2, 3):
        a = f[x - 1]
        p[x - 1, a, g[a]] = 1.0
    return InstrumentalDistribution(p)


def classical_max() -> tuple[float, list[tuple[tuple[int, int, int], tuple[int, int]]]]:
    """Brute-force maximum of the functional over all 32 deterministic strategies.

    Returns the maximum and the list of (f, g) response functions attaining it,
    with f = (a for x=1,2,3) and g = (b for a=0,1).
    """
    best = -math.inf
    argmax: list[tuple[tuple[int, int, int], tuple[int, int]]] = []
    for f in itertools.product((0, 1), repeat=3):
        for g in itertools.product((0, 1), repeat=2):
            value = instrumental_value(deterministic_distribution(f, g))
            if value > best + 1e-14:
                best, argmax = value, [(f, g)]
            elif abs(value - best) <= 1e-14:
                argmax.append((f, g))
    return best, argmax


def sample_runs(
    dist: InstrumentalDistribution,
    settings: Sequence[tuple[int, int]],
    seed: int,
    chunk_size: int | None = None,
) -> list[RunRecord]:
    """Draw (a,b) ~ p(.,.|x) for each (x, t) pair in settings.

    Outcomes are drawn by inverse CDF over (a,b) in lexicographic order from
    one uniform variate per run.  The variate stream is Philox keyed by the
    seed, one 64-bit draw per run, so results are reproducible and chunkable:
    a chunk starting at run i uses the same stream advanced by i draws
    (chunk_size must be a multiple of 4, the Philox output block).
    """
    if len(settings) == 0:
        raise ValueError("settings must be nonempty")
    xs = np.fromiter((s[0] for s in settings), dtype=np.int64, count=len(settings))
    ts = np.fromiter((s[1] for s in settings), dtype=np.int64, count=len(settings))
    if xs.min() < 1 or xs.max() > 3:
        raise ValueError("settings contain an x outside {1,2,3}")

    n = len(xs)
    if chunk_size is None:
        u = np.random.Generator(np.random.Philox(key=seed)).random(n)
    else:
        if chunk_size % 4 != 0:
            raise ValueError("chunk_size must be a multiple of 4 (Philox block)")
        parts = []
        for start in range(0, n, chunk_size):
            bg = np.random.Philox(key=seed)
            bg.advance(start // 4)
            count = min(chunk_size, n - start)
            parts.append(np.random.Generator(bg).random(count))
        u = np.concatenate(parts)

    # cdf[x-1] over outcomes (0,0),(0,1),(1,0),(1,1)
    cdf = np.cumsum(dist.p.reshape(3, 4), axis=1)
    thresholds = cdf[xs - 1, :3]
    outcome = (u[:, None] >= thresholds).sum(axis=1)
    return [
        RunRecord(int(x), int(o) >> 1, int(o) & 1, int(t))
        for x, o, t in zip(xs, outcome, ts)
    ]


# ---------------------------------------------------------------------------
# JSON import/export: complex entries as [re, im] pairs, row-major.


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def _matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def state_to_json(state: TwoQubitState) -> str:
    return json.dumps({"rho": _matrix_to_json(state.rho)})


def state_from_json(text: str) -> TwoQubitState:
    return TwoQubitState(_matrix_from_json(json.loads(text)["rho"]))


def strategy_to_json(strategy: InstrumentalStrategy) -> str:
    return json.dumps(
        {
            "alice": [_matrix_to_json(o.op) for o in strategy.alice],
            "bob": [_matrix_to_json(o.op) for o in strategy.bob],
        }
    )


def strategy_from_json(text: str) -> InstrumentalStrategy:
    data = json.loads(text)
    return InstrumentalStrategy(
        alice=tuple(Observable(_matrix_from_json(m)) for m in data["alice"]),
        bob=tuple(Observable(_matrix_from_json(m)) for m in data["bob"]),
    )
