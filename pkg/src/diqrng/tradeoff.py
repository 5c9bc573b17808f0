"""Per-setting min-entropy lower bounds and the piecewise min-tradeoff function.

The certified randomness per run is bounded from below by fitted curves of
the form u - w*I - z*sqrt(I_max - I) in the observed violation I, one curve
for setting x=1 and a shared curve for x=2,3.  The block-level function g
combines them according to the test/accumulation schedule, and f_min glues
g to its tangent above a cut point so that the derivative entering the
accumulation penalty stays bounded.

Two sets of fit constants are exposed: the lowered defaults used for
certification (so the curves never overestimate the numerically computed
bounds) and the raw unlowered fits, kept for cross-validation against the
SDP certifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .qsim import QUANTUM_MAX


@dataclass(frozen=True)
class TradeoffParams:
    """Fit constants (u, w, z) for x=1 and the shared x=2,3 curve.

    Defaults are the lowered constants; only these should feed certification.
    """

    u1: float = 3.062
    w1: float = 0.542
    z1: float = 1.579
    u23: float = 3.735
    w23: float = 0.657
    z23: float = 1.942

    def __post_init__(self):
        if min(self.w1, self.z1, self.w23, self.z23) <= 0:
            raise ValueError("w and z constants must be positive")


#: Raw (unlowered) fit constants; for validation only, never certification.
UNLOWERED = TradeoffParams(u1=3.067, u23=3.740)


@dataclass(frozen=True)
class BlockParams:
    """Test-run probability gamma and the maximum block length s_max."""

    gamma: float
    s_max: int

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0,1], got {self.gamma}")
        if self.s_max < 1:
            raise ValueError(f"s_max must be a positive integer, got {self.s_max}")

    def test_fraction(self) -> float:
        """Probability that a block contains a test run: 1 - (1-gamma)^s_max."""
        return 1.0 - (1.0 - self.gamma) ** self.s_max


#: Slack absorbing float roundoff at the domain edges (e.g. 3*(I_max/3)).
DOMAIN_TOL = 1e-9


def _check_violation_domain(I: float) -> float:
    if not -DOMAIN_TOL <= I <= QUANTUM_MAX + DOMAIN_TOL:
        raise ValueError(f"violation {I} outside [0, {QUANTUM_MAX}]")
    return min(max(I, 0.0), QUANTUM_MAX)


def _fit(I: float, u: float, w: float, z: float) -> float:
    I = _check_violation_domain(I)
    return u - w * I - z * math.sqrt(QUANTUM_MAX - I)


def f_x(I: float, x: int, tp: TradeoffParams | None = None) -> float:
    """Entropy bound (bits per run) for setting x, floored at zero.

    The raw fits cross zero near the classical bound; a negative entropy
    bound is vacuous, so the value is clamped at 0.
    """
    return max(0.0, f_x_raw(I, x, tp))


def f_x_raw(I: float, x: int, tp: TradeoffParams | None = None) -> float:
    """Unclamped fit value, needed by the block combination g."""
    tp = tp or TradeoffParams()
    if x == 1:
        return _fit(I, tp.u1, tp.w1, tp.z1)
    if x in (2, 3):
        return _fit(I, tp.u23, tp.w23, tp.z23)
    raise ValueError(f"setting must be in {{1,2,3}}, got {x}")


def expected_block_length(bp: BlockParams) -> float:
    """Expected number of runs per block, s' = (1-(1-gamma)^s_max)/gamma."""
    return bp.test_fraction() / bp.gamma


def g(I_star: float, bp: BlockParams, tp: TradeoffParams | None = None) -> float:
    """Entropy per block as a function of the unnormalized test-run violation.

    I_star is the violation functional applied to the joint test-run
    distribution p(a,b,x,T=1); the normalized violation is
    3*I_star/(1-(1-gamma)^s_max) and must lie in [0, I_max].
    """
    tp = tp or TradeoffParams()
    frac = bp.test_fraction()
    sp = expected_block_length(bp)
    I_bar = _check_violation_domain(3.0 * I_star / frac)
    u = tp.u1 + (sp - 1.0) * tp.u23
    w = tp.w1 + (sp - 1.0) * tp.w23
    z = tp.z1 + (sp - 1.0) * tp.z23
    return u - w * I_bar - z * math.sqrt(QUANTUM_MAX - I_bar)


def g_derivative(I_star: float, bp: BlockParams, tp: TradeoffParams | None = None) -> float:
    """d g / d I_star, including the 3/(1-(1-gamma)^s_max) chain factor.

    Singular where the normalized violation reaches the quantum maximum.
    """
    tp = tp or TradeoffParams()
    frac = bp.test_fraction()
    sp = expected_block_length(bp)
    I_bar = _check_violation_domain(3.0 * I_star / frac)
    if QUANTUM_MAX - I_bar < 1e-12:
        raise ValueError("derivative singular at the maximal violation")
    w = tp.w1 + (sp - 1.0) * tp.w23
    z = tp.z1 + (sp - 1.0) * tp.z23
    chain = 3.0 / frac
    return chain * (-w + z / (2.0 * math.sqrt(QUANTUM_MAX - I_bar)))


def f_min(
    I_star: float,
    I_star_t: float,
    bp: BlockParams,
    tp: TradeoffParams | None = None,
) -> float:
    """Min-tradeoff function: g below the cut point, its tangent line above.

    Continuous and differentiable at the junction by construction; the
    tangent lies below g everywhere because g is convex.
    """
    if I_star <= I_star_t:
        return g(I_star, bp, tp)
    return g(I_star_t, bp, tp) + g_derivative(I_star_t, bp, tp) * (I_star - I_star_t)
