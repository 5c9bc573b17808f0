"""Device-independent randomness generation on the instrumental causal structure.

Simulate instrumental-scenario quantum statistics, certify smooth
min-entropy through the entropy accumulation bound, and distill the
certified bits with a quantum-proof Trevisan extractor.
"""

from .eatbound import (
    BoundResult,
    EATParams,
    certified_min_entropy,
    completeness,
    eta,
    eta_opt,
    randomness_gain,
    soundness,
)
from .protocol import (
    Backend,
    SeedPolicy,
    SessionConfig,
    SessionResult,
    estimate_violation,
    run_session,
)
from .qsim import (
    CLASSICAL_BOUND,
    QUANTUM_MAX,
    InstrumentalDistribution,
    InstrumentalStrategy,
    Observable,
    RunRecord,
    TwoQubitState,
    born_probabilities,
    canonical_strategy,
    classical_max,
    instrumental_value,
    noisy_singlet,
    sample_runs,
)
from .seedsource import (
    BeaconClient,
    BeaconRecord,
    BitStream,
    bernoulli_sample,
    bits_to_trits,
    fetch_beacon,
    file_source,
)
from .tradeoff import (
    UNLOWERED,
    BlockParams,
    TradeoffParams,
    expected_block_length,
    f_min,
    f_x,
    g,
    g_derivative,
)
from .trevisan import (
    BitSource,
    ExtractorParams,
    InsufficientEntropyError,
    compute_params,
    extract,
    one_bit_extract,
    tabulate_params,
)
from .weakdesign import (
    WeakDesign,
    block_weak_design,
    standard_weak_design,
    verify_weak_design,
)

__version__ = "0.1.0"
