"""Session orchestration: scheduling, estimation, abort rule, bound, extraction.

A session runs n rounds.  Each round draws the test flag T ~ Bernoulli(gamma)
from the public input stream; test rounds draw the setting x uniformly from
{1,2,3} (an exact trit), accumulation rounds fix x = 2.  Outcomes come from
the configured backend: either the built-in simulator (noisy singlet plus
the canonical strategy, or explicit state/strategy JSON) or a recorded
session file.  Test-round statistics give the violation estimate and its
standard error; the session aborts when the estimate falls below
I_exp - delta'.  Otherwise the certified min-entropy is computed at the
observed violation, the 2n outcome bits are fed to the Trevisan extractor
with a fresh seed, and the error budgets are reported.

The entropy bound is evaluated at the observed violation (with the
observed standard error entering both the evaluation point and the
completeness bound), mirroring how the registered violation, not the
threshold, determines the certified output of a finished session.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import records as recmod
from .eatbound import BoundResult, EATParams, certified_min_entropy, completeness, soundness
from .qsim import (
    COEFFS,
    QUANTUM_MAX,
    InstrumentalDistribution,
    InstrumentalStrategy,
    RunRecord,
    TwoQubitState,
    born_probabilities,
    canonical_strategy,
    instrumental_value,
    noisy_singlet,
    sample_runs,
    state_from_json,
    strategy_from_json,
)
from .seedsource import (
    BeaconClient,
    BeaconUnavailableError,
    BitStream,
    SeedExhaustedError,
    beacon_stream,
    bernoulli_sample,
    draw_trit,
    file_source,
)
from .tradeoff import BlockParams, TradeoffParams
from .trevisan import (
    BitSource,
    InsufficientEntropyError,
    build_design,
    compute_params,
    extract,
)


class SessionError(RuntimeError):
    """Infrastructure failure (seed exhaustion, backend failure); not an abort."""


class InsufficientDataError(ValueError):
    """Violation estimation needs at least one test run per setting."""


@dataclass(frozen=True)
class SeedPolicy:
    """Where protocol input bits and the extractor seed come from."""

    kind: str  # "file" | "beacon"
    path: str | None = None
    url: str | None = None
    cache_dir: str | None = None
    offline: bool = False
    start_time: int | None = None

    def open_stream(self) -> BitStream:
        if self.kind == "file":
            if not self.path:
                raise ValueError("file seed policy needs a path")
            return file_source(self.path)
        if self.kind == "beacon":
            client = BeaconClient(self.url, self.cache_dir, offline=self.offline)
            if self.start_time is None:
                raise ValueError("beacon seed policy needs a start_time")
            return beacon_stream(client, self.start_time)
        raise ValueError(f"unknown seed policy {self.kind!r}")


@dataclass(frozen=True)
class Backend:
    """Outcome source: simulator parameters or a recorded session."""

    kind: str  # "simulate" | "ingest"
    visibility: float = 1.0
    seed: int = 0
    state_json: str | None = None
    strategy_json: str | None = None
    records_path: str | None = None

    def distribution(self) -> InstrumentalDistribution:
        if self.kind != "simulate":
            raise ValueError("distribution only defined for the simulate backend")
        state: TwoQubitState = (
            state_from_json(Path(self.state_json).read_text())
            if self.state_json
            else noisy_singlet(self.visibility)
        )
        strategy: InstrumentalStrategy = (
            strategy_from_json(Path(self.strategy_json).read_text())
            if self.strategy_json
            else canonical_strategy()
        )
        return born_probabilities(state, strategy)


@dataclass(frozen=True)
class SessionConfig:
    eat: EATParams
    eps_ext: float
    design_kind: str
    seed: SeedPolicy
    backend: Backend
    gamma_exact: Fraction = Fraction(1)

    def __post_init__(self):
        if abs(float(self.gamma_exact) - self.eat.block.gamma) > 1e-12:
            raise ValueError("gamma_exact must match eat.block.gamma")

    @classmethod
    def from_json(cls, text: str) -> "SessionConfig":
        cfg = json.loads(text)
        gamma = cfg.get("gamma", 1)
        gamma_exact = (
            Fraction(gamma[0], gamma[1])
            if isinstance(gamma, list)
            else Fraction(str(gamma))
        )
        block = BlockParams(gamma=float(gamma_exact), s_max=int(cfg.get("s_max", 1)))
        tp = TradeoffParams(**cfg["tradeoff"]) if "tradeoff" in cfg else TradeoffParams()
        eat = EATParams(
            n=int(cfg["n"]),
            eps=float(cfg["eps"]),
            eps_EA=float(cfg["eps_ea"]),
            delta_prime=float(cfg.get("delta_prime", 0.0)),
            I_exp=float(cfg.get("i_exp", 3.5)),
            block=block,
            tradeoff=tp,
        )
        seed = SeedPolicy(**cfg["seed"])
        backend = Backend(**cfg["backend"])
        return cls(
            eat=eat,
            eps_ext=float(cfg.get("eps_ext", 1e-6)),
            design_kind=cfg.get("design", "block"),
            seed=seed,
            backend=backend,
            gamma_exact=gamma_exact,
        )

    def config_hash(self) -> str:
        blob = json.dumps(
            {
                "n": self.eat.n,
                "eps": self.eat.eps,
                "eps_ea": self.eat.eps_EA,
                "i_exp": self.eat.I_exp,
                "gamma": [self.gamma_exact.numerator, self.gamma_exact.denominator],
                "s_max": self.eat.block.s_max,
                "eps_ext": self.eps_ext,
                "design": self.design_kind,
                "backend": asdict(self.backend),
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class SessionResult:
    observed_I: float
    delta_prime_observed: float
    bound: BoundResult | None
    extracted: np.ndarray
    soundness: float
    completeness: float
    consumed_input_bits: int
    aborted: bool
    reason: str = ""
    m: int = 0
    net_gain: float = 0.0

    def to_json(self) -> str:
        bound = None
        if self.bound is not None:
            bound = {
                "rate": self.bound.rate,
                "total_bits": self.bound.total_bits,
                "optimal_cut": self.bound.optimal_cut,
                "aborted": self.bound.aborted,
                "eta_opt": self.bound.eta_opt,
                "evaluation_point": self.bound.evaluation_point,
            }
        return json.dumps(
            {
                "observed_I": self.observed_I,
                "delta_prime_observed": self.delta_prime_observed,
                "bound": bound,
                "m": self.m,
                "soundness": self.soundness,
                "completeness": self.completeness,
                "consumed_input_bits": self.consumed_input_bits,
                "net_gain": self.net_gain,
                "aborted": self.aborted,
                "reason": self.reason,
            },
            indent=2,
        )


def estimate_violation(test_records: Sequence[RunRecord]) -> tuple[float, float]:
    """Violation estimate and its 1-sigma delta-method standard error.

    Empirical frequencies per setting form p-hat(a,b|x); the estimate is the
    functional on p-hat and the error propagates the three independent
    multinomial covariances through the functional's coefficients.
    """
    counts = np.zeros((3, 2, 2))
    for r in test_records:
        if r.t != 1:
            continue
        counts[r.x - 1, r.a, r.b] += 1
    n_x = counts.sum(axis=(1, 2))
    if (n_x == 0).any():
        missing = [x + 1 for x in range(3) if n_x[x] == 0]
        raise InsufficientDataError(f"no test runs for settings {missing}")
    p_hat = counts / n_x[:, None, None]
    I_star = instrumental_value(InstrumentalDistribution(p_hat))
    var = 0.0
    for x in range(3):
        mean_h = (COEFFS[x] * p_hat[x]).sum()
        mean_h2 = (COEFFS[x] ** 2 * p_hat[x]).sum()
        var += (mean_h2 - mean_h**2) / n_x[x]
    return float(I_star), float(math.sqrt(max(var, 0.0)))


def _draw_settings(
    cfg: SessionConfig, stream: BitStream
) -> list[tuple[int, int]]:
    settings = []
    for _ in range(cfg.eat.n):
        t = bernoulli_sample(cfg.gamma_exact, stream)
        x = draw_trit(stream) if t == 1 else 2
        settings.append((x, t))
    return settings


def _collect_records(cfg: SessionConfig, stream: BitStream) -> list[RunRecord]:
    if cfg.backend.kind == "simulate":
        settings = _draw_settings(cfg, stream)
        dist = cfg.backend.distribution()
        return sample_runs(dist, settings, seed=cfg.backend.seed)
    if cfg.backend.kind == "ingest":
        if not cfg.backend.records_path:
            raise SessionError("ingest backend needs a records_path")
        recs, _ = recmod.read_records(cfg.backend.records_path)
        if len(recs) != cfg.eat.n:
            raise SessionError(
                f"record file has {len(recs)} runs, config expects {cfg.eat.n}"
            )
        return recs
    raise SessionError(f"unknown backend {cfg.backend.kind!r}")


def run_session(cfg: SessionConfig) -> SessionResult:
    """Execute the full pipeline and return the certified output."""
    stream = cfg.seed.open_stream()
    records = _collect_records(cfg, stream)

    test_records = [r for r in records if r.t == 1]
    observed_I, delta_obs = estimate_violation(test_records)

    def finish(bound, extracted, aborted, reason, m):
        consumed = stream.consumed
        eps_s = soundness(cfg.eat, m, cfg.eps_ext)
        eps_c = completeness(cfg.eat.n, delta_obs)
        return SessionResult(
            observed_I=observed_I,
            delta_prime_observed=delta_obs,
            bound=bound,
            extracted=extracted,
            soundness=eps_s,
            completeness=eps_c,
            consumed_input_bits=consumed,
            aborted=aborted,
            reason=reason,
            m=m,
            net_gain=m - consumed,
        )

    empty = np.zeros(0, dtype=np.uint8)
    if observed_I < cfg.eat.I_exp - delta_obs:
        return finish(None, empty, True, "violation below threshold", 0)

    bound_I = min(observed_I, QUANTUM_MAX)
    if bound_I <= 3.0:
        return finish(None, empty, False, "observed violation at classical bound", 0)
    eat = EATParams(
        n=cfg.eat.n,
        eps=cfg.eat.eps,
        eps_EA=cfg.eat.eps_EA,
        delta_prime=delta_obs,
        I_exp=bound_I,
        block=cfg.eat.block,
        tradeoff=cfg.eat.tradeoff,
    )
    bound = certified_min_entropy(eat)
    if bound.aborted or bound.total_bits < 1.0:
        return finish(bound, empty, False, "nonpositive entropy bound", 0)

    k = math.floor(bound.total_bits)
    source_bits = np.zeros(2 * len(records), dtype=np.uint8)
    for i, r in enumerate(records):
        source_bits[2 * i] = r.a
        source_bits[2 * i + 1] = r.b
    source = BitSource(source_bits, claimed_min_entropy=k)

    try:
        params = compute_params(len(source_bits), k, cfg.eps_ext, cfg.design_kind)
    except InsufficientEntropyError:
        return finish(bound, empty, False, "entropy below extractor minimum", 0)
    design = build_design(params)
    try:
        seed_bits = stream.read_bit_array(params.d)
    except (SeedExhaustedError, BeaconUnavailableError) as exc:
        raise SessionError(f"extractor seed acquisition failed: {exc}") from exc
    extracted = extract(source, seed_bits, params, design)
    return finish(bound, extracted, False, "", int(extracted.size))


def save_session(result: SessionResult, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "session.json").write_text(result.to_json())
    if result.extracted.size:
        recmod.write_bits(out / "extracted.bin", result.extracted)
