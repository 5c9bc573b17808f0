"""Command-line interface for simulation, bounds, extraction, and full sessions."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import records as recmod
from .eatbound import EATParams, certified_min_entropy
from .protocol import SessionConfig, run_session, save_session
from .qsim import (
    born_probabilities,
    canonical_strategy,
    classical_max,
    noisy_singlet,
    sample_runs,
)
from .seedsource import file_source
from .tradeoff import BlockParams, TradeoffParams
from .trevisan import BitSource, build_design, compute_params, extract, tabulate_params, write_table


@click.group()
def main():
    """Device-independent randomness generation on the instrumental structure."""


@main.command()
@click.option("--visibility", type=float, default=1.0, show_default=True)
@click.option("--n", type=int, required=True, help="Number of runs.")
@click.option("--seed", type=int, default=0, show_default=True, help="Simulator RNG key.")
@click.option("--out", type=click.Path(), required=True, help="Records file to write.")
def simulate(visibility, n, seed, out):
    """Simulate n test runs of the canonical strategy on a noisy singlet."""
    dist = born_probabilities(noisy_singlet(visibility), canonical_strategy())
    rng = np.random.Generator(np.random.Philox(key=seed + 1))
    xs = rng.integers(1, 4, size=n)
    settings = [(int(x), 1) for x in xs]
    records = sample_runs(dist, settings, seed=seed)
    recmod.write_records(out, records, config_hash=f"simulate-v{visibility}-s{seed}")
    click.echo(f"wrote {n} records to {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None, help="Write the bound JSON here.")
def bound(config_path, out):
    """Certified min-entropy bound for the parameters in a config file."""
    cfg = json.loads(Path(config_path).read_text())
    tp = TradeoffParams(**cfg["tradeoff"]) if "tradeoff" in cfg else TradeoffParams()
    gamma = cfg.get("gamma", 1)
    gamma = gamma[0] / gamma[1] if isinstance(gamma, list) else float(gamma)
    p = EATParams(
        n=int(cfg["n"]),
        eps=float(cfg["eps"]),
        eps_EA=float(cfg["eps_ea"]),
        delta_prime=float(cfg.get("delta_prime", 0.0)),
        I_exp=float(cfg.get("i_exp", 3.5)),
        block=BlockParams(gamma=gamma, s_max=int(cfg.get("s_max", 1))),
        tradeoff=tp,
    )
    res = certified_min_entropy(p)
    payload = {
        "rate": res.rate,
        "total_bits": res.total_bits,
        "optimal_cut": res.optimal_cut,
        "aborted": res.aborted,
        "eta_opt": res.eta_opt,
        "evaluation_point": res.evaluation_point,
    }
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text)
    click.echo(text)


@main.command("extract")
@click.option("--source", "source_path", type=click.Path(exists=True), required=True)
@click.option("--seed", "seed_path", type=click.Path(exists=True), required=True)
@click.option("--k", type=int, required=True, help="Min-entropy of the source in bits.")
@click.option("--eps-ext", type=float, default=1e-6, show_default=True)
@click.option("--design", type=click.Choice(["block", "standard"]), default="block", show_default=True)
@click.option("--out", type=click.Path(), required=True)
def extract_cmd(source_path, seed_path, k, eps_ext, design, out):
    """Extract certified bits from a raw source file with a seed file."""
    src_bits = recmod.read_bits(source_path)
    source = BitSource(src_bits, claimed_min_entropy=k)
    params = compute_params(len(source), k, eps_ext, design)
    seed_stream = file_source(seed_path)
    seed_bits = seed_stream.read_bit_array(params.d)
    result = extract(source, seed_bits, params, build_design(params))
    recmod.write_bits(out, result, k=k, eps_ext=eps_ext, design=design)
    click.echo(f"extracted {result.size} bits (t={params.t}, l={params.l}, d={params.d})")


@main.command("run-session")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def run_session_cmd(config_path, out_dir):
    """Run the full protocol described by a session config file."""
    cfg = SessionConfig.from_json(Path(config_path).read_text())
    result = run_session(cfg)
    save_session(result, out_dir)
    click.echo(result.to_json())
    if result.aborted:
        sys.exit(2)


@main.command()
@click.option("--n-in", "n_in", type=int, multiple=True, required=True)
@click.option("--eps-ext", "eps_ext", type=float, multiple=True, required=True)
@click.option("--alpha", type=float, multiple=True, required=True)
@click.option("--design", type=click.Choice(["block", "standard"]), default="block", show_default=True)
@click.option("--out", type=click.Path(), required=True)
def tabulate(n_in, eps_ext, alpha, design, out):
    """Tabulate extractor parameters over grids; writes CSV."""
    rows = tabulate_params(n_in, eps_ext, alpha, design)
    write_table(rows, out)
    click.echo(f"wrote {len(rows)} rows to {out}")


@main.command("classical-max")
def classical_max_cmd():
    """Enumerate the 32 deterministic strategies and print the maximum."""
    best, argmax = classical_max()
    click.echo(f"classical maximum: {best}")
    for f, g in argmax:
        click.echo(f"  a = f(x) = {f}, b = g(a) = {g}")


if __name__ == "__main__":
    main()
