"""pdcoag CLI - sampling, operators, trees and statistical verification.

Usage: pdcoag <command> [options]

Exit codes: 0 success, 1 statistical failure, 2 usage or domain error.
"""

import json
import sys
from functools import partial
from pathlib import Path

import click
import numpy as np

from . import __version__, config
from .errors import PDError
from .logs import setup_logging
from .numerics import RngStream
from .operators import coag, frag
from .partitions import MassPartition, Params
from .rectree import grow, strip_levels_csv
from .replicas import run_replicas
from .samplers import branching_sample, crp_sample, pd_sample, subordinator_pd
from .serialize import atomic_write, histogram_csv, json_lines, mass_csv, read_mass_csv, set_partition_csv
from .suites import SUITE_NAMES, run_suite

EXIT_FAILED = 1
EXIT_ERROR = 2


def _fail(message: str) -> None:
    click.echo(f"Error: {message}", err=True)
    sys.exit(EXIT_ERROR)


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(Path(out), text)
    else:
        click.echo(text, nl=False)


def _side_path(out: str | None, explicit: str | None, suffix: str) -> Path:
    if explicit:
        return Path(explicit)
    if out:
        return Path(out).with_suffix(suffix)
    return Path(f"pdcoag{suffix}")


def _seed(seed: int | None) -> int:
    return config.default_seed() if seed is None else seed


alpha_option = click.option("--alpha", type=float, required=True, help="Discount parameter, 0 <= alpha < 1")
theta_option = click.option("--theta", type=float, required=True, help="Concentration parameter, theta > -alpha")
seed_option = click.option("--seed", type=int, default=None, help="Master seed (default PD_DEFAULT_SEED)")
format_option = click.option(
    "--format", "output_format", type=click.Choice(["csv", "json"]), default="csv", help="Output format"
)
out_option = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout)")


# =============================================================================
# CLI Group
# =============================================================================

@click.group()
@click.version_option(version=__version__, prog_name="pdcoag")
@click.option("-v", "--verbose", is_flag=True, help="Log one line per test and other progress")
@click.option("-q", "--quiet", is_flag=True, help="Only log errors")
def cli(verbose, quiet):
    """Poisson-Dirichlet fragmentation and coagulation toolkit."""
    setup_logging(config.LOG_LEVEL, verbose=verbose, quiet=quiet)


# =============================================================================
# Sampling
# =============================================================================

def _draw(rng: RngStream, method: str, params: Params, n: int | None, eps: float, max_atoms: int, immigration: bool):
    if method == "stick":
        return pd_sample(params, rng, eps, max_atoms)
    if method == "subordinator":
        return subordinator_pd(params, rng, eps, max_atoms)
    if method == "crp":
        return crp_sample(params, n, rng)
    return branching_sample(params, n, rng, immigration=immigration)


def _record(draw) -> dict:
    if isinstance(draw, tuple):
        x, sample = draw
        return {**x.to_dict(), "subordinator": sample.to_dict()}
    return draw.to_dict()


def _statistic(draw) -> float:
    """Largest atom of a mass partition, first block frequency of a set partition."""
    if isinstance(draw, tuple):
        draw = draw[0]
    if isinstance(draw, MassPartition):
        return draw.largest
    return len(draw.blocks[0]) / draw.size


@cli.command("sample")
@alpha_option
@theta_option
@click.option("--method", type=click.Choice(["stick", "crp", "subordinator", "branching"]), default="stick",
              help="Sampler")
@click.option("--samples", type=click.IntRange(min=1), default=1, help="Number of replicas")
@click.option("--n", "n", type=click.IntRange(min=1), default=None, help="Label count for crp / branching")
@click.option("--trunc-eps", type=float, default=config.TRUNC_EPS, help="Residual at which stick-breaking stops")
@click.option("--max-atoms", type=click.IntRange(min=1), default=config.MAX_ATOMS, help="Atom budget per sample")
@click.option("--immigration", is_flag=True, help="Branching with rate-theta immigration")
@seed_option
@format_option
@out_option
@click.option("--jobs", type=click.IntRange(min=1), default=config.JOBS, help="Worker processes")
@click.option("--emit-hist", "bins", type=click.IntRange(min=1), default=None,
              help="Also write a histogram CSV with this many bins")
@click.option("--hist-out", type=click.Path(dir_okay=False), default=None, help="Histogram file")
def sample(alpha, theta, method, samples, n, trunc_eps, max_atoms, immigration, seed, output_format, out, jobs,
           bins, hist_out):
    """Draw PD mass partitions or exchangeable partitions, one record per replica.

    Mass partitions are written as `w1,...,wK,residual` rows, set partitions as
    restricted-growth label rows.
    """
    try:
        params = Params(alpha, theta)
        if method in ("crp", "branching") and n is None:
            _fail(f"--n is required for --method {method}")
        fn = partial(_draw, method=method, params=params, n=n, eps=trunc_eps, max_atoms=max_atoms,
                     immigration=immigration)
        draws = run_replicas(fn, samples, _seed(seed), jobs)
    except PDError as e:
        _fail(str(e))

    if output_format == "json":
        text = json_lines(_record(d) for d in draws)
    elif method in ("crp", "branching"):
        text = set_partition_csv(draws)
    else:
        text = mass_csv([d[0] if isinstance(d, tuple) else d for d in draws])
    _emit(text, out)

    if bins:
        path = _side_path(out, hist_out, ".hist.csv")
        atomic_write(path, histogram_csv([_statistic(d) for d in draws], bins))
        click.echo(f"Histogram written: {path}", err=True)


# =============================================================================
# Operators
# =============================================================================

def _read_rows(source) -> list[MassPartition]:
    try:
        return read_mass_csv(source.read())
    except PDError as e:
        _fail(str(e))


def _write_operator_output(outputs, witnesses, output_format, out, emit_witness, witness_out) -> None:
    if output_format == "json":
        _emit(json_lines(x.to_dict() for x in outputs), out)
    else:
        _emit(mass_csv(outputs), out)
    if emit_witness:
        path = _side_path(out, witness_out, ".witness.jsonl")
        atomic_write(path, json_lines({"row": r + 1, **w.to_dict()} for r, w in enumerate(witnesses)))
        click.echo(f"Witnesses written: {path}", err=True)


input_option = click.option("--input", "source", type=click.File("r"), default="-",
                            help="CSV of `w1,...,wK,residual` rows (default stdin)")
witness_options = [
    click.option("--emit-witness", is_flag=True, help="Write the internal randomness of each row"),
    click.option("--witness-out", type=click.Path(dir_okay=False), default=None, help="Witness JSON Lines file"),
]


def _with_witness(f):
    for option in reversed(witness_options):
        f = option(f)
    return f


@cli.command("frag")
@input_option
@alpha_option
@click.option("--trunc-eps", type=float, default=config.TRUNC_EPS, help="Splitter residual at which stick-breaking stops")
@click.option("--max-atoms", type=click.IntRange(min=1), default=config.MAX_ATOMS, help="Splitter atom budget")
@seed_option
@_with_witness
@format_option
@out_option
def frag_cmd(source, alpha, trunc_eps, max_atoms, seed, emit_witness, witness_out, output_format, out):
    """Apply Frag_alpha to every input row. Row r uses random stream r."""
    try:
        Params(alpha, 1.0 - alpha)
        master = _seed(seed)
    except PDError as e:
        _fail(str(e))
    rows = _read_rows(source)
    outputs, witnesses = [], []
    try:
        for r, x in enumerate(rows):
            y, witness = frag(alpha, x, RngStream(master, r), trunc_eps, max_atoms)
            outputs.append(y)
            witnesses.append(witness)
    except PDError as e:
        _fail(f"row {len(outputs) + 1}: {e}")
    _write_operator_output(outputs, witnesses, output_format, out, emit_witness, witness_out)


@cli.command("coag")
@input_option
@alpha_option
@theta_option
@seed_option
@_with_witness
@format_option
@out_option
def coag_cmd(source, alpha, theta, seed, emit_witness, witness_out, output_format, out):
    """Apply Coag_{alpha,theta} to every input row. Row r uses random stream r."""
    try:
        params = Params(alpha, theta)
        master = _seed(seed)
    except PDError as e:
        _fail(str(e))
    rows = _read_rows(source)
    outputs, witnesses = [], []
    try:
        for r, y in enumerate(rows):
            x, witness = coag(params, y, RngStream(master, r))
            outputs.append(x)
            witnesses.append(witness)
    except PDError as e:
        _fail(f"row {len(outputs) + 1}: {e}")
    _write_operator_output(outputs, witnesses, output_format, out, emit_witness, witness_out)


# =============================================================================
# Trees
# =============================================================================

@cli.command("tree")
@alpha_option
@theta_option
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Number of non-root vertices")
@seed_option
@click.option("--emit", type=click.Choice(["dot", "parents", "partitions"]), default="parents", help="Artifact")
@click.option("--strip-depth", type=int, default=0, help="Deepest root-stripping level for --emit partitions")
@out_option
def tree(alpha, theta, n, seed, emit, strip_depth, out):
    """Grow one (alpha, theta)-recursive tree."""
    try:
        t = grow(Params(alpha, theta), n, RngStream(_seed(seed), 0))
        if emit == "dot":
            text = t.to_dot()
        elif emit == "parents":
            text = t.parents_csv()
        else:
            text = strip_levels_csv(t, strip_depth)
    except PDError as e:
        _fail(str(e))
    _emit(text, out)


# =============================================================================
# Verification
# =============================================================================

def _suite_histograms(report, bins: int) -> str:
    lines = ["test,left,right,count"]
    for t in report.tests:
        if t.sample is None or len(t.sample) == 0:
            continue
        lo = min(0.0, float(np.min(t.sample)))
        hi = max(1.0, float(np.max(t.sample)))
        for row in histogram_csv(t.sample, bins, lo, hi).splitlines()[1:]:
            lines.append(f"{t.name},{row}")
    return "\n".join(lines) + "\n"


@cli.command("verify")
@click.option("--suite", type=click.Choice(SUITE_NAMES), required=True, help="Suite to run")
@click.option("--alpha", type=float, default=0.5, help="Discount parameter")
@click.option("--theta", type=float, default=0.5, help="Concentration parameter")
@click.option("--samples", type=click.IntRange(min=1), default=None, help="Override every sample size")
@seed_option
@click.option("--alpha-level", type=float, default=config.ALPHA_LEVEL, help="Per-test p-value threshold")
@click.option("--report", type=click.Path(dir_okay=False), default=None, help="Report JSON file (default stdout)")
@click.option("--jobs", type=click.IntRange(min=1), default=config.JOBS, help="Worker processes")
@click.option("--beta", type=float, default=0.6, help="Pitman suite beta")
@click.option("--emit-hist", "bins", type=click.IntRange(min=1), default=None,
              help="Also write histograms of every KS sample")
@click.option("--hist-out", type=click.Path(dir_okay=False), default=None, help="Histogram file")
def verify(suite, alpha, theta, samples, seed, alpha_level, report, jobs, beta, bins, hist_out):
    """Run a statistical verification suite and report every test.

    Exits 0 when all tests pass and 1 when any fails.
    """
    try:
        params = Params(alpha, theta)
        result = run_suite(suite, params, _seed(seed), samples, alpha_level, jobs, beta)
    except PDError as e:
        _fail(str(e))

    document = json.dumps(result.to_dict(), indent=2) + "\n"
    _emit(document, report)
    if report:
        passed = sum(t.passed for t in result.tests)
        click.echo(f"{suite}: {passed}/{len(result.tests)} tests passed")
        for t in result.tests:
            if not t.passed:
                click.echo(f"  FAIL {t.name} p={t.p_value:.3g}")
    if bins:
        path = _side_path(report, hist_out, ".hist.csv")
        atomic_write(path, _suite_histograms(result, bins))
        click.echo(f"Histograms written: {path}", err=True)

    if not result.passed:
        sys.exit(EXIT_FAILED)


if __name__ == "__main__":
    cli()
