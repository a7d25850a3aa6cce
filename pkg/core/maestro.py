"""
Command-line front end for the exponential map toolkit.

Usage:
    python -m core.maestro analyze --p 7 --g 3 --u0 1
    python -m core.maestro fixed --p 7 --g 3 --k 1
    python -m core.maestro survey --m 16 --pairs 100 --seed 42 --workers 4
    python -m core.maestro report --p 1009 --g 11 --u0 1 --u0 2 --k 3 --k 5

Data goes to standard output (or --out), diagnostics to standard error.
Exit codes: 0 success, 1 domain error or violated rigorous bound, 2 budget
refusal or bad usage.
"""

import functools
import logging
import sys
from pathlib import Path

import click
import pandas as pd

from config import settings
from core import bitseq, bounds, expmap, survey
from core.errors import DomainError, ExpCycleError
from core.numtheory import is_prime, make_params
from data import export
from data.cache_manager import get_cache

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "text")


class CommandFailed(click.ClickException):
    """An analysis error surfaced with the exit code of its class."""

    def __init__(self, error: ExpCycleError):
        super().__init__(str(error))
        self.exit_code = error.exit_code


class ExpCycleGroup(click.Group):
    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except ExpCycleError as e:
            logger.debug(f"{type(e).__name__}: {e}")
            raise CommandFailed(e) from e


def _configure(log_level: str, mem_budget: int | None) -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
    if mem_budget is not None and mem_budget < 1:
        raise DomainError(f"--mem-budget must be a positive number of bytes, got {mem_budget}")


def common_options(default_format: str = "json"):
    """--format, --out, --mem-budget and --log-level for every subcommand."""

    def decorator(command):
        @click.option("--format", "output_format", type=click.Choice(FORMATS), default=default_format,
                      show_default=True, help="Output format")
        @click.option("--out", type=click.Path(dir_okay=False), default=None,
                      help="Write output to this file instead of standard output")
        @click.option("--mem-budget", type=int, default=None,
                      help=f"Bytes for power tables and visited bitsets (default {settings.MEM_BUDGET})")
        @click.option("--log-level", default=settings.LOG_LEVEL, show_default=True,
                      type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
        @functools.wraps(command)
        def wrapper(*args, output_format, out, mem_budget, log_level, **kwargs):
            _configure(log_level, mem_budget)
            payload, table = command(*args, mem_budget=mem_budget, **kwargs)
            _emit(payload, table, output_format, out)

        return wrapper

    return decorator


def _render(payload, table, output_format: str) -> str:
    if output_format == "json":
        return export.to_json(payload)
    if output_format == "text":
        return export.to_text(payload)
    rows = table if table is not None else payload
    return pd.json_normalize(rows).to_csv(index=False, float_format=export.FLOAT_FORMAT, lineterminator="\n")


def _emit(payload, table, output_format: str, out: str | None) -> None:
    content = _render(payload, table, output_format)
    if out:
        target = export.write_text(out, content)
        logger.info(f"Wrote {target}")
    else:
        click.echo(content.rstrip("\n"))


def _trajectory(p: int, g: int, u0: int):
    params = make_params(p, g)
    return params, expmap.trajectory(params, u0)


@click.group(cls=ExpCycleGroup)
@click.version_option(version="1.0.0", prog_name="expcycle")
def cli():
    """Periods, cycle structure and bit statistics of u -> g^u mod p."""


########################################
###### Single-sequence commands #######
########################################

@cli.command()
@click.option("--p", "p", type=int, required=True, help="Odd prime modulus")
@click.option("--g", "g", type=int, required=True, help="Base in [1, p - 1]")
@click.option("--u0", type=int, required=True, help="Seed in [1, p - 1]")
@click.option("--cycles", is_flag=True, help="Also decompose the permutation (g must be a primitive root)")
@common_options()
def analyze(p, g, u0, cycles, mem_budget):
    """Tail and cycle length of the orbit of u0."""
    params, traj = _trajectory(p, g, u0)
    payload = {**params.to_dict(), **traj.to_dict()}
    if cycles:
        decomposition = expmap.decompose(params, mem_budget)
        payload["cycle_lengths"] = decomposition.cycle_lengths
        payload["num_cycles"] = decomposition.num_cycles
    return payload, None


@cli.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--g", "g", type=int, required=True)
@click.option("--u0", type=int, required=True)
@click.option("--k", "k", type=int, default=None, help="Bit width; omit for every k = 1..r")
@common_options()
def tau(p, g, u0, k, mem_budget):
    """Period of the k least significant bits on the cycle."""
    params, traj = _trajectory(p, g, u0)
    if k is not None:
        return bitseq.bit_stats(params, traj, k).to_dict(), None

    profile = bitseq.tau_profile(params, traj)
    full = sum(1 for value in profile.values() if value == traj.t)
    payload = {
        **traj.to_dict(),
        "tau": {str(width): value for width, value in profile.items()},
        "full_period_fraction": full / len(profile),
    }
    table = [{"k": width, "tau_k": value, "t": traj.t} for width, value in profile.items()]
    return payload, table


@cli.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--g", "g", type=int, required=True)
@click.option("--u0", type=int, required=True)
@click.option("--k", "k", type=int, required=True)
@click.option("--n", "n", type=int, default=None, help="Prefix length N (default: the whole trajectory)")
@common_options()
def nu(p, g, u0, k, n, mem_budget):
    """Number of distinct k-bit outputs among the first N terms."""
    params, traj = _trajectory(p, g, u0)
    N = traj.ell if n is None else n
    return {"k": k, "N": N, "nu_k": bitseq.nu(params, traj, k, N), **traj.to_dict()}, None


@cli.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--g", "g", type=int, required=True)
@click.option("--u0", type=int, required=True)
@click.option("--k", "k", type=int, required=True)
@click.option("--threshold", type=int, default=1, show_default=True, help="Frequency threshold U")
@common_options()
def freq(p, g, u0, k, threshold, mem_budget):
    """Frequencies of k-bit strings over the trajectory."""
    params, traj = _trajectory(p, g, u0)
    table = bitseq.freq(params, traj, k)
    frequent = sorted(bitseq.omega(table, threshold))
    payload = {
        **table.to_dict(),
        "threshold": threshold,
        "omega": frequent,
        "omega_size": len(frequent),
        "max_count": table.max_count(),
    }
    rows = [{"omega": w, "count": c} for w, c in sorted(table.counts.items())]
    return payload, rows


@cli.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--g", "g", type=int, required=True)
@click.option("--k", "k", type=int, default=1, show_default=True, help="Iteration count")
@click.option("--allow-large-k", is_flag=True, help="Permit k > 3")
@common_options()
def fixed(p, g, k, allow_large_k, mem_budget):
    """Number of u0 with u_k = u0."""
    params = make_params(p, g)
    count = expmap.fixed_point_count(params, k, allow_large_k=allow_large_k, mem_budget=mem_budget)
    payload = {
        "p": p,
        "g": g,
        "k": k,
        "count": count,
        "fixed_point_bound": expmap.fixed_point_bound(p),
        "n3_bound": expmap.n3_bound(p, g),
    }
    return payload, None


########################################
###### Counting kernels ###############
########################################

@cli.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--g", "g", type=int, required=True)
@click.option("--a", "a", type=int, required=True)
@click.option("--b", "b", type=int, required=True)
@click.option("--i-start", type=int, required=True)
@click.option("--i-len", type=int, required=True)
@click.option("--j-start", type=int, required=True)
@click.option("--j-len", type=int, required=True)
@common_options()
def rcount(p, g, a, b, i_start, i_len, j_start, j_len, mem_budget):
    """Points u with a u mod p in I and b g^u mod p in J."""
    I = bounds.IntervalSpec(i_start, i_len)
    J = bounds.IntervalSpec(j_start, j_len)
    count = bounds.rcount(p, g, a, b, I, J)
    payload = {"p": p, "g": g, "a": a, "b": b, "I": [I.start, I.length], "J": [J.start, J.length], "count": count}

    T = make_params(p, g % p).T
    if i_len == j_len and i_len <= T:
        estimate = bounds.rij_bound(p, T, i_len)
        payload["bound"] = {"value": estimate.value, "regime": estimate.regime}
    elif j_len <= T:
        estimate = bounds.rij_lemma_bound(p, T, i_len, j_len)
        payload["bound"] = {"value": estimate.value, "regime": estimate.regime}
    return payload, None


@cli.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--elements", required=True, help="Comma-separated elements of A in [0, p - 1]")
@common_options()
def sumprod(p, elements, mem_budget):
    """Cardinalities of 2A and A^2 for a set A in F_p."""
    try:
        A = sorted({int(x) for x in elements.split(",") if x.strip()})
    except ValueError as e:
        raise DomainError(f"--elements must be comma-separated integers: {e}") from e
    if p < 3 or not is_prime(p):
        raise DomainError(f"p must be an odd prime, got {p}")
    sums, products = bounds.sumprod_cards(p, A)
    estimate = bounds.sumprod_bound(p, len(A))
    payload = {
        "p": p,
        "size": len(A),
        "sumset": sums,
        "productset": products,
        "bound": {"value": estimate.value, "regime": estimate.regime},
    }
    return payload, None


########################################
###### Experiments ####################
########################################

@cli.command("survey")
@click.option("--m", "m", type=int, required=True, help="Primes are sampled from [2^(m-1), 2^m - 1]")
@click.option("--pairs", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--workers", type=int, default=settings.DEFAULT_WORKERS, show_default=True)
@click.option("--format", "output_format", type=click.Choice(FORMATS), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="CSV file; the aggregate goes next to it as OUT.aggregate.json, or to stderr without --out")
@click.option("--mem-budget", type=int, default=None)
@click.option("--log-level", default=settings.LOG_LEVEL, show_default=True,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
def survey_command(m, pairs, seed, workers, output_format, out, mem_budget, log_level):
    """Cycle statistics of sampled primitive-root permutations."""
    _configure(log_level, mem_budget)
    config = survey.SurveyConfig(m=m, pairs=pairs, seed=seed, workers=workers)
    runner = survey.SurveyRunner(config, cache=get_cache(), mem_budget=mem_budget)
    records = runner.run()
    summary = survey.aggregate(records, config).to_dict()
    logger.info(f"Survey statistics: {runner.get_statistics()}")

    if out:
        export.write_text(out, export.records_to_csv(records))
        export.write_text(Path(f"{out}.aggregate.json"), export.to_json(summary))
        logger.info(f"Wrote {out} and {out}.aggregate.json")
        return

    if output_format == "csv":
        click.echo(export.records_to_csv(records).rstrip("\n"))
        click.echo(export.to_json(summary), err=True)
    else:
        payload = {"records": [rec.to_dict() for rec in records], "aggregate": summary}
        click.echo(_render(payload, None, output_format))


@cli.command()
@click.option("--q", "q", type=int, required=True, help="Largest prime considered")
@click.option("--mode", type=click.Choice(survey.ARTIN_MODES + ("both",)), default="both", show_default=True)
@click.option("--workers", type=int, default=settings.DEFAULT_WORKERS, show_default=True)
@common_options()
def artin(q, mode, workers, mem_budget):
    """Average number of fixed points of x -> g^x over primes p <= Q."""
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    scan = survey.artin_scan(q, workers)
    if mode != "both":
        return {"Q": q, "mode": mode, "average": scan[mode], "reference": scan["reference"][mode]}, None
    return scan, None


@cli.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--g", "g", type=int, required=True)
@click.option("--u0", "u0s", type=int, multiple=True, help="Seeds (repeatable, default 1)")
@click.option("--k", "ks", type=int, multiple=True, help="Bit widths (repeatable, default 1..r-1)")
@click.option("--threshold", type=int, default=1, show_default=True, help="Frequency threshold U")
@common_options()
def report(p, g, u0s, ks, threshold, mem_budget):
    """Observed quantities against every bound over a (u0, k) grid."""
    params = make_params(p, g)
    seeds = u0s or (1,)
    widths = ks or tuple(range(1, max(2, params.r)))

    reports = []
    full = 0
    for u0 in seeds:
        traj = expmap.trajectory(params, u0)
        for k in widths:
            entry = bounds.consistency_report(params, traj, k, threshold)
            full += entry["observed"]["tau_k"] == traj.t
            reports.append(entry)

    payload = {
        "p": p,
        "g": g,
        "reports": reports,
        "full_period_fraction": full / len(reports),
        "asserted_passed": all(entry["asserted_passed"] for entry in reports),
    }
    rows = [
        {"u0": entry["trajectory"]["u0"], "k": entry["k"], **bound}
        for entry in reports
        for bound in entry["bounds"]
    ]
    return payload, rows


def run(args: list[str] | None = None) -> int:
    """Invoke the CLI and return its exit code instead of exiting."""
    try:
        result = cli.main(args=args, prog_name="expcycle", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(run())
