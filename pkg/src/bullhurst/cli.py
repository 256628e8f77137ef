"""Command-line interface.

Every subcommand runs the pipeline up to (and including) its stage,
recomputing prerequisites in memory; `all` runs everything and accepts
--stage to stop early.  Global flags: --config, --out, --seed, --stage.
Config keys can also come from BULLHURST_* environment variables.
"""
from __future__ import annotations

import sys

import click

from .config import load_config
from .errors import BullhurstError
from .pipeline import STAGES, run_pipeline


def _run(ctx, upto):
    opts = ctx.obj
    if not opts.get("config"):
        raise click.UsageError("--config is required")
    overrides = dict(opts.get("extra_overrides") or {})
    if opts.get("out"):
        overrides["output.dir"] = opts["out"]
    if opts.get("seed") is not None:
        overrides["pipeline.seed"] = opts["seed"]
    try:
        cfg = load_config(opts["config"], overrides=overrides)
        state = run_pipeline(cfg, upto=upto)
    except BullhurstError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    return state


@click.group()
@click.option("--config", type=click.Path(), help="Pipeline config file.")
@click.option("--out", type=click.Path(), help="Output directory override.")
@click.option("--seed", type=int, help="Seed override.")
@click.option("--stage", type=click.Choice(STAGES),
              help="With `all`: stop after this stage.")
@click.pass_context
def main(ctx, config, out, seed, stage):
    """Bullish-index pipeline: Hurst regimes and premium predictability."""
    ctx.obj = {"config": config, "out": out, "seed": seed, "stage": stage}


def _echo_written(state):
    for name in sorted(state.written):
        click.echo(f"wrote {state.written[name]}")


@main.command()
@click.pass_context
def ingest(ctx):
    """Validate the input files and print a short summary."""
    state = _run(ctx, "ingest")
    click.echo(f"daily rows: {len(state.daily)}")
    click.echo(f"macro months: {len(state.macro)}")
    click.echo(f"recession intervals: {len(state.recessions)}")


@main.command()
@click.pass_context
def hurst(ctx):
    """Fit the GARCH filter and write the local Hurst series."""
    _echo_written(_run(ctx, "hurst"))


@main.command()
@click.pass_context
def regime(ctx):
    """Write the monthly bullish ratio/index and shock flags."""
    _echo_written(_run(ctx, "regime"))


@main.command()
@click.pass_context
def predictors(ctx):
    """Write the 28-column predictor panel."""
    _echo_written(_run(ctx, "predictors"))


@main.command()
@click.pass_context
def insample(ctx):
    """Write the in-sample regression table."""
    _echo_written(_run(ctx, "insample"))


@main.command()
@click.pass_context
def oos(ctx):
    """Write the out-of-sample forecast evaluation table."""
    _echo_written(_run(ctx, "oos"))


@main.command()
@click.option("--kappa", type=float, help="Risk-aversion override.")
@click.option("--cost-bps", type=float, help="Transaction cost override.")
@click.option("--mask", type=click.Choice(["all", "entire", "exp", "rec",
                                           "stable_plus", "bu_plus",
                                           "stable_minus", "bu_minus"]),
              help="Restrict the allocation table to one conditioning mask.")
@click.pass_context
def allocate(ctx, kappa, cost_bps, mask):
    """Write the asset-allocation tables."""
    extra = {}
    if kappa is not None:
        extra["allocate.kappa"] = kappa
    if cost_bps is not None:
        extra["allocate.cost_bps"] = cost_bps
    if mask is not None:
        extra["allocate.mask"] = mask
    ctx.obj["extra_overrides"] = extra
    _echo_written(_run(ctx, "allocate"))


@main.command()
@click.pass_context
def report(ctx):
    """Write summary statistics, figure data files and the manifest."""
    _echo_written(_run(ctx, "report"))


@main.command(name="all")
@click.pass_context
def run_all(ctx):
    """Run the full pipeline (honors --stage to stop early)."""
    upto = ctx.obj.get("stage") or "report"
    _echo_written(_run(ctx, upto))


if __name__ == "__main__":
    main()
