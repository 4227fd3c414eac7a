from __future__ import annotations

import functools
import logging
import os
from collections.abc import Callable
from dataclasses import replace
from typing import Any

import click
import numpy as np
from dotenv import load_dotenv

from .attack import CollectiveGaussianAttack, extremal_counterpart, from_channel
from .channel import classify, decompose, invariants, recompose, validate
from .config import (
    Tolerances,
    load_simulation_settings,
    load_tolerances,
    with_general_tolerance,
)
from .dilation import dilate, verify
from .errors import DilationError, GaussRateError, InvalidChannelError
from .keyrate import rate
from .protocol import run_simulation
from .reporting import write_csv, write_json, write_samples_csv
from .schema import (
    attack_summary,
    decomposition_to_dict,
    dilation_to_dict,
    invariants_to_dict,
    load_document,
    parse_channel,
    parse_channel_or_attack,
    parse_config,
    rate_report_to_dict,
    record_to_dict,
    table_to_dicts,
    validation_to_dict,
)
from .sweep import VARIABLES, SweepSpec, run_sweep

# Configure root logger
logging.basicConfig(
    level=os.getenv("LOG_LEVEL", "INFO"),
    format="%(asctime)sZ %(levelname)s %(name)s :: %(message)s",
)

LOG = logging.getLogger(__name__)

INPUT = click.Path(dir_okay=False)
OUTPUT = click.Path(dir_okay=False, writable=True)


def _handles_errors(fn: Callable[..., None]) -> Callable[..., None]:
    """Turn toolkit errors into a stderr message and the error's exit code."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> None:
        try:
            fn(*args, **kwargs)
        except GaussRateError as e:
            click.echo(f"error: {e}", err=True)
            click.get_current_context().exit(e.exit_code)

    return wrapper


def _tol(ctx: click.Context) -> Tolerances:
    return ctx.obj["tol"]


def _load_attack(path: str, tol: Tolerances) -> CollectiveGaussianAttack:
    ch, atk = parse_channel_or_attack(load_document(path))
    return atk if atk is not None else from_channel(ch, tol=tol)


@click.group(
    help=(
        "Gaussian channel toolkit: canonical forms, dilations and key-rate bounds "
        "for coherent-state CV-QKD with heterodyne detection."
    )
)
@click.option(
    "--tol",
    type=float,
    default=None,
    help="General numerical tolerance. Overrides GAUSSRATE_TOL.",
)
@click.pass_context
def cli(ctx: click.Context, tol: float | None) -> None:
    load_dotenv()  # optional .env
    ctx.ensure_object(dict)
    tolerances = load_tolerances()
    if tol is not None:
        if tol > 0:
            tolerances = with_general_tolerance(tolerances, tol)
        else:
            LOG.warning("Ignoring non-positive --tol=%g", tol)
    ctx.obj["tol"] = tolerances
    ctx.obj["settings"] = load_simulation_settings()


@cli.command("classify", help="Classify a channel and report its symplectic invariants.")
@click.option("--input", "input_path", required=True, type=INPUT, help="Channel JSON/YAML file.")
@click.option("--output", "output_path", type=OUTPUT, default=None)
@click.pass_context
@_handles_errors
def classify_cmd(ctx: click.Context, input_path: str, output_path: str | None) -> None:
    tol = _tol(ctx)
    ch = parse_channel(load_document(input_path))
    report = validate(ch, tol=tol)
    if not report.ok:
        write_json(output_path, {"valid": False, "validation": validation_to_dict(report)})
        raise InvalidChannelError(report)
    inv = invariants(ch, tol=tol)
    write_json(
        output_path,
        {
            "valid": True,
            "validation": validation_to_dict(report),
            "class": classify(ch, tol=tol),
            "invariants": invariants_to_dict(inv),
        },
    )


@cli.command("decompose", help="Decompose a channel as U_B ∘ C ∘ U_A.")
@click.option("--input", "input_path", required=True, type=INPUT, help="Channel JSON/YAML file.")
@click.option("--output", "output_path", type=OUTPUT, default=None)
@click.pass_context
@_handles_errors
def decompose_cmd(ctx: click.Context, input_path: str, output_path: str | None) -> None:
    ch = parse_channel(load_document(input_path))
    ua, cf, ub = decompose(ch, tol=_tol(ctx))
    back = recompose(ua, cf, ub)
    payload = decomposition_to_dict(ua, cf, ub)
    payload["residuals"] = {
        "T": float(f"{np.max(np.abs(back.t - ch.t)):.12g}"),
        "N": float(f"{np.max(np.abs(back.n - ch.n)):.12g}"),
        "d": float(f"{np.max(np.abs(back.d - ch.d)):.12g}"),
    }
    write_json(output_path, payload)


@cli.command("rate", help="Evaluate the key-rate bounds of a channel or an attack.")
@click.option("--input", "input_path", required=True, type=INPUT, help="Channel or attack file.")
@click.option("--output", "output_path", type=OUTPUT, default=None)
@click.option(
    "--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True
)
@click.pass_context
@_handles_errors
def rate_cmd(ctx: click.Context, input_path: str, output_path: str | None, fmt: str) -> None:
    tol = _tol(ctx)
    atk = _load_attack(input_path, tol)
    report = rate(atk, tol=tol)
    if fmt == "csv":
        write_csv(output_path, [report.to_row()], list(report.FIELDS))
        return
    payload = rate_report_to_dict(report)
    payload["class"] = atk.class_label
    write_json(output_path, payload)


@cli.command("extremal", help="Replace an attack by its canonical extremal counterpart.")
@click.option("--input", "input_path", required=True, type=INPUT, help="Channel or attack file.")
@click.option("--output", "output_path", type=OUTPUT, default=None)
@click.pass_context
@_handles_errors
def extremal_cmd(ctx: click.Context, input_path: str, output_path: str | None) -> None:
    tol = _tol(ctx)
    atk = _load_attack(input_path, tol)
    ext = extremal_counterpart(atk, tol=tol)
    write_json(
        output_path,
        {
            "attack": attack_summary(atk),
            "rate": rate_report_to_dict(rate(atk, tol=tol)),
            "extremal": attack_summary(ext),
            "rate_extremal": rate_report_to_dict(rate(ext, tol=tol)),
        },
    )


@cli.command("sweep", help="Sweep one of tau, w, eta or mu and tabulate the bounds.")
@click.option("--variable", required=True, type=click.Choice(list(VARIABLES)))
@click.option("--start", required=True, type=float)
@click.option("--stop", required=True, type=float)
@click.option("--steps", default=50, show_default=True, type=int)
@click.option("--tau", default=0.9, show_default=True, type=float)
@click.option("--w", "w", default=1.0, show_default=True, type=float)
@click.option("--eta", default=None, type=float, help="Fixed eta. Defaults to eta_c(tau, w).")
@click.option("--mu", default=None, type=float, help="Fixed mu; adds an 'mi' column.")
@click.option(
    "--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True
)
@click.option("--output", "output_path", type=OUTPUT, default=None)
@click.pass_context
@_handles_errors
def sweep_cmd(
    ctx: click.Context,
    variable: str,
    start: float,
    stop: float,
    steps: int,
    tau: float,
    w: float,
    eta: float | None,
    mu: float | None,
    fmt: str,
    output_path: str | None,
) -> None:
    spec = SweepSpec(
        variable,  # type: ignore[arg-type]
        start,
        stop,
        steps,
        tau=tau,
        w=w,
        eta=eta,
        mu=mu,
    )
    result = run_sweep(spec, tol=_tol(ctx))
    if result.failures:
        click.echo(f"warning: {result.failures} sweep points outside the domain", err=True)
    if fmt == "json":
        write_json(output_path, table_to_dicts(result.rows, spec.fieldnames))
    else:
        write_csv(output_path, result.rows, spec.fieldnames)


@cli.command("simulate", help="Monte-Carlo run of the heterodyne protocol with channel tomography.")
@click.option("--input", "input_path", required=True, type=INPUT, help="Simulation config file.")
@click.option("--seed", default=None, type=int, help="Override the config seed.")
@click.option("--samples", default=None, type=int, help="Override n_samples.")
@click.option("--mu", default=None, type=float, help="Override the modulation variance.")
@click.option("--workers", default=None, type=int, help="Threads for chunk evaluation.")
@click.option("--samples-out", default=None, type=OUTPUT, help="CSV of raw (x_A, y) rounds.")
@click.option("--output", "output_path", type=OUTPUT, default=None)
@click.option(
    "--progress/--no-progress",
    default=True,
    show_default=True,
    help="Show a progress bar during processing.",
)
@click.pass_context
@_handles_errors
def simulate_cmd(
    ctx: click.Context,
    input_path: str,
    seed: int | None,
    samples: int | None,
    mu: float | None,
    workers: int | None,
    samples_out: str | None,
    output_path: str | None,
    progress: bool,
) -> None:
    doc = load_document(input_path)
    overrides = {"seed": seed, "n_samples": samples, "mu": mu}
    doc.update({k: v for k, v in overrides.items() if v is not None})
    cfg = parse_config(doc)
    settings = replace(ctx.obj["settings"], progress=progress)
    if workers is not None:
        settings = replace(settings, workers=max(1, workers))
    if samples_out:
        settings = replace(settings, sample_cap=max(settings.sample_cap, cfg.n_samples))
    record = run_simulation(cfg, settings, tol=_tol(ctx))
    if samples_out and record.samples is not None:
        write_samples_csv(samples_out, *record.samples)
    write_json(output_path, record_to_dict(record))


@cli.command("dilate", help="Build the Stinespring dilation of a canonical form.")
@click.argument("label")
@click.argument("tau", type=float)
@click.argument("nbar", type=float)
@click.option("--verify", "check", is_flag=True, help="Report the three contract residuals.")
@click.option("--seed", default=0, show_default=True, type=int, help="Seed for --verify inputs.")
@click.option("--output", "output_path", type=OUTPUT, default=None)
@click.pass_context
@_handles_errors
def dilate_cmd(
    ctx: click.Context,
    label: str,
    tau: float,
    nbar: float,
    check: bool,
    seed: int,
    output_path: str | None,
) -> None:
    tol = _tol(ctx)
    dil = dilate(label, tau, nbar, tol=tol)
    residuals = verify(dil, np.random.default_rng(seed)) if check else None
    write_json(output_path, dilation_to_dict(dil, residuals))
    if residuals is not None and not residuals.ok(tol):
        raise DilationError(
            f"dilation of class {label} fails its contract",
            max(residuals.symplectic, residuals.purity, residuals.reduction),
        )


def main():
    cli()


if __name__ == "__main__":
    main()
