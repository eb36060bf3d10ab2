"""Command-line driver.

Exit codes for `verify`: 0 safe, 1 unsafe, 2 anything that prevents a
verdict (parse error, timeout, solver budget).
"""

from __future__ import annotations

import json as json_mod
import sys
from pathlib import Path

import click

from .explorer import Mode, verify as run_verify
from .frontend import ParseError, load, render_program
from .generators import FAMILIES
from .program import ProgramError
from .report import BenchRow, render_figures, write_csv

_MODE_NAMES = [m.value for m in Mode]

_EXIT = {"SAFE": 0, "UNSAFE": 1, "RESOURCE_LIMIT": 2}


@click.group()
def main():
    """Safety verification for concurrent transition systems."""


def _parse_seed_order(text):
    if text is None:
        return None
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise click.UsageError(f"--seed-order expects comma-separated ids, got {text!r}")


@main.command(name="verify")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(_MODE_NAMES), default=Mode.PDPOR_SI.value,
              show_default=True, help="exploration strategy")
@click.option("--json", "as_json", is_flag=True, help="emit the report as JSON")
@click.option("--timeout", type=float, default=600.0, show_default=True,
              help="wall-clock limit in seconds")
@click.option("--solver-budget", type=int, default=None,
              help="work limit per arithmetic query")
@click.option("--seed-order", default=None,
              help="comma-separated permutation of transition ids; earlier ids "
                   "seed persistent sets and are explored first")
@click.option("--dump-persistent", is_flag=True,
              help="print the computed persistent sets before the verdict")
def cmd_verify(file, mode, as_json, timeout, solver_budget, seed_order, dump_persistent):
    """Verify the safety property of a .ctp program."""
    try:
        program = load(file)
    except (ParseError, ProgramError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    try:
        report = run_verify(program, Mode.from_string(mode),
                            solver_budget=solver_budget, timeout=timeout,
                            seed_order=_parse_seed_order(seed_order))
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    if dump_persistent and report.persistent is not None:
        click.echo(report.persistent.dump())
    if as_json:
        click.echo(json_mod.dumps(report.to_json()))
    else:
        click.echo(f"verdict: {report.verdict}")
        click.echo(f"states visited: {report.states_visited}")
        click.echo(f"states subsumed: {report.states_subsumed}")
        click.echo(f"traces completed: {report.traces_completed}")
        click.echo(f"time: {report.time_ms} ms")
        if report.counterexample is not None:
            trace = " ".join(str(t) for t in report.counterexample["trace"])
            click.echo(f"counterexample trace: {trace or '(empty)'}")
            witness = report.counterexample["witness"]
            shown = " ".join(f"{k}={v}" for k, v in sorted(witness.items()))
            click.echo(f"witness: {shown or '(no unconstrained variables)'}")
    sys.exit(_EXIT[report.verdict])


@main.command(name="gen")
@click.argument("family", type=click.Choice(sorted(FAMILIES)))
@click.argument("n", type=int)
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None,
              help="write to a file instead of stdout")
def cmd_gen(family, n, out):
    """Write a generated benchmark program in canonical syntax."""
    try:
        program = FAMILIES[family](n)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    text = render_program(program)
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")


@main.command(name="bench")
@click.option("--families", default="sum,pc,phil", show_default=True,
              help="comma-separated benchmark families")
@click.option("--sizes", default="2,3", show_default=True,
              help="comma-separated instance sizes")
@click.option("--modes", default="por,si,por-si,pdpor-si", show_default=True,
              help="comma-separated exploration modes")
@click.option("--timeout", type=float, default=600.0, show_default=True,
              help="per-cell wall-clock limit in seconds")
@click.option("-o", "--out", type=click.Path(dir_okay=False), default="bench.csv",
              show_default=True, help="CSV destination")
@click.option("--plot/--no-plot", default=True, show_default=True,
              help="render per-family figures next to the CSV")
def cmd_bench(families, sizes, modes, timeout, out, plot):
    """Run a family x size x mode cross product and tabulate it."""
    family_list = [f.strip() for f in families.split(",") if f.strip()]
    mode_list = [m.strip() for m in modes.split(",") if m.strip()]
    try:
        size_list = [int(s) for s in sizes.split(",") if s.strip()]
    except ValueError:
        raise click.UsageError(f"--sizes expects integers, got {sizes!r}")
    if not family_list or not size_list or not mode_list:
        raise click.UsageError("families, sizes and modes must all be non-empty")
    for f in family_list:
        if f not in FAMILIES:
            raise click.UsageError(f"unknown family {f!r}, pick from {sorted(FAMILIES)}")
    try:
        mode_list = [Mode.from_string(m) for m in mode_list]
    except ValueError as exc:
        raise click.UsageError(str(exc))

    rows = []
    for family in family_list:
        for n in size_list:
            try:
                program = FAMILIES[family](n)
            except ValueError as exc:
                click.echo(f"skipping {family}-{n}: {exc}", err=True)
                continue
            for mode in mode_list:
                result = run_verify(program, mode, timeout=timeout)
                row = BenchRow(family, n, mode.value, result.verdict,
                               result.states_visited, result.states_subsumed,
                               result.traces_completed, result.time_ms)
                rows.append(row)
                click.echo("  ".join(str(c) for c in row.cells()))

    path = write_csv(rows, out)
    click.echo(f"wrote {path}")
    if plot:
        for fig in render_figures(rows, Path(out).parent or Path(".")):
            click.echo(f"wrote {fig}")


if __name__ == "__main__":
    main()
