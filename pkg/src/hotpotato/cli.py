"""Command line entry point: run a scenario and write its outputs.

Files written to the output directory:

    inventories.csv  t, inv_<id> ...            (one row per t = 0..N)
    prices.csv       t, last_price, bestbid, bestask
    nlp.csv          t, nlp                     (orders reaching the exchange at t)
    trades.csv       t, buyer, seller, size, price
    flow.txt         inventory and flow table
    cycle.txt        cycle report

Row t holds the state at the start of step t; the final row t = N is the
state left after the last step. A zero-step run writes headers only.
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path
from typing import Optional

import click

from . import analysis
from .config import PRESETS, ConfigError, ScenarioConfig, load_preset, parse_config, render_config
from .harness import InvariantViolation, Trace, run
from .types import Kind, format_price

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_IO = 0, 1, 2, 3


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _nlp_text(v) -> str:
    return f"{float(v):.6f}"


def write_outputs(trace: Trace, out_dir: Path, flow_window: Optional[tuple[int, int]] = None) -> None:
    cfg = trace.config
    scale = cfg.price_scale
    px = lambda v: format_price(v, scale)  # noqa: E731
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = trace[0].ids if len(trace) else tuple(sorted(trace.limits))
    recs = trace.records

    inv_rows = [[r.t, *r.inv_before] for r in recs]
    price_rows = [[r.t, px(r.last_price), px(r.bestbid), px(r.bestask)] for r in recs]
    nlp_rows = [[t, _nlp_text(v)] for t, v in analysis.nlp_series(trace)]
    if recs:
        last = recs[-1]
        n = last.t + 1
        inv_rows.append([n, *last.inv_after])
        price_rows.append([n, px(last.last_price), px(last.bestbid), px(last.bestask)])
        g = {k: [o for o in last.orders if o.kind is k] for k in Kind}
        nlp_rows.append([n, _nlp_text(analysis.net_liquidity_pressure(
            g[Kind.BUY], g[Kind.ASK], g[Kind.SELL], g[Kind.BID]))])

    trade_rows = []
    for r in recs:
        x = r.executions
        for bid, sell in zip(x.xbids, x.xsells):
            trade_rows.append([r.t, bid.trader, sell.trader, bid.size, px(bid.price)])
        for ask, buy in zip(x.xasks, x.xbuys):
            trade_rows.append([r.t, buy.trader, ask.trader, ask.size, px(ask.price)])

    _write_csv(out_dir / "inventories.csv", ["t", *(f"inv_{i}" for i in ids)], inv_rows)
    _write_csv(out_dir / "prices.csv", ["t", "last_price", "bestbid", "bestask"], price_rows)
    _write_csv(out_dir / "nlp.csv", ["t", "nlp"], nlp_rows)
    _write_csv(out_dir / "trades.csv", ["t", "buyer", "seller", "size", "price"], trade_rows)
    start, stop = flow_window if flow_window else (0, None)
    (out_dir / "flow.txt").write_text(analysis.flow_table(trace, start, stop), encoding="utf-8")
    (out_dir / "cycle.txt").write_text(str(analysis.detect_cycle(trace)) + "\n", encoding="utf-8")


def summary(trace: Trace) -> str:
    cfg = trace.config
    trades = sum(len(r.executions.xbids) + len(r.executions.xasks) for r in trace)
    final = trace[-1].inv_after if len(trace) else ()
    last = format_price(trace[-1].last_price, cfg.price_scale) if len(trace) else "-"
    return (f"{cfg.preset or 'custom'}: steps={len(trace)} trades={trades} "
            f"final_inv={list(final)} last_price={last} {analysis.detect_cycle(trace)}")


def run_scenario(config: ScenarioConfig, out_dir, check: bool = True,
                 flow_window: Optional[tuple[int, int]] = None, echo=print) -> int:
    try:
        trace = run(config, check=check)
    except InvariantViolation as exc:
        echo(f"invariant violation: {exc}")
        if exc.record is not None:
            echo(analysis.flow_row(exc.record))
        return EXIT_INVARIANT
    try:
        write_outputs(trace, Path(out_dir), flow_window)
    except OSError as exc:
        echo(f"I/O error: {exc}")
        return EXIT_IO
    echo(summary(trace))
    return EXIT_OK


def _parse_window(text: Optional[str]) -> Optional[tuple[int, int]]:
    if text is None:
        return None
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise click.BadParameter("expected FROM:TO, e.g. 0:24")


class _Group(click.Group):
    """Maps click's usage errors (exit 2 by default) onto the config-error code."""

    def main(self, args=None, prog_name=None, **extra):
        extra.pop("standalone_mode", None)
        try:
            rv = super().main(args, prog_name, standalone_mode=False, **extra)
        except click.exceptions.NoArgsIsHelpError as exc:
            click.echo(exc.ctx.get_help() if exc.ctx else str(exc))
            sys.exit(EXIT_OK)
        except click.ClickException as exc:
            exc.show()
            sys.exit(EXIT_CONFIG)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_CONFIG)
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


@click.group(cls=_Group)
def main():
    """Coupled market-maker simulator."""


def _load(config_path, preset, seed, steps) -> ScenarioConfig:
    if bool(config_path) == bool(preset):
        raise ConfigError([("<cli>", "give exactly one of --config or --preset")])
    if config_path:
        cfg = parse_config(Path(config_path).read_text(encoding="utf-8"))
    else:
        cfg = load_preset(preset)
    if seed is not None:
        cfg = cfg.replace(seed=seed)
    if steps is not None:
        cfg = cfg.replace(steps=steps)
    return cfg


@main.command("run")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="YAML scenario file.")
@click.option("--preset", type=click.Choice(sorted(PRESETS)), help="Built-in scenario.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None)
@click.option("--steps", type=click.IntRange(0), default=None)
@click.option("--out", "out_dir", type=click.Path(), default="out", show_default=True)
@click.option("--no-assert", "no_assert", is_flag=True, help="Skip per-step invariant checks.")
@click.option("--flow-window", default=None, help="FROM:TO steps for flow.txt.")
def run_cmd(config_path, preset, seed, steps, out_dir, no_assert, flow_window):
    """Run a scenario and write CSVs, flow table and cycle report."""
    window = _parse_window(flow_window)
    try:
        cfg = _load(config_path, preset, seed, steps)
    except ConfigError as exc:
        for loc, why in exc.errors:
            click.echo(f"config error: {loc}: {why}", err=True)
        sys.exit(EXIT_CONFIG)
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(EXIT_IO)
    sys.exit(run_scenario(cfg, out_dir, check=not no_assert, flow_window=window, echo=click.echo))


@main.command("show-config")
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--preset", type=click.Choice(sorted(PRESETS)))
def show_config(config_path, preset):
    """Print the fully expanded YAML for a config file or preset."""
    try:
        cfg = _load(config_path, preset, None, None)
    except ConfigError as exc:
        for loc, why in exc.errors:
            click.echo(f"config error: {loc}: {why}", err=True)
        sys.exit(EXIT_CONFIG)
    click.echo(render_config(cfg), nl=False)


if __name__ == "__main__":
    main()
