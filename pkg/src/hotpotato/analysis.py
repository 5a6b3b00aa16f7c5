"""Post-run analysis of traces."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .harness import StepRecord, Trace, comparable_state
from .types import ExecutionBatch, Kind, Order, total_size

INDETERMINATE_NLP = 0.05


def net_liquidity_pressure(buys: Sequence[Order], asks: Sequence[Order],
                           sells: Sequence[Order], bids: Sequence[Order]) -> Fraction:
    """Executable demand per unit of resting supply, buy side minus sell side."""
    return (Fraction(total_size(buys), 1 + total_size(asks))
            - Fraction(total_size(sells), 1 + total_size(bids)))


def nlp_series(trace: Trace) -> list[tuple[int, Fraction]]:
    out = []
    for rec in trace:
        a = rec.arrivals
        out.append((rec.t, net_liquidity_pressure(a[Kind.BUY], a[Kind.ASK],
                                                  a[Kind.SELL], a[Kind.BID])))
    return out


def mean_nlp(trace: Trace) -> Fraction:
    """Mean over exchange ticks only; trader ticks carry no arrivals and would dilute it."""
    series = [(t, v) for t, v in nlp_series(trace) if t % 2]
    if not series:
        return Fraction(0)
    return sum((v for _, v in series), Fraction(0)) / len(series)


def price_direction(trace: Trace) -> Optional[int]:
    """Predicted sign of the price move: +1, -1, or None when indeterminate."""
    m = mean_nlp(trace)
    if abs(m) < INDETERMINATE_NLP:
        return None
    return 1 if m > 0 else -1


def price_series(trace: Trace) -> list[tuple[int, int]]:
    """Last traded price per step in sub-ticks, carried forward between trades."""
    return [(rec.t, rec.last_price) for rec in trace]


# -- stability ---------------------------------------------------------------

@dataclass(frozen=True)
class AlwaysStable:
    pass


@dataclass(frozen=True)
class PanickedAt:
    t: int


def stability_verdict(trace: Trace, trader: int):
    LL, UL = trace.limits[trader]
    for rec in trace:
        inv = rec.inventory(trader)
        if not LL < inv < UL:
            return PanickedAt(rec.t)
    return AlwaysStable()


# -- cycles ------------------------------------------------------------------

@dataclass(frozen=True)
class CycleReport:
    found: bool
    first_index: Optional[int] = None
    period: Optional[int] = None

    def __str__(self):
        if not self.found:
            return "cycle: none"
        return f"cycle: first_index={self.first_index} period={self.period}"


def state_at(trace: Trace, i: int) -> tuple:
    """Comparable sub-state at the start of step ``trace[i].t``."""
    rec = trace[i]
    in_flight = trace[i - 1].orders if i > 0 else ()
    mm_invs = [inv for tid, inv in zip(rec.ids, rec.inv_before) if tid != 0]
    return comparable_state(mm_invs, rec.outstanding, in_flight, rec.t, rec.fundamental_active)


def detect_cycle(trace: Trace) -> CycleReport:
    """Earliest exact repetition of the comparable sub-state.

    Parity is part of the state, so every reported period is even.
    """
    seen: dict[tuple, int] = {}
    for i in range(len(trace)):
        key = state_at(trace, i)
        if key in seen:
            first = seen[key]
            return CycleReport(True, trace[first].t, trace[i].t - trace[first].t)
        seen[key] = i
    return CycleReport(False)


# -- flow table --------------------------------------------------------------

_ORDER_RE = re.compile(r"([baBS])(\d+)\.(\d+)\((\d+)\)")
_PAIR_RE = re.compile(r"\(([baBS]\d+\.\d+),([baBS]\d+\.\d+)\)(\d+)")


def _label(o: Order, issued: int) -> str:
    return f"{o.kind.value}{o.trader}.{issued}"


def _order_token(o: Order, t: int) -> str:
    return f"{_label(o, t)}({o.size})"


def _pairs(batch: ExecutionBatch, kinds: Sequence[Kind]) -> list[str]:
    """Render fills as (resting,aggressive)size; lone legs as label(size)."""
    issued = batch.t - 1
    tokens = []
    have = set(kinds)
    for resting, aggressive in ((Kind.BID, Kind.SELL), (Kind.ASK, Kind.BUY)):
        r_leg, a_leg = batch.leg(resting), batch.leg(aggressive)
        if resting in have and aggressive in have:
            tokens += [f"({_label(r, issued)},{_label(a, issued)}){r.size}"
                       for r, a in zip(r_leg, a_leg)]
        elif resting in have:
            tokens += [_order_token(r, issued) for r in r_leg]
        elif aggressive in have:
            tokens += [_order_token(a, issued) for a in a_leg]
    return tokens


def _group_batches(per_kind: dict) -> list[str]:
    """Merge per-kind delay-line entries that came from the same execution tick."""
    by_origin: dict[int, tuple[ExecutionBatch, list[Kind]]] = {}
    for kind in Kind:
        entries = per_kind[kind]
        if isinstance(entries, ExecutionBatch):
            entries = (entries,)
        for b in entries:
            if not b:
                continue
            slot = by_origin.setdefault(b.t, (b, []))
            slot[1].append(kind)
    tokens = []
    for origin in sorted(by_origin):
        batch, kinds = by_origin[origin]
        tokens += _pairs(batch, kinds)
    return tokens


def flow_row(rec: StepRecord) -> str:
    before = " ".join(str(v) for v in rec.inv_before)
    after = " ".join(str(v) for v in rec.inv_after)
    orders = " ".join(_order_token(o, rec.t) for o in rec.orders)
    xorders = " ".join(_group_batches({k: (rec.executions,) for k in Kind}))
    pending = " ".join(_group_batches(rec.pending))
    dx = " ".join(_group_batches(rec.delivered))
    return " | ".join([str(rec.t), before, orders, xorders, pending, dx, after])


def flow_table(trace: Trace, start: int = 0, stop: Optional[int] = None) -> str:
    """Inventory and flow table for steps ``start`` .. ``stop`` inclusive.

    Order tokens read ``<kind><trader>.<issue step>(<size>)``; execution
    tokens read ``(<resting>,<aggressive>)<size>``.
    """
    ids = trace[0].ids if len(trace) else tuple(sorted(trace.limits))
    inv_cols = " ".join(f"inv{i}" for i in ids)
    header = " | ".join(["time", inv_cols, "orders(size)", "xorders",
                         "pending xorders", "dxorders", inv_cols + " (t+1)"])
    lines = [header]
    if stop is None:
        stop = len(trace) - 1
    for rec in trace:
        if start <= rec.t <= stop:
            lines.append(flow_row(rec))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FlowRow:
    t: int
    inv_before: tuple[int, ...]
    orders: tuple[tuple[str, int, int, int], ...]  # (kind, trader, issued, size)
    executions: tuple[tuple[str, str, int], ...]
    pending: tuple[tuple[str, str, int], ...]
    delivered: tuple[tuple[str, str, int], ...]
    inv_after: tuple[int, ...]


def parse_flow_table(text: str) -> list[FlowRow]:
    rows = []
    for line in text.splitlines()[1:]:
        cols = [c.strip() for c in line.split("|")]
        t, before, orders, xorders, pending, dx, after = cols
        rows.append(FlowRow(
            t=int(t),
            inv_before=tuple(int(v) for v in before.split()),
            orders=tuple((k, int(tr), int(ti), int(sz))
                         for k, tr, ti, sz in _ORDER_RE.findall(orders)),
            executions=tuple((a, b, int(s)) for a, b, s in _PAIR_RE.findall(xorders)),
            pending=tuple((a, b, int(s)) for a, b, s in _PAIR_RE.findall(pending)),
            delivered=tuple((a, b, int(s)) for a, b, s in _PAIR_RE.findall(dx)),
            inv_after=tuple(int(v) for v in after.split()),
        ))
    return rows
