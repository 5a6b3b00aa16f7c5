"""Synchronous discrete-time scheduler.

Traders act on even steps, the exchange on odd steps. One call to
:meth:`World.step` advances time by one tick:

1. odd ``t``: the exchange groups the orders issued at ``t-1``, optionally
   shuffles each group, rebuilds both books, matches sells against bids and
   buys against asks, and publishes best prices;
2. this tick's executions enter the confirmation delay lines and whatever
   was enqueued ``delta`` ticks ago comes out;
3. even ``t``: every trader quotes from its inventory at ``t`` and the best
   prices published at ``t-1``;
4. every trader's inventory for ``t+1`` absorbs the confirmations delivered
   at ``t``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Sequence

from . import agents, orderbook
from .agents import FundamentalTraderState, MarketMakerState, Side
from .config import ScenarioConfig
from .types import EMPTY_BATCH, ExecutionBatch, Kind, Order, group_by_kind, total_size

MASK64 = (1 << 64) - 1


class InvariantViolation(AssertionError):
    def __init__(self, t: int, message: str, record: Optional["StepRecord"] = None):
        self.t = t
        self.record = record
        super().__init__(f"step {t}: {message}")


class Rng:
    """splitmix64."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def spawn(self, key: int) -> "Rng":
        """Independent child stream, keyed so that trader streams never overlap."""
        return Rng(Rng((self.state ^ (key * 0xD1B54A32D192ED03)) & MASK64).next())


def shuffle_arrivals(orders: Sequence[Order], rng: Optional[Rng]) -> list[Order]:
    """Fisher-Yates from the top; ``rng=None`` means no shuffling."""
    out = list(orders)
    if rng is None:
        return out
    for i in range(len(out) - 1, 0, -1):
        j = rng.next() % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


class DelayLine:
    """FIFO whose output at each shift is the input from ``delta`` shifts ago."""

    def __init__(self, delta: int, fill=EMPTY_BATCH):
        if delta < 0:
            raise ValueError("delta must be non-negative")
        self.delta = delta
        self.buffer: deque = deque([fill] * delta)

    def shift(self, incoming):
        if self.delta == 0:
            return incoming
        self.buffer.append(incoming)
        return self.buffer.popleft()

    def contents(self) -> tuple:
        return tuple(self.buffer)


def delay_shift(line: DelayLine, incoming):
    delivered = line.shift(incoming)
    return line, delivered


@dataclass(frozen=True)
class StepRecord:
    t: int
    ids: tuple[int, ...]
    inv_before: tuple[int, ...]
    inv_after: tuple[int, ...]
    orders: tuple[Order, ...]               # issued at t (even steps)
    arrivals: dict                          # Kind -> orders processed at t (odd steps)
    executions: ExecutionBatch              # x_t
    outstanding: dict                       # Kind -> batches buffered at the start of t
    pending: dict                           # Kind -> batches still buffered, excluding x_t
    delivered: dict                         # Kind -> batch leaving the line at t
    bestbid: int
    bestask: int
    last_price: int
    fundamental_active: bool = False

    def inventory(self, trader: int, after: bool = False) -> int:
        invs = self.inv_after if after else self.inv_before
        return invs[self.ids.index(trader)]

    @property
    def delivered_batch(self) -> ExecutionBatch:
        d = self.delivered
        return ExecutionBatch(d[Kind.BID].xbids, d[Kind.ASK].xasks,
                              d[Kind.BUY].xbuys, d[Kind.SELL].xsells)


@dataclass
class Trace:
    config: ScenarioConfig
    records: list[StepRecord] = field(default_factory=list)
    limits: dict = field(default_factory=dict)  # trader id -> (LL, UL)

    def __len__(self):
        return len(self.records)

    def __iter__(self) -> Iterator[StepRecord]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


class World:
    def __init__(self, config: ScenarioConfig, check: bool = True):
        self.config = config
        self.check = check
        self.t = 0
        self.scale = config.price_scale
        root = Rng(config.seed)
        self.shuffle_rng = root.spawn(0) if config.shuffle else None
        self.mms: list[MarketMakerState] = [
            MarketMakerState(id=i, inv=mm.inventory, UL=mm.UL, LL=mm.LL,
                             zeta=config.zeta_for(mm), sizing=mm.sizing, every=mm.every)
            for i, mm in config.market_makers
        ]
        self.trader_rngs = {mm.id: root.spawn(mm.id) for mm in self.mms}
        fs = config.fundamental
        self.fundamental: Optional[FundamentalTraderState] = None
        if fs is not None:
            self.fundamental = FundamentalTraderState(
                id=0, side=fs.side, omega=fs.omega, timelimit=fs.timelimit,
                exit_on_panic=fs.exit_on_panic)
        self.lines = {k: DelayLine(d) for k, d in config.deltas.items()}
        self.in_flight: list[Order] = []
        self.bestbid = config.initial_best_bid
        self.bestask = config.initial_best_ask
        self.last_price = config.initial_mid
        self._total = sum(self.inventories())

    @property
    def ids(self) -> tuple[int, ...]:
        head = (0,) if self.fundamental is not None else ()
        return head + tuple(mm.id for mm in self.mms)

    def inventories(self) -> tuple[int, ...]:
        head = (self.fundamental.inv,) if self.fundamental is not None else ()
        return head + tuple(mm.inv for mm in self.mms)

    def _traders(self):
        if self.fundamental is not None:
            yield self.fundamental
        yield from self.mms

    def _exchange(self, t: int):
        arrivals = group_by_kind(self.in_flight)
        self.in_flight = []
        for kind in (Kind.BID, Kind.ASK, Kind.BUY, Kind.SELL):
            arrivals[kind] = shuffle_arrivals(arrivals[kind], self.shuffle_rng)
        bidbook, askbook = orderbook.rebuild_books(arrivals[Kind.BID], arrivals[Kind.ASK])
        sells = orderbook.match(bidbook, arrivals[Kind.SELL])
        buys = orderbook.match(askbook, arrivals[Kind.BUY])
        batch = ExecutionBatch(
            xbids=sells.executed_resting, xasks=buys.executed_resting,
            xbuys=buys.executed_aggressive, xsells=sells.executed_aggressive, t=t)
        self.bestbid, self.bestask = orderbook.best_prices(
            sells.remaining_book, buys.remaining_book, (self.bestbid, self.bestask))
        fills = batch.xsells + batch.xbuys
        if fills:
            self.last_price = fills[-1].price
        if self.check:
            self._check_exchange(t, bidbook, askbook, sells, buys, arrivals)
        return arrivals, batch

    def _check_exchange(self, t, bidbook, askbook, sells, buys, arrivals):
        if not orderbook.is_sorted(bidbook, Kind.BID) or not orderbook.is_sorted(askbook, Kind.ASK):
            raise InvariantViolation(t, "book ordering violated")
        for book, res in ((bidbook, sells), (askbook, buys)):
            if total_size(res.executed_resting) != total_size(res.executed_aggressive):
                raise InvariantViolation(t, "executed size not conserved")
            if total_size(res.remaining_book) + total_size(res.executed_resting) != total_size(book):
                raise InvariantViolation(t, "book size not conserved by matching")
            if any(o.size <= 0 for o in res.executed_resting + res.executed_aggressive):
                raise InvariantViolation(t, "zero-size execution")

    def _quote(self, t: int) -> list[Order]:
        if t % 2:
            return []
        fund = self.fundamental
        if fund is not None and fund.exit_on_panic and fund.active(t):
            if any(mm.panic for mm in self.mms) and any(mm.stable for mm in self.mms):
                self.fundamental = fund = replace(fund, timelimit=t)
        orders: list[Order] = []
        if fund is not None:
            orders += agents.fundamental_step(fund, t)
        for mm in self.mms:
            orders += agents.market_maker_step(mm, t, self.bestbid, self.bestask,
                                               self.scale, self.trader_rngs[mm.id])
        if self.check:
            if any(o.size <= 0 for o in orders):
                raise InvariantViolation(t, "zero-size order emitted")
            for mm in self.mms:
                own = [o for o in orders if o.trader == mm.id]
                executable = [o for o in own if not o.kind.resting]
                if mm.panic and (len(executable) != 1 or len(own) != 1):
                    raise InvariantViolation(t, f"trader {mm.id} in panic must send one executable")
                if mm.stable and executable:
                    raise InvariantViolation(t, f"stable trader {mm.id} sent an executable")
        return orders

    def step(self) -> StepRecord:
        t = self.t
        inv_before = self.inventories()
        fundamental_active = self.fundamental is not None and self.fundamental.active(t)
        outstanding = {k: line.contents() for k, line in self.lines.items()}

        if t % 2:
            arrivals, batch = self._exchange(t)
        else:
            arrivals, batch = {k: [] for k in Kind}, ExecutionBatch(t=t)

        delivered = {k: line.shift(batch) for k, line in self.lines.items()}
        pending = {k: line.contents()[:-1] for k, line in self.lines.items()}

        orders = self._quote(t)
        if t % 2 == 0 and self.fundamental is not None:
            fundamental_active = self.fundamental.active(t)

        dx = ExecutionBatch(delivered[Kind.BID].xbids, delivered[Kind.ASK].xasks,
                            delivered[Kind.BUY].xbuys, delivered[Kind.SELL].xsells)
        self.mms = [agents.update_inventory(mm, dx) for mm in self.mms]
        if self.fundamental is not None:
            self.fundamental = agents.update_inventory(self.fundamental, dx)
        self.in_flight = orders

        record = StepRecord(
            t=t, ids=self.ids, inv_before=inv_before, inv_after=self.inventories(),
            orders=tuple(orders), arrivals={k: tuple(v) for k, v in arrivals.items()},
            executions=batch, outstanding=outstanding, pending=pending,
            delivered=delivered, bestbid=self.bestbid, bestask=self.bestask,
            last_price=self.last_price, fundamental_active=fundamental_active)
        if self.check:
            self._check_conservation(record)
        self.t += 1
        return record

    def _check_conservation(self, record: StepRecord):
        # inventories plus confirmations still in the pipe must net to the start total
        in_pipe = 0
        for kind, line in self.lines.items():
            sign = 1 if kind in (Kind.BID, Kind.BUY) else -1
            for b in line.contents():
                in_pipe += sign * total_size(b.leg(kind))
        if sum(record.inv_after) + in_pipe != self._total:
            raise InvariantViolation(record.t, "inventory not conserved", record)

    def comparable_state(self) -> tuple:
        """Inventories, in-flight orders and outstanding confirmations, without prices."""
        return comparable_state(
            self.inventories()[1:] if self.fundamental is not None else self.inventories(),
            {k: line.contents() for k, line in self.lines.items()},
            self.in_flight, self.t, self.fundamental is not None and self.fundamental.active(self.t))


def comparable_state(mm_invs, outstanding, in_flight, t, fundamental_active) -> tuple:
    lines = tuple(
        (k.value, tuple(b.quantities() for b in outstanding[k])) for k in Kind)
    flight = tuple(sorted((o.kind.value, o.size, o.trader) for o in in_flight))
    return tuple(mm_invs), lines, flight, t % 2, fundamental_active


def run(config: ScenarioConfig, steps: Optional[int] = None, check: bool = True) -> Trace:
    """Run ``steps`` ticks (default ``config.steps``), t = 0 .. steps-1."""
    world = World(config, check=check)
    n = config.steps if steps is None else steps
    trace = Trace(config, limits={mm.id: (mm.LL, mm.UL) for mm in world.mms})
    for _ in range(n):
        trace.records.append(world.step())
    return trace
