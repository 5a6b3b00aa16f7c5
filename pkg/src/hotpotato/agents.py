"""Inventory-constrained market makers and fundamental traders.

Every function here is pure: state in, orders out. The harness owns all
mutation, including inventory updates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Optional

from .types import ExecutionBatch, Kind, Order, round_half_away


class Sizing(Enum):
    DETERMINISTIC = "deterministic"
    UNIFORM = "uniform"


class Side(Enum):
    SELL = "sell"
    BUY = "buy"


@dataclass(frozen=True)
class MarketMakerState:
    id: int
    inv: int
    UL: int
    LL: int
    zeta: int  # sub-ticks
    sizing: Sizing = Sizing.DETERMINISTIC
    every: int = 1  # quote on every k-th even step

    def __post_init__(self):
        if not (self.LL < 0 < self.UL):
            raise ValueError(f"trader {self.id}: need LL < 0 < UL, got LL={self.LL} UL={self.UL}")
        if self.UL - self.LL - 2 <= 0:
            raise ValueError(f"trader {self.id}: degenerate pricing denominator UL-LL-2")

    @property
    def panic(self) -> bool:
        return self.inv >= self.UL or self.inv <= self.LL

    @property
    def stable(self) -> bool:
        return not self.panic


@dataclass(frozen=True)
class FundamentalTraderState:
    id: int = 0
    side: Side = Side.SELL
    omega: int = 1
    timelimit: Optional[int] = None  # None: never exits on its own
    exit_on_panic: bool = False
    inv: int = 0  # implicit; bookkeeping only

    def active(self, t: int) -> bool:
        return self.timelimit is None or t < self.timelimit


def bid_ask_prices(bestbid: int, bestask: int, state: MarketMakerState,
                   scale: int) -> tuple[int, int]:
    """Inventory-skewed quote prices in sub-ticks.

    The bid sits one tick below mid when inventory is LL+1 and a further
    ``zeta`` below when it is UL-1; the ask mirrors that. Neither goes below 0.
    """
    mid = Fraction(bestbid + bestask, 2)
    r = Fraction(state.UL - 1 - state.inv, state.UL - state.LL - 2)
    bid = mid - scale - state.zeta * (1 - r)
    ask = mid + scale + state.zeta * r
    return max(0, round_half_away(bid)), max(0, round_half_away(ask))


def _uniform(rng, bound: int) -> int:
    return rng.next() % (bound + 1) if bound > 0 else 0


def resting_sizes(state: MarketMakerState, rng=None) -> tuple[int, int]:
    bid_cap = max(0, state.UL - 1 - state.inv)
    ask_cap = max(0, state.inv - (state.LL + 1))
    if state.sizing is Sizing.UNIFORM:
        bid_cap, ask_cap = _uniform(rng, bid_cap), _uniform(rng, ask_cap)
    bidsize = 0 if state.inv >= state.UL else bid_cap
    asksize = 0 if state.inv <= state.LL else ask_cap
    return bidsize, asksize


def executable_sizes(state: MarketMakerState) -> tuple[int, int]:
    """(buysize, sellsize): UL to dump a long panic, -LL to cover a short one."""
    sellsize = state.UL if state.inv >= state.UL else 0
    buysize = -state.LL if state.inv <= state.LL else 0
    return buysize, sellsize


def update_inventory(state, delivered: ExecutionBatch):
    return replace(state, inv=state.inv + delivered.inventory_delta(state.id))


def quotes_at(state: MarketMakerState, t: int) -> bool:
    return t % 2 == 0 and (t // 2) % state.every == 0


def market_maker_step(state: MarketMakerState, t: int, bestbid: int, bestask: int,
                      scale: int, rng=None) -> list[Order]:
    if not quotes_at(state, t):
        return []
    if state.panic:
        buysize, sellsize = executable_sizes(state)
        if sellsize:
            return [Order(Kind.SELL, sellsize, 0, state.id)]
        return [Order(Kind.BUY, buysize, 0, state.id)]
    bidsize, asksize = resting_sizes(state, rng)
    bidprice, askprice = bid_ask_prices(bestbid, bestask, state, scale)
    orders = [
        Order(Kind.BID, bidsize, bidprice, state.id),
        Order(Kind.ASK, asksize, askprice, state.id),
    ]
    return [o for o in orders if o.size > 0]


def fundamental_step(state: FundamentalTraderState, t: int) -> list[Order]:
    if t % 2 or not state.active(t) or state.omega <= 0:
        return []
    kind = Kind.SELL if state.side is Side.SELL else Kind.BUY
    return [Order(kind, state.omega, 0, state.id)]
