"""Shared domain types: orders, execution batches, fixed-point prices."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

DEFAULT_SCALE = 10_000


class Kind(Enum):
    BID = "b"
    ASK = "a"
    BUY = "B"
    SELL = "S"

    @property
    def resting(self) -> bool:
        return self in (Kind.BID, Kind.ASK)


class Order(NamedTuple):
    """A (kind, size, price, trader) quadruplet.

    Prices are integer sub-ticks. Executable orders (BUY/SELL) carry price 0
    until executed, after which the executed copy carries the fill price.
    """

    kind: Kind
    size: int
    price: int
    trader: int


def sum_sizes_for_trader(trader: int, orders: Iterable[Order]) -> int:
    """Total size of the orders in ``orders`` that belong to ``trader``."""
    return sum(o.size for o in orders if o.trader == trader)


def total_size(orders: Iterable[Order]) -> int:
    return sum(o.size for o in orders)


@dataclass(frozen=True)
class ExecutionBatch:
    """Executions produced by one exchange tick.

    ``xbids[k]`` was filled against ``xsells[k]`` and ``xasks[k]`` against
    ``xbuys[k]``. ``t`` is the step the executions happened at (-1 for the
    empty placeholder batches that prime a delay line).
    """

    xbids: tuple[Order, ...] = ()
    xasks: tuple[Order, ...] = ()
    xbuys: tuple[Order, ...] = ()
    xsells: tuple[Order, ...] = ()
    t: int = -1

    def __bool__(self) -> bool:
        return bool(self.xbids or self.xasks or self.xbuys or self.xsells)

    def leg(self, kind: Kind) -> tuple[Order, ...]:
        return {
            Kind.BID: self.xbids,
            Kind.ASK: self.xasks,
            Kind.BUY: self.xbuys,
            Kind.SELL: self.xsells,
        }[kind]

    def inventory_delta(self, trader: int) -> int:
        return (
            sum_sizes_for_trader(trader, self.xbids)
            + sum_sizes_for_trader(trader, self.xbuys)
            - sum_sizes_for_trader(trader, self.xasks)
            - sum_sizes_for_trader(trader, self.xsells)
        )

    def quantities(self) -> tuple:
        """Price-free view used for state comparison."""
        return tuple(
            tuple((o.kind, o.size, o.trader) for o in leg)
            for leg in (self.xbids, self.xasks, self.xbuys, self.xsells)
        )


EMPTY_BATCH = ExecutionBatch()


def round_half_away(value: Fraction) -> int:
    """Round a rational to the nearest integer, ties away from zero."""
    n, d = value.numerator, value.denominator
    q, r = divmod(abs(n), d)
    if 2 * r >= d:
        q += 1
    return q if n >= 0 else -q


def to_subticks(ticks: int | float | str | Decimal, scale: int = DEFAULT_SCALE) -> int:
    """Convert a tick price (as written in configs) to integer sub-ticks."""
    value = Decimal(str(ticks)) * scale
    if value != value.to_integral_value():
        raise ValueError(f"price {ticks} is not representable at scale {scale}")
    return int(value)


def format_price(subticks: int, scale: int = DEFAULT_SCALE) -> str:
    """Render sub-ticks as an exact decimal tick string."""
    text = format(Decimal(subticks) / Decimal(scale), "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text


def group_by_kind(orders: Sequence[Order]) -> dict[Kind, list[Order]]:
    groups: dict[Kind, list[Order]] = {k: [] for k in Kind}
    for o in orders:
        groups[o.kind].append(o)
    return groups
