"""Fill-And-Kill limit order book.

Books are plain tuples of resting orders in price-time priority. Nothing
rests across exchange ticks: each tick rebuilds both books from the orders
that just arrived, matches the executables against them, and drops the rest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .types import Kind, Order

Book = tuple[Order, ...]


@dataclass(frozen=True)
class MatchResult:
    remaining_book: Book
    executed_resting: tuple[Order, ...]
    executed_aggressive: tuple[Order, ...]


def _insert(book: Book, new: Iterable[Order], kind: Kind, better) -> Book:
    entries = list(book)
    for order in new:
        if order.kind is not kind:
            raise ValueError(f"cannot insert {order.kind.name} order into {kind.name} book")
        if order.size <= 0:
            raise ValueError(f"zero-size order {order} must be filtered before insertion")
        # after every resting order at the same or a better price
        pos = len(entries)
        for i, resting in enumerate(entries):
            if better(order.price, resting.price):
                pos = i
                break
        entries.insert(pos, order)
    return tuple(entries)


def insert_ask(book: Book, new: Iterable[Order]) -> Book:
    """Insert asks one at a time, lowest price first, ties by arrival."""
    return _insert(book, new, Kind.ASK, lambda p, f: p < f)


def insert_bid(book: Book, new: Iterable[Order]) -> Book:
    """Insert bids one at a time, highest price first, ties by arrival."""
    return _insert(book, new, Kind.BID, lambda p, f: p > f)


def rebuild_books(bids: Sequence[Order], asks: Sequence[Order]) -> tuple[Book, Book]:
    return insert_bid((), bids), insert_ask((), asks)


def match(book: Book, executables: Sequence[Order]) -> MatchResult:
    """Walk ``book`` with each executable in turn.

    Each fill happens at the resting order's price. Executables (or their
    remainders) left over once the book is empty are discarded.
    """
    entries = list(book)
    resting_fills: list[Order] = []
    aggressive_fills: list[Order] = []
    for agg in executables:
        want = agg.size
        while want > 0 and entries:
            head = entries[0]
            fill = min(want, head.size)
            resting_fills.append(head._replace(size=fill))
            aggressive_fills.append(agg._replace(size=fill, price=head.price))
            want -= fill
            if fill == head.size:
                entries.pop(0)
            else:
                entries[0] = head._replace(size=head.size - fill)
        if not entries:
            break
    return MatchResult(tuple(entries), tuple(resting_fills), tuple(aggressive_fills))


def execution_prices(resting: Sequence[Order], executables: Sequence[Order]) -> list[int]:
    """Fill prices obtained by walking the book, written as a direct recursion.

    Kept deliberately separate from :func:`match` so the two can be checked
    against each other.
    """
    if not resting or not executables:
        return []
    r, rr = resting[0], list(resting[1:])
    e, ee = executables[0], list(executables[1:])
    if e.size < r.size:
        return [r.price] + execution_prices([r._replace(size=r.size - e.size)] + rr, ee)
    if e.size > r.size:
        return [r.price] + execution_prices(rr, [e._replace(size=e.size - r.size)] + ee)
    return [r.price] + execution_prices(rr, ee)


def best_prices(bidbook: Book, askbook: Book, previous: tuple[int, int]) -> tuple[int, int]:
    """Head-of-book prices; an empty side keeps its previously published price."""
    bestbid = bidbook[0].price if bidbook else previous[0]
    bestask = askbook[0].price if askbook else previous[1]
    return bestbid, bestask


def is_sorted(book: Book, kind: Kind) -> bool:
    prices = [o.price for o in book]
    if kind is Kind.BID:
        return all(a >= b for a, b in zip(prices, prices[1:]))
    return all(a <= b for a, b in zip(prices, prices[1:]))
