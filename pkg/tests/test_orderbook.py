import pytest
from hypothesis import given, settings, strategies as st

from hotpotato.orderbook import (best_prices, execution_prices, insert_ask, insert_bid,
                                 is_sorted, match, rebuild_books)
from hotpotato.types import Kind, Order, total_size


def A(size, price, trader):
    return Order(Kind.ASK, size, price, trader)


def B(size, price, trader):
    return Order(Kind.BID, size, price, trader)


def S(size, trader):
    return Order(Kind.SELL, size, 0, trader)


class TestInsert:
    def test_ask_into_empty(self):
        assert insert_ask((), [A(1, 101, 1)]) == (A(1, 101, 1),)

    def test_asks_sorted_low_first(self):
        assert insert_ask((), [A(1, 101, 1), A(1, 100, 2)]) == (A(1, 100, 2), A(1, 101, 1))

    def test_ask_equal_price_keeps_arrival(self):
        assert insert_ask((A(2, 100, 1),), [A(3, 100, 2)]) == (A(2, 100, 1), A(3, 100, 2))

    def test_bid_into_empty(self):
        assert insert_bid((), [B(1, 99, 1)]) == (B(1, 99, 1),)

    def test_bids_sorted_high_first(self):
        assert insert_bid((), [B(1, 99, 1), B(1, 100, 2)]) == (B(1, 100, 2), B(1, 99, 1))

    def test_bid_equal_price_keeps_arrival(self):
        assert insert_bid((B(2, 100, 1),), [B(3, 100, 2)]) == (B(2, 100, 1), B(3, 100, 2))

    def test_later_order_can_jump_ahead_of_earlier_new_ones(self):
        # one-at-a-time insertion keeps the book sorted for any arrival order
        book = insert_ask((), [A(1, 100, 1), A(1, 101, 2), A(1, 99, 3)])
        assert [o.price for o in book] == [99, 100, 101]

    def test_wrong_kind_rejected(self):
        with pytest.raises(ValueError):
            insert_ask((), [B(1, 100, 1)])
        with pytest.raises(ValueError):
            insert_bid((), [B(0, 100, 1)])


def test_rebuild_books():
    assert rebuild_books([], []) == ((), ())
    assert rebuild_books([B(17, 5, 1)], []) == ((B(17, 5, 1),), ())


class TestMatch:
    def test_empty_book_discards(self):
        r = match((), [S(10, 2)])
        assert r.remaining_book == () and r.executed_resting == () and r.executed_aggressive == ()

    def test_walks_the_book(self):
        r = match((B(5, 100, 1), B(4, 99, 2)), [S(7, 3)])
        assert r.executed_resting == (B(5, 100, 1), B(2, 99, 2))
        assert r.executed_aggressive == (Order(Kind.SELL, 5, 100, 3), Order(Kind.SELL, 2, 99, 3))
        assert r.remaining_book == (B(2, 99, 2),)

    def test_partial_fill_of_resting(self):
        r = match((B(17, 990000, 1),), [S(10, 2)])
        assert r.executed_resting == (B(10, 990000, 1),)
        assert r.executed_aggressive == (Order(Kind.SELL, 10, 990000, 2),)
        assert r.remaining_book == (B(7, 990000, 1),)

    def test_exact_match_consumes_both(self):
        r = match((B(5, 100, 1), B(1, 90, 2)), [S(5, 3)])
        assert r.remaining_book == (B(1, 90, 2),)
        assert total_size(r.executed_aggressive) == 5

    def test_leftover_executables_discarded(self):
        r = match((B(3, 100, 1),), [S(5, 2), S(4, 3)])
        assert total_size(r.executed_aggressive) == 3
        assert r.remaining_book == ()

    def test_no_executables(self):
        r = match((B(3, 100, 1),), [])
        assert r.remaining_book == (B(3, 100, 1),)


class TestExecutionPrices:
    def test_empty(self):
        assert execution_prices([], [S(4, 1)]) == []

    def test_walk(self):
        assert execution_prices([B(5, 100, 1), B(4, 99, 2)], [S(7, 3)]) == [100, 99]

    def test_exact(self):
        assert execution_prices([B(5, 100, 1)], [S(5, 3)]) == [100]


def test_best_prices():
    assert best_prices((B(1, 99, 1),), (A(1, 101, 2),), (0, 0)) == (99, 101)
    assert best_prices((), (), (99, 101)) == (99, 101)
    assert best_prices((), (A(1, 105, 2),), (99, 101)) == (99, 105)


# -- properties ----------------------------------------------------------------

grid = st.integers(0, 4).map(lambda k: 100 + k)
bids_st = st.lists(st.builds(B, st.integers(1, 10), grid, st.integers(1, 5)), max_size=5)
asks_st = st.lists(st.builds(A, st.integers(1, 10), grid, st.integers(1, 5)), max_size=5)
sells_st = st.lists(st.builds(S, st.integers(1, 10), st.integers(1, 5)), max_size=3)
buys_st = st.lists(st.builds(lambda s, t: Order(Kind.BUY, s, 0, t), st.integers(1, 10),
                             st.integers(1, 5)), max_size=3)


@given(bids_st, bids_st)
def test_insert_bid_keeps_order(a, b):
    book = insert_bid(insert_bid((), a), b)
    assert is_sorted(book, Kind.BID)
    assert sorted(book) == sorted(a + b)


@given(asks_st)
def test_insert_ask_is_stable_sort(a):
    # equal prices stay in arrival order
    assert list(insert_ask((), a)) == sorted(a, key=lambda o: o.price)


@given(bids_st, sells_st)
@settings(max_examples=300)
def test_match_properties_sell_side(bids, sells):
    book = insert_bid((), bids)
    r = match(book, sells)
    assert total_size(r.executed_resting) == total_size(r.executed_aggressive)
    assert total_size(r.remaining_book) + total_size(r.executed_resting) == total_size(book)
    prices = [o.price for o in r.executed_aggressive]
    assert prices == [o.price for o in r.executed_resting]
    assert prices == execution_prices(list(book), sells)
    assert all(a >= b for a, b in zip(prices, prices[1:]))


@given(asks_st, buys_st)
def test_match_properties_buy_side(asks, buys):
    book = insert_ask((), asks)
    r = match(book, buys)
    prices = [o.price for o in r.executed_aggressive]
    assert prices == execution_prices(list(book), buys)
    assert all(a <= b for a, b in zip(prices, prices[1:]))
    assert total_size(r.remaining_book) + total_size(r.executed_resting) == total_size(book)
