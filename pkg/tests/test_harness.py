import random

import pytest
from hypothesis import given, strategies as st

from hotpotato.config import config_from_dict, load_preset
from hotpotato.harness import DelayLine, Rng, World, delay_shift, run, shuffle_arrivals
from hotpotato.types import EMPTY_BATCH, ExecutionBatch, Kind, Order


def mm(inv, UL=10, LL=-10, **kw):
    return {"role": "market_maker", "UL": UL, "LL": LL, "inventory": inv, **kw}


class TestRng:
    def test_reference_vectors(self):
        r = Rng(1234567)
        assert [r.next() for _ in range(5)] == [
            6457827717110365317, 3203168211198807973, 9817491932198370423,
            4593380528125082431, 16408922859458223821]

    def test_seed_zero(self):
        assert Rng(0).next() == 0xE220A8397B1DCDAF

    def test_spawned_streams_differ(self):
        root = Rng(5)
        a, b = root.spawn(1), root.spawn(2)
        assert [a.next() for _ in range(3)] != [b.next() for _ in range(3)]


class TestShuffle:
    orders = [Order(Kind.BID, 1, 100, i) for i in (1, 2, 3, 4)]

    def test_identity_without_rng(self):
        assert shuffle_arrivals(self.orders, None) == self.orders

    def test_singleton(self):
        assert shuffle_arrivals(self.orders[:1], Rng(9)) == self.orders[:1]

    def test_golden_seed_42(self):
        out = shuffle_arrivals(self.orders, Rng(42))
        assert [o.trader for o in out] == [3, 1, 4, 2]

    @given(st.integers(0, 2**64 - 1), st.integers(0, 8))
    def test_is_permutation_and_repeatable(self, seed, n):
        xs = [Order(Kind.ASK, 1, 1, i) for i in range(n)]
        a = shuffle_arrivals(xs, Rng(seed))
        assert sorted(a) == xs
        assert a == shuffle_arrivals(xs, Rng(seed))


class TestDelayLine:
    def test_zero_delay_is_identity(self):
        line = DelayLine(0)
        b = ExecutionBatch(t=3)
        assert delay_shift(line, b)[1] is b

    def test_two_step_delay(self):
        line = DelayLine(2)
        b = ExecutionBatch(xbids=(Order(Kind.BID, 1, 1, 1),), t=5)
        out = [line.shift(b), line.shift(EMPTY_BATCH), line.shift(EMPTY_BATCH)]
        assert out == [EMPTY_BATCH, EMPTY_BATCH, b]

    @given(st.integers(0, 6), st.integers(1, 40))
    def test_tagged_items_arrive_exactly_delta_later(self, delta, n):
        line = DelayLine(delta, fill=None)
        delivered_at = {}
        for t in range(n + delta):
            out = line.shift(("tag", t))
            if out is not None:
                assert out[1] not in delivered_at
                delivered_at[out[1]] = t
        assert delivered_at == {s: s + delta for s in range(n)}

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            DelayLine(-1)


def test_quiescent_world_records_nothing():
    cfg = config_from_dict({"steps": 4, "traders": [mm(0)]})
    tr = run(cfg)
    # a lone maker quotes but nothing ever executes
    assert all(not r.executions for r in tr)
    assert all(r.inv_before == (0,) for r in tr)


def test_zero_steps():
    assert len(run(load_preset("table1"), 0)) == 0


def test_table1_first_execution():
    tr = run(load_preset("table1"), 2)
    x = tr[1].executions
    assert [(o.trader, o.size) for o in x.xbids] == [(1, 10)]
    assert [(o.trader, o.size) for o in x.xsells] == [(2, 10)]
    assert [(o.kind, o.size) for o in tr[0].orders if o.trader == 1][0] == (Kind.BID, 17)


def test_single_mm_delay_trajectory():
    tr = run(load_preset("single-mm-delay"), 8)
    assert [tr[t].inventory(1) for t in (0, 2, 4, 6)] == [-8, -8, 9, 26]
    assert [o for o in tr[6].orders if o.trader == 1] == [Order(Kind.SELL, 10, 0, 1)]


def test_delivery_schedule_table1():
    tr = run(load_preset("table1"), 8)
    assert tr[3].delivered[Kind.BID].t == 1
    assert tr[5].delivered[Kind.BID].t == 3
    assert tr[4].pending[Kind.BID][0].t == 3


@pytest.mark.parametrize("preset", ["table1", "single-mm-delay", "paired5", "hetero5-up"])
def test_parity_and_conservation(preset):
    tr = run(load_preset(preset, seed=3, steps=120))
    start = sum(tr[0].inv_before)
    for r in tr:
        if r.t % 2:
            assert not r.orders
        else:
            assert not r.executions
            assert not any(r.arrivals.values())
        if len(set(tr.config.deltas.values())) == 1:
            assert sum(r.inv_after) == sum(r.inv_before)
    assert sum(tr[-1].inv_after) + sum(
        b.inventory_delta(i) for i in tr[-1].ids for b in tr[-1].pending[Kind.BID] + (tr[-1].executions,)
    ) == start


def test_per_kind_delays_conserve_through_pipe():
    cfg = config_from_dict({"steps": 60, "delta": {"bids": 1, "asks": 1, "buys": 1, "sells": 3},
                            "traders": [mm(-8), mm(18)]})
    tr = run(cfg)  # the per-step conservation check is on by default
    # the seller hears about its fills two steps after the bidder
    bid_t = [r.t for r in tr if r.delivered[Kind.BID].xbids][0]
    sell_t = [r.t for r in tr if r.delivered[Kind.SELL].xsells][0]
    assert sell_t - bid_t == 2


def test_no_executables_without_delay():
    cfg = config_from_dict({"steps": 200, "shuffle": True, "seed": 11,
                            "traders": [mm(i) for i in (-9, -3, 0, 4, 9)]})
    for r in run(cfg):
        assert not any(o.kind in (Kind.BUY, Kind.SELL) for o in r.orders)
        assert not r.executions


def test_exit_on_panic_trigger():
    cfg = config_from_dict({"steps": 40, "delta": 2, "traders": [
        {"role": "fundamental", "side": "sell", "omega": 10, "exit_on_panic": True},
        mm(-8), mm(0)]})
    tr = run(cfg)
    exits = [r.t for r in tr if r.t % 2 == 0 and not r.fundamental_active]
    assert exits
    t_exit = exits[0]
    invs = tr[t_exit].inv_before[1:]
    assert any(v >= 10 or v <= -10 for v in invs) and any(-10 < v < 10 for v in invs)
    assert not any(o.trader == 0 for r in tr.records[t_exit:] for o in r.orders)


def test_determinism_and_seed_independence_without_shuffle():
    a = run(load_preset("table1", seed=1))
    b = run(load_preset("table1", seed=999))
    assert a.records == b.records
    c = run(load_preset("paired5", seed=4))
    d = run(load_preset("paired5", seed=4))
    assert c.records == d.records


class _Adversary(World):
    """Adds random executable flow from an untracked trader 99."""

    def __init__(self, cfg, seed):
        super().__init__(cfg, check=False)
        self.adv = random.Random(seed)

    def _quote(self, t):
        orders = super()._quote(t)
        if t % 2 == 0:
            for kind in (Kind.SELL, Kind.BUY):
                if self.adv.random() < 0.7:
                    orders.append(Order(kind, self.adv.randint(1, 40), 0, 99))
        return orders


@pytest.mark.parametrize("UL", [3, 5, 10])
def test_stable_bound_under_random_executable_flow(UL):
    for start in range(-UL + 1, UL):
        cfg = config_from_dict({"traders": [mm(start, UL=UL, LL=-UL)]})
        world = _Adversary(cfg, seed=start)
        lo, hi = min(start, -UL + 1), max(start, UL - 1)
        for _ in range(400):
            rec = world.step()
            assert lo <= rec.inv_after[0] <= hi
            assert not any(o.trader == 1 and not o.kind.resting for o in rec.orders)
