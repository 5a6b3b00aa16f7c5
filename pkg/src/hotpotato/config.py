"""Scenario configuration: YAML schema, validation, rendering and presets.

Schema (all prices in ticks; converted to integer sub-ticks on load)::

    preset: table1            # optional; keys below override the preset
    steps: 48
    seed: 0
    shuffle: false
    price_scale: 10000        # sub-ticks per tick
    initial_best_bid: 99
    initial_best_ask: 101
    price_band: 8             # default zeta is half of this
    delta: 2                  # or {bids: 2, asks: 2, buys: 2, sells: 4}
    traders:
      - role: market_maker
        UL: 10
        LL: -10
        inventory: -8
        zeta: 4               # optional
        sizing: deterministic # or uniform
        every: 1              # optional; quote every k-th even step
      - role: fundamental     # at most one; always trader id 0
        side: sell
        omega: 1000
        timelimit: 50         # optional
        exit_on_panic: false  # optional

Market makers get ids 1, 2, ... in list order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Union

import yaml

from .agents import Side, Sizing
from .types import DEFAULT_SCALE, Kind, format_price, to_subticks

DELTA_KEYS = {"bids": Kind.BID, "asks": Kind.ASK, "buys": Kind.BUY, "sells": Kind.SELL}


class ConfigError(ValueError):
    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("; ".join(f"{loc}: {why}" for loc, why in errors))


@dataclass(frozen=True)
class MarketMakerSpec:
    UL: int
    LL: int
    inventory: int = 0
    zeta: Optional[int] = None  # sub-ticks; None means half the price band
    sizing: Sizing = Sizing.DETERMINISTIC
    every: int = 1


@dataclass(frozen=True)
class FundamentalSpec:
    side: Side = Side.SELL
    omega: int = 1
    timelimit: Optional[int] = None
    exit_on_panic: bool = False


TraderSpec = Union[MarketMakerSpec, FundamentalSpec]


@dataclass(frozen=True)
class ScenarioConfig:
    steps: int = 100
    seed: int = 0
    shuffle: bool = False
    price_scale: int = DEFAULT_SCALE
    initial_best_bid: int = 99 * DEFAULT_SCALE
    initial_best_ask: int = 101 * DEFAULT_SCALE
    price_band: int = 8 * DEFAULT_SCALE
    delta: tuple[tuple[Kind, int], ...] = tuple((k, 0) for k in Kind)
    traders: tuple[TraderSpec, ...] = ()
    preset: Optional[str] = None

    @property
    def deltas(self) -> dict[Kind, int]:
        return dict(self.delta)

    @property
    def market_makers(self) -> list[tuple[int, MarketMakerSpec]]:
        mms = [t for t in self.traders if isinstance(t, MarketMakerSpec)]
        return list(enumerate(mms, start=1))

    @property
    def fundamental(self) -> Optional[FundamentalSpec]:
        for t in self.traders:
            if isinstance(t, FundamentalSpec):
                return t
        return None

    @property
    def initial_mid(self) -> int:
        # sub-tick mid; a half sub-tick rounds up
        return (self.initial_best_bid + self.initial_best_ask + 1) // 2

    def zeta_for(self, mm: MarketMakerSpec) -> int:
        return mm.zeta if mm.zeta is not None else self.price_band // 2

    def replace(self, **changes) -> "ScenarioConfig":
        from dataclasses import replace
        return replace(self, **changes)


PRESETS: dict[str, dict[str, Any]] = {
    "table1": {
        "steps": 48,
        "shuffle": False,
        "delta": 2,
        "traders": [
            {"role": "market_maker", "UL": 10, "LL": -10, "inventory": -8},
            {"role": "market_maker", "UL": 10, "LL": -10, "inventory": 18},
        ],
    },
    "single-mm-delay": {
        "steps": 20,
        "shuffle": False,
        "delta": 2,
        "traders": [
            {"role": "fundamental", "side": "sell", "omega": 1000},
            {"role": "market_maker", "UL": 10, "LL": -10, "inventory": -8},
        ],
    },
    "paired5": {
        "steps": 100,
        "shuffle": True,
        "delta": 1,
        "traders": [
            {"role": "market_maker", "UL": 10, "LL": -10, "inventory": 30},
            {"role": "market_maker", "UL": 10, "LL": -10, "inventory": 27},
            {"role": "market_maker", "UL": 10, "LL": -10, "inventory": -10},
            {"role": "market_maker", "UL": 10, "LL": -10, "inventory": -10},
            {"role": "market_maker", "UL": 10, "LL": -10, "inventory": 0},
        ],
    },
    "hetero5-up": {
        "steps": 500,
        "shuffle": True,
        "delta": 1,
        "traders": [
            {"role": "market_maker", "UL": 12, "LL": -12, "inventory": -21, "zeta": 7, "sizing": "uniform"},
            {"role": "market_maker", "UL": 16, "LL": -16, "inventory": -23, "zeta": 8},
            {"role": "market_maker", "UL": 9, "LL": -9, "inventory": 0, "zeta": 2},
            {"role": "market_maker", "UL": 15, "LL": -15, "inventory": 0, "zeta": 6},
            {"role": "market_maker", "UL": 20, "LL": -20, "inventory": 0, "zeta": 4},
        ],
    },
    "hetero5-down": {
        "steps": 500,
        "shuffle": True,
        "delta": 1,
        "traders": [
            {"role": "market_maker", "UL": 12, "LL": -12, "inventory": 21, "zeta": 7, "sizing": "uniform"},
            {"role": "market_maker", "UL": 16, "LL": -16, "inventory": 23, "zeta": 8},
            {"role": "market_maker", "UL": 9, "LL": -9, "inventory": 0, "zeta": 2},
            {"role": "market_maker", "UL": 15, "LL": -15, "inventory": 0, "zeta": 6},
            {"role": "market_maker", "UL": 20, "LL": -20, "inventory": 0, "zeta": 4},
        ],
    },
}

TOP_KEYS = {"preset", "steps", "seed", "shuffle", "price_scale", "initial_best_bid",
            "initial_best_ask", "price_band", "delta", "traders"}
MM_KEYS = {"role", "UL", "LL", "inventory", "zeta", "sizing", "every"}
FUND_KEYS = {"role", "side", "omega", "timelimit", "exit_on_panic"}


class _Validator:
    def __init__(self):
        self.errors: list[tuple[str, str]] = []

    def fail(self, loc: str, why: str):
        self.errors.append((loc, why))

    def integer(self, raw: dict, key: str, loc: str, default=None, required=False,
                minimum=None):
        if key not in raw:
            if required:
                self.fail(loc, "missing required field")
            return default
        value = raw[key]
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(loc, f"expected an integer, got {value!r}")
            return default
        if minimum is not None and value < minimum:
            self.fail(loc, f"must be >= {minimum}, got {value}")
            return default
        return value

    def boolean(self, raw: dict, key: str, loc: str, default: bool):
        value = raw.get(key, default)
        if not isinstance(value, bool):
            self.fail(loc, f"expected true/false, got {value!r}")
            return default
        return value

    def price(self, raw: dict, key: str, loc: str, default: int, scale: int) -> int:
        if key not in raw:
            return default
        value = raw[key]
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            self.fail(loc, f"expected a price in ticks, got {value!r}")
            return default
        try:
            subticks = to_subticks(value, scale)
        except (ValueError, ArithmeticError) as exc:
            self.fail(loc, str(exc) if isinstance(exc, ValueError) else f"bad price {value!r}")
            return default
        if subticks < 0:
            self.fail(loc, "prices must be non-negative")
            return default
        return subticks

    def choice(self, raw: dict, key: str, loc: str, enum, default):
        if key not in raw:
            return default
        try:
            return enum(raw[key])
        except ValueError:
            allowed = ", ".join(e.value for e in enum)
            self.fail(loc, f"expected one of {allowed}, got {raw[key]!r}")
            return default

    def unknown(self, raw: dict, allowed: set, loc: str):
        for key in raw:
            if key not in allowed:
                self.fail(f"{loc}{key}" if not loc else f"{loc}.{key}", "unknown key")


def _merge_preset(raw: dict, v: _Validator) -> dict:
    name = raw.get("preset")
    if name is None:
        return raw
    if name not in PRESETS:
        v.fail("preset", f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}")
        return raw
    merged = dict(PRESETS[name])
    merged.update(raw)
    return merged


def _parse_trader(raw: Any, loc: str, v: _Validator, scale: int) -> Optional[TraderSpec]:
    if not isinstance(raw, dict):
        v.fail(loc, "expected a mapping")
        return None
    role = raw.get("role")
    if role == "market_maker":
        v.unknown(raw, MM_KEYS, loc)
        UL = v.integer(raw, "UL", f"{loc}.UL", required=True)
        LL = v.integer(raw, "LL", f"{loc}.LL", required=True)
        inv = v.integer(raw, "inventory", f"{loc}.inventory", default=0)
        every = v.integer(raw, "every", f"{loc}.every", default=1, minimum=1)
        zeta = v.price(raw, "zeta", f"{loc}.zeta", None, scale) if "zeta" in raw else None
        sizing = v.choice(raw, "sizing", f"{loc}.sizing", Sizing, Sizing.DETERMINISTIC)
        if UL is None or LL is None:
            return None
        ok = True
        if UL <= 0:
            v.fail(f"{loc}.UL", "must be positive")
            ok = False
        if LL >= 0:
            v.fail(f"{loc}.LL", "must be negative")
            ok = False
        if ok and UL - LL - 2 <= 0:
            v.fail(loc, "degenerate pricing denominator: UL - LL - 2 must be > 0")
            ok = False
        if not ok:
            return None
        return MarketMakerSpec(UL=UL, LL=LL, inventory=inv if inv is not None else 0,
                               zeta=zeta, sizing=sizing, every=every or 1)
    if role == "fundamental":
        v.unknown(raw, FUND_KEYS, loc)
        side = v.choice(raw, "side", f"{loc}.side", Side, Side.SELL)
        omega = v.integer(raw, "omega", f"{loc}.omega", required=True, minimum=1)
        timelimit = v.integer(raw, "timelimit", f"{loc}.timelimit", default=None, minimum=0)
        exit_on_panic = v.boolean(raw, "exit_on_panic", f"{loc}.exit_on_panic", False)
        if omega is None:
            return None
        return FundamentalSpec(side=side, omega=omega, timelimit=timelimit,
                               exit_on_panic=exit_on_panic)
    v.fail(f"{loc}.role", f"expected market_maker or fundamental, got {role!r}")
    return None


def config_from_dict(raw: Any) -> ScenarioConfig:
    v = _Validator()
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError([("<root>", "expected a mapping at top level")])
    v.unknown(raw, TOP_KEYS, "")
    raw = _merge_preset(raw, v)

    steps = v.integer(raw, "steps", "steps", default=100, minimum=0)
    seed = v.integer(raw, "seed", "seed", default=0)
    if seed is not None and not 0 <= seed < 2**64:
        v.fail("seed", "must fit in an unsigned 64-bit integer")
        seed = 0
    shuffle = v.boolean(raw, "shuffle", "shuffle", False)
    scale = v.integer(raw, "price_scale", "price_scale", default=DEFAULT_SCALE, minimum=1)
    bb = v.price(raw, "initial_best_bid", "initial_best_bid", 99 * scale, scale)
    ba = v.price(raw, "initial_best_ask", "initial_best_ask", 101 * scale, scale)
    if bb >= ba:
        v.fail("initial_best_bid", "must be below initial_best_ask")
    band = v.price(raw, "price_band", "price_band", 8 * scale, scale)

    delta_raw = raw.get("delta", 0)
    deltas = {k: 0 for k in Kind}
    if isinstance(delta_raw, dict):
        for key, value in delta_raw.items():
            if key not in DELTA_KEYS:
                v.fail(f"delta.{key}", "unknown key; expected bids, asks, buys or sells")
                continue
            d = v.integer(delta_raw, key, f"delta.{key}", default=0, minimum=0)
            deltas[DELTA_KEYS[key]] = d
    else:
        d = v.integer(raw, "delta", "delta", default=0, minimum=0)
        deltas = {k: d for k in Kind}

    traders_raw = raw.get("traders", [])
    traders: list[TraderSpec] = []
    if not isinstance(traders_raw, list):
        v.fail("traders", "expected a list")
        traders_raw = []
    for i, tr in enumerate(traders_raw):
        spec = _parse_trader(tr, f"traders[{i}]", v, scale)
        if spec is not None:
            traders.append(spec)
    if sum(isinstance(t, FundamentalSpec) for t in traders) > 1:
        v.fail("traders", "at most one fundamental trader is supported")
    if traders_raw and not any(isinstance(t, MarketMakerSpec) for t in traders) and not v.errors:
        v.fail("traders", "need at least one market maker")

    if v.errors:
        raise ConfigError(v.errors)
    return ScenarioConfig(
        steps=steps, seed=seed, shuffle=shuffle, price_scale=scale,
        initial_best_bid=bb, initial_best_ask=ba, price_band=band,
        delta=tuple((k, deltas[k]) for k in Kind), traders=tuple(traders),
        preset=raw.get("preset"),
    )


def parse_config(text: str) -> ScenarioConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([("<yaml>", str(exc).replace("\n", " "))]) from exc
    return config_from_dict(raw)


def load_preset(name: str, **overrides) -> ScenarioConfig:
    return config_from_dict({"preset": name, **overrides})


def _ticks(subticks: int, scale: int) -> Union[int, str]:
    text = format_price(subticks, scale)
    return int(text) if "." not in text else text


def config_to_dict(cfg: ScenarioConfig) -> dict:
    scale = cfg.price_scale
    deltas = cfg.deltas
    if len(set(deltas.values())) == 1:
        delta: Any = deltas[Kind.BID]
    else:
        delta = {name: deltas[k] for name, k in DELTA_KEYS.items()}
    traders = []
    for t in cfg.traders:
        if isinstance(t, MarketMakerSpec):
            d: dict[str, Any] = {"role": "market_maker", "UL": t.UL, "LL": t.LL,
                                 "inventory": t.inventory}
            if t.zeta is not None:
                d["zeta"] = _ticks(t.zeta, scale)
            d["sizing"] = t.sizing.value
            if t.every != 1:
                d["every"] = t.every
        else:
            d = {"role": "fundamental", "side": t.side.value, "omega": t.omega}
            if t.timelimit is not None:
                d["timelimit"] = t.timelimit
            if t.exit_on_panic:
                d["exit_on_panic"] = True
        traders.append(d)
    out: dict[str, Any] = {"preset": cfg.preset} if cfg.preset else {}
    out.update({
        "steps": cfg.steps,
        "seed": cfg.seed,
        "shuffle": cfg.shuffle,
        "price_scale": scale,
        "initial_best_bid": _ticks(cfg.initial_best_bid, scale),
        "initial_best_ask": _ticks(cfg.initial_best_ask, scale),
        "price_band": _ticks(cfg.price_band, scale),
        "delta": delta,
        "traders": traders,
    })
    return out


def render_config(cfg: ScenarioConfig) -> str:
    """YAML text that :func:`parse_config` maps back to ``cfg``.

    Every field is written out, so a preset name, if kept, only labels the file.
    """
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
