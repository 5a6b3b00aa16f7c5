"""Discrete-time simulator of coupled inventory-constrained market makers
trading through a Fill-And-Kill order book with delayed confirmations."""

from .types import ExecutionBatch, Kind, Order, sum_sizes_for_trader
from .config import ScenarioConfig, ConfigError, load_preset, parse_config, render_config
from .harness import Trace, StepRecord, World, run
from .analysis import detect_cycle, flow_table, net_liquidity_pressure, stability_verdict

__all__ = [
    "ExecutionBatch", "Kind", "Order", "sum_sizes_for_trader",
    "ScenarioConfig", "ConfigError", "load_preset", "parse_config", "render_config",
    "Trace", "StepRecord", "World", "run",
    "detect_cycle", "flow_table", "net_liquidity_pressure", "stability_verdict",
]
