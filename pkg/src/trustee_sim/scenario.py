"""Scenario configuration: who bids, how the relay behaves, what to expect.

Configs are JSON documents versioned with a schema tag. Validation is
strict and front-loaded so a bad file dies with a diagnostic before any
chain state exists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .relay import RelayStrategy

SCHEMA = "trustee-sim/1"

BEHAVIORS = ("honest", "no_attest", "overdeposit", "late")
MASQUERADE_FLAVORS = ("self_signed", "replayed_quote", "wrong_code")
EXPECT_KEYS = ("final_phase", "winner_index", "price")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class BidderSpec:
    bid_value: int
    behavior: str = "honest"


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    deposit: int
    intervals: tuple[int, int, int]  # block offsets from the start of the run
    bidders: tuple[BidderSpec, ...]
    strategy: RelayStrategy
    fund_amount: int = 1000
    expected_measurement: bytes | None = None  # None: trust the shipped enclave identity
    output_path: str | None = None
    expect: dict | None = None


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(data)


def parse_config(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if data.get("schema") != SCHEMA:
        raise ConfigError(f'config must declare "schema": "{SCHEMA}"')

    seed = _require_int(data, "seed", low=0, high=2**64 - 1)
    deposit = _require_int(data, "deposit", low=0)
    fund_amount = _require_int(data, "fund_amount", low=0, default=1000)

    intervals = data.get("intervals")
    if not isinstance(intervals, dict) or set(intervals) != {"t1", "t2", "t3"}:
        raise ConfigError('intervals must be an object with keys "t1", "t2", "t3"')
    t1, t2, t3 = (_require_int(intervals, key, low=1) for key in ("t1", "t2", "t3"))
    if not t1 < t2 < t3:
        raise ConfigError("interval offsets must be strictly increasing")

    raw_bidders = data.get("bidders")
    if not isinstance(raw_bidders, list) or not raw_bidders:
        raise ConfigError("bidders must be a non-empty list")
    bidders = []
    for i, entry in enumerate(raw_bidders):
        if not isinstance(entry, dict):
            raise ConfigError(f"bidders[{i}] must be an object")
        value = _require_int(entry, "bid_value", low=0, high=2**256 - 1, where=f"bidders[{i}]")
        behavior = entry.get("behavior", "honest")
        if behavior not in BEHAVIORS:
            raise ConfigError(f"bidders[{i}].behavior must be one of {BEHAVIORS}")
        bidders.append(BidderSpec(bid_value=value, behavior=behavior))

    strategy = _parse_strategy(data.get("strategy"), n_bidders=len(bidders))
    _check_block_budget(t1, t2, t3, bidders)

    expected_measurement = None
    if "expected_measurement" in data:
        try:
            expected_measurement = bytes.fromhex(data["expected_measurement"])
        except (TypeError, ValueError):
            raise ConfigError("expected_measurement must be a hex string") from None
        if len(expected_measurement) != 32:
            raise ConfigError("expected_measurement must be 32 bytes of hex")

    expect = data.get("expect")
    if expect is not None:
        if not isinstance(expect, dict) or not set(expect) <= set(EXPECT_KEYS):
            raise ConfigError(f"expect may only contain {EXPECT_KEYS}")

    output_path = data.get("output")
    if output_path is not None and not isinstance(output_path, str):
        raise ConfigError("output must be a string path")

    return ScenarioConfig(
        seed=seed,
        deposit=deposit,
        intervals=(t1, t2, t3),
        bidders=tuple(bidders),
        strategy=strategy,
        fund_amount=fund_amount,
        expected_measurement=expected_measurement,
        output_path=output_path,
        expect=expect,
    )


def _parse_strategy(raw, *, n_bidders: int) -> RelayStrategy:
    if raw is None:
        return RelayStrategy.honest()
    if not isinstance(raw, dict) or "mode" not in raw:
        raise ConfigError('strategy must be an object with a "mode"')
    mode = raw["mode"]
    if mode == "honest":
        return RelayStrategy.honest()
    if mode == "eclipse":
        keep = raw.get("keep")
        if (not isinstance(keep, list) or not keep
                or any(not isinstance(k, int) or k < 0 for k in keep)):
            raise ConfigError("eclipse strategy needs a non-empty keep list of bid indices")
        if sorted(set(keep)) != keep:
            raise ConfigError("eclipse keep indices must be strictly increasing")
        if max(keep) >= n_bidders or len(keep) >= n_bidders:
            raise ConfigError("eclipse keep must be a strict subset of the bid indices")
        return RelayStrategy.eclipse(tuple(keep))
    if mode == "replay":
        instances = raw.get("instances")
        if not isinstance(instances, int) or not 2 <= instances <= 16:
            raise ConfigError("replay strategy needs 2..16 instances")
        return RelayStrategy.replay(instances)
    if mode == "masquerade":
        flavor = raw.get("flavor", "self_signed")
        if flavor not in MASQUERADE_FLAVORS:
            raise ConfigError(f"masquerade flavor must be one of {MASQUERADE_FLAVORS}")
        return RelayStrategy.masquerade(flavor)
    raise ConfigError(f"unknown strategy mode: {mode!r}")


def _check_block_budget(t1: int, t2: int, t3: int, bidders: list[BidderSpec]) -> None:
    """One transaction per block: the windows must fit the scripted traffic."""
    on_time = sum(1 for b in bidders if b.behavior != "late")
    late = len(bidders) - on_time
    if t1 <= 1 + on_time:
        raise ConfigError(f"t1={t1} leaves no room for {on_time} bids after StartAuction")
    if t2 - t1 <= late + 2:
        raise ConfigError(f"t2-t1={t2 - t1} leaves no room for the winner declaration")
    if t3 - t2 <= len(bidders) + 2:
        raise ConfigError(f"t3-t2={t3 - t2} leaves no room for the withdrawal round")


def _require_int(data: dict, key: str, *, low: int | None = None, high: int | None = None,
                 default: int | None = None, where: str = "config") -> int:
    value = data.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{where}.{key} must be an integer")
    if low is not None and value < low:
        raise ConfigError(f"{where}.{key} must be >= {low}")
    if high is not None and value > high:
        raise ConfigError(f"{where}.{key} must be <= {high}")
    return value
