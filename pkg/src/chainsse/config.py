"""Simulation parameters shared by the ledger, the schemes and the CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigError

_VALID_SCHEMES = ("A", "B")


@dataclass(frozen=True)
class SimConfig:
    """One immutable bag of knobs.

    k         symmetric security parameter in bits (128 or 256)
    p_bits    bit width of transaction ids and of the zero terminator
    iota      per-output payload budget in bytes
    scheme    which index layout to use, "A" or "B"
    tick      logical clock increase per mined block
    max_delay worst-case blocks between broadcast and inclusion
    fee       flat transaction fee
    faucet    coins minted to the genesis output
    """

    k: int = 256
    p_bits: int = 256
    iota: int = 80
    scheme: str = "A"
    tick: int = 1
    max_delay: int = 2
    fee: int = 0
    faucet: int = 1_000_000

    def __post_init__(self) -> None:
        if self.k not in (128, 256):
            raise ConfigError(f"k must be 128 or 256, got {self.k}")
        if self.p_bits % 8 != 0 or not 64 <= self.p_bits <= 512:
            raise ConfigError(f"p_bits must be a multiple of 8 in [64, 512], got {self.p_bits}")
        if self.iota <= self.p_bytes:
            raise ConfigError(f"iota={self.iota} leaves no room above id width {self.p_bytes}")
        if self.scheme not in _VALID_SCHEMES:
            raise ConfigError(f"scheme must be A or B, got {self.scheme!r}")
        if self.tick < 1:
            raise ConfigError("tick must be >= 1")
        if self.max_delay < 1:
            raise ConfigError("max_delay must be >= 1")
        if self.fee < 0 or self.faucet <= 0:
            raise ConfigError("fee must be >= 0 and faucet > 0")

    @property
    def p_bytes(self) -> int:
        return self.p_bits // 8

    @property
    def zero_id(self) -> bytes:
        """The all-zero transaction id that terminates every chain walk."""
        return bytes(self.p_bytes)

    def replace(self, **changes) -> "SimConfig":
        data = asdict(self)
        data.update(changes)
        return SimConfig(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config JSON: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def load(cls, path: Path) -> "SimConfig":
        return cls.from_json(path.read_text())

    def save(self, path: Path) -> None:
        path.write_text(self.to_json())
