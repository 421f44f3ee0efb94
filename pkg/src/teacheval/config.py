"""Service configuration resolved from CLI flags and environment variables."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

ENV_PREFIX = "TEACHEVAL_"

DEFAULT_ADDR = "127.0.0.1:8080"


@dataclass
class ServiceConfig:
    data_dir: Path
    addr: str = DEFAULT_ADDR
    bank_path: Optional[Path] = None  # None = shipped default bank
    org_map_path: Optional[Path] = None  # None = <data_dir>/org_map.json
    session_ttl: float = 7200.0
    trusted_proxy: bool = False
    ui_dir: Optional[Path] = None

    @property
    def host(self) -> str:
        host, _, _ = self.addr.rpartition(":")
        return host or "127.0.0.1"

    @property
    def port(self) -> int:
        _, _, port = self.addr.rpartition(":")
        return int(port)

    def resolved_org_map_path(self) -> Path:
        return self.org_map_path or self.data_dir / "org_map.json"
