"""Small shared helpers."""

from __future__ import annotations

import ipaddress
from datetime import datetime, timezone


def canonical_ip(address: str) -> str:
    """Canonical text form of an IPv4/IPv6 address; raises ValueError."""
    return str(ipaddress.ip_address(address.strip()))


def to_iso(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).isoformat()


def from_iso(text: str) -> datetime:
    return datetime.fromisoformat(text)
