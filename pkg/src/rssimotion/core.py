"""Power/RSSI conversions and the sample record every module consumes.

Power is carried as plain floats with unit-suffixed names (``*_mw``,
``*_dbm``, ``*_db``) so values flow straight into numpy.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

from rssimotion.errors import DomainError, ParseError

_OCTET = re.compile(r"^[0-9a-fA-F]{2}$")


def mw_to_dbm(power_mw: float) -> float:
    """Convert power in milliwatts to dBm (``10*log10(P)``)."""
    if not math.isfinite(power_mw) or power_mw <= 0:
        raise DomainError(f"power must be finite and > 0 mW, got {power_mw!r}")
    return 10.0 * math.log10(power_mw)


def dbm_to_mw(rssi_dbm: float) -> float:
    """Inverse of :func:`mw_to_dbm`."""
    if not math.isfinite(rssi_dbm):
        raise DomainError(f"RSSI must be finite, got {rssi_dbm!r}")
    return 10.0 ** (rssi_dbm / 10.0)


@lru_cache(maxsize=1024)
def parse_bssid(text: str) -> str:
    """Return the canonical lowercase ``aa:bb:cc:dd:ee:ff`` form of a BSSID."""
    if not isinstance(text, str):
        raise ParseError(f"BSSID must be a string, got {type(text).__name__}")
    octets = text.strip().split(":")
    if len(octets) != 6:
        raise ParseError(f"BSSID {text!r} has {len(octets)} octets, expected 6")
    for octet in octets:
        if not _OCTET.match(octet):
            raise ParseError(f"BSSID {text!r} has invalid octet {octet!r}")
    return ":".join(o.lower() for o in octets)


@dataclass(frozen=True, slots=True)
class RssiSample:
    """One RSSI reading for one BSSID.

    ``timestamp_ms`` counts milliseconds from the start of the trace. The
    BSSID is canonicalised on construction.
    """

    timestamp_ms: int
    bssid: str
    rssi_dbm: float
    channel: int | None = None

    def __post_init__(self) -> None:
        if isinstance(self.timestamp_ms, bool) or not isinstance(self.timestamp_ms, int):
            raise DomainError(f"timestamp_ms must be an integer, got {self.timestamp_ms!r}")
        rssi = float(self.rssi_dbm)
        if not math.isfinite(rssi):
            raise DomainError(f"rssi_dbm must be finite, got {self.rssi_dbm!r}")
        if self.channel is not None and (
            isinstance(self.channel, bool) or not isinstance(self.channel, int) or self.channel <= 0
        ):
            raise DomainError(f"channel must be a positive integer, got {self.channel!r}")
        object.__setattr__(self, "rssi_dbm", rssi)
        object.__setattr__(self, "bssid", parse_bssid(self.bssid))
