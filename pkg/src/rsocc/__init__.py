"""Multilevel rolling-shutter optical camera communication: simulator and codec."""

from rsocc.errors import (
    ConfigError,
    DegenerateLevels,
    DegenerateSignal,
    HeaderNotFound,
    IncompletePacket,
    InsufficientExtrema,
    InvalidArgument,
    OCCError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateLevels",
    "DegenerateSignal",
    "HeaderNotFound",
    "IncompletePacket",
    "InsufficientExtrema",
    "InvalidArgument",
    "OCCError",
]
