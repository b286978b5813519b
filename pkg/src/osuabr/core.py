"""Shared value types and rate arithmetic.

Rates are cells per second, times are microseconds, sizes are bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

DEFAULT_CELL_SIZE_BITS = 424  # 53 octets

US_PER_S = 1e6


class InvalidParameterError(ValueError):
    """A rate, size or timer argument is outside its legal domain."""


def check_rate(value: float, name: str = "rate") -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise InvalidParameterError(f"{name} must be finite and >= 0, got {value!r}")
    return value


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be finite and > 0, got {value!r}")
    return value


class SimTime(NamedTuple):
    """Event timestamp; tuples compare by time first, then insertion sequence."""

    microseconds: float
    tiebreak_seq: int = 0


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True, slots=True)
class DataCell:
    vc: int
    size_bits: int = DEFAULT_CELL_SIZE_BITS


@dataclass(frozen=True, slots=True)
class RmCell:
    """Resource management cell.

    ``laf`` starts at 0 at the source and switches may only raise it.
    ``seq`` is an engine-assigned identifier used to follow one cell
    across hops; it carries no protocol meaning.
    """

    vc: int
    tcr: float
    ocr: float
    laf: float = 0.0
    becn_bit: bool = False
    timestamp: float = 0.0
    averaging_interval: float = 0.0
    direction: Direction = Direction.FORWARD
    seq: int = 0
    size_bits: int = DEFAULT_CELL_SIZE_BITS

    def __post_init__(self):
        check_rate(self.tcr, "tcr")
        check_rate(self.ocr, "ocr")
        check_rate(self.laf, "laf")

    def turned_around(self) -> "RmCell":
        return replace(self, direction=Direction.BACKWARD)


def target_output_cell_rate(link_bandwidth: float, target_utilization: float,
                            cell_size: float = DEFAULT_CELL_SIZE_BITS) -> float:
    """Cells per second a port aims to forward: ``U * bandwidth / cell_size``."""
    check_positive(link_bandwidth, "link_bandwidth")
    check_positive(cell_size, "cell_size")
    if not 0 < target_utilization <= 1:
        raise InvalidParameterError(
            f"target_utilization must lie in (0, 1], got {target_utilization!r}")
    return target_utilization * link_bandwidth / cell_size


def link_cell_rate(link_bandwidth: float, cell_size: float = DEFAULT_CELL_SIZE_BITS) -> float:
    """Raw cell capacity of a link in cells per second."""
    return target_output_cell_rate(link_bandwidth, 1.0, cell_size)
