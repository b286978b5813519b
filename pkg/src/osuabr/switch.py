"""Switch output-port measurement and explicit-rate feedback.

Every output port keeps its own averaging-interval counters and computes
a load adjustment decision for each forward RM cell. The decision is one
of three fairness rules (basic TUB rule, aggressive multi-line functions,
precise max-min fair share); the RM cell's LAF is raised to it if larger.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping

from .core import (DEFAULT_CELL_SIZE_BITS, Direction, InvalidParameterError, RmCell,
                   US_PER_S, check_positive, target_output_cell_rate)

logger = logging.getLogger(__name__)


class FairnessOption(str, Enum):
    BASIC = "basic"
    AGGRESSIVE = "aggressive"
    PRECISE = "precise"


@dataclass(frozen=True)
class SwitchConfig:
    target_utilization: float = 0.9
    tub_half_width: float = 0.1
    averaging_interval: float = 1000.0  # us
    option: FairnessOption = FairnessOption.BASIC
    becn_option: bool = False
    link_bandwidth: float = 155.52e6
    cell_size: int = DEFAULT_CELL_SIZE_BITS
    count_rm_cells: bool = False

    def __post_init__(self):
        if not 0 < self.target_utilization < 1:
            raise InvalidParameterError(
                f"target_utilization must lie in (0, 1), got {self.target_utilization!r}")
        if not 0 < self.tub_half_width < 0.5:
            raise InvalidParameterError(
                f"tub_half_width must lie in (0, 0.5), got {self.tub_half_width!r}")
        check_positive(self.averaging_interval, "averaging_interval")
        check_positive(self.link_bandwidth, "link_bandwidth")
        check_positive(self.cell_size, "cell_size")
        object.__setattr__(self, "option", FairnessOption(self.option))

    @property
    def target_cell_rate(self) -> float:
        return target_output_cell_rate(self.link_bandwidth, self.target_utilization,
                                       self.cell_size)


def basic_fairness_decision(z: float, ocr: float, fair_share: float, delta: float) -> float:
    """TUB rule: inside the band, overloading VCs see ``z/(1-delta)`` and the
    rest ``z/(1+delta)``; outside it every VC sees ``z``."""
    if 1 - delta <= z <= 1 + delta:
        if ocr > fair_share:
            return z / (1 - delta)
        return z / (1 + delta)
    return z


def aggressive_increase(z: float, ocr: float, fair_share: float, target_cell_rate: float,
                        num_active: int) -> float:
    """Underload function: VCs below ``z*fair_share`` get ``z``, the factor then
    rises linearly to 1 at ``z*target_cell_rate``."""
    if ocr < fair_share * z or num_active == 1:
        return z
    if ocr < target_cell_rate * z:
        return z + (1 - z) * (ocr / (z * fair_share) - 1) / (num_active - 1)
    return 1.0


def aggressive_decrease(z: float, ocr: float, fair_share: float, target_cell_rate: float,
                        num_active: int) -> float:
    """Overload function: VCs at or below the fair share are left alone, the
    factor climbs to ``z`` at ``z*fair_share``, stays there up to the target
    rate and grows proportionally beyond it."""
    if ocr <= fair_share and num_active != 1:
        return 1.0
    if ocr < fair_share * z:
        return max(1.0, ocr / fair_share)
    if ocr <= target_cell_rate:
        return z
    # z*fair_share can exceed the target rate (z > num_active); dividing by the
    # larger knee keeps this segment continuous with the previous one.
    return z * ocr / max(target_cell_rate, fair_share * z)


def aggressive_fairness_decision(z: float, ocr: float, fair_share: float,
                                 target_cell_rate: float, num_active: int,
                                 delta: float) -> float:
    if num_active < 1:
        raise InvalidParameterError("num_active must be >= 1")
    if z < 1 - delta:
        return aggressive_increase(z, ocr, fair_share, target_cell_rate, num_active)
    if z >= 1 + delta:
        return aggressive_decrease(z, ocr, fair_share, target_cell_rate, num_active)
    return basic_fairness_decision(z, ocr, fair_share, delta)


def precise_fair_share(ocrs: Mapping[int, float] | list[float],
                       target_cell_rate: float) -> tuple[float, int]:
    """Max-min fair share of ``target_cell_rate`` given measured OCRs.

    Repeatedly removes VCs running below the current share and splits what
    they leave over among the rest, until the set of such VCs is stable.
    One VC (the fastest) is always kept in the sharing set, so an
    under-subscribed port offers the leftover capacity to it.

    Returns ``(fair_share, passes)``.
    """
    values = list(ocrs.values()) if isinstance(ocrs, Mapping) else list(ocrs)
    n = len(values)
    if n == 0:
        return target_cell_rate, 0
    greedy = max(range(n), key=values.__getitem__)
    fair_share = target_cell_rate / n
    under_prev = None
    passes = 0
    while True:
        passes += 1
        under = [i for i, ocr in enumerate(values) if ocr < fair_share and i != greedy]
        if under == under_prev:
            return fair_share, passes
        under_prev = under
        fair_share = (target_cell_rate - sum(values[i] for i in under)) / max(1, n - len(under))


def precise_fairshare_decision(ocr_table: Mapping[int, float], vc: int,
                               target_cell_rate: float) -> tuple[float, float, int]:
    """Returns ``(decision, fair_share, passes)`` for the VC's entry."""
    fair_share, passes = precise_fair_share(ocr_table, target_cell_rate)
    return ocr_table[vc] / fair_share, fair_share, passes


@dataclass
class SwitchPortState:
    """Measurement and decision state of one output port.

    ``load_level`` is ``None`` until the first averaging interval has
    elapsed; RM cells seen before that get a decision of 0, which the
    max rule turns into "no opinion".
    """

    config: SwitchConfig
    received_cell_count: int = 0
    vc_seen: set = field(default_factory=set)
    active_vcs: frozenset = frozenset()
    num_active_vcs: int = 1
    load_level: float | None = None
    ocr_table: dict = field(default_factory=dict)
    last_decision: float = 0.0
    max_precise_passes: int = 0
    diagnostics: Counter = field(default_factory=Counter)

    def __post_init__(self):
        self.fair_share_rate = self.target_cell_rate

    @property
    def target_cell_rate(self) -> float:
        return self.config.target_cell_rate

    @property
    def target_cell_count(self) -> float:
        return self.target_cell_rate * self.config.averaging_interval / US_PER_S

    @property
    def upper_load_bound(self) -> float:
        return 1 + self.config.tub_half_width

    @property
    def lower_load_bound(self) -> float:
        return 1 - self.config.tub_half_width

    def on_data_cell(self, cell) -> "SwitchPortState":
        self.received_cell_count += 1
        self.vc_seen.add(cell.vc)
        return self

    def on_interval_timer(self, now: float) -> tuple["SwitchPortState", float]:
        self.num_active_vcs = max(len(self.vc_seen), 1)
        self.fair_share_rate = self.target_cell_rate / self.num_active_vcs
        self.load_level = self.received_cell_count / self.target_cell_count
        self.active_vcs = frozenset(self.vc_seen)
        for vc in [vc for vc in self.ocr_table if vc not in self.vc_seen]:
            del self.ocr_table[vc]
        self.vc_seen.clear()
        self.received_cell_count = 0
        return self, now + self.config.averaging_interval

    def decide(self, cell: RmCell) -> float:
        cfg = self.config
        z = self.load_level
        if cfg.option is FairnessOption.PRECISE:
            self.ocr_table[cell.vc] = cell.ocr
        if z is None:
            return 0.0
        if cfg.option is FairnessOption.BASIC:
            return basic_fairness_decision(z, cell.ocr, self.fair_share_rate, cfg.tub_half_width)
        if cfg.option is FairnessOption.AGGRESSIVE:
            return aggressive_fairness_decision(z, cell.ocr, self.fair_share_rate,
                                                self.target_cell_rate, self.num_active_vcs,
                                                cfg.tub_half_width)
        table = {}
        for vc in self.active_vcs:
            if vc not in self.ocr_table:
                self.diagnostics["active_vc_without_ocr"] += 1
            table[vc] = self.ocr_table.get(vc, 0.0)
        table[cell.vc] = cell.ocr
        decision, fair_share, passes = precise_fairshare_decision(
            table, cell.vc, self.target_cell_rate)
        self.fair_share_rate = fair_share
        if passes > self.max_precise_passes:
            self.max_precise_passes = passes
        if passes > 2:
            self.diagnostics["precise_passes_over_2"] += 1
            logger.debug("precise fair share needed %d passes for %d VCs", passes, len(table))
        return decision

    def on_rm_cell(self, cell: RmCell, now: float = 0.0) -> tuple[RmCell, RmCell | None]:
        """Mark a forward RM cell. Returns ``(forwarded, becn_copy_or_None)``."""
        if cell.direction is not Direction.FORWARD:
            return cell, None
        if self.config.count_rm_cells:
            self.on_data_cell(cell)
        decision = self.decide(cell)
        self.last_decision = decision
        becn = None
        updates = {"averaging_interval": max(cell.averaging_interval,
                                             self.config.averaging_interval)}
        if decision > cell.laf:
            updates["laf"] = decision
        forwarded = replace(cell, **updates)
        if self.config.becn_option and decision > cell.laf and decision > 1:
            becn = replace(forwarded, becn_bit=True, direction=Direction.BACKWARD)
        return forwarded, becn
