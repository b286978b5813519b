"""ABR source end system: data pacing at TCR, periodic RM cells, rate updates."""

from __future__ import annotations

import logging
from collections import Counter, deque
from dataclasses import dataclass, field

from .core import (DataCell, InvalidParameterError, RmCell, US_PER_S,
                   check_positive, check_rate, DEFAULT_CELL_SIZE_BITS)

logger = logging.getLogger(__name__)

LAF_EPSILON = 1e-9


@dataclass
class SourceState:
    """Per-VC source state.

    Rates are cells/s, ``averaging_interval`` and ``inter_cell_time`` are
    microseconds. ``taa_guard`` exists for tests that demonstrate what goes
    wrong without the stale-feedback filter; leave it on otherwise.
    """

    vc: int
    initial_cell_rate: float
    peak_cell_rate: float
    averaging_interval: float
    min_cell_rate: float | None = None
    becn_option: bool = False
    greedy: bool = True
    cell_size: int = DEFAULT_CELL_SIZE_BITS
    taa_guard: bool = True

    tcr: float = field(init=False, default=0.0)
    inter_cell_time: float = field(init=False, default=0.0)
    transmitted_cell_count: int = field(init=False, default=0)
    taa: float = field(init=False, default=0.0)
    ocr: float = field(init=False, default=0.0)
    output_queue: deque = field(init=False, default_factory=deque)
    diagnostics: Counter = field(init=False, default_factory=Counter)
    _window: float = field(init=False, default=0.0, repr=False)

    def __post_init__(self):
        check_positive(self.peak_cell_rate, "peak_cell_rate")
        check_positive(self.averaging_interval, "averaging_interval")
        if self.min_cell_rate is None:
            # one cell per averaging interval
            self.min_cell_rate = US_PER_S / self.averaging_interval
        check_rate(self.min_cell_rate, "min_cell_rate")
        if self.min_cell_rate > self.peak_cell_rate:
            raise InvalidParameterError(
                f"min_cell_rate {self.min_cell_rate} exceeds peak_cell_rate {self.peak_cell_rate}")
        self.on_init()

    def on_init(self) -> "SourceState":
        rate = check_rate(self.initial_cell_rate, "initial_cell_rate")
        if not self.min_cell_rate <= rate <= self.peak_cell_rate:
            raise InvalidParameterError(
                f"initial_cell_rate {rate} outside [{self.min_cell_rate}, {self.peak_cell_rate}]")
        self._set_tcr(rate)
        self.transmitted_cell_count = 0
        self.ocr = 0.0
        self.taa = 0.0
        self._window = self.averaging_interval
        return self

    def _set_tcr(self, rate: float) -> None:
        self.tcr = min(max(rate, self.min_cell_rate), self.peak_cell_rate)
        self.inter_cell_time = US_PER_S / self.tcr

    def on_data_from_host(self, burst) -> "SourceState":
        self.output_queue.extend(burst)
        return self

    def has_data(self) -> bool:
        return self.greedy or bool(self.output_queue)

    def on_cell_timer(self, now: float) -> tuple[DataCell | None, float]:
        """Send the head-of-line cell, if any. Returns ``(cell, next_expiry)``."""
        cell = None
        if self.output_queue:
            cell = self.output_queue.popleft()
        elif self.greedy:
            cell = DataCell(self.vc, self.cell_size)
        if cell is not None:
            self.transmitted_cell_count += 1
        return cell, now + self.inter_cell_time

    def on_averaging_timer(self, now: float) -> tuple[RmCell, float]:
        """Measure OCR over the elapsed window and build a forward RM cell."""
        self.ocr = self.transmitted_cell_count * US_PER_S / self._window
        self.transmitted_cell_count = 0
        cell = RmCell(
            vc=self.vc,
            tcr=max(self.tcr, self.ocr),
            ocr=self.ocr,
            laf=0.0,
            becn_bit=False,
            timestamp=now if self.becn_option else 0.0,
            averaging_interval=self.averaging_interval,
            size_bits=self.cell_size,
        )
        self._window = self.averaging_interval
        return cell, now + self._window

    def _new_tcr(self, cell: RmCell) -> float:
        if cell.laf <= LAF_EPSILON:
            return self.peak_cell_rate
        return cell.tcr / cell.laf

    def on_returned_rm_cell(self, cell: RmCell) -> "SourceState":
        """Act on an RM cell that completed the round trip (FECN)."""
        stale = self.becn_option and self.taa_guard and cell.timestamp < self.taa
        if stale:
            self.diagnostics["stale_fecn_ignored"] += 1
        else:
            new_tcr = self._new_tcr(cell)
            if cell.laf >= 1:
                if new_tcr < self.tcr:
                    self._set_tcr(new_tcr)
                    if self.becn_option:
                        self.taa = max(self.taa, cell.timestamp)
            elif new_tcr > self.tcr:
                self._set_tcr(new_tcr)
        # applied even when the rate feedback was discarded
        if cell.averaging_interval > 0:
            self.averaging_interval = cell.averaging_interval
        return self

    def on_becn_cell(self, cell: RmCell) -> "SourceState":
        """Act on a switch-generated backward notification; decreases only."""
        if not self.becn_option:
            self.diagnostics["becn_without_option"] += 1
            return self
        if self.taa_guard and cell.timestamp <= self.taa:
            self.diagnostics["stale_becn_ignored"] += 1
            return self
        if cell.laf < 1:
            self.diagnostics["becn_increase_ignored"] += 1
            return self
        new_tcr = self._new_tcr(cell)
        if new_tcr < self.tcr:
            self._set_tcr(new_tcr)
            self.taa = max(self.taa, cell.timestamp)
        else:
            self.diagnostics["becn_increase_ignored"] += 1
        return self

    def on_backward_cell(self, cell: RmCell) -> "SourceState":
        if cell.becn_bit:
            return self.on_becn_cell(cell)
        return self.on_returned_rm_cell(cell)
