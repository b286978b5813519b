"""Replay of out-of-order feedback: a BECN overtakes an older FECN.

One source at 155 Mbit/s sits 10 us from a switch whose destination is
a long WAN hop away. The first RM cell passes an underloaded switch
(load 0.5) and heads for the far destination. One interval later the
switch is loaded by a factor of 2 and answers the second RM cell with a
BECN, which reaches the source long before the first cell's FECN. With
the Taa guard the stale FECN is discarded; without it the source jumps
back to 155.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import DataCell, DEFAULT_CELL_SIZE_BITS
from .engine import EventQueue, Link
from .source import SourceState
from .switch import FairnessOption, SwitchConfig, SwitchPortState

MBPS = 1e6 / DEFAULT_CELL_SIZE_BITS  # cells/s per Mbit/s


@dataclass
class ReplayLog:
    events: list[tuple[float, str, float]] = field(default_factory=list)

    def tcr_after(self, label: str) -> float:
        for _, name, tcr in self.events:
            if name == label:
                return tcr
        raise KeyError(label)

    @property
    def final_tcr(self) -> float:
        return self.events[-1][2]


def replay(taa_guard: bool = True, source_rate_mbps: float = 155.0,
           access_delay_us: float = 10.0, far_delay_us: float = 5000.0,
           interval_us: float = 1000.0, loads=(0.5, 2.0)) -> ReplayLog:
    """Run the two-RM-cell scenario; rates in the log are in Mbit/s."""
    q = EventQueue()
    log = ReplayLog()
    peak = source_rate_mbps * MBPS
    src = SourceState(vc=1, initial_cell_rate=peak, peak_cell_rate=peak,
                      averaging_interval=interval_us, becn_option=True, greedy=False,
                      taa_guard=taa_guard)
    # 1e6 cells/s target keeps the per-interval target count an exact integer
    cfg = SwitchConfig(target_utilization=0.5, tub_half_width=0.1, averaging_interval=interval_us,
                       option=FairnessOption.BASIC, becn_option=True, link_bandwidth=848e6)
    port = SwitchPortState(cfg)
    access = Link("access", "src", "sw", 155.52e6, access_delay_us)
    access.reverse = Link("access~rev", "sw", "src", 155.52e6, access_delay_us)
    far = Link("far", "sw", "dst", 155.52e6, far_delay_us)
    far.reverse = Link("far~rev", "dst", "sw", 155.52e6, far_delay_us)

    def send(link, cell, handler):
        _, arrival = link.transmit(cell.size_bits, q.now)
        q.schedule(arrival, handler, cell)

    def interval_tick(k):
        port.on_interval_timer(q.now)
        if k < len(loads):
            # background traffic measured during the coming interval
            for _ in range(round(loads[k] * port.target_cell_count)):
                port.on_data_cell(DataCell(vc=99))
            q.schedule(q.now + interval_us, interval_tick, k + 1)

    def emit_rm(label):
        cell, _ = src.on_averaging_timer(q.now)
        log.events.append((q.now, f"{label} sent", src.tcr / MBPS))
        send(access, cell, lambda c: at_switch(c, label))

    def at_switch(cell, label):
        fwd, becn = port.on_rm_cell(cell, q.now)
        if becn is not None:
            send(access.reverse, becn, lambda c: at_source(c, f"{label} BECN"))
        send(far, fwd, lambda c: send(far.reverse, c.turned_around(),
                                      lambda c2: send(access.reverse, c2,
                                                      lambda c3: at_source(c3, f"{label} FECN"))))

    def at_source(cell, label):
        src.on_backward_cell(cell)
        log.events.append((q.now, label, src.tcr / MBPS))

    q.schedule(0.0, interval_tick, 0)
    q.schedule(interval_us, emit_rm, "C1")
    q.schedule(2 * interval_us, emit_rm, "C2")
    q.run(float("inf"))
    return log
