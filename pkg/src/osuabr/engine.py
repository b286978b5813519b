"""Deterministic discrete-event simulation of sources, switch ports and links.

Each declared link is a one-way FIFO server with serialization and
propagation delay; backward RM cells ride a twin server in the opposite
direction so they never compete with forward data. Switches mark forward
RM cells at the output port they leave through; destinations turn RM
cells around instantly.
"""

from __future__ import annotations

import heapq
import logging
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .core import DataCell, Direction, RmCell, US_PER_S
from .scenario import Scenario, ScenarioError, validate
from .source import SourceState
from .switch import SwitchPortState

logger = logging.getLogger(__name__)

TRACE_KINDS = ("tcr", "ocr", "laf_feedback", "link_util", "queue_len", "z")


def quantize(value: float) -> float:
    """Round to the 9 significant digits the CSV trace carries."""
    return float(format(value, ".9g"))


class TraceRecord(NamedTuple):
    time_us: float
    kind: str
    subject: str
    value: float


class EventQueue:
    """Min-heap of ``(time, seq)``-ordered callbacks; ties run in insertion order."""

    def __init__(self):
        self._heap = []
        self._seq = 0
        self.now = 0.0

    def __len__(self):
        return len(self._heap)

    def schedule(self, time: float, handler: Callable, *args) -> int:
        if time < self.now:
            raise RuntimeError(f"causality violation: event at {time} scheduled at {self.now}")
        self._seq += 1
        heapq.heappush(self._heap, (time, self._seq, handler, args))
        return self._seq

    def peek_time(self) -> float | None:
        return self._heap[0][0] if self._heap else None

    def pop(self):
        time, seq, handler, args = heapq.heappop(self._heap)
        self.now = time
        return time, seq, handler, args

    def run(self, until: float) -> int:
        dispatched = 0
        while self._heap and self._heap[0][0] <= until:
            _, _, handler, args = self.pop()
            handler(*args)
            dispatched += 1
        return dispatched

    def pending(self):
        return [(t, s, h, a) for t, s, h, a in sorted(self._heap, key=lambda e: (e[0], e[1]))]


@dataclass
class Link:
    name: str
    src: str
    dst: str
    bandwidth: float  # bits/s
    delay: float  # us
    busy_until: float = 0.0
    cells_sent: int = 0
    reverse: "Link | None" = None
    _starts: deque = field(default_factory=deque, repr=False)
    _accepted_work: float = 0.0
    _busy_mark: float = 0.0
    _window_max_queue: int = 0
    max_queue: int = 0

    def serialization_time(self, size_bits: int) -> float:
        return size_bits / self.bandwidth * US_PER_S

    def queue_length(self, now: float) -> int:
        """Cells accepted but not yet in service at ``now``."""
        starts = self._starts
        while starts and starts[0] <= now:
            starts.popleft()
        return len(starts)

    def transmit(self, size_bits: int, now: float) -> tuple[float, float]:
        """Accept a cell; returns ``(departure, arrival)`` times."""
        departure = max(now, self.busy_until)
        ser = self.serialization_time(size_bits)
        self.busy_until = departure + ser
        self.cells_sent += 1
        self._accepted_work += ser
        if departure > now:
            self._starts.append(departure)
        q = self.queue_length(now)
        if q > self._window_max_queue:
            self._window_max_queue = q
        if q > self.max_queue:
            self.max_queue = q
        return departure, self.busy_until + self.delay

    def busy_time(self, now: float) -> float:
        """Total service time delivered up to ``now``.

        The link is work conserving, so whatever backlog remains at ``now``
        is exactly ``busy_until - now``.
        """
        return self._accepted_work - max(0.0, self.busy_until - now)

    def take_window(self, now: float) -> tuple[float, int]:
        """Busy time and peak queue since the previous call."""
        served = self.busy_time(now)
        busy, q = served - self._busy_mark, self._window_max_queue
        self._busy_mark = served
        self._window_max_queue = self.queue_length(now)
        return busy, q


@dataclass
class Route:
    vc: int
    path: list[str]
    forward: list[Link]
    backward: list[Link]


@dataclass
class SimulationResult:
    scenario: Scenario
    until: float
    trace: list[TraceRecord]
    sources: dict[int, SourceState]
    ports: dict[str, SwitchPortState]
    links: dict[str, Link]
    injected: Counter
    delivered: Counter
    rm_hops: dict[int, list[tuple[str, float, float]]]
    rm_returns: list[tuple[int, int, bool, float]]
    events: int
    in_flight_data: int = 0


class Simulator:
    """One simulation run. Construct, then call :meth:`run`.

    ``trace_sink`` receives every :class:`TraceRecord` as it is produced
    (anything with a ``write(record)`` method); the records are also kept
    on the result. ``source_hooks`` lets tests tweak each SourceState
    (for instance disabling the Taa guard) before the run starts.
    """

    def __init__(self, scenario: Scenario, trace_sink=None, log_rm_hops: bool = False,
                 source_hooks: Callable[[SourceState], None] | None = None):
        errors = validate(scenario)
        if errors:
            raise ScenarioError(errors)
        self.sc = scenario
        self.q = EventQueue()
        self.sink = trace_sink
        self.log_rm_hops = log_rm_hops
        self.trace: list[TraceRecord] = []
        self.injected = Counter()
        self.delivered = Counter()
        self.rm_hops: dict[int, list] = defaultdict(list)
        self.rm_returns: list = []
        self._rm_seq = 0
        self._cell_gen: Counter = Counter()
        self._last_cell: dict[int, float] = {}
        self._rng = np.random.default_rng(scenario.seed)

        self.links: dict[str, Link] = {}
        for spec in scenario.links.values():
            link = Link(spec.name, spec.src, spec.dst, spec.bandwidth_bps, spec.delay_us)
            link.reverse = Link(spec.name + "~rev", spec.dst, spec.src, spec.bandwidth_bps,
                                spec.delay_us)
            self.links[spec.name] = link
        self.ports: dict[str, SwitchPortState] = {
            name: SwitchPortState(scenario.port_config(name))
            for name, spec in scenario.links.items() if scenario.is_switch_port(spec)}

        self.routes: dict[int, Route] = {}
        self.sources: dict[int, SourceState] = {}
        interval = scenario.source_interval()
        for vc, spec in scenario.vcs.items():
            fwd = [self.links[name] for name in scenario.route_links(vc)]
            self.routes[vc] = Route(vc, spec.path, fwd, [l.reverse for l in fwd])
            src = SourceState(
                vc=vc,
                initial_cell_rate=scenario.vc_initial_rate(vc),
                peak_cell_rate=scenario.vc_peak_rate(vc),
                min_cell_rate=scenario.vc_min_rate(vc),
                averaging_interval=interval,
                becn_option=scenario.becn,
                greedy=spec.traffic == "greedy",
                cell_size=scenario.cell_size_bits,
            )
            if source_hooks is not None:
                source_hooks(src)
            self.sources[vc] = src

    # tracing ------------------------------------------------------------

    def _record(self, kind: str, subject: str, value: float) -> None:
        rec = TraceRecord(quantize(self.q.now), kind, subject, quantize(value))
        self.trace.append(rec)
        if self.sink is not None:
            self.sink.write(rec)

    # scheduling ---------------------------------------------------------

    def _phase(self, explicit: float, period: float) -> float:
        if explicit:
            return explicit
        if self.sc.randomize_phases:
            return float(self._rng.uniform(0.0, period))
        return 0.0

    def _start(self) -> None:
        sc = self.sc
        # ports first so equal-time ties measure before sources report
        for name, port in self.ports.items():
            period = port.config.averaging_interval
            self.q.schedule(self._phase(sc.links[name].phase_offset_us, period) + period,
                            self._port_interval, name)
        for vc, src in self.sources.items():
            spec = sc.vcs[vc]
            period = src.averaging_interval
            self.q.schedule(spec.start_us, self._src_cell, vc, 0)
            self.q.schedule(spec.start_us + self._phase(spec.phase_offset_us, period) + period,
                            self._src_avg, vc)
            for t, n in spec.bursts:
                self.q.schedule(t, self._src_burst, vc, n)
        sample = sc.sample_interval_us or min(
            [p.config.averaging_interval for p in self.ports.values()] + [sc.source_interval()])
        self._sample_period = sample
        self.q.schedule(sample, self._sample)

    def _send(self, link: Link, cell, index: int) -> None:
        _, arrival = link.transmit(cell.size_bits, self.q.now)
        self.q.schedule(arrival, self._arrive, cell, index)

    # handlers -----------------------------------------------------------

    def _src_burst(self, vc: int, n: int) -> None:
        size = self.sc.cell_size_bits
        self.sources[vc].on_data_from_host([DataCell(vc, size)] * n)

    def _src_cell(self, vc: int, gen: int) -> None:
        if gen != self._cell_gen[vc]:
            return  # superseded by a re-paced timer
        cell, nxt = self.sources[vc].on_cell_timer(self.q.now)
        self._last_cell[vc] = self.q.now
        if cell is not None:
            self.injected[vc] += 1
            self._send(self.routes[vc].forward[0], cell, 1)
        self.q.schedule(nxt, self._src_cell, vc, gen)

    def _repace(self, vc: int) -> None:
        """Move the pending cell timer to honour a new TCR immediately."""
        last = self._last_cell.get(vc)
        if last is None:
            return
        self._cell_gen[vc] += 1
        nxt = max(self.q.now, last + self.sources[vc].inter_cell_time)
        self.q.schedule(nxt, self._src_cell, vc, self._cell_gen[vc])

    def _src_avg(self, vc: int) -> None:
        src = self.sources[vc]
        cell, nxt = src.on_averaging_timer(self.q.now)
        self._rm_seq += 1
        cell = replace(cell, seq=self._rm_seq)
        self._record("ocr", f"vc{vc}", cell.ocr)
        self._send(self.routes[vc].forward[0], cell, 1)
        self.q.schedule(nxt, self._src_avg, vc)

    def _port_interval(self, name: str) -> None:
        port, nxt = self.ports[name].on_interval_timer(self.q.now)
        self._record("z", name, port.load_level)
        self.q.schedule(nxt, self._port_interval, name)

    def _sample(self) -> None:
        now = self.q.now
        for vc, src in self.sources.items():
            self._record("tcr", f"vc{vc}", src.tcr)
        for name, link in self.links.items():
            busy, qmax = link.take_window(now)
            self._record("link_util", name, busy / self._sample_period)
            self._record("queue_len", name, qmax)
        self.q.schedule(now + self._sample_period, self._sample)

    def _arrive(self, cell, index: int) -> None:
        route = self.routes[cell.vc]
        last = len(route.path) - 1
        if isinstance(cell, DataCell):
            if index == last:
                self.delivered[cell.vc] += 1
                return
            out = route.forward[index]
            self.ports[out.name].on_data_cell(cell)
            self._send(out, cell, index + 1)
            return
        if cell.direction is Direction.BACKWARD:
            if index == 0:
                self._deliver_backward(cell)
            else:
                self._send(route.backward[index - 1], cell, index - 1)
            return
        if index == last:
            self._send(route.backward[index - 1], cell.turned_around(), index - 1)
            return
        out = route.forward[index]
        port = self.ports[out.name]
        laf_in = cell.laf
        fwd, becn = port.on_rm_cell(cell, self.q.now)
        if self.log_rm_hops:
            self.rm_hops[cell.seq].append((out.name, port.last_decision, fwd.laf))
            if fwd.laf < laf_in:
                raise AssertionError("switch lowered an RM cell's LAF")
        if becn is not None:
            self._send(route.backward[index - 1], becn, index - 1)
        self._send(out, fwd, index + 1)

    def _deliver_backward(self, cell: RmCell) -> None:
        src = self.sources[cell.vc]
        before = src.tcr
        src.on_backward_cell(cell)
        self.rm_returns.append((cell.vc, cell.seq, cell.becn_bit, cell.laf))
        self._record("laf_feedback", f"vc{cell.vc}", cell.laf)
        if src.tcr != before:
            logger.debug("t=%.1f vc%d tcr %.1f -> %.1f", self.q.now, cell.vc, before, src.tcr)
            self._repace(cell.vc)

    # driver -------------------------------------------------------------

    def run(self, until: float | None = None) -> SimulationResult:
        until = self.sc.duration_us if until is None else until
        if until > 0:
            self._start()
            events = self.q.run(until)
        else:
            events = 0
        in_flight = sum(1 for _, _, h, a in self.q.pending()
                        if getattr(h, "__name__", "") == "_arrive" and isinstance(a[0], DataCell))
        return SimulationResult(self.sc, until, self.trace, self.sources, self.ports, self.links,
                                self.injected, self.delivered, dict(self.rm_hops),
                                self.rm_returns, events, in_flight)


def run(scenario: Scenario, until: float | None = None, trace_sink=None, **kwargs) -> SimulationResult:
    return Simulator(scenario, trace_sink=trace_sink, **kwargs).run(until)
