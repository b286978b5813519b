"""Trace files and the summary report derived from them.

Every number in :class:`SimulationReport` is computed from trace records
alone (plus band limits and the max-min optimum taken from the
scenario), so re-reading a written CSV reproduces the report exactly.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .engine import TraceRecord, run
from .oracle import fairness_index
from .scenario import Scenario

CSV_HEADER = ["time_us", "kind", "subject", "value"]
CONVERGENCE_RUN = 5
STEADY_FRACTION = 0.5


class RunError(RuntimeError):
    pass


def _fmt(v: float) -> str:
    return format(v, ".9g")


class CsvTraceSink:
    """Streams trace records to a CSV file with the fixed four-column header."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = self.path.open("w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(CSV_HEADER)

    def write(self, rec: TraceRecord) -> None:
        self._writer.writerow([_fmt(rec.time_us), rec.kind, rec.subject, _fmt(rec.value)])

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_trace_csv(records: Iterable[TraceRecord], path) -> None:
    with CsvTraceSink(path) as sink:
        for rec in records:
            sink.write(rec)


def read_trace_csv(path) -> list[TraceRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected trace header {header!r}")
        return [TraceRecord(float(t), kind, subject, float(v)) for t, kind, subject, v in reader]


@dataclass
class SimulationReport:
    duration_us: float
    vc_mean_rate: dict[str, float] = field(default_factory=dict)
    vc_cv: dict[str, float] = field(default_factory=dict)
    link_mean_util: dict[str, float] = field(default_factory=dict)
    max_queue: dict[str, float] = field(default_factory=dict)
    bottleneck: str | None = None
    convergence_time_us: float | None = None
    in_band_fraction: float | None = None
    fairness_index: float | None = None
    optimum: dict[str, float] = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not self.vc_mean_rate and not self.link_mean_util


def _series(records, kind):
    out = defaultdict(list)
    for rec in records:
        if rec.kind == kind:
            out[rec.subject].append((rec.time_us, rec.value))
    return out


def convergence_index(z: list[float], lo: float, hi: float, run_length: int = CONVERGENCE_RUN) -> int | None:
    """Index of the first sample that opens ``run_length`` consecutive in-band samples."""
    streak = 0
    for i, v in enumerate(z):
        streak = streak + 1 if lo <= v <= hi else 0
        if streak == run_length:
            return i - run_length + 1
    return None


def compute_report(records: list[TraceRecord], duration_us: float,
                   bands: dict[str, tuple[float, float]] | None = None,
                   optimum: dict[int, float] | None = None,
                   steady_fraction: float = STEADY_FRACTION) -> SimulationReport:
    """Summarise a trace. The steady window is the final ``steady_fraction`` of the run."""
    report = SimulationReport(duration_us)
    t0 = duration_us * (1 - steady_fraction)

    for subject, pts in _series(records, "tcr").items():
        vals = np.array([v for t, v in pts if t >= t0])
        if len(vals):
            mean = float(vals.mean())
            report.vc_mean_rate[subject] = mean
            report.vc_cv[subject] = float(vals.std() / mean) if mean > 0 else 0.0
    for subject, pts in _series(records, "link_util").items():
        vals = [v for t, v in pts if t >= t0]
        if vals:
            report.link_mean_util[subject] = float(np.mean(vals))
    for subject, pts in _series(records, "queue_len").items():
        report.max_queue[subject] = max(v for _, v in pts)

    zs = _series(records, "z")
    if zs:
        def steady_mean(subject):
            vals = [v for t, v in zs[subject] if t >= t0]
            return float(np.mean(vals)) if vals else -math.inf
        report.bottleneck = max(sorted(zs), key=steady_mean)
        if bands and report.bottleneck in bands:
            lo, hi = bands[report.bottleneck]
            pts = zs[report.bottleneck]
            z = [v for _, v in pts]
            i = convergence_index(z, lo, hi)
            if i is not None:
                report.convergence_time_us = pts[i][0]
                tail = z[i:]
                report.in_band_fraction = sum(lo <= v <= hi for v in tail) / len(tail)

    if optimum:
        report.optimum = {f"vc{vc}": rate for vc, rate in optimum.items()}
        if report.vc_mean_rate and set(report.optimum) == set(report.vc_mean_rate) \
                and all(r > 0 for r in report.optimum.values()):
            report.fairness_index = fairness_index(report.vc_mean_rate, report.optimum)
    return report


def scenario_bands(sc: Scenario, tol: float = 1e-9) -> dict[str, tuple[float, float]]:
    """Load-level band ``[1-delta, 1+delta]`` of every switch port."""
    out = {}
    for name in sc.port_target_rates():
        d = sc.port_config(name).tub_half_width
        out[name] = (1 - d - tol, 1 + d + tol)
    return out


def report_for(sc: Scenario, records: list[TraceRecord], until: float | None = None) -> SimulationReport:
    duration = sc.duration_us if until is None else until
    return compute_report(records, duration, scenario_bands(sc), sc.maxmin_optimum())


def run_scenario(sc: Scenario, trace_path=None, until: float | None = None, **engine_kwargs):
    """Run, optionally streaming the CSV trace, and summarise.

    Returns ``(report, result)``.
    """
    sink = None
    try:
        if trace_path is not None:
            sink = CsvTraceSink(trace_path)
        result = run(sc, until=until, trace_sink=sink, **engine_kwargs)
    except OSError as exc:
        note = f"; a partial trace may remain at {trace_path}" if trace_path else ""
        raise RunError(f"I/O failure during run: {exc}{note}") from exc
    finally:
        if sink is not None:
            sink.close()
    return report_for(sc, result.trace, until), result
