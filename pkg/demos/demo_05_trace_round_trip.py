"""
Traces are the source of truth
==============================

Runs stream a CSV trace. The report is a pure function of that trace, so
re-reading the file reproduces it exactly.
"""

import tempfile
from pathlib import Path

from osuabr.report import read_trace_csv, report_for, run_scenario
from osuabr.scenario import load_bundled, with_overrides

sc = with_overrides(load_bundled("upstream_bottleneck"), duration_us=400_000, becn=True)
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "trace.csv"
    report, result = run_scenario(sc, trace_path=path)
    print(path.read_text().splitlines()[:6])
    again = report_for(sc, read_trace_csv(path))

print(f"{len(result.trace)} records, {result.events} events")
print("report rebuilt from CSV is identical:", again == report)
print("bottleneck:", report.bottleneck, "max queues:", report.max_queue)
