"""Invariants checked over generated inputs."""

import math

from hypothesis import given, settings, strategies as st

from osuabr.core import Direction, RmCell, target_output_cell_rate
from osuabr.scenario import parse_scenario, print_scenario, with_overrides
from osuabr.source import SourceState
from osuabr.switch import (FairnessOption, SwitchConfig, SwitchPortState,
                           aggressive_fairness_decision, basic_fairness_decision,
                           precise_fair_share)
from osuabr import tubmodel as tm

from helpers import chain_text

rates = st.floats(1.0, 1e6, allow_nan=False)
deltas = st.floats(0.01, 0.49)
loads = st.floats(0.0, 10.0)


@given(st.floats(1.0, 1e10), st.floats(0.01, 0.5), st.integers(8, 8192))
def test_target_rate_linear(bw, u, cs):
    base = target_output_cell_rate(bw, u, cs)
    assert math.isclose(target_output_cell_rate(2 * bw, u, cs), 2 * base, rel_tol=1e-12)
    assert math.isclose(target_output_cell_rate(bw, 2 * u, cs), 2 * base, rel_tol=1e-12)


feedback = st.tuples(st.floats(0.0, 2e5), st.floats(0.0, 5.0), st.floats(0.0, 1e4), st.booleans())


@given(st.lists(feedback, max_size=40), st.booleans())
def test_source_invariants(events, becn_option):
    src = SourceState(vc=1, initial_cell_rate=5e4, peak_cell_rate=1e5, averaging_interval=1000.0,
                      becn_option=becn_option)
    for tcr, laf, ts, becn in events:
        before, taa_before = src.tcr, src.taa
        cell = RmCell(vc=1, tcr=tcr, ocr=0.0, laf=laf, becn_bit=becn, timestamp=ts,
                      averaging_interval=1000.0, direction=Direction.BACKWARD)
        src.on_backward_cell(cell)
        assert src.min_cell_rate <= src.tcr <= src.peak_cell_rate
        assert math.isclose(src.inter_cell_time * src.tcr, 1e6, rel_tol=1e-12)
        assert src.taa >= taa_before
        if laf >= 1:
            assert src.tcr <= before
        elif laf > 1e-9:
            assert src.tcr >= before
        if becn_option and ts < taa_before:
            assert src.tcr == before


@given(st.lists(st.floats(10.0, 1e5), min_size=1, max_size=20), st.floats(100.0, 5000.0))
def test_source_pacing(tcrs, window):
    src = SourceState(vc=1, initial_cell_rate=tcrs[0], peak_cell_rate=1e5,
                      averaging_interval=1000.0, min_cell_rate=10.0)
    times, now = [], 0.0
    for tcr in tcrs:
        src._set_tcr(tcr)
        for _ in range(5):
            cell, now_next = src.on_cell_timer(now)
            times.append(now)
            now = now_next
    top = max(tcrs)
    for i, t in enumerate(times):
        sent = sum(1 for u in times[i:] if u < t + window)
        assert sent <= math.ceil(window * top / 1e6) + 1


@given(loads, rates, rates, deltas)
def test_basic_bounds(z, ocr, fs, d):
    v = basic_fairness_decision(z, ocr, fs, d)
    assert math.isfinite(v) and v >= 0
    if 1 - d <= z <= 1 + d:
        assert z / (1 + d) - 1e-12 <= v <= z / (1 - d) + 1e-12


@given(loads, rates, st.integers(1, 16), rates, deltas)
def test_aggressive_finite(z, fs, n, ocr, d):
    v = aggressive_fairness_decision(z, ocr, fs, fs * n, n, d)
    assert math.isfinite(v) and v >= 0


@given(st.floats(0.0, 0.89), st.floats(1.11, 10.0), st.floats(1.0, 1e4), st.integers(1, 12),
       st.floats(0.0, 2e5), st.floats(0.0, 2e5))
def test_aggressive_monotone_in_ocr(z_lo, z_hi, fs, n, a, b):
    lo, hi = sorted((a, b))
    for z in (z_lo, z_hi):
        assert aggressive_fairness_decision(z, lo, fs, fs * n, n, 0.1) <= \
            aggressive_fairness_decision(z, hi, fs, fs * n, n, 0.1) + 1e-12


@given(st.lists(st.floats(0.0, 1e4), min_size=1, max_size=8), st.floats(1.0, 3e4))
def test_precise_is_water_level(ocrs, target):
    fs, _ = precise_fair_share(ocrs, target)
    greedy = max(range(len(ocrs)), key=ocrs.__getitem__)
    # everything but the greedy VC is capped at the level; greedy takes the rest
    used = sum(min(o, fs) for i, o in enumerate(ocrs) if i != greedy)
    assert math.isclose(used + fs, target, rel_tol=1e-9, abs_tol=1e-9)


@given(st.lists(st.tuples(loads, st.integers(1, 4)), min_size=1, max_size=6),
       st.sampled_from(list(FairnessOption)), rates, rates)
def test_laf_never_lowered(hops, option, tcr, ocr):
    cell = RmCell(vc=1, tcr=max(tcr, ocr), ocr=ocr)
    decisions = []
    for z, n in hops:
        cfg = SwitchConfig(target_utilization=0.5, averaging_interval=1e6, option=option,
                           link_bandwidth=848e3)
        port = SwitchPortState(cfg)
        port.received_cell_count = round(z * 1000)
        port.vc_seen = set(range(1, n + 1))
        port.on_interval_timer(0.0)
        before = cell.laf
        cell, _ = port.on_rm_cell(cell)
        decisions.append(port.last_decision)
        assert cell.laf >= before
    assert cell.laf == max([0.0] + decisions)


@given(st.floats(0.05, 1.0), deltas, st.integers(0, 2**32 - 1))
def test_c1_and_c2(u, d, seed):
    import numpy as np
    params = tm.TubParams(u, d)
    p = tm.random_tub_point(np.random.default_rng(seed), params)
    q = tm.tub_step(p, params)
    assert tm.in_tub(q, params)
    region = tm.classify_region(p, params)
    if region is tm.Region.R1A:
        assert math.isclose(q.y / q.x, p.y / p.x * (1 - d) / (1 + d), rel_tol=1e-12)
        assert q.y / q.x > 1 - d
    if tm.in_fairness_region(p, params):
        assert tm.in_fairness_region(q, params)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.01, 0.49), st.sampled_from(list(FairnessOption)),
       st.booleans(), st.integers(0, 2**64 - 1), st.floats(1.0, 1e7))
def test_scenario_round_trip(u, d, option, becn, seed, duration):
    sc = with_overrides(parse_scenario(chain_text()), target_utilization=u, tub_half_width=d,
                        option=option, becn=becn, seed=seed, duration_us=duration)
    assert parse_scenario(print_scenario(sc)) == sc
