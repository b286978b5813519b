import pytest

from osuabr.core import DataCell, Direction, InvalidParameterError, RmCell
from osuabr.source import SourceState

PEAK = 155e3  # "155 Mbps" in kilocells/s stand-in units


def make(initial=PEAK, **kw):
    kw.setdefault("averaging_interval", 1000.0)
    return SourceState(vc=1, initial_cell_rate=initial, peak_cell_rate=PEAK, **kw)


def back(tcr, laf, ts=0.0, becn=False, ocr=0.0, interval=1000.0):
    return RmCell(vc=1, tcr=tcr, ocr=ocr, laf=laf, becn_bit=becn, timestamp=ts,
                  averaging_interval=interval, direction=Direction.BACKWARD)


class TestInit:
    def test_high_start(self):
        assert make().tcr == PEAK

    def test_low_start(self):
        s = make(initial=1000.0)
        assert s.tcr == s.min_cell_rate == 1000.0

    def test_half_peak(self):
        assert make(initial=0.5 * PEAK).tcr == 0.5 * PEAK

    def test_inter_cell_time(self):
        assert make(initial=PEAK).inter_cell_time == pytest.approx(1e6 / PEAK)

    @pytest.mark.parametrize("initial", [PEAK * 1.01, 10.0])
    def test_initial_out_of_bounds(self, initial):
        with pytest.raises(InvalidParameterError):
            make(initial=initial)


class TestHostQueue:
    def test_empty_burst(self):
        s = make(greedy=False)
        s.on_data_from_host([])
        assert len(s.output_queue) == 0

    def test_three_cells(self):
        s = make(greedy=False)
        s.on_data_from_host([DataCell(1)] * 3)
        assert len(s.output_queue) == 3

    def test_order_preserved(self):
        s = make(greedy=False)
        first = [DataCell(1, 424 + i) for i in range(5)]
        s.on_data_from_host(first)
        s.on_data_from_host([DataCell(1, 900), DataCell(1, 901)])
        assert [c.size_bits for c in s.output_queue] == [424, 425, 426, 427, 428, 900, 901]


class TestCellTimer:
    def test_empty_queue_restarts_timer(self):
        s = make(greedy=False)
        cell, nxt = s.on_cell_timer(50.0)
        assert cell is None and s.transmitted_cell_count == 0
        assert nxt == pytest.approx(50.0 + 1e6 / PEAK)

    def test_emits_head_at_one_microsecond_spacing(self):
        s = SourceState(vc=1, initial_cell_rate=1e6, peak_cell_rate=1e6, averaging_interval=1000.0,
                        greedy=False)
        c1, c2 = DataCell(1, 424), DataCell(1, 425)
        s.on_data_from_host([c1, c2])
        cell, nxt = s.on_cell_timer(10.0)
        assert cell is c1 and nxt == 11.0
        assert list(s.output_queue) == [c2]

    def test_count_increments(self):
        s = make()
        s.transmitted_cell_count = 41
        s.on_cell_timer(0.0)
        assert s.transmitted_cell_count == 42


class TestAveragingTimer:
    def test_idle_source(self):
        s = make(greedy=False)
        cell, nxt = s.on_averaging_timer(1000.0)
        assert cell.ocr == 0 and cell.tcr == s.tcr and nxt == 2000.0

    def test_ocr_division(self):
        s = make()
        s.transmitted_cell_count = 100
        cell, _ = s.on_averaging_timer(1000.0)
        assert cell.ocr == 100000.0 and s.transmitted_cell_count == 0

    def test_max_rule(self):
        s = make(initial=50e3)
        s.transmitted_cell_count = 80
        cell, _ = s.on_averaging_timer(1000.0)
        assert cell.ocr == 80e3 and cell.tcr == 80e3

    def test_fresh_cell_fields(self):
        s = make(becn_option=True)
        cell, _ = s.on_averaging_timer(1234.0)
        assert cell.laf == 0 and not cell.becn_bit and cell.timestamp == 1234.0
        assert cell.averaging_interval == 1000.0 and cell.direction is Direction.FORWARD

    def test_no_timestamp_without_becn(self):
        cell, _ = make().on_averaging_timer(1234.0)
        assert cell.timestamp == 0


class TestReturnedRm:
    def test_halving(self):
        s = make()
        s.on_returned_rm_cell(back(PEAK, 2.0))
        assert s.tcr == 77.5e3

    def test_identity_feedback(self):
        s = make(initial=10e3)
        s.on_returned_rm_cell(back(10e3, 1.0))
        assert s.tcr == 10e3

    def test_increase(self):
        s = make(initial=10e3)
        s.on_returned_rm_cell(back(10e3, 0.5))
        assert s.tcr == 20e3

    def test_zero_laf_means_peak(self):
        s = make(initial=10e3)
        s.on_returned_rm_cell(back(10e3, 0.0))
        assert s.tcr == PEAK

    def test_decrease_never_increases(self):
        s = make(initial=10e3)
        s.on_returned_rm_cell(back(30e3, 1.5))  # New TCR 20e3 > tcr, but laf >= 1
        assert s.tcr == 10e3

    def test_increase_never_decreases(self):
        s = make(initial=10e3)
        s.on_returned_rm_cell(back(4e3, 0.8))
        assert s.tcr == 10e3

    def test_clamped_to_floor(self):
        s = make(initial=10e3)
        s.on_returned_rm_cell(back(10e3, 1e6))
        assert s.tcr == s.min_cell_rate

    def test_stale_fecn_ignored_but_interval_copied(self):
        s = make(becn_option=True)
        s.taa = 500.0
        s.on_returned_rm_cell(back(PEAK, 4.0, ts=100.0, interval=3000.0))
        assert s.tcr == PEAK and s.averaging_interval == 3000.0

    def test_decrease_sets_taa(self):
        s = make(becn_option=True)
        s.on_returned_rm_cell(back(PEAK, 2.0, ts=900.0))
        assert s.taa == 900.0


class TestBecn:
    def test_decrease_applied(self):
        s = make(becn_option=True)
        s.on_becn_cell(back(PEAK, 2.0, ts=10.0, becn=True))
        assert s.tcr == 77.5e3 and s.taa == 10.0

    def test_increase_ignored(self):
        s = make(initial=10e3, becn_option=True)
        s.on_becn_cell(back(10e3, 0.5, ts=10.0, becn=True))
        assert s.tcr == 10e3

    def test_stale_ignored(self):
        s = make(becn_option=True)
        s.taa = 10.0
        s.on_becn_cell(back(PEAK, 2.0, ts=10.0, becn=True))
        assert s.tcr == PEAK

    def test_discarded_without_option(self):
        s = make()
        s.on_backward_cell(back(PEAK, 2.0, ts=10.0, becn=True))
        assert s.tcr == PEAK and s.diagnostics["becn_without_option"] == 1

    def test_dispatch(self):
        s = make(becn_option=True)
        s.on_backward_cell(back(PEAK, 2.0, ts=10.0, becn=True))
        s.on_backward_cell(back(77.5e3, 0.5, ts=20.0))
        assert s.tcr == PEAK
