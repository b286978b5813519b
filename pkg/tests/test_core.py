import math

import pytest

from osuabr.core import (DataCell, Direction, InvalidParameterError, RmCell, SimTime,
                         link_cell_rate, target_output_cell_rate)


def test_target_rate_identity():
    assert target_output_cell_rate(424, 1.0, 424) == 1.0


def test_target_rate_oc3():
    assert target_output_cell_rate(155.52e6, 0.9, 424) == pytest.approx(330113.2075, rel=1e-9)


def test_target_rate_half_utilization():
    assert target_output_cell_rate(848, 0.5, 424) == 1.0


@pytest.mark.parametrize("bw,cs", [(0, 424), (-1, 424), (424, 0), (424, -8)])
def test_target_rate_rejects_nonpositive(bw, cs):
    with pytest.raises(InvalidParameterError):
        target_output_cell_rate(bw, 0.9, cs)


@pytest.mark.parametrize("u", [0.0, 1.5, math.nan])
def test_target_rate_rejects_bad_utilization(u):
    with pytest.raises(InvalidParameterError):
        target_output_cell_rate(1e6, u, 424)


def test_link_cell_rate_is_full_utilization():
    assert link_cell_rate(10e6) == target_output_cell_rate(10e6, 1.0)


def test_simtime_orders_by_time_then_sequence():
    assert SimTime(5.0, 2) < SimTime(5.0, 3) < SimTime(6.0, 0)


def test_data_cell_default_size():
    assert DataCell(3).size_bits == 424


def test_rm_cell_defaults():
    c = RmCell(vc=1, tcr=100.0, ocr=80.0)
    assert c.laf == 0 and not c.becn_bit and c.direction is Direction.FORWARD


def test_rm_cell_rejects_negative_fields():
    with pytest.raises(InvalidParameterError):
        RmCell(vc=1, tcr=-1.0, ocr=0.0)
    with pytest.raises(InvalidParameterError):
        RmCell(vc=1, tcr=1.0, ocr=0.0, laf=math.inf)


def test_turnaround_preserves_fields():
    c = RmCell(vc=1, tcr=100.0, ocr=80.0, laf=1.5, becn_bit=True, timestamp=7.0)
    b = c.turned_around()
    assert b.direction is Direction.BACKWARD
    assert (b.tcr, b.ocr, b.laf, b.becn_bit, b.timestamp) == (100.0, 80.0, 1.5, True, 7.0)


def test_cells_are_immutable():
    c = RmCell(vc=1, tcr=1.0, ocr=1.0)
    with pytest.raises(AttributeError):
        c.laf = 2.0
