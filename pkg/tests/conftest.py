import pytest

from osuabr.core import RmCell
from osuabr.switch import FairnessOption, SwitchConfig, SwitchPortState


@pytest.fixture
def rm():
    """Factory for forward RM cells with sensible defaults."""
    def make(vc=1, tcr=10e3, ocr=10e3, **kw):
        return RmCell(vc=vc, tcr=tcr, ocr=ocr, **kw)
    return make


def port_with_load(z, option=FairnessOption.BASIC, vcs=(1,), becn=False, delta=0.1):
    """A port whose last interval measured load level ``z`` from ``vcs``.

    U = 0.5 on an 848 kb/s link gives 1000 target cells/s, so with a
    1000 us interval the target cell count is exactly 1.
    """
    cfg = SwitchConfig(target_utilization=0.5, tub_half_width=delta, averaging_interval=1e6,
                       option=option, becn_option=becn, link_bandwidth=848e3, cell_size=424)
    port = SwitchPortState(cfg)
    assert port.target_cell_count == 1000
    port.received_cell_count = round(z * 1000)
    port.vc_seen = set(vcs)
    port.on_interval_timer(0.0)
    return port


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
