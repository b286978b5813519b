"""Small scenario builders shared by the test modules."""

from osuabr.scenario import parse_scenario


def chain_text(bandwidth=424e6, delay=10.0, duration=20000.0, source_interval=1000.0,
               vc_extra="", scenario_extra=""):
    """One VC through one switch: SRC -> SW -> DST."""
    return f"""
[scenario]
name = chain
duration_us = {duration}
{scenario_extra}

[source]
averaging_interval_us = {source_interval}

[node SRC]
kind = source
[node SW]
kind = switch
[node DST]
kind = destination

[link access]
from = SRC
to = SW
bandwidth_bps = {bandwidth}
delay_us = {delay}
[link out]
from = SW
to = DST
bandwidth_bps = {bandwidth}
delay_us = {delay}

[vc 1]
path = SRC SW DST
{vc_extra}
"""


def chain(**kw):
    return parse_scenario(chain_text(**kw))


# criterion number -> (passed, detail); filled by test_acceptance, printed by conftest
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
