"""Explicit-rate congestion avoidance for ATM ABR: sources, switches,
a discrete-event simulator and the two-source TUB convergence model."""

from .core import (DataCell, Direction, InvalidParameterError, RmCell, SimTime,
                   target_output_cell_rate)
from .engine import Simulator, TraceRecord, run
from .oracle import fairness_index, maxmin_oracle
from .report import SimulationReport, compute_report, run_scenario
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario, print_scenario
from .source import SourceState
from .switch import (FairnessOption, SwitchConfig, SwitchPortState, aggressive_fairness_decision,
                     basic_fairness_decision, precise_fair_share, precise_fairshare_decision)
from .tubmodel import OperatingPoint, Region, TubParams

__version__ = "0.1.0"

__all__ = [
    "DataCell",
    "Direction",
    "InvalidParameterError",
    "RmCell",
    "SimTime",
    "target_output_cell_rate",
    "Simulator",
    "TraceRecord",
    "run",
    "fairness_index",
    "maxmin_oracle",
    "SimulationReport",
    "compute_report",
    "run_scenario",
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "parse_scenario",
    "print_scenario",
    "SourceState",
    "FairnessOption",
    "SwitchConfig",
    "SwitchPortState",
    "aggressive_fairness_decision",
    "basic_fairness_decision",
    "precise_fair_share",
    "precise_fairshare_decision",
    "OperatingPoint",
    "Region",
    "TubParams",
]
