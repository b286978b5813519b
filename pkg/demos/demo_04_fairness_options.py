"""
Three ways to compute the feedback
==================================

The switch turns its measured load level z into a load adjustment factor
per RM cell. Here the three options are compared as functions and then in
a simulated three-VC bottleneck.
"""

import numpy as np

from osuabr.report import run_scenario
from osuabr.scenario import load_bundled, with_overrides
from osuabr.switch import aggressive_fairness_decision, basic_fairness_decision

###############################################################################
# Decision against offered rate, for four VCs sharing 4000 cells/s.
fs, n, target = 1000.0, 4, 4000.0
ocrs = np.linspace(0, 5000, 11)
for z in (0.5, 1.0, 2.0):
    basic = [basic_fairness_decision(z, o, fs, 0.1) for o in ocrs]
    aggr = [aggressive_fairness_decision(z, o, fs, target, n, 0.1) for o in ocrs]
    print(f"z={z}: basic      " + " ".join(f"{v:5.2f}" for v in basic))
    print("       aggressive " + " ".join(f"{v:5.2f}" for v in aggr))

###############################################################################
# In simulation the precise option removes the steady-state oscillation.
sc = load_bundled("single_bottleneck")
for option in ("basic", "aggressive", "precise"):
    rep, _ = run_scenario(with_overrides(sc, option=option))
    cv = max(rep.vc_cv.values())
    print(f"{option:10s} in band {rep.in_band_fraction:6.1%}  worst rate CV {cv:.3f}  "
          f"converged at {rep.convergence_time_us / 1000:.0f} ms")
