"""
Upstream bottleneck: who gets the leftover capacity?
=====================================================

Four VCs cross three switches. VC1-VC3 share the first trunk, so each is
held to a third of it. VC3 and VC4 share the second trunk, where VC3 can
only use its third, and the max-min answer gives VC4 the other two thirds.
"""

from osuabr.report import run_scenario
from osuabr.scenario import load_bundled, with_overrides

sc = load_bundled("upstream_bottleneck")
R = sc.port_target_rates()["link2"]
print(f"second trunk target rate R = {R:.1f} cells/s")

###############################################################################
# The max-min optimum, computed independently of the switch algorithm.
optimum = sc.maxmin_optimum()
for vc, rate in sorted(optimum.items()):
    print(f"  optimum vc{vc}: {rate:9.1f}  ({rate / R:.3f} R)")

###############################################################################
# Run the same network under each fairness option. The basic option keeps
# the trunk inside its utilization band, but inside the band VC4 is the
# only source above its fair share, so it is nudged down toward the band's
# lower edge. The precise option computes the water level directly.
for option in ("basic", "aggressive", "precise"):
    report, _ = run_scenario(with_overrides(sc, option=option))
    rates = "  ".join(f"{vc} {report.vc_mean_rate[vc] / R:.3f}R"
                      for vc in sorted(report.vc_mean_rate))
    print(f"{option:10s} {rates}  fairness index {report.fairness_index:.4f}")
