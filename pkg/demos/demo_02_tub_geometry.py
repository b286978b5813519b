"""
Two sources in the utilization band
===================================

The analytic model reduces the scheme to a map on (x, y), the rates of two
sources sharing one link. Points inside the band stay inside, and the
ratio between the rates shrinks until both sit in the fairness wedge.
"""


from osuabr import tubmodel as tm
from osuabr.cli import tub_check

params = tm.TubParams(U=0.9, delta=0.1)
print(f"band: {params.lower:.3f} <= x + y <= {params.upper:.3f}, s = {params.s:.3f}")

###############################################################################
# Follow one unfair starting point step by step.
run = tm.iterate_to_fairness(tm.OperatingPoint(0.05, 0.8), params)
for k, p in enumerate(run.trajectory):
    region = tm.classify_region(p, params).value
    print(f"step {k:2d}: x={p.x:.4f} y={p.y:.4f} y/x={p.y / p.x:7.3f} region {region}")
bound = tm.convergence_step_bound(run.trajectory[0], params)
print(f"reached the fairness region in {run.steps} steps (bound {bound})")

###############################################################################
# With only one source updated per step the point still cannot escape.
p = tm.OperatingPoint(0.3, 0.6)
for update in tm.AsyncUpdate:
    print(f"{update.value}: {tm.async_step(p, params, update)}")

###############################################################################
# Sample the claims over random band points, utilizations and widths.
rep = tub_check(samples=5000, seed=0)
print("violations:", rep.violations)
print("worst steps to fairness:", rep.worst_steps)
