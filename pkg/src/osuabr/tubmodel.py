"""Two-source analytic model of the target-utilization-band (TUB) rule.

Rates ``x`` and ``y`` are fractions of a unit-bandwidth link. With target
utilization ``U`` and band half-width ``delta`` the fair share is ``U/2``;
one synchronous step divides each rate by the LAF the TUB rule assigns it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from .core import InvalidParameterError

TOL = 1e-12


class OperatingPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class TubParams:
    U: float
    delta: float

    def __post_init__(self):
        if not 0 < self.U <= 1:
            raise InvalidParameterError(f"U must lie in (0, 1], got {self.U!r}")
        if not 0 < self.delta < 0.5:
            raise InvalidParameterError(
                f"delta must lie in (0, 0.5) for the band to be closed, got {self.delta!r}")

    @property
    def s(self) -> float:
        return self.U / 2

    @property
    def lower(self) -> float:
        return self.U * (1 - self.delta)

    @property
    def upper(self) -> float:
        return self.U * (1 + self.delta)

    @property
    def fairness_ratio(self) -> float:
        """Largest rate ratio still counted as fair: ``(1+delta)/(1-delta)``."""
        return (1 + self.delta) / (1 - self.delta)


class Region(str, Enum):
    R1A = "1a"
    R1B = "1b"
    R2 = "2"
    R3A = "3a"
    R3B = "3b"
    R4A = "4a"
    R4B = "4b"
    R4C = "4c"
    OUTSIDE = "outside_tub"


class AsyncUpdate(str, Enum):
    X_ONLY = "x_only"
    Y_ONLY = "y_only"


def load_level(p: OperatingPoint, params: TubParams) -> float:
    return (p[0] + p[1]) / params.U


def in_tub(p: OperatingPoint, params: TubParams, tol: float = TOL) -> bool:
    x, y = p
    return x > 0 and y > 0 and params.lower - tol <= x + y <= params.upper + tol


def in_fairness_region(p: OperatingPoint, params: TubParams, tol: float = TOL) -> bool:
    if not in_tub(p, params, tol):
        return False
    x, y = p
    r = params.fairness_ratio
    return y <= r * x + tol and y >= x / r - tol


def region_conditions(p: OperatingPoint, params: TubParams) -> dict[Region, bool]:
    """Truth value of each sub-region's defining inequalities (TUB membership
    is checked separately)."""
    x, y = p
    s, d = params.s, params.delta
    r = params.fairness_ratio
    return {
        Region.R1A: s > x > 0 and y >= s and y > (1 + d) * x,
        Region.R1B: s > x and (1 + d) * x >= y >= s,
        Region.R2: y >= s and x >= s,
        Region.R3A: s > y > 0 and x >= s and y < (1 - d) * x,
        Region.R3B: s > y >= (1 - d) * x and x >= s,
        Region.R4A: y < s and x < s and x / r <= y <= r * x,
        Region.R4B: y < s and y > r * x,
        Region.R4C: x < s and y < x / r,
    }


def classify_region(p: OperatingPoint, params: TubParams) -> Region:
    if not in_tub(p, params):
        return Region.OUTSIDE
    for region, holds in region_conditions(p, params).items():
        if holds:
            return region
    return Region.OUTSIDE  # unreachable for TUB points


def _scaled(v: float, params: TubParams, z: float) -> float:
    if v < params.s:
        return v * (1 + params.delta) / z
    return v * (1 - params.delta) / z


def _load(p: OperatingPoint, params: TubParams) -> float:
    z = load_level(p, params)
    if z <= 0:
        raise InvalidParameterError(f"load level is zero at {tuple(p)}; the step is undefined")
    return z


def tub_step(p: OperatingPoint, params: TubParams) -> OperatingPoint:
    """One synchronous application of the TUB rule to both sources."""
    z = _load(p, params)
    return OperatingPoint(_scaled(p[0], params, z), _scaled(p[1], params, z))


def async_step(p: OperatingPoint, params: TubParams, update: AsyncUpdate | str) -> OperatingPoint:
    """Feedback reaches only one source; the other keeps its rate."""
    update = AsyncUpdate(update)
    z = _load(p, params)
    if update is AsyncUpdate.X_ONLY:
        return OperatingPoint(_scaled(p[0], params, z), p[1])
    return OperatingPoint(p[0], _scaled(p[1], params, z))


@dataclass
class FairnessRun:
    steps: int
    converged: bool
    trajectory: list[OperatingPoint] = field(default_factory=list)


def iterate_to_fairness(p0: OperatingPoint, params: TubParams, max_steps: int = 1000) -> FairnessRun:
    """Apply ``tub_step`` until the point enters the fairness region.

    A start outside the TUB is rejected; running out of steps is reported
    through ``converged=False`` rather than an exception.
    """
    p = OperatingPoint(*p0)
    if not in_tub(p, params):
        raise InvalidParameterError(f"start point {tuple(p)} is not inside the TUB")
    trajectory = [p]
    steps = 0
    while not in_fairness_region(p, params):
        if steps >= max_steps:
            return FairnessRun(steps, False, trajectory)
        p = tub_step(p, params)
        trajectory.append(p)
        steps += 1
    return FairnessRun(steps, True, trajectory)


def convergence_step_bound(p0: OperatingPoint, params: TubParams) -> int:
    """Upper bound on synchronous steps to fairness: the unfairness ratio
    contracts by ``(1-delta)/(1+delta)`` per effective step, plus two steps
    of slack for passes through region 4."""
    r0 = max(p0[0] / p0[1], p0[1] / p0[0])
    rho = params.fairness_ratio
    return max(0, math.ceil(math.log(r0 / rho) / math.log(rho))) + 2


def random_tub_point(rng, params: TubParams) -> OperatingPoint:
    """Uniform draw from the TUB quadrangle (rejection on the triangle)."""
    while True:
        x, y = rng.uniform(0, params.upper, size=2)
        if x > 0 and y > 0 and params.lower <= x + y <= params.upper:
            return OperatingPoint(float(x), float(y))
