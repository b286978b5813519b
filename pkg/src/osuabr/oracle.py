"""Reference allocations and fairness scoring."""

from __future__ import annotations

from typing import Hashable, Mapping, Sequence

from .core import InvalidParameterError


def maxmin_oracle(link_rates: Mapping[Hashable, float],
                  vc_routes: Mapping[Hashable, Sequence[Hashable]],
                  demands: Mapping[Hashable, float] | None = None) -> dict:
    """Max-min fair rates by progressive filling.

    All unfrozen VCs grow at the same pace; a link that fills up freezes
    every VC crossing it, and a VC whose optional demand is met freezes on
    its own. Links absent from ``link_rates`` are unconstrained.
    """
    demands = dict(demands or {})
    alloc = {vc: 0.0 for vc in vc_routes}
    active = {vc for vc, route in vc_routes.items()
              if any(l in link_rates for l in route) or vc in demands}
    residual = dict(link_rates)
    for vc in set(vc_routes) - active:
        alloc[vc] = float("inf")
    while active:
        steps = []
        for link, cap in residual.items():
            users = [vc for vc in active if link in vc_routes[vc]]
            if users:
                steps.append(cap / len(users))
        for vc in active:
            if vc in demands:
                steps.append(demands[vc] - alloc[vc])
        inc = max(0.0, min(steps))
        for vc in active:
            alloc[vc] += inc
        frozen = set()
        for link in residual:
            users = [vc for vc in active if link in vc_routes[vc]]
            residual[link] -= inc * len(users)
            if users and residual[link] <= 1e-12 * max(1.0, link_rates[link]):
                residual[link] = 0.0
                frozen.update(users)
        for vc in active:
            if vc in demands and alloc[vc] >= demands[vc] - 1e-12 * max(1.0, demands[vc]):
                frozen.add(vc)
        if not frozen:  # numerical stall guard
            break
        active -= frozen
    return alloc


def fairness_index(allocations: Mapping[Hashable, float], optimum: Mapping[Hashable, float]) -> float:
    """Jain's index of allocations normalised by the max-min optimum."""
    if not allocations:
        raise InvalidParameterError("fairness index of an empty allocation set")
    if set(allocations) != set(optimum):
        raise InvalidParameterError("allocations and optimum cover different VCs")
    if any(optimum[vc] <= 0 for vc in optimum):
        raise InvalidParameterError("optimum allocations must be positive")
    ratios = [allocations[vc] / optimum[vc] for vc in allocations]
    total = sum(ratios)
    squares = sum(r * r for r in ratios)
    if squares == 0:
        return 0.0
    return total * total / (len(ratios) * squares)
