"""Closed-form water-filling of a shared power budget across the tree links.

Maximizing the summed link rates subject to the total budget has a
stationarity condition per link,

    B * h_i / (sigma^2 * B + P_i * h_i) = lambda,

whose positive solution is P_i = B/lambda - sigma^2*B/h_i with the water
level fixed by the budget: lambda = m / (P_b/B + sum_i sigma^2/h_i) over the
m links left active. Links whose closed-form power comes out nonpositive are
clamped to zero and the water level is recomputed over the survivors, which
terminates in at most n passes because the active set only shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ChannelParams, Topology, link_capacity
from .routing import RoutingTree, validate_tree

# Anything at or below this absolute power is treated as a clamped link.
CLAMP_TOLERANCE_W = 1e-12


@dataclass
class PowerAllocation:
    """Per-UAV transmit powers (W), the final water level, and the summed rate."""

    power: dict[int, float]
    water_level_lambda: float
    active_set: tuple[int, ...]
    throughput_R: float


def allocate_power(tree: RoutingTree, t: Topology, total_budget_w: float,
                   p: ChannelParams) -> PowerAllocation:
    """Split ``total_budget_w`` across the tree's links to maximize summed rate.

    Requires a valid tree and a strictly positive budget. The returned powers
    sum to the budget exactly up to one rounding correction, clamped links
    carry exactly 0.0, and the water-level identity above holds on the active
    set to floating-point precision.
    """
    if total_budget_w <= 0.0:
        raise ValueError("total power budget must be strictly positive")
    report = validate_tree(tree, t)
    if not report.ok:
        raise ValueError(f"routing tree is invalid: {report}")

    uavs = sorted(tree.parent)
    gain = {i: t.gain(i, tree.parent[i]) for i in uavs}
    for i in uavs:
        if gain[i] <= 0.0:
            raise ValueError(f"parent link of UAV {i} has nonpositive gain")
    # Per-link noise floor expressed in power units: sigma^2 * B / h_i.
    floor = {i: p.noise_power / gain[i] for i in uavs}

    active = set(uavs)
    powers: dict[int, float] = {}
    water_level = math.inf
    for _ in range(len(uavs)):
        assert active, "active set cannot empty out under a positive budget"
        m = len(active)
        water_level = m / (
            total_budget_w / p.bandwidth_B
            + math.fsum(p.noise_density_sigma2 / gain[i] for i in sorted(active))
        )
        powers = {i: p.bandwidth_B / water_level - floor[i] for i in active}
        drop = {i for i in active if powers[i] <= CLAMP_TOLERANCE_W}
        if not drop:
            break
        active -= drop

    allocation = {i: 0.0 for i in uavs}
    allocation.update({i: powers[i] for i in active})
    # One rounding correction on the largest share keeps the budget exact.
    residual = total_budget_w - math.fsum(allocation[i] for i in uavs)
    top = max(active, key=lambda i: (allocation[i], -i))
    allocation[top] += residual

    throughput = math.fsum(
        link_capacity(allocation[i], gain[i], p) for i in uavs
    )
    return PowerAllocation(
        power=allocation,
        water_level_lambda=water_level,
        active_set=tuple(sorted(active)),
        throughput_R=throughput,
    )


def network_throughput(alloc: PowerAllocation, tree: RoutingTree, t: Topology,
                       p: ChannelParams) -> float:
    """Recompute the summed rate of ``alloc`` over the tree's parent links."""
    return math.fsum(
        link_capacity(alloc.power[i], t.gain(i, tree.parent[i]), p)
        for i in sorted(tree.parent)
    )
