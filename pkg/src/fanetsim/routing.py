"""Shortest-path relay tree rooted at the ground station.

Costs are accumulated by Bellman-Ford edge relaxation over the admissible
links, then each UAV's parent is the neighbor realizing the shortest path,
with ties broken toward the lower node id so runs are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import Topology, distance

_WEIGHT_MODES = ("distance", "hops")


class DisconnectedTopologyError(RuntimeError):
    """Some UAV has no admissible path to the ground station."""

    def __init__(self, stranded_ids):
        self.stranded_ids = sorted(stranded_ids)
        super().__init__(
            f"no route to the ground station from UAV(s) {self.stranded_ids}"
        )


@dataclass
class RoutingTree:
    """Parent pointers toward the ground station plus the realized path costs.

    ``path_cost`` is in the units of the weight that built the tree: meters
    for "distance", hop count for "hops".
    """

    parent: dict[int, int]
    path_cost: dict[int, float]


@dataclass
class TreeValidationReport:
    """Constraint-by-constraint violation lists; empty lists mean a valid tree.

    single_parent: every UAV names exactly one parent other than itself.
    gs_rooted:     following parents from every UAV reaches the ground station.
    loop_free:     no parent cycles and no mutually-parented pairs.
    admissible:    every parent edge is within the link threshold.
    """

    single_parent: list[str] = field(default_factory=list)
    gs_rooted: list[str] = field(default_factory=list)
    loop_free: list[str] = field(default_factory=list)
    admissible: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.single_parent or self.gs_rooted or self.loop_free or self.admissible)


def _edge_weight(t: Topology, i: int, j: int, weight: str) -> float:
    if weight == "hops":
        return 1.0
    return distance(t.node(i), t.node(j))


def build_spt(t: Topology, weight: str = "distance") -> RoutingTree:
    """Shortest-path tree from every UAV to the ground station.

    weight "distance" minimizes summed link length in meters; "hops"
    minimizes hop count. Raises DisconnectedTopologyError when any UAV is
    cut off from the ground station.
    """
    if weight not in _WEIGHT_MODES:
        raise ValueError(f"unknown weight {weight!r}; use one of {_WEIGHT_MODES}")
    gs_id = t.gs.id
    dist_to_gs = {node_id: math.inf for node_id in t.uav_ids}
    dist_to_gs[gs_id] = 0.0

    # Directed relaxation edges ending at a UAV; sorted for a fixed sweep order.
    edges = []
    for i in t.uav_ids:
        for j in t.admissible_neighbors(i):
            edges.append((j, i, _edge_weight(t, i, j, weight)))
    edges.sort(key=lambda e: (e[0], e[1]))

    for _ in range(t.n_uavs):
        changed = False
        for u, v, w in edges:
            via = dist_to_gs[u] + w
            if via < dist_to_gs[v]:
                dist_to_gs[v] = via
                changed = True
        if not changed:
            break

    stranded = [i for i in t.uav_ids if math.isinf(dist_to_gs[i])]
    if stranded:
        raise DisconnectedTopologyError(stranded)

    parent = {}
    for i in t.uav_ids:
        best_id = None
        best_cost = math.inf
        for j in t.admissible_neighbors(i):
            cost = dist_to_gs[j] + _edge_weight(t, i, j, weight)
            if cost < best_cost:
                best_cost = cost
                best_id = j
        parent[i] = best_id
    return RoutingTree(parent=parent, path_cost={i: dist_to_gs[i] for i in t.uav_ids})


def validate_tree(tree: RoutingTree, t: Topology) -> TreeValidationReport:
    """Check a parent map against the relay-tree constraints.

    Reports violations of the single-parent structure, reachability of the
    ground station, loop-freeness (including two-node mutual parenting), and
    admissibility of every parent edge.
    """
    report = TreeValidationReport()
    gs_id = t.gs.id
    valid_ids = set(t.uav_ids) | {gs_id}

    for i in t.uav_ids:
        if i not in tree.parent:
            report.single_parent.append(f"UAV {i} has no parent entry")
    for i, j in tree.parent.items():
        if i not in set(t.uav_ids):
            report.single_parent.append(f"parent entry for unknown UAV {i}")
            continue
        if j == i:
            report.single_parent.append(f"UAV {i} is its own parent")
            continue
        if j not in valid_ids:
            report.single_parent.append(f"UAV {i} names unknown parent {j}")
            continue
        if not t.is_admissible(i, j):
            report.admissible.append(f"link {i} -> {j} is beyond the admissibility threshold")

    for i, j in tree.parent.items():
        if tree.parent.get(j) == i:
            report.loop_free.append(f"UAVs {min(i, j)} and {max(i, j)} parent each other")

    seen_cycles = set()
    for start in t.uav_ids:
        hops = 0
        node = start
        chain = []
        reached_gs = False
        while hops <= t.n_uavs:
            if node == gs_id:
                reached_gs = True
                break
            nxt = tree.parent.get(node)
            if nxt is None or nxt not in valid_ids:
                break
            chain.append(node)
            if nxt in chain:
                cycle = tuple(sorted(set(chain[chain.index(nxt):]) | {nxt}))
                if cycle not in seen_cycles:
                    seen_cycles.add(cycle)
                    report.loop_free.append(f"parent cycle through UAVs {list(cycle)}")
                break
            node = nxt
            hops += 1
        if not reached_gs:
            report.gs_rooted.append(f"UAV {start} cannot reach the ground station")

    # Deduplicate mutual-pair messages that the cycle walk also found.
    report.loop_free = sorted(set(report.loop_free))
    return report
