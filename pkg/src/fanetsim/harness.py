"""Scenario generation, the end-to-end pipeline, and seed-averaged sweeps.

Placements are a pure function of the seed: UAVs are drawn sequentially and
uniformly over the square, rejecting draws closer than the minimum
separation to an already-placed UAV, and whole layouts are redrawn (within a
bounded retry budget) until the ground station can reach every UAV. Sweeps
run a seed batch per (budget, fleet-size) grid point and emit canonical
per-seed CSV rows plus mean/std aggregates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .linksel import (
    SolverConfig,
    build_candidates,
    newton_refine,
    round_and_update,
)
from .model import ChannelParams, Node, Topology, GROUND_STATION, UAV, build_topology
from .power import allocate_power
from .routing import build_spt

CSV_HEADER = "pb_watts,n_uavs,seed,throughput_p11_bps,throughput_p14_bps,newton_iters,wall_ms"
AGGREGATE_CSV_HEADER = (
    "pb_watts,n_uavs,stat,throughput_p11_bps,throughput_p14_bps,newton_iters,wall_ms"
)

# Distinct draws of a single coordinate before a layout attempt is abandoned.
_POINT_TRIES = 200


class ConfigError(ValueError):
    """A scenario configuration field is out of range or inconsistent."""


class PlacementError(RuntimeError):
    """Rejection sampling could not produce a connected, separated layout."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Inputs for one experiment; list-valued budget/fleet fields define sweeps."""

    n_uavs: int | Sequence[int] = 25
    area_side: float = 20000.0
    altitude_H: float = 150.0
    min_separation: float = 500.0
    seed: int = 0
    channel: ChannelParams = field(default_factory=ChannelParams)
    power_budget_Pb: float | Sequence[float] = 1.0
    trials: int = 100
    solver: SolverConfig = field(default_factory=SolverConfig)
    gs_x: float | None = None
    gs_y: float = 0.0
    spt_weight: str = "distance"
    measure_wall_time: bool = True
    placement_retry_budget: int = 100

    def __post_init__(self):
        if self.area_side <= 0.0:
            raise ConfigError("area_side must be positive")
        for n in self.n_values():
            if n < 1:
                raise ConfigError("n_uavs must be at least 1")
        if self.min_separation < 0.0 or self.min_separation >= self.area_side:
            raise ConfigError("min_separation must lie in [0, area_side)")
        if self.altitude_H <= 0.0:
            raise ConfigError("altitude_H must be positive")
        for pb in self.pb_values():
            if pb <= 0.0:
                raise ConfigError("power_budget_Pb values must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.placement_retry_budget < 1:
            raise ConfigError("placement_retry_budget must be at least 1")
        if self.spt_weight not in ("distance", "hops"):
            raise ConfigError("spt_weight must be 'distance' or 'hops'")

    def n_values(self) -> list[int]:
        if isinstance(self.n_uavs, (list, tuple)):
            return [int(n) for n in self.n_uavs]
        return [int(self.n_uavs)]

    def pb_values(self) -> list[float]:
        if isinstance(self.power_budget_Pb, (list, tuple)):
            return [float(pb) for pb in self.power_budget_Pb]
        return [float(self.power_budget_Pb)]

    def scalar_n(self) -> int:
        values = self.n_values()
        if len(values) != 1:
            raise ConfigError("this operation needs a single n_uavs, not a sweep range")
        return values[0]

    def scalar_pb(self) -> float:
        values = self.pb_values()
        if len(values) != 1:
            raise ConfigError("this operation needs a single power budget, not a sweep range")
        return values[0]


@dataclass
class PipelineRow:
    """One pipeline execution: both throughput stages plus solver effort."""

    pb_watts: float
    n_uavs: int
    seed: int
    throughput_p11_bps: float
    throughput_p14_bps: float
    newton_iters: int
    wall_ms: float


@dataclass
class SweepResult:
    rows: list[PipelineRow]
    aggregates: list[dict]


def _gs_position(cfg: ScenarioConfig) -> tuple[float, float]:
    x = cfg.area_side / 2.0 if cfg.gs_x is None else cfg.gs_x
    return x, cfg.gs_y


def _connected_to_gs(t: Topology) -> bool:
    n = t.n_uavs
    reached = {t.gs.id}
    frontier = [t.gs.id]
    while frontier:
        node = frontier.pop()
        for i in t.uav_ids:
            if i not in reached and t.is_admissible(i, node):
                reached.add(i)
                frontier.append(i)
    return len(reached) == n + 1


def _sample_connected(cfg: ScenarioConfig) -> tuple[Topology, int]:
    """Draw layouts until one is separated and GS-connected; returns attempts used."""
    n = cfg.scalar_n()
    rng = np.random.default_rng(cfg.seed)
    gs_x, gs_y = _gs_position(cfg)
    min_sep_sq = cfg.min_separation**2

    for attempt in range(1, cfg.placement_retry_budget + 1):
        xs: list[float] = []
        ys: list[float] = []
        placed_all = True
        for _ in range(n):
            for _ in range(_POINT_TRIES):
                x, y = rng.uniform(0.0, cfg.area_side, size=2)
                if all((x - xo) ** 2 + (y - yo) ** 2 >= min_sep_sq for xo, yo in zip(xs, ys)):
                    xs.append(x)
                    ys.append(y)
                    break
            else:
                placed_all = False
                break
        if not placed_all:
            continue
        nodes = [
            Node(id=i + 1, x=xs[i], y=ys[i], z=cfg.altitude_H, role=UAV)
            for i in range(n)
        ]
        nodes.append(Node(id=n + 1, x=gs_x, y=gs_y, z=0.0, role=GROUND_STATION))
        topo = build_topology(nodes, cfg.channel)
        if _connected_to_gs(topo):
            return topo, attempt
    raise PlacementError(
        f"no connected layout with {n} UAVs at separation {cfg.min_separation} m "
        f"within {cfg.placement_retry_budget} attempts; lower n_uavs, min_separation, "
        f"or raise the link threshold"
    )


def generate_scenario(cfg: ScenarioConfig) -> Topology:
    """Seed-deterministic UAV placement over the square, connected to the GS."""
    topo, _ = _sample_connected(cfg)
    return topo


def run_pipeline(t: Topology, cfg: ScenarioConfig) -> PipelineRow:
    """Route, water-fill, refine the link choices, and record both throughputs."""
    pb = cfg.scalar_pb()
    start = time.perf_counter() if cfg.measure_wall_time else None
    tree = build_spt(t, weight=cfg.spt_weight)
    alloc = allocate_power(tree, t, pb, cfg.channel)
    cands = build_candidates(tree, t, alloc, cfg.channel)
    relaxed = newton_refine(cands, alloc, cfg.solver)
    _, refined_throughput = round_and_update(relaxed, cands, tree, alloc, t, cfg.channel)
    wall_ms = 0.0 if start is None else (time.perf_counter() - start) * 1e3
    return PipelineRow(
        pb_watts=pb,
        n_uavs=t.n_uavs,
        seed=cfg.seed,
        throughput_p11_bps=alloc.throughput_R,
        throughput_p14_bps=refined_throughput,
        newton_iters=relaxed.iterations,
        wall_ms=wall_ms,
    )


def _aggregate(rows: list[PipelineRow], pb: float, n: int) -> list[dict]:
    fields = ("throughput_p11_bps", "throughput_p14_bps", "newton_iters", "wall_ms")
    out = []
    for stat, fn in (("mean", np.mean), ("std", np.std)):
        entry = {"pb_watts": pb, "n_uavs": n, "stat": stat}
        for name in fields:
            entry[name] = float(fn([getattr(r, name) for r in rows]))
        out.append(entry)
    return out


def sweep(cfg: ScenarioConfig) -> SweepResult:
    """Run the pipeline over the (budget, fleet-size) grid, `trials` seeds each.

    Seeds are cfg.seed + trial index. Rows come back sorted by (budget, n,
    seed) regardless of execution order; aggregates carry mean and population
    std per grid point.
    """
    rows: list[PipelineRow] = []
    aggregates: list[dict] = []
    for pb in sorted(cfg.pb_values()):
        for n in sorted(cfg.n_values()):
            grid_rows = []
            for trial in range(cfg.trials):
                run_cfg = replace(
                    cfg, n_uavs=n, power_budget_Pb=pb, seed=cfg.seed + trial
                )
                topo = generate_scenario(run_cfg)
                grid_rows.append(run_pipeline(topo, run_cfg))
            grid_rows.sort(key=lambda r: r.seed)
            rows.extend(grid_rows)
            aggregates.extend(_aggregate(grid_rows, pb, n))
    return SweepResult(rows=rows, aggregates=aggregates)


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows_csv(rows: list[PipelineRow], fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for r in rows:
        fh.write(
            ",".join(
                _format_cell(v)
                for v in (
                    r.pb_watts,
                    r.n_uavs,
                    r.seed,
                    r.throughput_p11_bps,
                    r.throughput_p14_bps,
                    r.newton_iters,
                    round(r.wall_ms, 3),
                )
            )
            + "\n"
        )


def write_aggregates_csv(aggregates: list[dict], fh) -> None:
    fh.write(AGGREGATE_CSV_HEADER + "\n")
    for entry in aggregates:
        fh.write(
            ",".join(
                _format_cell(entry[k])
                for k in (
                    "pb_watts",
                    "n_uavs",
                    "stat",
                    "throughput_p11_bps",
                    "throughput_p14_bps",
                    "newton_iters",
                    "wall_ms",
                )
            )
            + "\n"
        )
