"""Geometry, free-space channel model, and link admissibility for a UAV relay network.

All quantities are SI internally: meters, hertz, watts. Decibel-flavored
inputs (dBm/Hz noise density, carrier frequency) are converted once at the
configuration boundary via the helpers below and never inside the math.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UAV = "uav"
GROUND_STATION = "ground_station"

# Engineering value for the speed of light; with f = 1 GHz the default
# reference gain below comes out near 5.699e-4.
SPEED_OF_LIGHT_M_S = 3.0e8

_DISTANCE_MODES = ("planar", "3d")


def reference_gain_from_frequency(freq_hz: float) -> float:
    """Received power at the 1 m reference distance for an isotropic free-space link."""
    if freq_hz <= 0.0:
        raise ValueError("carrier frequency must be positive")
    return (SPEED_OF_LIGHT_M_S / (4.0 * math.pi * freq_hz)) ** 2


def noise_density_from_dbm_per_hz(dbm_per_hz: float) -> float:
    """Convert a noise power spectral density from dBm/Hz to W/Hz."""
    return 10.0 ** ((dbm_per_hz - 30.0) / 10.0)


@dataclass(frozen=True)
class Node:
    """A network node placed in Cartesian coordinates (meters)."""

    id: int
    x: float
    y: float
    z: float
    role: str = UAV


@dataclass(frozen=True)
class ChannelParams:
    """Channel constants shared by every link.

    Defaults model a 10 MHz carrier at 1 GHz with thermal noise of
    -174 dBm/Hz, free-space path loss, and a 6 km admissibility radius.
    """

    bandwidth_B: float = 1.0e7
    noise_density_sigma2: float = noise_density_from_dbm_per_hz(-174.0)
    ref_gain_alpha0: float = reference_gain_from_frequency(1.0e9)
    pathloss_beta: float = 2.0
    link_threshold_dth: float = 6000.0

    def __post_init__(self):
        if self.bandwidth_B <= 0.0:
            raise ValueError("bandwidth_B must be positive")
        if self.noise_density_sigma2 <= 0.0:
            raise ValueError("noise_density_sigma2 must be positive")
        if self.ref_gain_alpha0 <= 0.0:
            raise ValueError("ref_gain_alpha0 must be positive")
        if self.pathloss_beta < 2.0:
            raise ValueError("pathloss_beta must be at least 2")
        if self.link_threshold_dth <= 0.0:
            raise ValueError("link_threshold_dth must be positive")

    @property
    def noise_power(self) -> float:
        """Total noise power over the band, sigma^2 * B, in watts."""
        return self.noise_density_sigma2 * self.bandwidth_B


def distance(a: Node, b: Node, mode: str = "planar") -> float:
    """Separation between two distinct nodes in meters.

    The planar mode ignores altitude, which is the appropriate choice when
    every UAV flies at one shared altitude; "3d" includes the z offset for
    mixed-altitude experiments.
    """
    if a.id == b.id:
        raise ValueError(f"distance between node {a.id} and itself is undefined")
    if mode not in _DISTANCE_MODES:
        raise ValueError(f"unknown distance mode {mode!r}; use one of {_DISTANCE_MODES}")
    dx = a.x - b.x
    dy = a.y - b.y
    if mode == "planar":
        return math.sqrt(dx * dx + dy * dy)
    dz = a.z - b.z
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def channel_gain(d: float, p: ChannelParams) -> float:
    """Free-space power gain at separation ``d``: ref_gain / d**beta."""
    if d <= 0.0:
        raise ValueError("channel gain requires a strictly positive distance")
    return p.ref_gain_alpha0 / d**p.pathloss_beta


def link_capacity(transmit_power_w: float, gain: float, p: ChannelParams) -> float:
    """Shannon capacity of one link in bits/s.

    B * log2(1 + P*h / (sigma^2 * B)); zero transmit power gives exactly 0.
    """
    if transmit_power_w < 0.0:
        raise ValueError("transmit power must be nonnegative")
    if gain <= 0.0:
        raise ValueError("link gain must be strictly positive")
    snr = transmit_power_w * gain / p.noise_power
    return p.bandwidth_B * math.log2(1.0 + snr)


@dataclass(frozen=True)
class Topology:
    """Immutable snapshot of node placement, admissibility, and link gains.

    ``nodes`` holds UAVs with ids 1..n followed by the ground station with
    id n+1. ``incidence`` is the n x (n+1) 0/1 admissibility matrix (row i-1
    is UAV i, column j-1 is node j) and ``gains`` the matching channel gains.
    Gains are populated for every distinct pair so that out-of-range links
    can still be inspected; admissibility lives only in ``incidence``.
    """

    nodes: tuple[Node, ...]
    incidence: np.ndarray
    gains: np.ndarray

    @property
    def n_uavs(self) -> int:
        return len(self.nodes) - 1

    @property
    def gs(self) -> Node:
        return self.nodes[-1]

    @property
    def uav_ids(self) -> tuple[int, ...]:
        return tuple(range(1, self.n_uavs + 1))

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id - 1]

    def gain(self, uav_id: int, other_id: int) -> float:
        return float(self.gains[uav_id - 1, other_id - 1])

    def is_admissible(self, uav_id: int, other_id: int) -> bool:
        return bool(self.incidence[uav_id - 1, other_id - 1])

    def admissible_neighbors(self, uav_id: int) -> tuple[int, ...]:
        """Node ids within the link threshold of UAV ``uav_id``, ascending."""
        row = self.incidence[uav_id - 1]
        return tuple(int(j) + 1 for j in np.flatnonzero(row))


def build_topology(nodes: list[Node], p: ChannelParams, mode: str = "planar") -> Topology:
    """Assemble a Topology from a node list, validating the id convention.

    Expects UAV ids 1..n plus a single ground station with id n+1. Raises on
    duplicate ids, coincident coordinates (zero distance has no finite gain),
    mixed UAV altitudes, or a ground station off the ground.
    """
    if not nodes:
        raise ValueError("node list is empty")
    ordered = sorted(nodes, key=lambda nd: nd.id)
    gs_nodes = [nd for nd in ordered if nd.role == GROUND_STATION]
    uav_nodes = [nd for nd in ordered if nd.role == UAV]
    if len(gs_nodes) != 1:
        raise ValueError(f"expected exactly one ground station, got {len(gs_nodes)}")
    if len(uav_nodes) + 1 != len(ordered):
        bad = [nd.id for nd in ordered if nd.role not in (UAV, GROUND_STATION)]
        raise ValueError(f"unknown node roles on ids {bad}")
    n = len(uav_nodes)
    ids = [nd.id for nd in ordered]
    if ids != list(range(1, n + 2)) or gs_nodes[0].id != n + 1:
        raise ValueError("node ids must be UAVs 1..n and ground station n+1")
    altitudes = {nd.z for nd in uav_nodes}
    if len(altitudes) > 1:
        raise ValueError("all UAVs must share one altitude")
    if uav_nodes and uav_nodes[0].z <= 0.0:
        raise ValueError("UAV altitude must be positive")
    if gs_nodes[0].z != 0.0:
        raise ValueError("ground station must sit at z = 0")

    incidence = np.zeros((n, n + 1), dtype=np.int8)
    gains = np.zeros((n, n + 1), dtype=float)
    for i, uav in enumerate(ordered[:n]):
        for j, other in enumerate(ordered):
            if other.id == uav.id:
                continue
            d = distance(uav, other, mode=mode)
            if d == 0.0:
                raise ValueError(
                    f"nodes {uav.id} and {other.id} coincide; zero-distance links are undefined"
                )
            gains[i, j] = channel_gain(d, p)
            if d <= p.link_threshold_dth:
                incidence[i, j] = 1
    incidence.flags.writeable = False
    gains.flags.writeable = False
    return Topology(nodes=tuple(ordered), incidence=incidence, gains=gains)
