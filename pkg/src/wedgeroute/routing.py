"""Localized geometric routing over a NodeSet.

The principal policy is `random_wedge`: forward to a uniformly random node
inside the wedge of radius R and half-angle eta*pi oriented toward the
destination.  Greedy, MFR, NFP and compass selection are provided as
baseline rules.  Routing is memoryless: relays may revisit earlier nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Wedge, wedge_contains, wrap_angle
from .network import NetworkParams, NodeSet, neighbors_in_wedge

DELIVERED = "delivered"
STUCK = "stuck"
HOP_CAP_EXCEEDED = "hop_cap_exceeded"

POLICIES = ("random_wedge", "greedy", "mfr", "nfp", "compass")


@dataclass(frozen=True)
class RouteOutcome:
    """Result of routing one packet.

    `hops` counts transmissions, including the final one to the destination
    when delivered.  `path` lists the nodes that held the packet in order
    (synthetic endpoints are not node ids and are omitted).
    """

    status: str
    hops: int
    path: list = field(default_factory=list)
    final_distance: float = math.inf

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "hops": self.hops,
            "path": [int(i) for i in self.path],
            "final_distance": self.final_distance,
        }


def default_hop_cap(h: float, R: float) -> int:
    """An order of magnitude above the upper hop bound, so cap hits flag
    pathology rather than truncation."""
    return math.ceil(40.0 * h / R) + 100


def select_relay(policy: str, candidates, current, dst, rng):
    """Pick the next relay among (id, position) pairs.

    random_wedge: uniform choice.  greedy: closest to dst.  mfr: largest
    projection onto the current->dst axis.  nfp: closest to current among
    positive-progress nodes.  compass: smallest angular deviation from the
    current->dst axis.  MFR and NFP exclude non-positive progress and return
    None when that empties the set (the caller reports Stuck).
    """
    if len(candidates) == 0:
        raise ValueError("select_relay requires a nonempty candidate list")
    if policy == "random_wedge":
        return candidates[int(rng.integers(len(candidates)))][0]

    cx, cy = float(current[0]), float(current[1])
    ax, ay = float(dst[0]) - cx, float(dst[1]) - cy
    a_norm = math.hypot(ax, ay)
    axis = math.atan2(ay, ax)

    if policy == "greedy":
        return min(candidates, key=lambda c: math.hypot(c[1][0] - dst[0], c[1][1] - dst[1]))[0]
    if policy == "mfr":
        best = None
        best_prog = 0.0
        for i, p in candidates:
            prog = ((p[0] - cx) * ax + (p[1] - cy) * ay) / a_norm
            if prog > best_prog:
                best, best_prog = i, prog
        return best
    if policy == "nfp":
        best = None
        best_d = math.inf
        for i, p in candidates:
            prog = ((p[0] - cx) * ax + (p[1] - cy) * ay) / a_norm
            if prog > 0.0:
                dist = math.hypot(p[0] - cx, p[1] - cy)
                if dist < best_d:
                    best, best_d = i, dist
        return best
    if policy == "compass":
        return min(
            candidates,
            key=lambda c: abs(
                float(wrap_angle(math.atan2(c[1][1] - cy, c[1][0] - cx) - axis))
            ),
        )[0]
    raise ValueError(f"unknown relay policy {policy!r}")


def _route(ns, start_pos, dst_pos, start_id, policy, params, hop_cap, rng):
    R = params.R
    half = params.eta * math.pi
    cur_pos = np.asarray(start_pos, dtype=float)
    dst = np.asarray(dst_pos, dtype=float)
    cur_id = start_id
    path = [] if start_id is None else [start_id]
    hops = 0
    while True:
        dist = math.hypot(cur_pos[0] - dst[0], cur_pos[1] - dst[1])
        if dist <= R:
            return RouteOutcome(DELIVERED, hops + 1, path, dist)
        if hops >= hop_cap:
            return RouteOutcome(HOP_CAP_EXCEEDED, hops, path, dist)
        wedge = Wedge(
            (cur_pos[0], cur_pos[1]),
            math.atan2(dst[1] - cur_pos[1], dst[0] - cur_pos[0]),
            R,
            half,
        )
        ids = neighbors_in_wedge(ns, wedge, exclude=cur_id)
        if ids.size == 0:
            return RouteOutcome(STUCK, hops, path, dist)
        nxt = select_relay(
            policy, [(int(i), ns.positions[i]) for i in ids], cur_pos, dst, rng
        )
        if nxt is None:
            return RouteOutcome(STUCK, hops, path, dist)
        cur_id = int(nxt)
        cur_pos = ns.positions[cur_id]
        assert wedge_contains(wedge, cur_pos), "relay outside its selection wedge"
        path.append(cur_id)
        hops += 1


def route_packet(
    ns: NodeSet,
    src: int,
    dst: int,
    policy: str,
    params: NetworkParams,
    hop_cap: int | None = None,
    rng=None,
) -> RouteOutcome:
    """Route from node src to node dst under the given relay policy.

    The hop cap bounds relay transmissions; the terminal delivery
    transmission (counted in `hops`) is always permitted once the
    destination is within range.
    """
    if not (0 <= src < ns.n) or not (0 <= dst < ns.n):
        raise ValueError(f"unknown node ids src={src}, dst={dst} (n={ns.n})")
    if src == dst:
        raise ValueError("src and dst must differ")
    if policy not in POLICIES:
        raise ValueError(f"unknown relay policy {policy!r}")
    src_pos = ns.positions[src]
    dst_pos = ns.positions[dst]
    if hop_cap is None:
        h = math.hypot(*(src_pos - dst_pos))
        hop_cap = default_hop_cap(max(h, params.R), params.R)
    if hop_cap < 1:
        raise ValueError(f"hop_cap must be >= 1, got {hop_cap}")
    return _route(ns, src_pos, dst_pos, src, policy, params, hop_cap, rng)


def route_between_points(
    ns: NodeSet,
    src_pos,
    dst_pos,
    policy: str,
    params: NetworkParams,
    hop_cap: int | None = None,
    rng=None,
) -> RouteOutcome:
    """Route between synthetic endpoints (not PPP nodes).

    The destination position acts as a node only through the
    within-range termination test; the source is just the first wedge apex.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown relay policy {policy!r}")
    if hop_cap is None:
        h = math.hypot(src_pos[0] - dst_pos[0], src_pos[1] - dst_pos[1])
        hop_cap = default_hop_cap(max(h, params.R), params.R)
    return _route(ns, src_pos, dst_pos, None, policy, params, hop_cap, rng)


def path_trace_csv(outcome: RouteOutcome, ns: NodeSet, dst_pos, dst_id=None) -> str:
    """CSV `hop,node_id,x,y,distance_to_dst` for each packet holder, plus a
    final destination row when delivered."""
    dst = np.asarray(dst_pos, dtype=float)
    lines = ["hop,node_id,x,y,distance_to_dst"]
    for k, node in enumerate(outcome.path):
        x, y = ns.positions[node]
        d = math.hypot(x - dst[0], y - dst[1])
        lines.append(f"{k},{node},{x:.17g},{y:.17g},{d:.17g}")
    if outcome.status == DELIVERED:
        label = "" if dst_id is None else str(dst_id)
        lines.append(f"{outcome.hops},{label},{dst[0]:.17g},{dst[1]:.17g},0")
    return "\n".join(lines)


def write_path_trace(outcome: RouteOutcome, ns: NodeSet, dst_pos, path_file, dst_id=None):
    with open(path_file, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(path_trace_csv(outcome, ns, dst_pos, dst_id=dst_id) + "\n")
