"""Homogeneous Poisson node fields over a convex region, with a spatial
hash grid for wedge/range neighbor queries.

Regions are centered at the origin: a disk of radius `size` or a square of
side `size`.  Node ids are dense integers in generation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .geometry import Wedge, wedge_contains

_EMPTY_IDS = np.empty(0, dtype=np.int64)


@dataclass(frozen=True)
class RegionSpec:
    """Convex network region: kind 'disk' (size = radius) or 'square' (size = side)."""

    kind: str
    size: float

    def __post_init__(self):
        if self.kind not in ("disk", "square"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if not self.size > 0.0:
            raise ValueError(f"region size must be positive, got {self.size}")

    @property
    def area(self) -> float:
        if self.kind == "disk":
            return math.pi * self.size * self.size
        return self.size * self.size

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.kind == "disk":
            return np.hypot(pts[..., 0], pts[..., 1]) <= self.size
        return np.maximum(np.abs(pts[..., 0]), np.abs(pts[..., 1])) <= self.size / 2.0

    def boundary_distance(self, points) -> np.ndarray:
        """Distance from interior points to the region boundary (>= 0 inside)."""
        pts = np.asarray(points, dtype=float)
        if self.kind == "disk":
            return self.size - np.hypot(pts[..., 0], pts[..., 1])
        return self.size / 2.0 - np.maximum(np.abs(pts[..., 0]), np.abs(pts[..., 1]))


@dataclass(frozen=True)
class NetworkParams:
    """Density lam (nodes per unit area), range R, wedge fraction eta, region."""

    lam: float
    R: float
    eta: float
    region: RegionSpec

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not self.R > 0.0:
            raise ValueError(f"R must be positive, got {self.R}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")
        if self.d > 1.0:
            raise ValueError(
                f"normalized disc area d = {self.d:.6g} exceeds 1; "
                "transmission disc must fit the region"
            )

    @property
    def area(self) -> float:
        return self.region.area

    @property
    def N(self) -> float:
        """Expected number of nodes, lam * |A|."""
        return self.lam * self.region.area

    @property
    def d(self) -> float:
        """Normalized transmission-disc area, pi R^2 / |A|."""
        return math.pi * self.R * self.R / self.region.area


class NodePartition(NamedTuple):
    interior: np.ndarray
    edge: np.ndarray


def _build_grid(positions: np.ndarray, cell: float) -> dict:
    if positions.shape[0] == 0:
        return {}
    keys = np.floor(positions / cell).astype(np.int64)
    order = np.lexsort((keys[:, 1], keys[:, 0]))
    sk = keys[order]
    starts = np.flatnonzero(np.r_[True, (sk[1:] != sk[:-1]).any(axis=1)])
    bounds = np.r_[starts, sk.shape[0]]
    return {
        (int(sk[s, 0]), int(sk[s, 1])): np.sort(order[bounds[i] : bounds[i + 1]])
        for i, s in enumerate(starts)
    }


@dataclass(frozen=True)
class NodeSet:
    """Immutable realized point process with a uniform spatial hash.

    The grid cell size equals the transmission range, so a range or wedge
    query around a point touches at most a 3x3 block of cells.
    """

    positions: np.ndarray
    region: RegionSpec
    cell_size: float
    grid: dict = field(repr=False)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def position(self, node_id: int) -> np.ndarray:
        return self.positions[node_id]


def make_node_set(positions, region: RegionSpec, cell_size: float) -> NodeSet:
    pos = np.ascontiguousarray(np.asarray(positions, dtype=float).reshape(-1, 2))
    pos.flags.writeable = False
    return NodeSet(pos, region, float(cell_size), _build_grid(pos, float(cell_size)))


def generate_ppp(params: NetworkParams, seed) -> NodeSet:
    """Poisson(lam * |A|) nodes placed i.i.d. uniform on the region.

    `seed` may be an integer or a numpy Generator; a fixed integer seed
    reproduces the same NodeSet bit for bit.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.poisson(params.N))
    if params.region.kind == "disk":
        theta = rng.uniform(0.0, 2.0 * math.pi, n)
        rad = params.region.size * np.sqrt(rng.uniform(0.0, 1.0, n))
        positions = np.stack([rad * np.cos(theta), rad * np.sin(theta)], axis=1)
    else:
        half = params.region.size / 2.0
        positions = rng.uniform(-half, half, (n, 2))
    return make_node_set(positions, params.region, params.R)


def neighbors_in_wedge(ns: NodeSet, w: Wedge, exclude: int | None = None) -> np.ndarray:
    """Ids of nodes inside the wedge, excluding `exclude`; ascending order.

    Visits only the grid cells overlapping the wedge's bounding square,
    then filters with the exact membership test.
    """
    if ns.n == 0:
        return _EMPTY_IDS
    cx = math.floor(w.apex.x / ns.cell_size)
    cy = math.floor(w.apex.y / ns.cell_size)
    reach = math.ceil(w.radius / ns.cell_size)
    chunks = []
    for ix in range(cx - reach, cx + reach + 1):
        for iy in range(cy - reach, cy + reach + 1):
            ids = ns.grid.get((ix, iy))
            if ids is not None:
                chunks.append(ids)
    if not chunks:
        return _EMPTY_IDS
    cand = np.concatenate(chunks)
    hits = cand[wedge_contains(w, ns.positions[cand])]
    if exclude is not None:
        hits = hits[hits != exclude]
    return np.sort(hits)


def classify_nodes(ns: NodeSet, R: float) -> NodePartition:
    """Split ids into interior (boundary distance > R) and edge (the rest)."""
    if ns.n == 0:
        return NodePartition(_EMPTY_IDS, _EMPTY_IDS)
    bd = ns.region.boundary_distance(ns.positions)
    ids = np.arange(ns.n, dtype=np.int64)
    return NodePartition(ids[bd > R], ids[bd <= R])


def nodes_csv(ns: NodeSet) -> str:
    """`id,x,y` dump with 17 significant digits (exact float round trip)."""
    lines = ["id,x,y"]
    for i, (x, y) in enumerate(ns.positions):
        lines.append(f"{i},{x:.17g},{y:.17g}")
    return "\n".join(lines)


def save_nodes_csv(ns: NodeSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(nodes_csv(ns) + "\n")


def load_nodes_csv(path, region: RegionSpec, cell_size: float) -> NodeSet:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()[1:]
    if not lines:
        return make_node_set(np.empty((0, 2)), region, cell_size)
    data = np.array([[float(v) for v in ln.split(",")[1:3]] for ln in lines if ln])
    return make_node_set(data, region, cell_size)
