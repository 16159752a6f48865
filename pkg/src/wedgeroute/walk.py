"""Markov model of the packet-to-destination distance process.

Each step draws a displacement uniform on the wedge oriented toward the
destination and updates r -> sqrt((r - x')^2 + y'^2); no network is
materialized.  The hop analysis constants hold for eta = 1/2 (half-disk);
other eta values are supported for exploratory sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import sample_uniform_wedge


class WalkState(NamedTuple):
    r: float
    t: int


@dataclass(frozen=True)
class StoppingTimeSample:
    """First step count at which the walk's distance drops to r_threshold.

    `capped` marks hop-cap exhaustion: the walk did NOT reach the threshold
    and `nu` is only a lower bound (never silently truncated).
    """

    nu: int
    h: float
    r_threshold: float
    capped: bool = False


def default_walk_hop_cap(h: float, R: float) -> int:
    return int(100.0 * h / R) + 10_000


def step_markov(state: WalkState, R: float, eta: float, rng) -> WalkState:
    """One relay step from distance state.r (caller ensures state.r > R)."""
    step = sample_uniform_wedge(rng, R, eta)
    return WalkState(math.hypot(state.r - step.x_prime, step.y_prime), state.t + 1)


def simulate_stopping_time(
    h: float,
    r_threshold: float,
    R: float = 1.0,
    eta: float = 0.5,
    hop_cap: int | None = None,
    seed=0,
) -> StoppingTimeSample:
    """Walk from r = h until r <= r_threshold; returns the step count."""
    if not h > 0.0 or not r_threshold >= R > 0.0:
        raise ValueError(f"need h > 0 and r_threshold >= R > 0, got {h}, {r_threshold}, {R}")
    if hop_cap is None:
        hop_cap = default_walk_hop_cap(h, R)
    rng = np.random.default_rng(seed)
    state = WalkState(float(h), 0)
    while state.r > r_threshold and state.t < hop_cap:
        state = step_markov(state, R, eta, rng)
    return StoppingTimeSample(state.t, float(h), float(r_threshold), state.r > r_threshold)


def walk_trace(
    h: float,
    R: float = 1.0,
    eta: float = 0.5,
    hop_cap: int | None = None,
    seed=0,
) -> list[WalkState]:
    """Full trajectory from r = h to absorption at R (or the hop cap)."""
    if hop_cap is None:
        hop_cap = default_walk_hop_cap(h, R)
    rng = np.random.default_rng(seed)
    state = WalkState(float(h), 0)
    trace = [state]
    while state.r > R and state.t < hop_cap:
        state = step_markov(state, R, eta, rng)
        trace.append(state)
    return trace


def batch_stopping_times(
    h: float,
    r_threshold: float,
    n_walks: int,
    R: float = 1.0,
    eta: float = 0.5,
    hop_cap: int | None = None,
    seed=0,
):
    """Vectorized stopping times for n_walks independent walks.

    Equivalent in law to n_walks calls of simulate_stopping_time but draws
    per-step batches across the active walks.  Returns (nu, capped) arrays.
    """
    if hop_cap is None:
        hop_cap = default_walk_hop_cap(h, R)
    rng = np.random.default_rng(seed)
    r = np.full(n_walks, float(h))
    nu = np.zeros(n_walks, dtype=np.int64)
    active = r > r_threshold
    half = eta * math.pi
    for _ in range(hop_cap):
        if not active.any():
            break
        k = int(active.sum())
        theta = rng.uniform(-half, half, k)
        v = np.sqrt(rng.uniform(0.0, 1.0, k))
        ra = r[active]
        r[active] = np.hypot(ra - R * v * np.cos(theta), R * v * np.sin(theta))
        nu[active] += 1
        active = r > r_threshold
    return nu, active.copy()


def walk_trace_csv(trace: list[WalkState]) -> str:
    """CSV `t,r,xi` with xi_t = r_(t+1) - r_t (blank on the last row)."""
    lines = ["t,r,xi"]
    for k, state in enumerate(trace):
        xi = f"{trace[k + 1].r - state.r:.17g}" if k + 1 < len(trace) else ""
        lines.append(f"{state.t},{state.r:.17g},{xi}")
    return "\n".join(lines)


def write_walk_trace(trace: list[WalkState], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(walk_trace_csv(trace) + "\n")
