"""Monte Carlo experiment harness.

Each experiment pairs an analytical quantity with a simulation estimate and
a statistical verdict.  The single verdict rule everywhere: a cell is
`violated` only when the estimate minus 3 standard errors exceeds its upper
bound, or the estimate plus 3 standard errors falls below its lower bound.
Upper probability bounds of at least 1 are `vacuous`.

Reproducibility: all randomness derives from one integer seed through
numpy SeedSequence spawn keys, rng = default_rng(SeedSequence(seed,
spawn_key=(experiment_id, cell_index, trial_index))), so trial-level
parallelism cannot change any result.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial import cKDTree

from .bounds import (
    THREE_PI_OVER_4,
    empty_wedge_prob_exact,
    prop1_bounds,
    sigma_total,
    step_cdf,
)
from .geometry import TWO_PI, Wedge, sample_uniform_wedge, wedge_contains, wedge_overlap_area
from .network import NetworkParams, RegionSpec, generate_ppp, neighbors_in_wedge
from .routing import DELIVERED, STUCK, route_between_points, select_relay
from .walk import batch_stopping_times

EXP_CONNECTIVITY = 1
EXP_HOPCOUNT = 2
EXP_STEPDIST = 3
EXP_PROP1 = 4
EXP_ETA = 5
EXP_UWEDGE = 6
EXP_ROUTE = 7
EXP_WALK = 8

CONSISTENT = "consistent"
VIOLATED = "violated"
VACUOUS = "vacuous"
INCONCLUSIVE = "inconclusive"
REPORTED = "reported"


def substream(seed: int, *key) -> np.random.Generator:
    """Deterministic child generator for (seed; spawn_key=key)."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def ks_radius(n: int, alpha: float = 0.001) -> float:
    """One-sample Kolmogorov-Smirnov acceptance radius at level alpha,
    c(alpha)/sqrt(n) with c from the asymptotic tail 2 exp(-2 c^2) = alpha."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(n)


def ks_statistic(cdf_at_sorted_samples: np.ndarray) -> float:
    """One-sample Kolmogorov-Smirnov sup deviation, given the model CDF
    evaluated at the sorted sample values."""
    n = cdf_at_sorted_samples.size
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    return float(
        max(
            np.max(grid_hi - cdf_at_sorted_samples),
            np.max(cdf_at_sorted_samples - grid_lo),
        )
    )


def proportion_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n > 0 else math.inf


@dataclass(frozen=True)
class ReportCell:
    label: str
    bound_lower: float | None
    bound_upper: float | None
    estimate: float
    std_error: float
    verdict: str

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "bound_lower": self.bound_lower,
            "bound_upper": self.bound_upper,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    cells: list

    def has_violation(self) -> bool:
        return any(c.verdict == VIOLATED for c in self.cells)

    def to_json(self) -> str:
        return json.dumps(
            {"name": self.name, "cells": [c.as_dict() for c in self.cells]}, indent=2
        )

    def to_csv(self) -> str:
        def fmt(v):
            return "" if v is None else repr(float(v))

        lines = ["label,bound_lower,bound_upper,estimate,std_error,verdict"]
        for c in self.cells:
            lines.append(
                f"{c.label},{fmt(c.bound_lower)},{fmt(c.bound_upper)},"
                f"{fmt(c.estimate)},{fmt(c.std_error)},{c.verdict}"
            )
        return "\n".join(lines)

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        return self.to_json()


def make_cell(
    label: str,
    estimate: float,
    std_error: float,
    bound_lower: float | None = None,
    bound_upper: float | None = None,
    vacuous_at: float | None = None,
    inconclusive: bool = False,
) -> ReportCell:
    if inconclusive:
        verdict = INCONCLUSIVE
    elif bound_lower is None and bound_upper is None:
        verdict = REPORTED
    elif vacuous_at is not None and bound_upper is not None and bound_upper >= vacuous_at:
        verdict = VACUOUS
    elif (bound_upper is not None and estimate - 3.0 * std_error > bound_upper) or (
        bound_lower is not None and estimate + 3.0 * std_error < bound_lower
    ):
        verdict = VIOLATED
    else:
        verdict = CONSISTENT
    return ReportCell(label, bound_lower, bound_upper, estimate, std_error, verdict)


@dataclass(frozen=True)
class ExperimentConfig:
    params: NetworkParams
    trials: int
    seed: int = 0
    h_over_R: tuple = (10.0,)
    eta_list: tuple = (0.25, 0.5, 0.75, 1.0)
    r_over_R: tuple = (1.01, 1.5, 2.0, 5.0, 20.0)
    max_i: int = 10
    hop_cap: int | None = None
    net_trials: int = 20_000
    bins: int = 20
    min_bin_count: int = 50
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


def _resolve_threads(threads: int) -> int:
    if threads == 0:
        return os.cpu_count() or 1
    return max(threads, 1)


def _run_chunks(worker, static, n_trials: int, threads: int):
    """Run worker((static, lo, hi)) over trial ranges; ordered merge."""
    threads = _resolve_threads(threads)
    if threads <= 1 or n_trials < 2 * threads:
        return [worker((static, 0, n_trials))]
    edges = np.linspace(0, n_trials, threads + 1).astype(int)
    jobs = [(static, int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(worker, jobs))


# ------------------------------------------------------------- connectivity

def _disconnect_flags(pos: np.ndarray, R: float, L: float, eta: float):
    """Per-realization disconnection test on a disk region of radius L.

    A node is flagged when some admissible wedge orientation has an empty
    wedge of angle 2*eta*pi: interior nodes admit every orientation (widest
    neighbor gap >= 2*eta*pi, closed comparison); edge nodes admit only
    orientations whose in-region reach exceeds R (measured against the true
    circular boundary), the arc beyond phi = acos((L^2-|p|^2-R^2)/(2R|p|))
    from the outward normal.
    """
    n = pos.shape[0]
    if n == 0:
        return False, False, False
    thr = 2.0 * eta * math.pi
    radii = np.hypot(pos[:, 0], pos[:, 1])
    interior = radii < L - R

    # effective-orientation half-width for every node (pi - phi on each side)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_phi = (L * L - radii * radii - R * R) / (2.0 * R * radii)
    cos_phi = np.where(radii < 1e-12, 1.0 if L > R else -1.0, cos_phi)
    phi = np.arccos(np.clip(cos_phi, -1.0, 1.0))
    normal = np.arctan2(pos[:, 1], pos[:, 0])
    eff_start = normal + phi
    eff_len = TWO_PI - 2.0 * phi

    tree = cKDTree(pos)
    pairs = tree.query_pairs(R, output_type="ndarray")
    if pairs.shape[0] == 0:
        int_any = bool(interior.any())
        edge_any = bool((~interior & (eff_len > 1e-12)).any())
        return int_any or edge_any, int_any, edge_any

    src = np.concatenate([pairs[:, 0], pairs[:, 1]])
    tgt = np.concatenate([pairs[:, 1], pairs[:, 0]])
    dvec = pos[tgt] - pos[src]
    ang = np.arctan2(dvec[:, 1], dvec[:, 0])
    order = np.lexsort((ang, src))
    si = src[order]
    sa = ang[order]
    starts = np.flatnonzero(np.r_[True, si[1:] != si[:-1]])
    ends = np.r_[starts[1:], si.size] - 1

    gap_len = np.empty_like(sa)
    gap_len[:-1] = sa[1:] - sa[:-1]
    gap_len[ends] = TWO_PI - (sa[ends] - sa[starts])
    max_gap = np.maximum.reduceat(gap_len, starts)

    owners = si[starts]
    has_nb = np.zeros(n, dtype=bool)
    has_nb[owners] = True
    node_gap = np.zeros(n)
    node_gap[owners] = max_gap

    interior_disc = interior & (~has_nb | (node_gap >= thr))

    # edge nodes: a qualifying gap must admit an orientation in the
    # effective arc; gap [a, a+G] admits orientations [a+eta*pi, a+G-eta*pi]
    is_edge_gap = ~interior[si] & (gap_len >= thr)
    g_start = sa[is_edge_gap] + eta * math.pi
    g_len = gap_len[is_edge_gap] - thr
    e_start = eff_start[si[is_edge_gap]]
    e_len = eff_len[si[is_edge_gap]]
    hit = (np.mod(e_start - g_start, TWO_PI) <= g_len) | (
        np.mod(g_start - e_start, TWO_PI) <= e_len
    )
    edge_disc = np.zeros(n, dtype=bool)
    edge_disc[si[is_edge_gap][hit]] = True
    edge_disc |= ~interior & ~has_nb & (eff_len > 1e-12)

    int_any = bool(interior_disc.any())
    edge_any = bool(edge_disc.any())
    return int_any or edge_any, int_any, edge_any


def _conn_chunk(job):
    (params, seed, key), lo, hi = job
    out = np.zeros((hi - lo, 3), dtype=bool)
    for k, t in enumerate(range(lo, hi)):
        rng = substream(seed, *key, t)
        ns = generate_ppp(params, rng)
        out[k] = _disconnect_flags(
            ns.positions, params.R, params.region.size, params.eta
        )
    return out


def run_connectivity(cfg: ExperimentConfig) -> ExperimentReport:
    """Empirical network-disconnection frequency against the closed-form
    upper bound for the configured (N, d, eta)."""
    params = cfg.params
    if params.region.kind != "disk":
        raise ValueError("connectivity experiment requires a disk region")
    flags = np.concatenate(
        _run_chunks(
            _conn_chunk, (params, cfg.seed, (EXP_CONNECTIVITY,)), cfg.trials, cfg.threads
        )
    )
    freq = float(flags[:, 0].mean())
    bound = sigma_total(params.N, params.d, params.eta).sigma_total
    cells = [
        make_cell(
            "disconnect_frequency",
            freq,
            proportion_se(freq, cfg.trials),
            bound_upper=bound,
            vacuous_at=1.0,
        ),
        make_cell(
            "interior_disconnect_frequency",
            float(flags[:, 1].mean()),
            proportion_se(float(flags[:, 1].mean()), cfg.trials),
        ),
        make_cell(
            "edge_disconnect_frequency",
            float(flags[:, 2].mean()),
            proportion_se(float(flags[:, 2].mean()), cfg.trials),
        ),
    ]
    return ExperimentReport("connectivity", cells)


# ----------------------------------------------------------------- hopcount

def _hop_chunk(job):
    (params, h, hop_cap, seed, cell_idx), lo, hi = job
    hops = np.zeros(hi - lo, dtype=np.int64)
    status = np.zeros(hi - lo, dtype=np.int8)  # 1 delivered, 2 stuck, 3 cap
    src = (-h / 2.0, 0.0)
    dst = (h / 2.0, 0.0)
    for k, t in enumerate(range(lo, hi)):
        rng = substream(seed, EXP_HOPCOUNT, cell_idx, t)
        ns = generate_ppp(params, rng)
        out = route_between_points(ns, src, dst, "random_wedge", params, hop_cap, rng)
        hops[k] = out.hops
        status[k] = 1 if out.status == DELIVERED else (2 if out.status == STUCK else 3)
    return np.stack([hops, status.astype(np.int64)], axis=1)


def run_hopcount(cfg: ExperimentConfig) -> ExperimentReport:
    """Full-network routed transmissions between synthetic endpoints h apart,
    checked against the closed-form interval
    [3 pi/4 (h/R - 1) + 1, 4 h/R + 1]."""
    params = cfg.params
    if params.region.kind != "disk":
        raise ValueError("hopcount experiment requires a disk region")
    cells = []
    for cell_idx, ho_r in enumerate(cfg.h_over_R):
        h = ho_r * params.R
        if params.region.size < h / 2.0 + 2.0 * params.R:
            raise ValueError(
                f"region radius {params.region.size} too small for h/R={ho_r}; "
                f"need at least h/2 + 2R = {h / 2.0 + 2.0 * params.R}"
            )
        data = np.concatenate(
            _run_chunks(
                _hop_chunk,
                (params, h, cfg.hop_cap, cfg.seed, cell_idx),
                cfg.trials,
                cfg.threads,
            )
        )
        hops, status = data[:, 0], data[:, 1]
        delivered = status == 1
        n_del = int(delivered.sum())
        label = f"h_over_R={ho_r:g}"
        if ho_r <= 1.0:
            lo_bound, hi_bound = 1.0, 1.0
        else:
            lo_bound = THREE_PI_OVER_4 * (ho_r - 1.0) + 1.0
            hi_bound = 4.0 * ho_r + 1.0
        if n_del == 0:
            cells.append(
                make_cell(f"{label}:mean_transmissions", math.nan, math.inf, inconclusive=True)
            )
        else:
            mean_tx = float(hops[delivered].mean())
            se = float(hops[delivered].std(ddof=1) / math.sqrt(n_del)) if n_del > 1 else math.inf
            cells.append(
                make_cell(
                    f"{label}:mean_transmissions",
                    mean_tx,
                    se,
                    bound_lower=lo_bound,
                    bound_upper=hi_bound,
                )
            )
        rate = n_del / cfg.trials
        cells.append(make_cell(f"{label}:delivery_rate", rate, proportion_se(rate, cfg.trials)))
        stuck = float((status == 2).mean())
        cells.append(make_cell(f"{label}:stuck_rate", stuck, proportion_se(stuck, cfg.trials)))
    return ExperimentReport("hopcount", cells)


# ----------------------------------------------------------------- stepdist

def run_stepdist(cfg: ExperimentConfig) -> ExperimentReport:
    """Per-hop displacement law validation: Kolmogorov-Smirnov distance of
    the empirical displacement CDF from the closed form, for uniform wedge
    sampling and for relay selection on real node fields."""
    params = cfg.params
    if abs(params.eta - 0.5) > 1e-12:
        raise ValueError("stepdist validates the half-disk law; requires eta = 0.5")
    R = params.R
    cells = []
    for cell_idx, ro_r in enumerate(cfg.r_over_R):
        r = ro_r * R
        rng = substream(cfg.seed, EXP_STEPDIST, cell_idx)
        step = sample_uniform_wedge(rng, R, 0.5, size=cfg.trials)
        xi = np.sort(np.hypot(r - step.x_prime, step.y_prime) - r)
        d_stat = ks_statistic(step_cdf(xi, r, R))
        cells.append(
            make_cell(
                f"r_over_R={ro_r:g}:uniform_ks",
                d_stat,
                0.0,
                bound_upper=ks_radius(cfg.trials),
            )
        )
        if cfg.net_trials > 0:
            xi_net = _networked_steps(params, r, cell_idx, cfg.seed, cfg.net_trials)
            if xi_net.size == 0:
                cells.append(
                    make_cell(f"r_over_R={ro_r:g}:network_ks", math.nan, math.inf, inconclusive=True)
                )
            else:
                xi_net = np.sort(xi_net)
                d_net = ks_statistic(step_cdf(xi_net, r, R))
                cells.append(
                    make_cell(
                        f"r_over_R={ro_r:g}:network_ks",
                        d_net,
                        0.0,
                        bound_upper=ks_radius(xi_net.size),
                    )
                )
    return ExperimentReport("stepdist", cells)


def _networked_steps(params: NetworkParams, r: float, cell_idx: int, seed: int, trials: int):
    """Realized displacements from uniform relay picks inside the wedge of a
    node at distance r from the destination, over fresh node fields."""
    R = params.R
    net_params = NetworkParams(params.lam, R, 0.5, RegionSpec("disk", 1.5 * R))
    wedge = Wedge((0.0, 0.0), 0.0, R, 0.5 * math.pi)
    dst = (r, 0.0)
    rng = substream(seed, EXP_STEPDIST, cell_idx, 1)
    out = []
    for _ in range(trials):
        ns = generate_ppp(net_params, rng)
        ids = neighbors_in_wedge(ns, wedge)
        if ids.size == 0:
            continue
        rel = select_relay(
            "random_wedge", [(int(i), ns.positions[i]) for i in ids], (0.0, 0.0), dst, rng
        )
        px, py = ns.positions[rel]
        out.append(math.hypot(px - dst[0], py - dst[1]) - r)
    return np.asarray(out)


# -------------------------------------------------------------------- prop1

def _prop1_chunk(job):
    (params_net, d_prev, dst, seed), lo, hi = job
    ratio = np.full(hi - lo, np.nan)
    picked = np.zeros(hi - lo, dtype=bool)
    accepted = np.zeros(hi - lo, dtype=bool)
    wedge_area = d_prev.area
    for k, t in enumerate(range(lo, hi)):
        rng = substream(seed, EXP_PROP1, t)
        ns = generate_ppp(params_net, rng)
        members = neighbors_in_wedge(ns, d_prev)
        if members.size == 0:
            continue
        xt = int(members[int(rng.integers(members.size))])
        xt_pos = ns.positions[xt]
        orient = math.atan2(dst[1] - xt_pos[1], dst[0] - xt_pos[0])
        d_t = Wedge((xt_pos[0], xt_pos[1]), orient, d_prev.radius, d_prev.half_angle)
        cand = neighbors_in_wedge(ns, d_t, exclude=xt)
        prev_inside = wedge_contains(d_t, (d_prev.apex.x, d_prev.apex.y))
        n_cand = cand.size + (1 if prev_inside else 0)
        if n_cand == 0:
            continue
        pick = int(rng.integers(n_cand))
        chosen = ns.positions[cand[pick]] if pick < cand.size else np.array(d_prev.apex)
        accepted[k] = True
        picked[k] = wedge_contains(d_prev, chosen)
        ratio[k] = min(wedge_overlap_area(d_t, d_prev) / wedge_area, 1.0)
    return ratio, picked, accepted


def run_prop1(cfg: ExperimentConfig) -> ExperimentReport:
    """Near-uniform relay-selection sandwich: per overlap-ratio bin, the
    frequency of picking the next relay inside the previous wedge must lie
    within [(1 - 1/(lam |D|)) ratio, ratio] up to 3 standard errors."""
    params = cfg.params
    R, eta = params.R, params.eta
    d_prev = Wedge((0.0, 0.0), 0.0, R, eta * math.pi)
    dst = (1e6 * R, 0.0)
    net_params = NetworkParams(params.lam, R, eta, RegionSpec("disk", 2.0 * R))
    parts = _run_chunks(
        _prop1_chunk, (net_params, d_prev, dst, cfg.seed), cfg.trials, cfg.threads
    )
    ratio = np.concatenate([p[0] for p in parts])
    picked = np.concatenate([p[1] for p in parts])
    accepted = np.concatenate([p[2] for p in parts])

    lam_area = params.lam * d_prev.area
    ratio = ratio[accepted]
    picked = picked[accepted]
    n_acc = int(accepted.sum())
    cells = [
        make_cell("accepted_trials", n_acc / cfg.trials, proportion_se(n_acc / cfg.trials, cfg.trials))
    ]
    if n_acc:
        mean_ratio = float(ratio.mean())
        freq = float(picked.mean())
        lo_b, hi_b = prop1_bounds(mean_ratio * d_prev.area, d_prev.area, params.lam)
        cells.append(
            make_cell(
                "overall",
                freq,
                proportion_se(freq, n_acc),
                bound_lower=lo_b,
                bound_upper=hi_b,
            )
        )
    edges = np.linspace(0.0, 1.0, cfg.bins + 1)
    idx = np.clip(np.digitize(ratio, edges) - 1, 0, cfg.bins - 1)
    for b in range(cfg.bins):
        mask = idx == b
        n_b = int(mask.sum())
        label = f"ratio_bin=[{edges[b]:.2f},{edges[b + 1]:.2f})"
        if n_b == 0:
            continue
        freq_b = float(picked[mask].mean())
        mean_ratio_b = float(ratio[mask].mean())
        lo_b, hi_b = prop1_bounds(mean_ratio_b * d_prev.area, d_prev.area, params.lam)
        cells.append(
            make_cell(
                label,
                freq_b,
                proportion_se(freq_b, n_b),
                bound_lower=lo_b,
                bound_upper=hi_b,
                inconclusive=n_b < cfg.min_bin_count,
            )
        )
    return ExperimentReport(f"prop1(lam_area={lam_area:g})", cells)


# ---------------------------------------------------------------- eta sweep

def run_eta_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    """Exploratory disconnect-frequency and mean-hop table over eta; no
    verdicts are asserted."""
    params = cfg.params
    if params.region.kind != "disk":
        raise ValueError("eta sweep requires a disk region")
    h = cfg.h_over_R[0] * params.R
    cells = []
    for eta_idx, eta in enumerate(cfg.eta_list):
        p_eta = replace(params, eta=eta)
        flags = np.concatenate(
            _run_chunks(
                _conn_chunk,
                (p_eta, cfg.seed, (EXP_ETA, eta_idx)),
                cfg.trials,
                cfg.threads,
            )
        )
        freq = float(flags[:, 0].mean())
        cells.append(
            make_cell(f"eta={eta:g}:disconnect_frequency", freq, proportion_se(freq, cfg.trials))
        )
        nu, capped = batch_stopping_times(
            h,
            params.R,
            cfg.trials,
            R=params.R,
            eta=eta,
            seed=substream(cfg.seed, EXP_ETA, eta_idx),
        )
        mean_tx = float(nu.mean()) + 1.0
        se = float(nu.std(ddof=1) / math.sqrt(nu.size)) if nu.size > 1 else math.inf
        cells.append(make_cell(f"eta={eta:g}:mean_transmissions", mean_tx, se))
        cap_rate = float(capped.mean())
        cells.append(
            make_cell(f"eta={eta:g}:walk_capped_rate", cap_rate, proportion_se(cap_rate, nu.size))
        )
    return ExperimentReport("eta_sweep", cells)


# ------------------------------------------------------------------- uwedge

def max_circular_gaps(angles: np.ndarray) -> np.ndarray:
    """Widest empty arc per row of sorted-or-not angle tuples.

    The wraparound gap is computed as 2*pi - (max - min) so a single angle
    yields exactly 2*pi.
    """
    a = np.sort(np.atleast_2d(angles), axis=1)
    wrap = TWO_PI - (a[:, -1] - a[:, 0])
    if a.shape[1] == 1:
        return wrap
    return np.maximum(np.diff(a, axis=1).max(axis=1), wrap)


def run_uwedge(cfg: ExperimentConfig) -> ExperimentReport:
    """Monte Carlo widest-gap probabilities against the exact
    inclusion-exclusion expression, for i = 1..max_i nodes in range."""
    cells = []
    for i in range(1, cfg.max_i + 1):
        rng = substream(cfg.seed, EXP_UWEDGE, i)
        gaps = max_circular_gaps(rng.uniform(0.0, TWO_PI, (cfg.trials, i)))
        for eta in cfg.eta_list:
            p_hat = float(np.mean(gaps >= 2.0 * eta * math.pi))
            exact = empty_wedge_prob_exact(i, eta)
            cells.append(
                make_cell(
                    f"i={i},eta={eta:g}",
                    p_hat,
                    proportion_se(p_hat, cfg.trials),
                    bound_lower=exact,
                    bound_upper=exact,
                )
            )
    return ExperimentReport("uwedge", cells)


RUNNERS = {
    "connectivity": run_connectivity,
    "hopcount": run_hopcount,
    "stepdist": run_stepdist,
    "prop1": run_prop1,
    "eta": run_eta_sweep,
    "uwedge": run_uwedge,
}
