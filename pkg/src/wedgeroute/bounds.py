"""Closed-form quantities for the random wedge relay scheme: empty-wedge
probabilities, disconnection bounds, the per-hop displacement law, drift
expectations, hop-count bounds, and mean source-destination distances.

All logarithms are natural.  Probability bounds larger than 1 are returned
as computed: vacuous but valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import RegionSpec

THREE_PI_OVER_4 = 3.0 * math.pi / 4.0


@dataclass(frozen=True)
class BoundReport:
    """Disconnection-probability bound split into interior and edge terms."""

    sigma_interior: float
    sigma_edge: float
    sigma_total: float
    N: float
    d: float
    eta: float

    def as_dict(self) -> dict:
        return {
            "sigma_interior": self.sigma_interior,
            "sigma_edge": self.sigma_edge,
            "sigma_total": self.sigma_total,
            "N": self.N,
            "d": self.d,
            "eta": self.eta,
        }


@dataclass(frozen=True)
class HopBounds:
    """Expected relay-count bounds; the simplified pair is set when r == R."""

    lower: float
    upper: float
    simplified_lower: float | None = None
    simplified_upper: float | None = None

    def as_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "simplified_lower": self.simplified_lower,
            "simplified_upper": self.simplified_upper,
        }


def _check_eta(eta: float) -> None:
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")


def empty_wedge_prob_exact(i: int, eta: float) -> float:
    """Probability that i uniform directions leave an empty closed arc of
    angle >= 2 * eta * pi.

    Inclusion-exclusion: sum over k of (-1)^(k-1) C(i, k) (1 - k eta)^(i-1),
    with (1 - k eta) clamped at 0 (so 0^0 = 1 covers the i = 1 boundary case)
    and the result clamped to [0, 1] against alternating-sum float residue.
    """
    _check_eta(eta)
    if i < 0:
        raise ValueError(f"i must be nonnegative, got {i}")
    if i == 0:
        return 1.0
    total = 0.0
    for k in range(1, i + 1):
        base = max(1.0 - k * eta, 0.0)
        term = math.comb(i, k) * base ** (i - 1)
        total += term if k % 2 == 1 else -term
        if base == 0.0:
            break
    return min(max(total, 0.0), 1.0)


def empty_wedge_prob_upper(i: int, eta: float) -> float:
    """First-term upper bound i (1 - eta)^(i-1)."""
    _check_eta(eta)
    if i < 1:
        raise ValueError(f"i must be >= 1, got {i}")
    return i * (1.0 - eta) ** (i - 1)


def _check_nd(N: float, d: float) -> None:
    if not N > 0.0:
        raise ValueError(f"N must be positive, got {N}")
    if not 0.0 < d <= 1.0:
        raise ValueError(f"d must be in (0, 1], got {d}")


def sigma_interior(N: float, d: float, eta: float, simplified: bool = True) -> float:
    """Interior-node disconnection bound (1 - 2 sqrt(d)) N (dN + 1) e^(-eta dN).

    With simplified=False the interior-count prefactor keeps its
    unsimplified form (1 - (2 - sqrt(d)) sqrt(d)) N.  Either prefactor is
    clamped at 0 (the bound is vacuously 0 when the region is all edge).
    """
    _check_nd(N, d)
    _check_eta(eta)
    sd = math.sqrt(d)
    pref = 1.0 - 2.0 * sd if simplified else 1.0 - (2.0 - sd) * sd
    if pref <= 0.0:
        return 0.0
    dn = d * N
    return pref * N * (dn + 1.0) * math.exp(-eta * dn)


def sigma_edge(N: float, d: float, eta: float) -> float:
    """Edge-node disconnection bound
    (96 pi log^2(dN) + 1) / sqrt(d) * e^(-eta dN / 2) + 2 sqrt(d) N e^(-dN / 2).
    """
    _check_nd(N, d)
    _check_eta(eta)
    dn = d * N
    if dn <= 0.0:
        raise ValueError(f"dN must be positive, got {dn}")
    log2 = math.log(dn) ** 2
    sd = math.sqrt(d)
    term1 = (96.0 * math.pi * log2 + 1.0) / sd * math.exp(-eta * dn / 2.0)
    term2 = 2.0 * sd * N * math.exp(-dn / 2.0)
    return term1 + term2


def sigma_total(N: float, d: float, eta: float) -> BoundReport:
    """Total disconnection bound: interior plus edge terms."""
    si = sigma_interior(N, d, eta)
    se = sigma_edge(N, d, eta)
    return BoundReport(si, se, si + se, N, d, eta)


def step_support(r, R: float):
    """Support of the per-hop displacement at distance r: [-R, sqrt(r^2+R^2)-r]."""
    r = np.asarray(r, dtype=float)
    return -R * np.ones_like(r), np.sqrt(r * r + R * R) - r


def step_cdf(x, r: float, R: float = 1.0):
    """P(displacement <= x) for a relay uniform on the half-disk at distance r.

    This is the area of the half-disk within distance r + x of the
    destination over the half-disk area.  Closed form: the two-disc lens
    between the transmission disc and the disc of radius r + x around the
    destination, minus (for x > 0) the circular segment of the latter disc
    beyond the half-disk's diameter line:

        F = 2/(pi R^2) [ R^2 acos((r^2 + R^2 - p^2)/(2 r R))
                         + p^2 acos((2 r p - (R^2 - x^2))/(2 r p))
                         - sqrt((R^2 - x^2)(4 r p - (R^2 - x^2)))/2
                         - 1{x>0} (p^2 acos(r/p) - r sqrt(p^2 - r^2)) ],

    with p = r + x.  Inverse-cosine arguments are clamped to [-1, 1] and the
    result to [0, 1] to absorb rounding at the support endpoints.
    """
    if not R > 0.0:
        raise ValueError(f"R must be positive, got {R}")
    if not r > R:
        raise ValueError(f"r must exceed R, got r={r}, R={R}")
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    xmax = math.sqrt(r * r + R * R) - r
    tol = 1e-9 * R
    if (xa < -R - tol).any() or (xa > xmax + tol).any():
        raise ValueError(f"x outside support [{-R}, {xmax}]")
    xa = np.clip(xa, -R, xmax)

    p = r + xa
    rr = R * R
    xx = xa * xa
    t1 = rr * np.arccos(np.clip((r * r + rr - p * p) / (2.0 * r * R), -1.0, 1.0))
    t2 = p * p * np.arccos(np.clip((2.0 * r * p - (rr - xx)) / (2.0 * r * p), -1.0, 1.0))
    t3 = 0.5 * np.sqrt(np.maximum((rr - xx) * (4.0 * r * p - (rr - xx)), 0.0))
    seg = p * p * np.arccos(np.clip(r / p, -1.0, 1.0)) - r * np.sqrt(
        np.maximum(p * p - r * r, 0.0)
    )
    t4 = np.where(xa > 0.0, seg, 0.0)
    out = np.clip(2.0 / (math.pi * rr) * (t1 + t2 - t3 - t4), 0.0, 1.0)
    return float(out[0]) if scalar else out


def expected_x_prime(R: float) -> float:
    """Mean forward component of a uniform half-disk displacement: 4R/(3 pi)."""
    if not R > 0.0:
        raise ValueError(f"R must be positive, got {R}")
    return 4.0 * R / (3.0 * math.pi)


_QUAD_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}


def _half_disk_quad(n: int):
    if n not in _QUAD_CACHE:
        xg, wg = np.polynomial.legendre.leggauss(n)
        v = 0.5 * (xg + 1.0)
        wv = 0.5 * wg
        th = (xg + 1.0) * math.pi / 4.0
        wt = wg * math.pi / 4.0
        V, T = np.meshgrid(v, th, indexing="ij")
        W = np.outer(wv, wt)
        _QUAD_CACHE[n] = (V, np.cos(T), np.sin(T), W)
    return _QUAD_CACHE[n]


def expected_g(r: float, R: float = 1.0, n: int = 256) -> float:
    """E[sqrt((r - x')^2 + y'^2) - r] over a uniform half-disk displacement.

    Tensor-product Gauss-Legendre in polar coordinates (radial factor v,
    angle theta), using the theta symmetry of the integrand.  At n = 256 the
    quadrature error is far below 1e-6 * R (verified by doubling to 512).
    """
    if not R > 0.0:
        raise ValueError(f"R must be positive, got {R}")
    if not r >= R:
        raise ValueError(f"r must be >= R, got r={r}, R={R}")
    V, CT, ST, W = _half_disk_quad(n)
    g = np.sqrt((r - R * V * CT) ** 2 + (R * V * ST) ** 2) - r
    return 4.0 / math.pi * float((g * V * W).sum())


def hop_bounds(h: float, r: float, R: float = 1.0) -> HopBounds:
    """Expected-relay-count bounds for reaching within r from distance h:

        3 pi (h - r) / (4 R)  <=  E[relays]  <=  (h - r + R) / (-E[g(r)]).

    For r == R the simplified pair (3 pi / 4 (h/R - 1), 4 h / R) is also
    reported.
    """
    if not h > r:
        raise ValueError(f"h must exceed r, got h={h}, r={r}")
    if not r >= R > 0.0:
        raise ValueError(f"need r >= R > 0, got r={r}, R={R}")
    lower = 3.0 * math.pi * (h - r) / (4.0 * R)
    upper = (h - r + R) / (-expected_g(r, R))
    if r == R:
        return HopBounds(lower, upper, THREE_PI_OVER_4 * (h / R - 1.0), 4.0 * h / R)
    return HopBounds(lower, upper)


def hop_ratio(r: float, R: float = 1.0) -> float:
    """R / (-E[g(r)]), the per-distance hop-cost scale minimized toward 3 pi / 4."""
    return R / (-expected_g(r, R))


_RATIO_GRID = (1.0, 2.0, 5.0, 10.0, 100.0, 1e4)


def asymptotic_hop_ratio(verify: bool = True, R: float = 1.0) -> float:
    """Limit of expected relays per unit h/R for distant pairs: 3 pi / 4.

    With verify=True, also evaluates R / (-E[g(r)]) on a fixed r/R grid and
    checks that it decreases monotonically toward 3 pi / 4.
    """
    if verify:
        vals = [hop_ratio(g * R, R) for g in _RATIO_GRID]
        diffs = np.diff(vals)
        if (diffs >= 0.0).any():
            raise RuntimeError(f"hop ratio not decreasing on grid: {vals}")
        if vals[-1] < THREE_PI_OVER_4 - 1e-9 or vals[-1] > THREE_PI_OVER_4 * 1.001:
            raise RuntimeError(f"hop ratio does not approach 3 pi / 4: {vals}")
    return THREE_PI_OVER_4


def mean_sd_distance(region: RegionSpec) -> float:
    """Mean distance between two independent uniform points in the region.

    Disk of diameter a: 64 a / (45 pi).  Square of side a:
    (2 + sqrt(2) + 5 log(sqrt(2) + 1)) a / 15.
    """
    if region.kind == "disk":
        diameter = 2.0 * region.size
        return 64.0 * diameter / (45.0 * math.pi)
    a = region.size
    return (2.0 + math.sqrt(2.0) + 5.0 * math.log(math.sqrt(2.0) + 1.0)) * a / 15.0


def prop1_bounds(overlap_area: float, wedge_area: float, lam: float):
    """Sandwich on the chance the next relay lands in the overlap of the
    current and previous selection wedges:

        (1 - 1/(lam |D|)) * ratio  <=  P  <=  ratio,   ratio = overlap / |D|.

    The lower bound is floored at 0.
    """
    if not 0.0 <= overlap_area <= wedge_area * (1.0 + 1e-12):
        raise ValueError(
            f"overlap {overlap_area} outside [0, wedge area {wedge_area}]"
        )
    if not lam * wedge_area > 0.0:
        raise ValueError("lam * wedge_area must be positive")
    upper = min(overlap_area / wedge_area, 1.0)
    lower = max((1.0 - 1.0 / (lam * wedge_area)) * upper, 0.0)
    return lower, upper
