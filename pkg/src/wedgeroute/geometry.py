"""Exact planar geometry primitives for wedge-relay routing.

Everything here is pure: membership tests, disc/wedge intersection areas,
and uniform sampling on a wedge.  Angles are radians, normalized to
(-pi, pi].  Angular boundaries of a wedge are closed (points on the
bounding rays and on the arc are members).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    return -((-np.asarray(a) + math.pi) % TWO_PI - math.pi)


class Point2D(NamedTuple):
    x: float
    y: float


class LocalStep(NamedTuple):
    """Relay displacement in local coordinates (x axis toward destination)."""

    x_prime: float
    y_prime: float


@dataclass(frozen=True)
class Wedge:
    """Circular sector: apex, bisector direction, radius, half opening angle.

    A wedge of fraction eta has half_angle = eta * pi, so eta = 1/2 is the
    half-disk and eta = 1 the full disk.
    """

    apex: Point2D
    orientation: float
    radius: float
    half_angle: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError(f"wedge radius must be positive, got {self.radius}")
        if not 0.0 < self.half_angle <= math.pi + 1e-12:
            raise ValueError(f"half_angle must be in (0, pi], got {self.half_angle}")
        object.__setattr__(self, "apex", Point2D(*self.apex))
        object.__setattr__(self, "orientation", float(wrap_angle(self.orientation)))

    @property
    def area(self) -> float:
        return self.half_angle * self.radius * self.radius


def wedge_contains(w: Wedge, p):
    """Closed membership test; `p` is a point or an (..., 2) array.

    The apex itself is a member (its direction is undefined but it lies in
    the closure of the sector for any orientation).
    """
    pts = np.asarray(p, dtype=float)
    scalar = pts.ndim == 1
    dx = pts[..., 0] - w.apex.x
    dy = pts[..., 1] - w.apex.y
    d2 = dx * dx + dy * dy
    ang_off = np.abs(wrap_angle(np.arctan2(dy, dx) - w.orientation))
    inside = (d2 <= w.radius * w.radius) & ((ang_off <= w.half_angle) | (d2 == 0.0))
    return bool(inside) if scalar else inside


def lens_area(r1: float, r2: float, d: float) -> float:
    """Area of the intersection of two discs with center distance d."""
    if r1 <= 0.0 or r2 <= 0.0:
        raise ValueError("disc radii must be positive")
    if d < 0.0:
        raise ValueError("center distance must be nonnegative")
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        r = min(r1, r2)
        return math.pi * r * r
    a1 = min(max((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0), 1.0)
    a2 = min(max((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0), 1.0)
    k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)
    return (
        r1 * r1 * math.acos(a1)
        + r2 * r2 * math.acos(a2)
        - 0.5 * math.sqrt(max(k, 0.0))
    )


def sample_uniform_wedge(rng, R: float, eta: float, size=None) -> LocalStep:
    """Uniform point on the canonical wedge (apex at origin, bisector on +x).

    Draws theta uniform on (-eta*pi, eta*pi) and a radial factor v with
    density 2v on (0, 1) (v = sqrt(u) for u uniform), so (Rv cos, Rv sin)
    is uniform on the wedge.  With `size` set, the fields are arrays.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    if not R > 0.0:
        raise ValueError(f"R must be positive, got {R}")
    theta = rng.uniform(-eta * math.pi, eta * math.pi, size)
    v = np.sqrt(rng.uniform(0.0, 1.0, size))
    return LocalStep(R * v * np.cos(theta), R * v * np.sin(theta))


# --------------------------------------------------------------------------
# wedge-wedge overlap area
#
# Numeric scheme: integrate in polar coordinates around w1's apex,
#   area = int f(theta) dtheta,   f = (hi^2 - lo^2) / 2
# where [lo, hi] is the portion of the ray inside w2 (clipped to [0, r1]).
# f is analytic between a finite set of breakpoint directions (corners,
# circle intersections, tangents, constraint flips); Gauss-Legendre on each
# smooth piece then converges far below the 1e-6 * R^2 contract.

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _unit(a: float) -> np.ndarray:
    return np.array([math.cos(a), math.sin(a)])


def _line_circle_params(c2: np.ndarray, e: np.ndarray, center: np.ndarray, r: float):
    """Parameters t of |c2 + t*e - center| = r (line through c2 along e)."""
    f = c2 - center
    b = float(f @ e)
    disc = b * b - float(f @ f) + r * r
    if disc <= 0.0:
        return []
    s = math.sqrt(disc)
    return [-b - s, -b + s]


def _interval_sq(lo, hi, r1):
    """Vector helper: (hi^2 - lo^2)/2 for intervals clipped to [0, r1]."""
    lo_c = np.clip(lo, 0.0, r1)
    hi_c = np.clip(hi, 0.0, r1)
    return 0.5 * np.maximum(hi_c * hi_c - lo_c * lo_c, 0.0)


def _halfplane_interval(cn: float, un: np.ndarray):
    """Ray interval where cn + rho * un >= 0, as (lo, hi) arrays."""
    lo = np.full_like(un, -np.inf)
    hi = np.full_like(un, np.inf)
    pos = un > 0.0
    neg = un < 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -cn / un
    lo[pos] = t[pos]
    hi[neg] = t[neg]
    if cn < 0.0:
        zero = ~(pos | neg)
        lo[zero] = np.inf  # constraint violated for the whole ray
    return lo, hi


def _breakpoints(a1, o1, r1, h1, a2, o2, r2, h2):
    """Directions (relative to o1) where the clipped-ray profile can kink.

    Returns (breakpoints, tangent_angles): at tangent directions the ray
    chord vanishes like a square root, so pieces touching them need the
    substitution treatment to stay spectrally accurate.
    """
    pts = [a2]
    rays = [o2 + h2, o2 - h2]
    if h2 > math.pi / 2 + 1e-12:
        hm = math.pi - h2
        rays += [o2 + math.pi + hm, o2 + math.pi - hm]
    for a in rays:
        e = _unit(a)
        pts.append(a2 + r2 * e)
        pts.append(a2 - r2 * e)  # antipodal line/circle crossing
        for t in _line_circle_params(a2, e, a1, r1):
            pts.append(a2 + t * e)

    cand = []
    for p in pts:
        d = p - a1
        if float(d @ d) > 1e-30:
            cand.append(math.atan2(d[1], d[0]))

    c = a1 - a2
    dist = math.hypot(c[0], c[1])
    # circle-circle intersections
    if dist > 1e-15 and abs(r1 - r2) < dist < r1 + r2:
        x = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist)
        y2 = r1 * r1 - x * x
        if y2 > 0.0:
            y = math.sqrt(y2)
            ex = (a2 - a1) / dist
            ey = np.array([-ex[1], ex[0]])
            for s in (1.0, -1.0):
                p = a1 + x * ex + s * y * ey
                d = p - a1
                cand.append(math.atan2(d[1], d[0]))
    # tangents from a1 to circle 2
    tangents = []
    if dist > r2 > 0.0:
        base = math.atan2(-c[1], -c[0])
        da = math.asin(min(r2 / dist, 1.0))
        tangents = [float(np.clip(wrap_angle(a - o1), -h1, h1)) for a in (base + da, base - da)]
        cand += [base + da, base - da]
    # directions parallel to a boundary ray of w2 (constraint flips)
    for a in rays:
        cand += [a, a + math.pi]

    rel = np.clip(wrap_angle(np.asarray(cand) - o1), -h1, h1)
    brk = np.unique(np.concatenate((np.array([-h1, h1]), rel)))
    if tangents:
        # merge breakpoints sitting in a tangent's near field, so pieces
        # adjacent to the branch point always receive the substitution
        keep = np.ones(brk.size, dtype=bool)
        for t in tangents:
            keep &= (np.abs(brk - t) >= 1e-5) | (brk == t)
        keep[0] = keep[-1] = True
        brk = brk[keep]
    return brk, tangents


def _piece_nodes(lo_t: float, hi_t: float, tangents) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [lo_t, hi_t] in the integration
    variable, with a u^2 substitution from any endpoint that is a tangent
    direction (where the integrand has a sqrt branch point)."""
    span = hi_t - lo_t
    sing_lo = any(abs(lo_t - t) < 1e-12 for t in tangents)
    sing_hi = any(abs(hi_t - t) < 1e-12 for t in tangents)
    if sing_lo and sing_hi:
        mid = 0.5 * (lo_t + hi_t)
        th1, wt1 = _piece_nodes(lo_t, mid, tangents)
        th2, wt2 = _piece_nodes(mid, hi_t, tangents)
        return np.concatenate((th1, th2)), np.concatenate((wt1, wt2))
    if sing_lo:
        umax = math.sqrt(span)
        u = 0.5 * umax * (_GL_NODES + 1.0)
        return lo_t + u * u, umax * _GL_WEIGHTS * u
    if sing_hi:
        umax = math.sqrt(span)
        u = 0.5 * umax * (_GL_NODES + 1.0)
        return hi_t - u * u, umax * _GL_WEIGHTS * u
    return 0.5 * span * _GL_NODES + 0.5 * (hi_t + lo_t), 0.5 * span * _GL_WEIGHTS


def wedge_overlap_area(w1: Wedge, w2: Wedge) -> float:
    """Area of w1 intersect w2, to within 1e-6 * R^2 absolute error."""
    a1 = np.array(w1.apex, dtype=float)
    a2 = np.array(w2.apex, dtype=float)
    o1, r1, h1 = w1.orientation, w1.radius, w1.half_angle
    o2, r2, h2 = w2.orientation, w2.radius, w2.half_angle
    c = a1 - a2
    cc = float(c @ c)

    convex = h2 <= math.pi / 2 + 1e-12
    if convex:
        normals = [_unit(o2 + h2 - math.pi / 2), _unit(o2 - h2 + math.pi / 2)]
    else:
        hm = math.pi - h2
        am = o2 + math.pi
        anti_normals = [_unit(am + hm - math.pi / 2), _unit(am - hm + math.pi / 2)]

    brk, tangents = _breakpoints(a1, o1, r1, h1, a2, o2, r2, h2)
    total = 0.0
    for lo_t, hi_t in zip(brk[:-1], brk[1:]):
        span = hi_t - lo_t
        if span < 1e-14:
            continue
        th_rel, wt = _piece_nodes(float(lo_t), float(hi_t), tangents)
        th = o1 + th_rel
        ux = np.cos(th)
        uy = np.sin(th)
        cu = c[0] * ux + c[1] * uy
        disc = cu * cu - cc + r2 * r2
        valid = disc > 0.0
        sq = np.sqrt(np.where(valid, disc, 0.0))
        lo = np.maximum(-cu - sq, 0.0)
        hi = np.minimum(-cu + sq, r1)

        if convex:
            for n in normals:
                nlo, nhi = _halfplane_interval(float(c @ n), ux * n[0] + uy * n[1])
                lo = np.maximum(lo, nlo)
                hi = np.minimum(hi, nhi)
            f = _interval_sq(lo, hi, r1)
        else:
            alo = np.zeros_like(lo)
            ahi = np.full_like(lo, np.inf)
            for n in anti_normals:
                nlo, nhi = _halfplane_interval(float(c @ n), ux * n[0] + uy * n[1])
                alo = np.maximum(alo, nlo)
                ahi = np.minimum(ahi, nhi)
            f_full = _interval_sq(lo, hi, r1)
            f_split = _interval_sq(lo, np.minimum(hi, alo), r1) + _interval_sq(
                np.maximum(lo, ahi), hi, r1
            )
            f = np.where(ahi <= alo, f_full, f_split)

        total += float((np.where(valid, f, 0.0) * wt).sum())
    return total
