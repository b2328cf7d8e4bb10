"""Perron construction of the constant-curvature body in the plane.

In the plane a body of type F_t is one whose boundary curvature is at least t
in the viscosity sense.  Every such convex body containing K0 is the
intersection of the disks of radius 1/t that contain it, so the extremal body
is the intersection of all radius-1/t disks containing K0 (its "spindle" or
ball hull).  ``perron_solve2d`` samples that family by direction;
``analytic_Kt`` is the closed form used as the oracle.
"""
from __future__ import annotations

import math

import numpy as np

from .bodies import TWO_PI, Arc, Body2D, Scenario, circle_circle, hull_K0
from .errors import DegenerateIntersection, Infeasible, InvalidArgument

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def analytic_Kt(s: Scenario) -> Body2D:
    """Closed-form extremal body for a disk ``K_hat`` and a cap of half-angle alpha."""
    if s.dim != 2:
        raise InvalidArgument("analytic_Kt needs a planar scenario")
    R, a, rho = s.R, s.alpha, 1.0 / s.t
    half_chord = R * math.sin(a)
    xc = R * math.cos(a) - math.sqrt(max(rho * rho - half_chord * half_chord, 0.0))
    beta = math.asin(min(half_chord / rho, 1.0))
    body = Body2D([Arc((0.0, 0.0), R, a, TWO_PI - a), Arc((xc, 0.0), rho, -beta, beta)])
    return body.simplified()


def free_arc_center(s: Scenario) -> tuple:
    rho = 1.0 / s.t
    half_chord = s.R * math.sin(s.alpha)
    return (s.R * math.cos(s.alpha) - math.sqrt(rho * rho - half_chord * half_chord), 0.0)


def minimal_enclosing_circle(points, seed: int = 0):
    """Smallest circle containing ``points`` (Welzl's randomized incremental method)."""
    pts = np.asarray(points, dtype=float)
    order = np.random.default_rng(seed).permutation(len(pts))
    p = [tuple(pts[i]) for i in order]

    def inside(c, r, q):
        return math.dist(c, q) <= r * (1 + 1e-12) + 1e-15

    def two(a, b):
        c = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
        return c, math.dist(c, a)

    def three(a, b, c):
        ax, ay = a
        bx, by = b[0] - ax, b[1] - ay
        cx, cy = c[0] - ax, c[1] - ay
        d = 2 * (bx * cy - by * cx)
        if d == 0:
            # collinear: the widest pair decides
            pairs = [two(a, b), two(a, c), two(b, c)]
            return max(pairs, key=lambda cr: cr[1])
        b2, c2 = bx * bx + by * by, cx * cx + cy * cy
        ux = (cy * b2 - by * c2) / d
        uy = (bx * c2 - cx * b2) / d
        return (ax + ux, ay + uy), math.hypot(ux, uy)

    c, r = p[0], 0.0
    for i in range(1, len(p)):
        if inside(c, r, p[i]):
            continue
        c, r = p[i], 0.0
        for j in range(i):
            if inside(c, r, p[j]):
                continue
            c, r = two(p[i], p[j])
            for k in range(j):
                if not inside(c, r, p[k]):
                    c, r = three(p[i], p[j], p[k])
    return np.array(c), r


def _exit_distance(origin, dirs, centers, radii):
    """Distance from ``origin`` along each direction to the first disk boundary crossed."""
    w = origin - centers
    b = dirs @ w.T
    disc = b * b - (w * w).sum(axis=1) + radii * radii
    return -b + np.sqrt(np.maximum(disc, 0.0))


def core_support_points(samples, rho: float, directions, iterations: int = 56):
    """For each unit direction u, the center c minimising <c, u> over
    ``{c : |c - p| <= rho for every sample p}``.

    Golden-section search over the polar angle of the core boundary seen from
    its deepest point; vectorized over directions.
    """
    samples = np.asarray(samples, dtype=float)
    u = np.atleast_2d(np.asarray(directions, dtype=float))
    c0, r0 = minimal_enclosing_circle(samples)
    if r0 > rho * (1 + 1e-12):
        raise Infeasible(
            f"no disk of radius {rho:g} contains K0 (circumradius {r0:g}); "
            "the curvature target exceeds the admissible bound"
        )
    if rho - r0 <= 1e-9 * rho:
        # the core has collapsed to the circumcenter
        return np.broadcast_to(c0, u.shape).copy()
    radii = np.full(len(samples), rho)

    def evaluate(phi):
        d = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        dist = np.empty(len(phi))
        chunk = max(1, 2_000_000 // len(samples))
        for k in range(0, len(phi), chunk):
            dist[k:k + chunk] = _exit_distance(c0, d[k:k + chunk], samples, radii).min(axis=1)
        pts = c0 + dist[:, None] * d
        return (pts * u).sum(axis=1), pts

    psi = np.arctan2(-u[:, 1], -u[:, 0])
    lo, hi = psi - math.pi / 2, psi + math.pi / 2
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, _ = evaluate(x1)
    f2, _ = evaluate(x2)
    for _ in range(iterations):
        left = f1 <= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        new = np.where(left, hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo))
        fn, _ = evaluate(new)
        x1, x2 = np.where(left, new, x2), np.where(left, x1, new)
        f1, f2 = np.where(left, fn, f2), np.where(left, f1, fn)
    _, pts = evaluate(0.5 * (lo + hi))
    return pts


def _dedupe(centers, radii, tol):
    keep = np.ones(len(centers), dtype=bool)
    for i in range(len(centers)):
        if not keep[i]:
            continue
        near = (np.hypot(*(centers[i + 1:] - centers[i]).T) <= tol) & (np.abs(radii[i + 1:] - radii[i]) <= tol)
        keep[i + 1:] &= ~near
    return centers[keep], radii[keep]


def _vertex(ca, ra, cb, rb):
    """Where the counterclockwise boundary leaves circle a and enters circle b."""
    for v in circle_circle(ca, ra, cb, rb):
        da, db = v - ca, v - cb
        if da[0] * db[1] - da[1] * db[0] >= 0.0:
            return v
    return None


def intersect_disks(centers, radii, inside, n_rays: int | None = None) -> Body2D:
    """Boundary of the intersection of disks, as an exact chain of arcs.

    Rays from the interior point ``inside`` find the active disk by direction;
    vertices are then solved exactly and any disk a vertex escapes is spliced
    in, so arcs thinner than the ray spacing are not lost.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (len(centers),)).copy()
    scale = float(radii.max())
    centers, radii = _dedupe(centers, radii, 1e-8 * scale)
    q = np.asarray(inside, dtype=float)
    if np.any(np.hypot(*(q - centers).T) >= radii):
        raise DegenerateIntersection("the reference point is not interior to every disk")
    m = len(centers)
    n_rays = n_rays or max(4096, 8 * m)
    phi = np.arange(n_rays) * (TWO_PI / n_rays)
    dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    active = np.empty(n_rays, dtype=int)
    chunk = max(1, 4_000_000 // m)
    for k in range(0, n_rays, chunk):
        active[k:k + chunk] = _exit_distance(q, dirs[k:k + chunk], centers, radii).argmin(axis=1)
    change = np.flatnonzero(active != np.roll(active, 1))
    seq = [int(active[0])] if len(change) == 0 else [int(active[i]) for i in change]

    tol = 1e-10 * scale
    for _ in range(4 * m + 16):
        if len(seq) == 1:
            k = seq[0]
            slack = np.hypot(*(centers - centers[k]).T) + radii[k] - radii
            j = int(np.argmax(slack))
            if slack[j] <= tol:
                return Body2D([Arc(tuple(centers[k]), radii[k], 0.0, TWO_PI)])
            seq = [k, j]
            continue
        verts, bad = [], None
        for i, a in enumerate(seq):
            b = seq[(i + 1) % len(seq)]
            v = _vertex(centers[a], radii[a], centers[b], radii[b])
            if v is None:
                bad = ("drop", _redundant(centers, radii, a, b), i)
                break
            viol = np.hypot(*(v - centers).T) - radii
            j = int(np.argmax(viol))
            if viol[j] > tol:
                bad = ("insert", j, i)
                break
            verts.append(v)
        if bad is None:
            # an arc whose two vertices coincide carries no boundary
            thin = [i for i in range(len(seq)) if np.hypot(*(verts[i - 1] - verts[i])) <= tol]
            if thin and len(seq) > 2:
                seq.pop(thin[0])
                continue
            return _arcs_from(seq, verts, centers, radii)
        action, j, i = bad
        if action == "insert":
            if j in seq:
                seq.remove(j)
                i = min(i, len(seq) - 1)
            seq.insert(i + 1, j)
        else:
            seq.remove(j)
    raise DegenerateIntersection("disk intersection did not settle")


def _redundant(centers, radii, a, b):
    """Of two non-crossing circles, the disk that does not bound the intersection."""
    d = np.hypot(*(centers[a] - centers[b]))
    if d + radii[a] <= radii[b]:
        return b
    if d + radii[b] <= radii[a]:
        return a
    raise DegenerateIntersection("disjoint disks have an empty intersection")


def _arcs_from(seq, verts, centers, radii) -> Body2D:
    pieces = []
    for i, k in enumerate(seq):
        vin, vout = verts[i - 1], verts[i]
        c = centers[k]
        a0 = math.atan2(vin[1] - c[1], vin[0] - c[0])
        a1 = math.atan2(vout[1] - c[1], vout[0] - c[0])
        span = (a1 - a0) % TWO_PI
        pieces.append(Arc(tuple(c), float(radii[k]), a0, a0 + span))
    return Body2D(pieces)


def k0_samples(s: Scenario, count: int) -> np.ndarray:
    """``count`` points along the boundary of K0, by arc length, vertices included."""
    k0 = hull_K0(s)
    arc, chord = k0.pieces
    n_arc = max(2, int(round(count * arc.length / k0.perimeter)))
    n_chord = max(2, count - n_arc)
    pts = np.vstack([arc.point(np.linspace(0.0, 1.0, n_arc)), chord.point(np.linspace(0.0, 1.0, n_chord)[1:-1])])
    return pts


def perron_directions(m: int) -> np.ndarray:
    theta = np.arange(m) * (TWO_PI / m)
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


def perron_centers(s: Scenario, m: int = 720) -> np.ndarray:
    """Centers of the extremal radius-1/t disks containing K0, one per direction."""
    if s.dim != 2:
        raise InvalidArgument("perron_solve2d needs a planar scenario")
    if m < 16:
        raise InvalidArgument(f"direction count must be >= 16, got {m}")
    return core_support_points(k0_samples(s, 4 * m), 1.0 / s.t, perron_directions(m))


def perron_solve2d(s: Scenario, m: int = 720) -> Body2D:
    """Intersection of ``m`` sampled members of the radius-1/t disk family containing K0."""
    centers = perron_centers(s, m)
    samples = k0_samples(s, 64)
    inside = samples.mean(axis=0)
    body = intersect_disks(centers, 1.0 / s.t, inside)
    return body.simplified()


def resolution(s: Scenario, m: int) -> float:
    """Boundary sampling scale ``h`` tied to the direction count."""
    return TWO_PI * s.R / m


def contact_angles(body: Body2D, s: Scenario, tol: float, samples: int = 8192) -> np.ndarray:
    """Polar angles in [-pi, pi) of boundary samples lying within ``tol`` of the ball boundary."""
    pts = body.sample_boundary(samples).points
    r = np.hypot(pts[:, 0], pts[:, 1])
    near = np.abs(r - s.R) <= tol
    return np.arctan2(pts[near, 1], pts[near, 0])
