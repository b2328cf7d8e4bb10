"""Convex bodies bounded by circular arcs and segments, scenarios, graph patches.

Planar bodies are exact chains of pieces (counterclockwise), so curvature is
piecewise constant and exact.  Three-dimensional bodies are never represented
globally: the solver works on a :class:`GraphPatch` over the rim disk.
"""
from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateIntersection, InvalidArgument, NotSmooth, OutOfRange
from .symcone import SymMat, det_cone

TWO_PI = 2.0 * math.pi
TURN_TOL = 1e-9


def _unit(angle):
    return np.array([math.cos(angle), math.sin(angle)])


@dataclass(frozen=True)
class Arc:
    """Counterclockwise arc of the circle ``center, radius`` from angle a0 to a1 > a0."""

    center: tuple
    radius: float
    a0: float
    a1: float

    def __post_init__(self):
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if not self.radius > 0:
            raise InvalidArgument(f"arc radius must be positive, got {self.radius}")
        if not self.a1 > self.a0 or self.a1 - self.a0 > TWO_PI + 1e-12:
            raise InvalidArgument(f"arc span must lie in (0, 2pi], got [{self.a0}, {self.a1}]")

    @property
    def span(self) -> float:
        return self.a1 - self.a0

    @property
    def length(self) -> float:
        return self.radius * self.span

    @property
    def curvature(self) -> float:
        return 1.0 / self.radius

    def point(self, s):
        """Point at fraction ``s`` in [0, 1] of the arc (vectorized)."""
        ang = self.a0 + np.asarray(s, dtype=float) * self.span
        c = np.asarray(self.center)
        return c + self.radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    def normal(self, s):
        ang = self.a0 + np.asarray(s, dtype=float) * self.span
        return np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    @cached_property
    def start(self):
        return self.point(0.0)

    @cached_property
    def end(self):
        return self.point(1.0)

    @cached_property
    def _end_normals(self):
        return self.normal(0.0), self.normal(1.0)

    def tangent(self, s):
        n = self.normal(s)
        return np.stack([-n[..., 1], n[..., 0]], axis=-1)

    def nearest(self, pts):
        """Nearest points on the arc, their outward normals, and distances."""
        c = np.asarray(self.center)
        d = pts - c
        rho = np.hypot(d[:, 0], d[:, 1])
        rel = np.mod(np.arctan2(d[:, 1], d[:, 0]) - self.a0, TWO_PI)
        inside = rel <= self.span
        safe = np.where(rho > 0, rho, 1.0)
        radial = np.where((rho > 0)[:, None], d / safe[:, None], np.array([1.0, 0.0]))
        q_in = c + self.radius * radial
        p0, p1 = self.start, self.end
        d0 = np.hypot(*(pts - p0).T)
        d1 = np.hypot(*(pts - p1).T)
        use0 = d0 <= d1
        q_end = np.where(use0[:, None], p0, p1)
        n_end = np.where(use0[:, None], *self._end_normals)
        q = np.where(inside[:, None], q_in, q_end)
        n = np.where(inside[:, None], radial, n_end)
        dist = np.where(inside, np.abs(rho - self.radius), np.minimum(d0, d1))
        return q, n, dist

    def split(self, fractions) -> list["Arc"]:
        cuts = [0.0] + sorted(fractions) + [1.0]
        angs = [self.a0 + f * self.span for f in cuts]
        return [Arc(self.center, self.radius, x, y) for x, y in zip(angs[:-1], angs[1:]) if y > x]

    def to_text(self) -> str:
        cx, cy = self.center
        return f"arc {cx!r} {cy!r} {self.radius!r} {self.a0!r} {self.a1!r}"


@dataclass(frozen=True)
class Segment:
    p0: tuple
    p1: tuple

    def __post_init__(self):
        object.__setattr__(self, "p0", (float(self.p0[0]), float(self.p0[1])))
        object.__setattr__(self, "p1", (float(self.p1[0]), float(self.p1[1])))
        if self.p0 == self.p1:
            raise InvalidArgument("segment endpoints coincide")

    @property
    def length(self) -> float:
        return math.dist(self.p0, self.p1)

    @property
    def span(self) -> float:
        return 0.0

    @property
    def curvature(self) -> float:
        return 0.0

    @property
    def direction(self):
        d = np.subtract(self.p1, self.p0)
        return d / np.hypot(*d)

    @property
    def outward(self):
        d = self.direction
        return np.array([d[1], -d[0]])

    def point(self, s):
        s = np.asarray(s, dtype=float)[..., None]
        return (1.0 - s) * np.asarray(self.p0) + s * np.asarray(self.p1)

    def normal(self, s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(self.outward, s.shape + (2,)).copy()

    def tangent(self, s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(self.direction, s.shape + (2,)).copy()

    @property
    def start(self):
        return np.asarray(self.p0)

    @property
    def end(self):
        return np.asarray(self.p1)

    def nearest(self, pts):
        p0 = np.asarray(self.p0)
        d = np.subtract(self.p1, self.p0)
        s = np.clip(((pts - p0) @ d) / (d @ d), 0.0, 1.0)
        q = p0 + s[:, None] * d
        dist = np.hypot(*(pts - q).T)
        return q, np.broadcast_to(self.outward, pts.shape).copy(), dist

    def split(self, fractions) -> list["Segment"]:
        cuts = [0.0] + sorted(fractions) + [1.0]
        pts = [tuple(self.point(f)) for f in cuts]
        return [Segment(a, b) for a, b in zip(pts[:-1], pts[1:]) if a != b]

    def to_text(self) -> str:
        return f"seg {self.p0[0]!r} {self.p0[1]!r} {self.p1[0]!r} {self.p1[1]!r}"


def _turn(t_in, t_out) -> float:
    cross = t_in[0] * t_out[1] - t_in[1] * t_out[0]
    return math.atan2(cross, t_in[0] * t_out[0] + t_in[1] * t_out[1])


@dataclass(frozen=True)
class Vertex:
    point: np.ndarray = field(compare=False)
    normal_in: np.ndarray = field(compare=False)
    normal_out: np.ndarray = field(compare=False)
    turning: float
    index: int  # joint between piece index-1 and piece index


@dataclass(frozen=True)
class BoundarySample:
    points: np.ndarray
    normals: np.ndarray
    params: np.ndarray  # cumulative arc length from the start of piece 0
    piece: np.ndarray


class Body2D:
    """Convex planar body bounded by a closed counterclockwise chain of pieces."""

    def __init__(self, pieces: Sequence, validate: bool = True):
        self.pieces = tuple(pieces)
        if not self.pieces:
            raise InvalidArgument("a body needs at least one boundary piece")
        if validate:
            self.validate()

    def __repr__(self):
        return f"Body2D({len(self.pieces)} pieces, area={self.area:.6g})"

    @property
    def scale(self) -> float:
        pts = np.array([p.start for p in self.pieces])
        radii = [p.radius for p in self.pieces if isinstance(p, Arc)]
        return max([float(np.ptp(pts, axis=0).max()) if len(pts) > 1 else 0.0] + radii)

    @property
    def perimeter(self) -> float:
        return sum(p.length for p in self.pieces)

    @property
    def area(self) -> float:
        total = 0.0
        for p in self.pieces:
            if isinstance(p, Arc):
                cx, cy = p.center
                r = p.radius
                total += r * cx * (math.sin(p.a1) - math.sin(p.a0))
                total -= r * cy * (math.cos(p.a1) - math.cos(p.a0))
                total += r * r * p.span
            else:
                total += p.p0[0] * p.p1[1] - p.p1[0] * p.p0[1]
        return 0.5 * total

    def vertices(self) -> list[Vertex]:
        out = []
        n = len(self.pieces)
        for i in range(n):
            prev, cur = self.pieces[i - 1], self.pieces[i]
            t_in, t_out = prev.tangent(1.0), cur.tangent(0.0)
            out.append(Vertex(np.asarray(cur.start), prev.normal(1.0), cur.normal(0.0), _turn(t_in, t_out), i))
        return out

    def corners(self, tol: float = TURN_TOL) -> list[Vertex]:
        """Vertices where the tangent direction jumps."""
        return [v for v in self.vertices() if abs(v.turning) > tol]

    def total_turning(self) -> float:
        return sum(p.span for p in self.pieces) + sum(v.turning for v in self.vertices())

    def validate(self):
        scale = self.scale
        n = len(self.pieces)
        for i in range(n):
            gap = float(np.hypot(*(self.pieces[i - 1].end - self.pieces[i].start)))
            if gap > 1e-8 * max(scale, 1e-300):
                raise InvalidArgument(f"boundary chain not closed between pieces {i - 1} and {i} (gap {gap:.3g})")
        for v in self.vertices():
            if v.turning < -TURN_TOL:
                raise InvalidArgument(f"non-convex vertex at piece {v.index} (turning {v.turning:.3g})")
        total = self.total_turning()
        if abs(total - TWO_PI) > 1e-6:
            raise InvalidArgument(f"total turning {total:.9g} differs from 2pi")

    def sample_boundary(self, n: int = 1024) -> BoundarySample:
        """At least ``n`` points spread by arc length; every piece start is included."""
        lengths = np.array([p.length for p in self.pieces])
        total = lengths.sum()
        counts = np.maximum(1, np.ceil(n * lengths / total).astype(int))
        pts, nrm, par, idx = [], [], [], []
        offset = 0.0
        for k, (p, c) in enumerate(zip(self.pieces, counts)):
            s = np.arange(c) / c
            pts.append(p.point(s))
            nrm.append(p.normal(s))
            par.append(offset + s * p.length)
            idx.append(np.full(c, k))
            offset += p.length
        return BoundarySample(np.vstack(pts), np.vstack(nrm), np.concatenate(par), np.concatenate(idx))

    def boundary_distance(self, pts) -> np.ndarray:
        return self._nearest(pts)[0]

    def _nearest(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        dists = np.empty((len(self.pieces), len(pts)))
        dots = np.empty_like(dists)
        for k, p in enumerate(self.pieces):
            q, nrm, d = p.nearest(pts)
            dists[k] = d
            dots[k] = np.einsum("ij,ij->i", pts - q, nrm)
        dmin = dists.min(axis=0)
        tie = dists <= dmin + 1e-12 * max(self.scale, 1.0)
        outside = np.where(tie, dots, -np.inf).max(axis=0) > 0
        return dmin, outside

    def signed_distance(self, pts) -> np.ndarray:
        """Exact signed distance to the boundary, negative inside."""
        dmin, outside = self._nearest(pts)
        return np.where(outside, dmin, -dmin)

    def contains(self, pts, tol: float = 0.0):
        sd = self.signed_distance(pts)
        return sd <= tol

    def support(self, directions) -> np.ndarray:
        """Support function ``max <x, u>`` over the body, for unit directions ``u``."""
        u = np.atleast_2d(np.asarray(directions, dtype=float))
        best = np.full(len(u), -np.inf)
        for p in self.pieces:
            best = np.maximum(best, u @ p.start)
            best = np.maximum(best, u @ p.end)
            if isinstance(p, Arc):
                rel = np.mod(np.arctan2(u[:, 1], u[:, 0]) - p.a0, TWO_PI)
                val = u @ np.asarray(p.center) + p.radius
                best = np.where(rel <= p.span, np.maximum(best, val), best)
        return best

    def to_text(self) -> str:
        return "\n".join(p.to_text() for p in self.pieces) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Body2D":
        pieces = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            try:
                if tok[0] == "arc" and len(tok) == 6:
                    cx, cy, r, a0, a1 = map(float, tok[1:])
                    pieces.append(Arc((cx, cy), r, a0, a1))
                elif tok[0] == "seg" and len(tok) == 5:
                    x0, y0, x1, y1 = map(float, tok[1:])
                    pieces.append(Segment((x0, y0), (x1, y1)))
                else:
                    raise ValueError(tok[0])
            except ValueError as exc:
                raise InvalidArgument(f"line {lineno}: cannot parse piece {raw!r}") from exc
        return cls(pieces)

    def simplified(self) -> "Body2D":
        """Merge consecutive arcs of one circle and consecutive collinear segments."""
        merged = []
        for p in self.pieces:
            if merged and _mergeable(merged[-1], p):
                merged[-1] = _merge(merged[-1], p)
            else:
                merged.append(p)
        while len(merged) > 1 and _mergeable(merged[-1], merged[0]):
            merged[0] = _merge(merged.pop(), merged[0])
        return Body2D(merged)


def _mergeable(a, b, tol=1e-9) -> bool:
    if isinstance(a, Arc) and isinstance(b, Arc):
        same = math.dist(a.center, b.center) <= tol * a.radius and abs(a.radius - b.radius) <= tol * a.radius
        return same and a.span + b.span <= TWO_PI + 1e-9
    if isinstance(a, Segment) and isinstance(b, Segment):
        return abs(_turn(a.direction, b.direction)) <= tol
    return False


def _merge(a, b):
    if isinstance(a, Arc):
        a1 = a.a1 + b.span
        return Arc(a.center, a.radius, a.a0, min(a1, a.a0 + TWO_PI))
    return Segment(a.p0, b.p1)


def disk(center=(0.0, 0.0), radius: float = 1.0) -> Body2D:
    return Body2D([Arc(center, radius, 0.0, TWO_PI)])


def polygon(vertices) -> Body2D:
    v = [tuple(map(float, p)) for p in vertices]
    return Body2D([Segment(v[i], v[(i + 1) % len(v)]) for i in range(len(v))])


def body_contains(body: Body2D, p, tol: float = 0.0):
    """Containment of one point (returns bool) or many (returns an array)."""
    pts = np.asarray(p, dtype=float)
    res = body.contains(pts.reshape(-1, 2), tol)
    return bool(res[0]) if pts.ndim == 1 else res


def hausdorff(a: Body2D, b: Body2D, samples: int = 4096) -> float:
    """Symmetric boundary Hausdorff distance.

    Dense samples of each boundary are measured against the exact boundary of
    the other body, so the only error is what falls between samples.
    """
    da = b.boundary_distance(a.sample_boundary(samples).points).max()
    db = a.boundary_distance(b.sample_boundary(samples).points).max()
    return float(max(da, db))


def shape_operator_at(body: Body2D, p, tol: float | None = None) -> SymMat:
    """1x1 shape operator (outward normal) at a smooth boundary point."""
    p = np.asarray(p, dtype=float)
    tol = 1e-7 * body.scale if tol is None else tol
    for v in body.corners():
        if np.hypot(*(v.point - p)) <= tol:
            raise NotSmooth(f"point {tuple(p)} is a vertex of the body")
    best, best_d = None, np.inf
    for piece in body.pieces:
        d = piece.nearest(p[None, :])[2][0]
        if d < best_d:
            best, best_d = piece, d
    if best_d > tol:
        raise InvalidArgument(f"point {tuple(p)} is not on the boundary (distance {best_d:.3g})")
    return SymMat.diag(best.curvature)


def is_type_F_smooth(body: Body2D, t: float, samples_per_piece: int = 64) -> bool:
    if body.corners():
        raise NotSmooth("body has vertices; use the probe module instead")
    cone = det_cone(t, dim=1)
    for piece in body.pieces:
        for q in piece.point(np.linspace(0.0, 1.0, samples_per_piece, endpoint=False)):
            if not cone.contains(shape_operator_at(body, q)):
                return False
    return True


# ---------------------------------------------------------------- intersection


def _crossings(pa, pb, eps=1e-12):
    """Intersection points of two pieces, as (fraction on pa, fraction on pb)."""
    out = []
    for x in _curve_crossings(pa, pb):
        fa, fb = _fraction(pa, x, eps), _fraction(pb, x, eps)
        if fa is not None and fb is not None:
            out.append((fa, fb))
    return out


def _fraction(piece, x, eps):
    if isinstance(piece, Arc):
        ang = math.atan2(x[1] - piece.center[1], x[0] - piece.center[0])
        rel = (ang - piece.a0) % TWO_PI
        if rel > piece.span + eps:
            if TWO_PI - rel <= eps:
                return 0.0
            return None
        return min(rel / piece.span, 1.0)
    d = np.subtract(piece.p1, piece.p0)
    s = float(np.dot(np.subtract(x, piece.p0), d) / np.dot(d, d))
    if s < -eps or s > 1 + eps:
        return None
    return min(max(s, 0.0), 1.0)


def _curve_crossings(pa, pb):
    if isinstance(pa, Arc) and isinstance(pb, Arc):
        return circle_circle(pa.center, pa.radius, pb.center, pb.radius)
    if isinstance(pa, Arc):
        return _circle_line(pa, pb)
    if isinstance(pb, Arc):
        return _circle_line(pb, pa)
    return _line_line(pa, pb)


def circle_circle(c0, r0, c1, r1):
    c0, c1 = np.asarray(c0, dtype=float), np.asarray(c1, dtype=float)
    d = float(np.hypot(*(c1 - c0)))
    if d == 0.0 or d > r0 + r1 or d < abs(r0 - r1):
        return []
    a = (r0 * r0 - r1 * r1 + d * d) / (2 * d)
    hh = max(r0 * r0 - a * a, 0.0)
    h = math.sqrt(hh)
    e = (c1 - c0) / d
    m = c0 + a * e
    perp = np.array([-e[1], e[0]])
    if h == 0.0:
        return [m]
    return [m + h * perp, m - h * perp]


def _circle_line(arc, seg):
    p0 = np.asarray(seg.p0)
    d = np.subtract(seg.p1, seg.p0)
    f = p0 - np.asarray(arc.center)
    a, b, c = d @ d, 2 * (f @ d), f @ f - arc.radius ** 2
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    return [p0 + s * d for s in {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}]


def _line_line(s0, s1):
    p, r = np.asarray(s0.p0), np.subtract(s0.p1, s0.p0)
    q, s = np.asarray(s1.p0), np.subtract(s1.p1, s1.p0)
    den = r[0] * s[1] - r[1] * s[0]
    if abs(den) < 1e-15 * np.hypot(*r) * np.hypot(*s):
        return []
    u = ((q[0] - p[0]) * s[1] - (q[1] - p[1]) * s[0]) / den
    return [p + u * r]


def _midpoint(piece):
    return piece.point(0.5)


def body_intersect(a: Body2D, b: Body2D) -> Body2D:
    """Intersection of two convex bodies, boundary pieces clipped at crossings."""
    cuts_a = [[] for _ in a.pieces]
    cuts_b = [[] for _ in b.pieces]
    for i, pa in enumerate(a.pieces):
        for j, pb in enumerate(b.pieces):
            for fa, fb in _crossings(pa, pb):
                cuts_a[i].append(fa)
                cuts_b[j].append(fb)
    scale = max(a.scale, b.scale)
    on_tol = 1e-9 * scale

    def pieces_of(body, cuts):
        out = []
        for piece, fr in zip(body.pieces, cuts):
            keep = sorted({f for f in fr if 1e-12 < f < 1 - 1e-12})
            out.extend(piece.split(keep))
        return out

    sub_a, sub_b = pieces_of(a, cuts_a), pieces_of(b, cuts_b)
    kept = []
    if sub_a:
        sd = b.signed_distance(np.array([_midpoint(p) for p in sub_a]))
        kept += [p for p, s in zip(sub_a, sd) if s <= on_tol]
    if sub_b:
        sd = a.signed_distance(np.array([_midpoint(p) for p in sub_b]))
        kept += [p for p, s in zip(sub_b, sd) if s < -on_tol]
    if not kept:
        raise DegenerateIntersection("bodies do not overlap")
    chain = _chain(kept, 1e-7 * scale)
    body = Body2D(chain, validate=False)
    if body.area <= 1e-12 * scale * scale:
        raise DegenerateIntersection(f"intersection has zero area ({body.area:.3g})")
    try:
        body.validate()
    except InvalidArgument as exc:
        raise DegenerateIntersection(f"intersection is degenerate: {exc}") from exc
    return body.simplified()


def _chain(pieces, tol):
    remaining = list(pieces)
    chain = [remaining.pop(0)]
    while remaining:
        end = chain[-1].end
        gaps = [float(np.hypot(*(p.start - end))) for p in remaining]
        k = int(np.argmin(gaps))
        if gaps[k] > tol:
            break
        chain.append(remaining.pop(k))
    if remaining:
        raise DegenerateIntersection("intersection boundary does not form one closed chain")
    return chain


# ---------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class Scenario:
    """Ball ``K_hat`` of radius R, polar cap ``Omega``, curvature target t.

    ``opening`` is the half-angle alpha of Omega in two dimensions and the cap
    height z0 (Omega = {z > z0}) in three.
    """

    dim: int
    R: float
    opening: float
    t: float

    @property
    def n(self) -> int:
        return self.dim - 1

    @property
    def k(self) -> float:
        return self.R ** (-self.n)

    @property
    def alpha(self) -> float:
        if self.dim != 2:
            raise InvalidArgument("alpha is only defined for planar scenarios")
        return self.opening

    @property
    def z0(self) -> float:
        if self.dim != 3:
            raise InvalidArgument("z0 is only defined for three-dimensional scenarios")
        return self.opening

    @property
    def rim_radius(self) -> float:
        if self.dim == 2:
            return self.R * math.sin(self.opening)
        return math.sqrt(self.R ** 2 - self.opening ** 2)


def make_scenario(R: float, opening: float, t: float, dim: int) -> Scenario:
    if dim not in (2, 3):
        raise InvalidArgument(f"ambient dimension must be 2 or 3, got {dim}")
    if not R > 0:
        raise InvalidArgument(f"ball radius must be positive, got {R}")
    if dim == 2:
        margin = 1e-6
        if not margin < opening < math.pi - margin:
            raise InvalidArgument(f"cap half-angle alpha must lie strictly inside (0, pi), got {opening}")
    else:
        margin = 1e-6 * R
        if not -R + margin < opening < R - margin:
            raise InvalidArgument(f"cap height z0 must lie strictly inside (-R, R), got {opening}")
    k = R ** (-(dim - 1))
    if not 0 < t <= k * (1 + 1e-12):
        raise OutOfRange(
            f"curvature target t={t:g} outside ]0, k] where k = R^-{dim - 1} = {k:g} "
            "is the Gaussian curvature of the ball boundary"
        )
    return Scenario(dim, float(R), float(opening), float(t))


@dataclass(frozen=True)
class CapLid:
    """Hull of the spherical cap {z <= z0}: its flat lid is the disk of radius rim_radius at z0."""

    rim_radius: float
    lid_height: float


def hull_K0(s: Scenario):
    """Convex hull of the complement of the cap."""
    if s.dim == 2:
        a, R = s.alpha, s.R
        p_plus = (R * math.cos(a), R * math.sin(a))
        p_minus = (R * math.cos(a), -R * math.sin(a))
        return Body2D([Arc((0.0, 0.0), R, a, TWO_PI - a), Segment(p_minus, p_plus)])
    return CapLid(s.rim_radius, s.z0)


def ball(s: Scenario) -> Body2D:
    if s.dim != 2:
        raise InvalidArgument("only planar balls are represented as bodies")
    return disk((0.0, 0.0), s.R)


def graph_gauss_curvature(grad, hess) -> float:
    """Gauss curvature of the graph of a function from its gradient and Hessian."""
    h = hess if isinstance(hess, SymMat) else SymMat.from_array(hess)
    g = np.atleast_1d(np.asarray(grad, dtype=float))
    n = h.dim
    if n not in (1, 2) or g.shape != (n,):
        raise InvalidArgument("graph curvature needs n in {1, 2} and a matching gradient")
    return float(np.linalg.det(h.to_array()) / (1.0 + g @ g) ** ((n + 2) / 2))


# ---------------------------------------------------------------- graph patch


@dataclass
class GraphPatch:
    """Grid function over the disk of radius ``rho``.

    ``v`` is stored on the full square grid; nodes outside the open disk hold
    the boundary data ``g`` evaluated at their polar angle.  ``obstacle`` is a
    lower bound for ``v`` (or None).
    """

    h: float
    rho: float
    x: np.ndarray
    inside: np.ndarray
    v: np.ndarray
    g: Callable = field(repr=False)
    obstacle: np.ndarray | None = None

    @property
    def shape(self):
        return self.v.shape

    @property
    def grid(self):
        return np.meshgrid(self.x, self.x, indexing="ij")

    @property
    def boundary(self) -> np.ndarray:
        """Exterior nodes with an interior neighbour (8-connectivity)."""
        ins = self.inside
        near = np.zeros_like(ins)
        padded = np.pad(ins, 1)
        n0, n1 = ins.shape
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                near |= padded[1 + di:1 + di + n0, 1 + dj:1 + dj + n1]
        return near & ~ins

    def copy(self) -> "GraphPatch":
        return GraphPatch(self.h, self.rho, self.x.copy(), self.inside.copy(), self.v.copy(), self.g,
                          None if self.obstacle is None else self.obstacle.copy())

    def height(self) -> np.ndarray:
        """Surface height u = -v."""
        return -self.v
