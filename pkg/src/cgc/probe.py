"""Touching-paraboloid verifier for the type F_t and dual type F_t' conditions.

A quadratic test function

    f(x) = <a, x - p> + 1/2 <Q (x - p), x - p>

touches the set X at a boundary point p.  Its zero set has a shape operator
(``reduced_shape``) that is compared with the cone F_t.  A type-F violation is
a probe whose sublevel set fits strictly inside X near p while its shape is
ε-below the threshold; a dual violation is a probe whose sublevel set locally
swallows X while its shape is ε-above it.

The search is sampled, so an empty report means "no witness found", and the
counters record how much was searched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import TWO_PI, Body2D, GraphPatch
from .errors import InvalidArgument
from .symcone import SymMat, eigh_sym

INSIDE_MARGIN = 1e-9


@dataclass(frozen=True)
class Probe:
    point: tuple
    gradient: tuple
    Q: SymMat
    r_test: float

    def __post_init__(self):
        a = np.asarray(self.gradient, dtype=float)
        if not np.linalg.norm(a) > 0:
            raise InvalidArgument("probe gradient must be nonzero")
        if not self.r_test > 0:
            raise InvalidArgument("probe test radius must be positive")
        if self.Q.dim != len(a) or len(self.point) != len(a):
            raise InvalidArgument("probe point, gradient and Q must share a dimension")

    def value(self, x) -> np.ndarray:
        d = np.atleast_2d(np.asarray(x, dtype=float)) - np.asarray(self.point, dtype=float)
        q = self.Q.to_array()
        return d @ np.asarray(self.gradient, dtype=float) + 0.5 * np.einsum("ij,jk,ik->i", d, q, d)


def _complement_basis(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the hyperplane orthogonal to ``a``."""
    u = a / np.linalg.norm(a)
    basis = []
    for e in np.eye(len(a))[np.argsort(np.abs(u))]:
        w = e - (e @ u) * u
        for b in basis:
            w = w - (w @ b) * b
        nrm = np.linalg.norm(w)
        if nrm > 1e-8:
            basis.append(w / nrm)
        if len(basis) == len(a) - 1:
            break
    return np.array(basis).T


def reduced_shape(probe: Probe) -> SymMat:
    """Shape operator of the probe's zero set at p, for the normal along the gradient."""
    a = np.asarray(probe.gradient, dtype=float)
    norm = np.linalg.norm(a)
    if not norm > 0:
        raise InvalidArgument("zero gradient has no level-set shape")
    b = _complement_basis(a)
    return SymMat.from_array(b.T @ probe.Q.to_array() @ b / norm)


@dataclass(frozen=True)
class ProbeViolation:
    point: tuple
    probe: Probe
    margin: float
    param: float  # boundary parameter (arc length) or node radius for patches

    @property
    def curvature(self) -> float:
        s = reduced_shape(self.probe)
        return float(np.prod(eigh_sym(s)[0]))


@dataclass
class ProbeReport:
    violations: list = field(default_factory=list)
    points_tested: int = 0
    probes_tried: int = 0

    @property
    def empty(self) -> bool:
        return not self.violations

    def __len__(self):
        return len(self.violations)

    def rows(self):
        """(point coordinates..., probe curvature, margin) per violation."""
        return [(*v.point, v.curvature, v.margin) for v in self.violations]


@dataclass(frozen=True)
class ProbeGrid:
    """How densely the probe search samples boundary points and probe shapes."""

    points: int = 256
    curvatures: int = 12
    normals_per_vertex: int = 5
    sheet: int = 128
    arc: int = 128
    angles: int = 8
    node_stride: int = 1
    rim_margin: float = 0.15  # fraction of the rim radius left unprobed on patches


def probe_curvatures(t: float, eps: float, count: int = 12) -> np.ndarray:
    """Geometric curvature ladder on [eps/4, 4/eps] plus 0 and t -/+ eps."""
    ladder = np.geomspace(eps / 4.0, 4.0 / eps, count)
    return np.unique(np.concatenate([[0.0, t - eps, t + eps], ladder]))


def _default_eps(t, eps):
    eps = 0.05 * t if eps is None else float(eps)
    if not eps > 0:
        raise InvalidArgument("probe margin eps must be positive")
    return eps


def check_type_F(X, t: float, eps: float | None = None, grid: ProbeGrid | None = None, *,
                 interior_of: Body2D | None = None, length_scale: float | None = None) -> ProbeReport:
    """Search for interior-touching probes with shape ε-inside the complement of F_t."""
    return _check(X, t, eps, grid, interior_of, length_scale, dual=False)


def check_type_F_dual(X, t: float, eps: float | None = None, grid: ProbeGrid | None = None, *,
                      interior_of: Body2D | None = None, length_scale: float | None = None) -> ProbeReport:
    """Search for probes that locally enclose X with shape ε-inside F_t."""
    return _check(X, t, eps, grid, interior_of, length_scale, dual=True)


def _check(X, t, eps, grid, interior_of, length_scale, dual):
    if not t > 0:
        raise InvalidArgument("curvature threshold must be positive")
    eps = _default_eps(t, eps)
    grid = grid or ProbeGrid()
    if isinstance(X, Body2D):
        return _check_body(X, t, eps, grid, interior_of, length_scale, dual)
    if isinstance(X, GraphPatch):
        return _check_patch(X, t, eps, grid, length_scale, dual)
    raise InvalidArgument(f"cannot probe objects of type {type(X).__name__}")


# ---------------------------------------------------------------- planar bodies


def _sheet_extent(kappa, r):
    """Largest |tau| with the parabola point still inside B(p, r) (vectorized over kappa)."""
    kappa = np.asarray(kappa, dtype=float)
    safe = np.where(kappa > 0, kappa, 1.0)
    w = 2.0 * (np.sqrt(1.0 + safe * safe * r * r) - 1.0) / (safe * safe)
    return np.where(kappa > 0, np.sqrt(w), r)


def _probe_samples(p, nus, kappas, radii, grid, region_sign):
    """Sample points of every probe (normal x curvature) at p, as one block per probe.

    Each block holds the parabola sheet inside B(p, r) followed by the ring
    |x - p| = r; ``mask`` marks the ring points outside the probe region
    {s*f <= 0}, s = region_sign, which play no part in the test.
    """
    nus = np.asarray(nus, dtype=float)
    tang = np.stack([-nus[:, 1], nus[:, 0]], axis=1)
    half = grid.sheet // 2
    unit = np.arange(1, half + 1) / half
    unit = np.concatenate([-unit[::-1], unit])
    phi = np.linspace(0.0, TWO_PI, 2 * grid.arc, endpoint=False)
    cphi, sphi = np.cos(phi), np.sin(phi)
    k = np.asarray(kappas, dtype=float)[None, :, None]
    r = np.asarray(radii, dtype=float)[None, :, None]
    tau = _sheet_extent(kappas, np.asarray(radii))[None, :, None] * unit
    T, N = tang[:, None, None, :], nus[:, None, None, :]
    sheet = p + tau[..., None] * T - (0.5 * k * tau * tau)[..., None] * N
    ring = p + r[..., None] * (cphi[:, None] * T + sphi[:, None] * N)
    # f(x) = <x - p, nu> + kappa/2 <x - p, tang>^2 on the ring
    f = r * sphi + 0.5 * k * (r * cphi) ** 2
    mask = np.concatenate([np.zeros(sheet.shape[:3], dtype=bool),
                           np.broadcast_to(region_sign * f > 0, ring.shape[:3])], axis=2)
    pts = np.concatenate([sheet, np.broadcast_to(ring, ring.shape)], axis=2)
    return pts.reshape(-1, pts.shape[2], 2), mask.reshape(-1, mask.shape[2])


def _local_sd(body: Body2D, p, reach):
    """Signed distance restricted to pieces that can be nearest for points within ``reach`` of p."""
    if len(body.pieces) <= 8:
        return body.signed_distance
    keep = [q for q in body.pieces if q.nearest(np.atleast_2d(p))[2][0] <= 2.0 * reach]
    if len(keep) == len(body.pieces):
        return body.signed_distance
    return Body2D(keep, validate=False).signed_distance


def _sample_normals(body: Body2D, sample, grid):
    """Per boundary sample, the candidate outward normals (several across the normal cone at corners)."""
    corners = {v.index: v for v in body.corners()}
    starts = np.r_[True, sample.piece[1:] != sample.piece[:-1]]
    out = []
    for i, (nu, k) in enumerate(zip(sample.normals, sample.piece)):
        v = corners.get(int(k)) if starts[i] else None
        if v is None:
            out.append([nu])
            continue
        a0 = math.atan2(v.normal_in[1], v.normal_in[0])
        turn = v.turning
        out.append([np.array([math.cos(a0 + s * turn), math.sin(a0 + s * turn)])
                    for s in np.linspace(0.0, 1.0, grid.normals_per_vertex)])
    return out


def _fits(sd, pts, mask, dual, stride: int = 8):
    """Which probe blocks lie strictly on the tested side of the boundary.

    A strided subset screens the candidates first; only survivors are
    evaluated in full, so the answer is the same as a full evaluation.
    """

    def ok(block, skip):
        d = np.asarray(sd(block[~skip])).ravel()
        good = (d > INSIDE_MARGIN) if dual else (d < -INSIDE_MARGIN)
        out = np.ones(skip.shape, dtype=bool)
        out[~skip] = good
        return out.all(axis=1)

    alive = ok(pts[:, ::stride], mask[:, ::stride])
    if alive.any():
        alive[alive] = ok(pts[alive], mask[alive])
    return alive


def _check_body(X: Body2D, t, eps, grid, interior_of, length_scale, dual):
    L = float(length_scale or X.scale)
    kappas = probe_curvatures(t, eps, grid.curvatures)
    kappas = kappas[kappas >= t + eps] if dual else kappas[(kappas <= t - eps) & (kappas >= 0)]
    sample = X.sample_boundary(grid.points)
    keep = np.ones(len(sample.points), dtype=bool)
    if interior_of is not None:
        delta = 1e-7 * interior_of.scale
        keep = interior_of.signed_distance(sample.points) < -delta
    normals = _sample_normals(X, sample, grid)
    report = ProbeReport()
    for i in np.flatnonzero(keep):
        p = sample.points[i]
        report.points_tested += 1
        if len(kappas) == 0:
            continue
        radii = [min(0.2 * L, 0.5 / k) if k > 0 else 0.2 * L for k in kappas]
        sd = _local_sd(X, p, max(radii))
        # all probes at p share one distance evaluation
        pts, mask = _probe_samples(p, normals[i], kappas, radii, grid, -1.0 if dual else 1.0)
        report.probes_tried += len(pts)
        fits = _fits(sd, pts, mask, dual).reshape(len(normals[i]), len(kappas))
        margins = (kappas - t) if dual else (t - kappas)
        best = None
        for a, b in zip(*np.nonzero(fits)):
            if best is None or margins[b] > best[0]:
                nu, kappa = normals[i][a], kappas[b]
                tang = np.array([-nu[1], nu[0]])
                q = SymMat.from_array(kappa * np.outer(tang, tang))
                best = (float(margins[b]), Probe(tuple(p), tuple(nu), q, radii[b]))
        if best is not None:
            report.violations.append(ProbeViolation(tuple(map(float, p)), best[1], float(best[0]),
                                                    float(sample.params[i])))
    report.violations.sort(key=lambda v: v.param)
    return report


# ---------------------------------------------------------------- graph patches


# lattice directions through the probe base node: a probe's principal axes
# must pass through grid nodes, or a thin probe can slip between them
_LATTICE = {4: ((1, 0), (1, 1), (0, 1), (-1, 1)),
            8: ((1, 0), (2, 1), (1, 1), (1, 2), (0, 1), (-1, 2), (-1, 1), (-2, 1))}


def _rotations(count):
    if count not in _LATTICE:
        raise InvalidArgument(f"patch probes use 4 or 8 lattice directions, got {count}")
    v = np.array(_LATTICE[count], dtype=float)
    c, s = (v / np.hypot(v[:, 0], v[:, 1])[:, None]).T
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def patch_probe_shapes(level, grid):
    """Graph-coordinate probe Hessians R diag(a, b) R^T with a*b = level.

    Anisotropy ratios a/b span [1, 4096] geometrically; the axes R are
    lattice directions.  Scaling by (1 + |g|^2) at a node turns these into
    probes whose Gauss curvature is exactly ``level``.
    """
    ratio = np.geomspace(1.0, 64.0, grid.curvatures)
    root = math.sqrt(max(level, 0.0))
    a, b = root * ratio, root / ratio
    if level < 0:
        # indefinite frontier: det = level < 0
        a, b = ratio * math.sqrt(-level), -math.sqrt(-level) / ratio
    diag = np.zeros((len(a), 2, 2))
    diag[:, 0, 0], diag[:, 1, 1] = a, b
    rot = _rotations(grid.angles)
    shapes = np.einsum("rij,pjk,rlk->rpil", rot, diag, rot).reshape(-1, 2, 2)
    _, idx = np.unique(np.round(shapes.reshape(len(shapes), -1), 12), axis=0, return_index=True)
    return shapes[np.sort(idx)]


def _patch_levels(t, eps, dual):
    """Gauss-curvature levels of the probe families; the first is the frontier t -/+ eps."""
    if dual:
        return [(t + eps) * 2.0 ** k for k in range(6)]
    return [(t - eps) * 2.0 ** -k for k in range(6)] + [0.0]


def _check_patch(P: GraphPatch, t, eps, grid, length_scale, dual):
    """Probe the hypograph {z <= u(x)} of the patch at interior nodes.

    Fitting is monotone in the probe Hessian, so a node can only fail if a
    probe on the frontier level t -/+ eps fits; deeper levels are scanned
    only to report the largest margin.  Containment is checked against the
    grid nodes within the probe radius, which is exact for lattice-aligned
    probes up to the grid resolution.
    """
    u = P.height()
    h = P.h
    X, Y = P.grid
    rad = np.hypot(X, Y)
    L = float(length_scale or P.rho)
    levels = _patch_levels(t, eps, dual)
    families = [patch_probe_shapes(lv, grid) for lv in levels]
    rmax = max(0.2 * L, 2.5 * h)
    reach = int(math.ceil(rmax / h))
    off = np.arange(-reach, reach + 1)
    di, dj = np.meshgrid(off, off, indexing="ij")
    di, dj = di.ravel(), dj.ravel()
    dist = h * np.hypot(di, dj)
    nz = (dist > 0) & (dist <= rmax)
    di, dj, dist = di[nz], dj[nz], dist[nz]
    d = np.stack([di, dj], axis=1) * h
    ok = P.inside & (rad <= (1.0 - grid.rim_margin) * P.rho)
    nodes = np.argwhere(ok)[:: grid.node_stride]
    # pad so every probe neighbourhood indexes inside the arrays
    up = np.pad(u, reach)
    valid_node = np.pad(P.inside | P.boundary, reach)
    report = ProbeReport()

    def fitting(i, j, g, shapes):
        H = (1.0 + g @ g) * shapes
        kmax = np.linalg.eigvalsh(H)[:, -1]
        radii = np.maximum(np.where(kmax > 0, np.minimum(0.2 * L, 0.5 / np.maximum(kmax, 1e-300)), 0.2 * L),
                           2.5 * h)
        ii, jj = i + reach + di, j + reach + dj
        valid = valid_node[ii, jj]
        probe_z = u[i, j] + d @ g - 0.5 * np.einsum("ni,pij,nj->pn", d, H, d)
        gap = up[ii, jj][None, :] - probe_z  # > 0: surface above the probe
        within = (dist[None, :] <= radii[:, None])
        if dual:
            good = gap < -INSIDE_MARGIN
        else:
            good = gap > INSIDE_MARGIN
        fits = np.all(np.where(within, good & valid[None, :], True), axis=1)
        fits &= (within & valid[None, :]).sum(axis=1) >= 8
        return fits, H, radii

    for i, j in nodes:
        report.points_tested += 1
        g = np.array([(u[i + 1, j] - u[i - 1, j]) / (2 * h), (u[i, j + 1] - u[i, j - 1]) / (2 * h)])
        report.probes_tried += len(families[0])
        fits, H, radii = fitting(i, j, g, families[0])
        if not fits.any():
            continue
        best = (levels[0], H[np.argmax(fits)], radii[np.argmax(fits)])
        for lv, shapes in zip(levels[1:], families[1:]):
            report.probes_tried += len(shapes)
            f2, H2, r2 = fitting(i, j, g, shapes)
            if not f2.any():
                break
            best = (lv, H2[np.argmax(f2)], r2[np.argmax(f2)])
        level, Hk, rk = best
        q = np.zeros((3, 3))
        q[:2, :2] = Hk
        point = (float(X[i, j]), float(Y[i, j]), float(u[i, j]))
        normal = (-g[0], -g[1], 1.0) if not dual else (g[0], g[1], -1.0)
        probe = Probe(point, normal, SymMat.from_array(q if not dual else -q), float(rk))
        margin = level - t if dual else t - level
        report.violations.append(ProbeViolation(point, probe, float(margin), float(rad[i, j])))
    report.violations.sort(key=lambda v: v.param)
    return report
