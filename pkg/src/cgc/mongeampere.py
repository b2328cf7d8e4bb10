"""Wide-stencil Monge-Ampere solver for the constant Gauss curvature dome.

The dome over the rim disk is the graph of u; the solver works with the
convex function v = -u and the equation

    det D^2 v = t (1 + |grad v|^2)^2

discretized monotonically: for each orthogonal pair of grid directions the
product of the two directional second differences, minimized over pairs.
Nonlinear Gauss-Seidel solves the per-node scalar problem exactly (the smaller
root of a quadratic), then projects onto the ball obstacle v >= -sqrt(R^2 - |x|^2).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .bodies import GraphPatch, Scenario
from .errors import InvalidArgument, NonConvergence

DELTA0 = 1e-12


@dataclass(frozen=True)
class StencilSet:
    """Orthogonal pairs of integer grid offsets."""

    pairs: tuple

    def __post_init__(self):
        if len(self.pairs) < 2:
            raise InvalidArgument("a stencil needs at least two direction pairs")
        for e1, e2 in self.pairs:
            if e1[0] * e2[0] + e1[1] * e2[1] != 0:
                raise InvalidArgument(f"stencil pair {e1}, {e2} is not orthogonal")
            for e in (e1, e2):
                if math.gcd(abs(e[0]), abs(e[1])) != 1:
                    raise InvalidArgument(f"stencil offset {e} is not primitive")

    @property
    def width(self) -> int:
        return max(max(abs(c) for c in e) for pair in self.pairs for e in pair)

    def directions(self) -> np.ndarray:
        """Signed offsets, laid out as (pair, member, +/-) -> index 4*pair + 2*member + side."""
        out = []
        for pair in self.pairs:
            for e in pair:
                out.append(e)
                out.append((-e[0], -e[1]))
        return np.array(out, dtype=np.int64)


def stencil(width: int = 2) -> StencilSet:
    """Axes and diagonals (width 1), plus the two knight-move pairs (width 2)."""
    pairs = [((1, 0), (0, 1)), ((1, 1), (1, -1))]
    if width >= 2:
        pairs += [((2, 1), (-1, 2)), ((1, 2), (-2, 1))]
    if width not in (1, 2):
        raise InvalidArgument(f"stencil width must be 1 or 2, got {width}")
    return StencilSet(tuple(pairs))


def cap_height(s: Scenario, x, y, t: float | None = None) -> np.ndarray:
    """Spherical cap of curvature t (radius t^-1/2) spanning the rim at height z0."""
    r = (s.t if t is None else t) ** -0.5
    rho = s.rim_radius
    return s.z0 - math.sqrt(r * r - rho * rho) + np.sqrt(np.maximum(r * r - x * x - y * y, 0.0))


def build_patch(s: Scenario, h: float, g=None, *, apex_drop: float | None = None) -> GraphPatch:
    """Grid over the rim disk, boundary data, obstacle and a cone as the first iterate.

    ``g`` maps polar angle to the boundary value of v; the default is the flat
    rim, g = -z0.
    """
    if s.dim != 3:
        raise InvalidArgument("the graph solver needs a three-dimensional scenario")
    rho = s.rim_radius
    if not 0 < h <= rho / 8 * (1 + 1e-12):
        raise InvalidArgument(f"grid spacing {h:g} too coarse; need h <= rho/8 = {rho / 8:g}")
    if g is None:
        z0 = s.z0

        def g(theta):
            return np.full(np.shape(theta), -z0)

    m = int(math.ceil(rho / h - 1e-9))
    x = h * np.arange(-m, m + 1)
    X, Y = np.meshgrid(x, x, indexing="ij")
    r = np.hypot(X, Y)
    # nodes within a sliver of the rim are treated as boundary nodes
    inside = r < rho - 1e-3 * h
    theta = np.arctan2(Y, X)
    gv = np.asarray(g(theta), dtype=float)
    obstacle = -np.sqrt(np.maximum(s.R ** 2 - r * r, 0.0))
    drop = 1e-3 * rho if apex_drop is None else apex_drop
    v = np.where(inside, gv - drop * (1.0 - r / rho), gv)
    v = np.where(inside, np.maximum(v, obstacle), v)
    return GraphPatch(h, rho, x, inside, v, g, obstacle)


# ---------------------------------------------------------------- stencil tables


@dataclass
class _Tables:
    nodes: np.ndarray  # (n, 2) grid indices of interior nodes
    nbr: np.ndarray  # (n, D) flat interior index of the neighbour, -1 at the rim
    step: np.ndarray  # (n, D) step length along the direction
    bval: np.ndarray  # (n, D) boundary value where nbr == -1
    weight: np.ndarray  # (n, D) second-difference weight of each neighbour
    gweight: np.ndarray  # (n, 4) gradient weights for the +x, -x, +y, -y neighbours
    obstacle: np.ndarray
    colors: np.ndarray  # (n,) colour class for the parallel sweep


def _coloring(dirs):
    """A linear colouring i*a + j*b mod p under which no stencil offset joins equal colours."""
    for p in range(2, 64):
        for a in range(1, p):
            for b in range(p):
                if all((a * di + b * dj) % p for di, dj in dirs):
                    return a, b, p
    raise InvalidArgument("no colouring found for the stencil")


def _tables(patch: GraphPatch, st: StencilSet, trim_wide: bool = True) -> _Tables:
    dirs = st.directions()
    ins = patch.inside
    n0, n1 = ins.shape
    nodes = np.argwhere(ins)
    index = -np.ones(ins.shape, dtype=np.int64)
    index[ins] = np.arange(len(nodes))
    h, rho = patch.h, patch.rho
    xi, xj = patch.x[nodes[:, 0]], patch.x[nodes[:, 1]]
    D = len(dirs)
    nbr = np.empty((len(nodes), D), dtype=np.int64)
    step = np.empty((len(nodes), D))
    bval = np.zeros((len(nodes), D))
    for q, (di, dj) in enumerate(dirs):
        ii, jj = nodes[:, 0] + di, nodes[:, 1] + dj
        inb = (ii >= 0) & (ii < n0) & (jj >= 0) & (jj < n1)
        k = np.where(inb, index[np.clip(ii, 0, n0 - 1), np.clip(jj, 0, n1 - 1)], -1)
        length = h * math.hypot(di, dj)
        # exact distance to the rim along the direction
        ex, ey = di * h, dj * h
        b = xi * ex + xj * ey
        c = xi * xi + xj * xj - rho * rho
        lam = (-b + np.sqrt(b * b - (ex * ex + ey * ey) * c)) / (ex * ex + ey * ey)
        lam = np.minimum(lam, 1.0)
        rim = k < 0
        nbr[:, q] = k
        step[:, q] = np.where(rim, lam * length, length)
        px, py = xi + lam * ex, xj + lam * ey
        bval[:, q] = np.where(rim, np.asarray(patch.g(np.arctan2(py, px)), dtype=float), 0.0)
    if trim_wide:
        # wide pairs that would reach past the rim are dropped at that node;
        # axes and diagonals always remain
        for p in range(2, D // 4):
            cut = (nbr[:, 4 * p:4 * p + 4] < 0).any(axis=1)
            nbr[cut, 4 * p:4 * p + 4] = -2
    a, b = step[:, 0::2], step[:, 1::2]
    weight = np.empty_like(step)
    weight[:, 0::2] = 2.0 / ((a + b) * a)
    weight[:, 1::2] = 2.0 / ((a + b) * b)
    weight[nbr == -2] = 0.0
    a, b = step[:, [0, 2]], step[:, [1, 3]]  # the axis pair leads every stencil
    gweight = np.empty((len(nodes), 4))
    gweight[:, 0::2] = b / (a * (a + b))
    gweight[:, 1::2] = -a / (b * (a + b))
    obstacle = patch.obstacle[ins] if patch.obstacle is not None else np.full(len(nodes), -np.inf)
    ca, cb, p = _coloring(dirs)
    colors = (ca * nodes[:, 0] + cb * nodes[:, 1]) % p
    return _Tables(nodes, nbr, step, bval, weight, gweight, obstacle.astype(float), colors.astype(np.int64))


def _kernel_args(tables):
    return tables.nbr, tables.bval, tables.weight, tables.gweight, tables.obstacle


# ---------------------------------------------------------------- kernels
# Neighbour lookups are written out inline: helper calls taking arrays cost
# reference-count traffic on every call and dominate the sweep otherwise.


@njit(cache=True)
def _gradient(v, nbr, bval, gweight, gx, gy):
    for k in range(v.shape[0]):
        vk = v[k]
        sx = 0.0
        sy = 0.0
        for q in range(4):
            j = nbr[k, q]
            d = (v[j] if j >= 0 else bval[k, q]) - vk
            if q < 2:
                sx += gweight[k, q] * d
            else:
                sy += gweight[k, q] * d
        gx[k] = sx
        gy[k] = sy


@njit(cache=True)
def _update_range(v, nbr, bval, weight, obstacle, t, gx, gy, order, lo, hi, omega):
    """Gauss-Seidel updates of nodes order[lo:hi].

    Per pair, the smallest root of (A0 - C0 v)(A1 - C1 v) = rhs keeps both
    factors nonnegative; the node takes the minimum over pairs (relaxed by
    omega), then the obstacle.
    """
    for i in range(lo, hi):
        k = order[i]
        g2 = gx[k] * gx[k] + gy[k] * gy[k]
        rhs = t * (1.0 + g2) * (1.0 + g2)
        best = np.inf
        for p in range(nbr.shape[1] // 4):
            q = 4 * p
            if nbr[k, q] == -2:
                continue
            A0 = 0.0
            A1 = 0.0
            for m in range(2):
                j = nbr[k, q + m]
                A0 += weight[k, q + m] * (v[j] if j >= 0 else bval[k, q + m])
                j = nbr[k, q + 2 + m]
                A1 += weight[k, q + 2 + m] * (v[j] if j >= 0 else bval[k, q + 2 + m])
            C0 = weight[k, q] + weight[k, q + 1]
            C1 = weight[k, q + 2] + weight[k, q + 3]
            s = A0 * C1 + A1 * C0
            disc = (A0 * C1 - A1 * C0) ** 2 + 4.0 * C0 * C1 * rhs
            # smaller root, written without cancellation
            root = 2.0 * (A0 * A1 - rhs) / (s + math.sqrt(disc))
            if root < best:
                best = root
        if omega != 1.0:
            best = v[k] + omega * (best - v[k])
        if best < obstacle[k]:
            best = obstacle[k]
        v[k] = best


@njit(cache=True)
def _ma_values(v, nbr, bval, weight, out):
    """min over pairs of the clamped product of directional second differences."""
    npair = nbr.shape[1] // 4
    for k in range(v.shape[0]):
        vk = v[k]
        best = np.inf
        for p in range(npair):
            if nbr[k, 4 * p] == -2:
                continue
            prod = 1.0
            for m in range(2):
                q = 4 * p + 2 * m
                j = nbr[k, q]
                d2 = weight[k, q] * ((v[j] if j >= 0 else bval[k, q]) - vk)
                j = nbr[k, q + 1]
                d2 += weight[k, q + 1] * ((v[j] if j >= 0 else bval[k, q + 1]) - vk)
                prod *= max(d2, DELTA0)
            if prod < best:
                best = prod
        out[k] = best


@njit(cache=True)
def _sweep(v, nbr, bval, weight, gweight, obstacle, t, gx, gy, order, omega):
    _gradient(v, nbr, bval, gweight, gx, gy)
    _update_range(v, nbr, bval, weight, obstacle, t, gx, gy, order, 0, order.shape[0], omega)


@njit(cache=True, parallel=True)
def _sweep_colored(v, nbr, bval, weight, gweight, obstacle, t, gx, gy, order, chunks, omega):
    """Colour-by-colour sweep.  Nodes of one colour share no stencil edge, so
    the chunks of a colour (rows of ``chunks``: colour, lo, hi) run in parallel."""
    _gradient(v, nbr, bval, gweight, gx, gy)
    c = 0
    while c < chunks.shape[0]:
        e = c
        while e < chunks.shape[0] and chunks[e, 0] == chunks[c, 0]:
            e += 1
        for i in prange(c, e):
            _update_range(v, nbr, bval, weight, obstacle, t, gx, gy, order, chunks[i, 1], chunks[i, 2], omega)
        c = e


@njit(cache=True)
def _residuals(v, nbr, bval, weight, gweight, obstacle, t, gx, gy, out):
    _gradient(v, nbr, bval, gweight, gx, gy)
    _ma_values(v, nbr, bval, weight, out)
    worst = 0.0
    for k in range(v.shape[0]):
        g2 = gx[k] * gx[k] + gy[k] * gy[k]
        r = out[k] - t * (1.0 + g2) * (1.0 + g2)
        if v[k] <= obstacle[k] and r < 0.0:
            r = 0.0  # resting on the obstacle: only excess curvature counts
        out[k] = r
        if abs(r) > worst:
            worst = abs(r)
    return worst


# ---------------------------------------------------------------- public operations


def _node_index(patch, tables, node):
    i, j = node
    hits = np.flatnonzero((tables.nodes[:, 0] == i) & (tables.nodes[:, 1] == j))
    if len(hits) == 0:
        raise InvalidArgument(f"node {node} is not an interior node")
    return int(hits[0])


def ma_value_at(patch: GraphPatch, node, st: StencilSet | None = None) -> float:
    """Discrete Monge-Ampere value (min over pairs of clamped products) at an interior node."""
    tables = _tables(patch, st or stencil())
    k = _node_index(patch, tables, node)
    vin = patch.v[patch.inside]
    out = np.empty(len(vin))
    _ma_values(vin, tables.nbr, tables.bval, tables.weight, out)
    return float(out[k])


def ma_value_field(patch: GraphPatch, st: StencilSet | None = None) -> np.ndarray:
    """``ma_value_at`` for every node at once; NaN off the interior."""
    tables = _tables(patch, st or stencil())
    vin = patch.v[patch.inside]
    out = np.empty(len(vin))
    _ma_values(vin, tables.nbr, tables.bval, tables.weight, out)
    full = np.full(patch.shape, np.nan)
    full[patch.inside] = out
    return full


def ma_operator_at(patch: GraphPatch, node, st: StencilSet | None = None, t: float = 1.0,
                   grad=None, rhs: float | None = None) -> float:
    """Residual of the scheme at ``node``: operator value minus t(1 + |grad v|^2)^2.

    ``grad`` is the lagged gradient (default: the scheme's own centered
    differences); ``rhs`` replaces the whole right-hand side when given.
    """
    tables = _tables(patch, st or stencil())
    k = _node_index(patch, tables, node)
    vin = patch.v[patch.inside]
    values = np.empty(len(vin))
    _ma_values(vin, tables.nbr, tables.bval, tables.weight, values)
    value = float(values[k])
    if rhs is None:
        if grad is None:
            gx, gy = np.empty(len(vin)), np.empty(len(vin))
            _gradient(vin, tables.nbr, tables.bval, tables.gweight, gx, gy)
            grad = (gx[k], gy[k])
        g2 = float(np.dot(grad, grad))
        rhs = t * (1.0 + g2) ** 2
    return value - rhs


def residual_field(patch: GraphPatch, t: float, st: StencilSet | None = None) -> np.ndarray:
    """Scheme residual on the full grid (zero off the interior)."""
    tables = _tables(patch, st or stencil())
    vin = patch.v[patch.inside].copy()
    n = len(vin)
    out = np.zeros(n)
    _residuals(vin, *_kernel_args(tables), t, np.empty(n), np.empty(n), out)
    full = np.zeros(patch.shape)
    full[patch.inside] = out
    return full


def _color_chunks(colors, pieces: int = 64):
    """Node order grouped by colour, and (colour, lo, hi) chunks of that order."""
    order = np.argsort(colors, kind="stable").astype(np.int64)
    rows = []
    sorted_colors = colors[order]
    for c in np.unique(colors):
        lo, hi = np.searchsorted(sorted_colors, [c, c + 1])
        cuts = np.linspace(lo, hi, min(pieces, hi - lo) + 1).astype(np.int64)
        rows += [(c, a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]
    return order, np.array(rows, dtype=np.int64).reshape(-1, 3)


def solve(patch: GraphPatch, t: float, st: StencilSet | None = None, tol: float | None = None,
          max_sweeps: int = 20000, parallel: bool = False, omega: float = 1.0):
    """Nonlinear Gauss-Seidel to a max-norm residual below ``tol``.

    Returns the solved patch (a copy) and the per-sweep residual history.
    Raises NonConvergence, carrying the history and the last iterate, if
    ``max_sweeps`` runs out.  ``parallel`` switches to the colour-ordered
    sweep; ``omega`` < 1 under-relaxes each nodal update.
    """
    if not t > 0:
        raise InvalidArgument("curvature target must be positive")
    tol = 1e-8 * t if tol is None else float(tol)
    if not tol > 0:
        raise InvalidArgument("tolerance must be positive")
    if not 0 < omega <= 1:
        raise InvalidArgument("relaxation factor omega must lie in (0, 1]")
    st = st or stencil()
    tables = _tables(patch, st)
    vin = patch.v[patch.inside].copy()
    n = len(vin)
    gx, gy, res = np.empty(n), np.empty(n), np.empty(n)
    args = _kernel_args(tables)
    if parallel:
        order, chunks = _color_chunks(tables.colors)
    else:
        order = np.arange(n, dtype=np.int64)
    history = []
    out = patch.copy()
    for _ in range(max_sweeps):
        if parallel:
            with warnings.catch_warnings():
                # numba probes TBB first and warns when it is too old; another layer is used
                warnings.filterwarnings("ignore", message=".*TBB threading layer.*")
                _sweep_colored(vin, *args, t, gx, gy, order, chunks, omega)
        else:
            _sweep(vin, *args, t, gx, gy, order, omega)
        worst = _residuals(vin, *args, t, gx, gy, res)
        history.append(float(worst))
        if worst <= tol:
            out.v[out.inside] = vin
            return out, history
    out.v[out.inside] = vin
    raise NonConvergence(
        f"residual {history[-1]:.3e} above tolerance {tol:.3e} after {max_sweeps} sweeps", history, out
    )


def compare_to_cap(patch: GraphPatch, s: Scenario):
    """Max |u - u_cap| over interior nodes, and the error grid (zero off the interior)."""
    X, Y = patch.grid
    err = np.where(patch.inside, np.abs(patch.height() - cap_height(s, X, Y)), 0.0)
    return float(err.max()), err


def apex_height(patch: GraphPatch) -> float:
    """Height u at the node nearest the rim-disk centre."""
    i = int(np.argmin(np.abs(patch.x)))
    return float(patch.height()[i, i])


def second_differences(patch: GraphPatch, st: StencilSet | None = None) -> np.ndarray:
    """Stencil second differences of v at interior nodes, shape (nodes, directions/2).

    Entries for wide pairs trimmed at the rim are NaN.
    """
    tables = _tables(patch, st or stencil())
    vin = patch.v[patch.inside]
    nbr = tables.nbr
    D = nbr.shape[1]
    out = np.empty((len(vin), D // 2))
    for q in range(0, D, 2):
        vp = np.where(nbr[:, q] >= 0, vin[np.maximum(nbr[:, q], 0)], tables.bval[:, q])
        vm = np.where(nbr[:, q + 1] >= 0, vin[np.maximum(nbr[:, q + 1], 0)], tables.bval[:, q + 1])
        d2 = tables.weight[:, q] * (vp - vin) + tables.weight[:, q + 1] * (vm - vin)
        out[:, q // 2] = np.where(nbr[:, q] == -2, np.nan, d2)
    return out


def rim_angle(patch: GraphPatch, s: Scenario) -> float:
    """Angle in degrees between the dome and the sphere where they meet at the rim.

    One-sided estimate from the last interior node on each half axis, averaged.
    Only reported: the scheme makes no claim about it.
    """
    u = patch.height()
    c = int(np.argmin(np.abs(patch.x)))
    angles = []
    for step in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        k = 0
        while patch.inside[c + (k + 1) * step[0], c + (k + 1) * step[1]]:
            k += 1
        i, j = c + k * step[0], c + k * step[1]
        r = math.hypot(patch.x[i], patch.x[j])
        theta = math.atan2(step[1], step[0])
        u_rim = -float(np.asarray(patch.g(np.array(theta))))
        slope = (u_rim - u[i, j]) / (patch.rho - r)
        sphere = -patch.rho / math.sqrt(s.R ** 2 - patch.rho ** 2)
        angles.append(math.degrees(math.atan(slope) - math.atan(sphere)))
    return float(np.mean(angles))
