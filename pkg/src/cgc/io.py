"""Readers and writers for bodies, patches, probe reports and run tables.

Floats are written with ``repr`` so that files round-trip exactly and repeated
runs produce byte-identical output.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .bodies import Arc, Body2D, GraphPatch
from .errors import InvalidArgument


def _num(x) -> str:
    return repr(float(x))


def write_body(path, body: Body2D) -> Path:
    path = Path(path)
    path.write_text(body.to_text())
    return path


def read_body(path) -> Body2D:
    return Body2D.from_text(Path(path).read_text())


# ---------------------------------------------------------------- svg


def _svg_path(body: Body2D, flip) -> str:
    parts = []
    start = flip(body.pieces[0].start)
    parts.append(f"M {start[0]:.6f} {start[1]:.6f}")
    for p in body.pieces:
        end = flip(p.end)
        if isinstance(p, Arc):
            # split long arcs so each SVG arc command spans less than pi
            count = max(1, int(math.ceil(p.span / (0.9 * math.pi))))
            for k in range(1, count + 1):
                q = flip(p.point(k / count))
                parts.append(f"A {p.radius:.6f} {p.radius:.6f} 0 0 0 {q[0]:.6f} {q[1]:.6f}")
        else:
            parts.append(f"L {end[0]:.6f} {end[1]:.6f}")
    parts.append("Z")
    return " ".join(parts)


def body_svg(layers, size: int = 600, margin: float = 0.05) -> str:
    """SVG overlay of bodies.  ``layers`` holds (label, body, stroke colour) triples."""
    layers = list(layers)
    if not layers:
        raise InvalidArgument("nothing to draw")
    lo = np.full(2, np.inf)
    hi = np.full(2, -np.inf)
    for _, body, _ in layers:
        pts = body.sample_boundary(256).points
        lo, hi = np.minimum(lo, pts.min(axis=0)), np.maximum(hi, pts.max(axis=0))
    span = float((hi - lo).max()) * (1 + 2 * margin)
    center = 0.5 * (lo + hi)
    x0, y0 = center[0] - span / 2, center[1] - span / 2

    def flip(p):
        # y grows downward in SVG
        return np.array([p[0] - x0, span - (p[1] - y0)])

    stroke = span / size * 1.5
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {span:.6f} {span:.6f}">']
    for label, body, colour in layers:
        out.append(f'  <path id="{label}" d="{_svg_path(body, flip)}" fill="none" '
                   f'stroke="{colour}" stroke-width="{stroke:.6f}"><title>{label}</title></path>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, layers, **kw) -> Path:
    path = Path(path)
    path.write_text(body_svg(layers, **kw))
    return path


# ---------------------------------------------------------------- graph patches


def _patch_nodes(patch: GraphPatch) -> np.ndarray:
    return patch.inside | patch.boundary


def write_patch_csv(path, patch: GraphPatch) -> Path:
    """Interior and boundary nodes as ``x,y,v`` rows."""
    path = Path(path)
    X, Y = patch.grid
    keep = _patch_nodes(patch)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "v"])
        for x, y, v in zip(X[keep], Y[keep], patch.v[keep]):
            w.writerow([_num(x), _num(y), _num(v)])
    return path


def read_patch_values(path):
    """(x, y, v) arrays from a patch CSV."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise InvalidArgument(f"{path}: expected columns x,y,v")
    return data[:, 0], data[:, 1], data[:, 2]


def load_patch_values(patch: GraphPatch, path) -> GraphPatch:
    """Copy of ``patch`` with node values taken from a CSV written for the same grid."""
    x, y, v = read_patch_values(path)
    h = patch.h
    i = np.rint((x - patch.x[0]) / h).astype(int)
    j = np.rint((y - patch.x[0]) / h).astype(int)
    n = len(patch.x)
    if (i < 0).any() or (i >= n).any() or (j < 0).any() or (j >= n).any() or \
            np.abs(patch.x[np.clip(i, 0, n - 1)] - x).max(initial=0) > 1e-9 * patch.rho:
        raise InvalidArgument(f"{path}: nodes do not match the scenario grid")
    out = patch.copy()
    out.v[i, j] = v
    return out


def write_patch_obj(path, patch: GraphPatch) -> Path:
    """Triangle mesh of the surface u = -v over interior and boundary nodes."""
    path = Path(path)
    X, Y = patch.grid
    keep = _patch_nodes(patch)
    index = -np.ones(keep.shape, dtype=int)
    index[keep] = np.arange(1, keep.sum() + 1)
    u = patch.height()
    lines = [f"# {int(keep.sum())} vertices"]
    lines += [f"v {_num(x)} {_num(y)} {_num(z)}" for x, y, z in zip(X[keep], Y[keep], u[keep])]
    a, b = index[:-1, :-1], index[1:, :-1]
    c, d = index[1:, 1:], index[:-1, 1:]
    full = (a > 0) & (b > 0) & (c > 0) & (d > 0)
    for p, q, r, s in zip(a[full], b[full], c[full], d[full]):
        lines.append(f"f {p} {q} {r}")
        lines.append(f"f {p} {r} {s}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_obj(path):
    """Vertices and (zero-based) triangles of an OBJ file."""
    verts, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(x.split("/")[0]) - 1 for x in parts[1:4]])
    return np.array(verts), np.array(faces, dtype=int).reshape(-1, 3)


# ---------------------------------------------------------------- tables


def write_violations_csv(path, reports) -> Path:
    """``reports`` maps a label (e.g. "F", "dual") to a ProbeReport."""
    path = Path(path)
    rows = []
    dim = 2
    for kind, rep in reports.items():
        for row in rep.rows():
            dim = len(row) - 2
            rows.append((kind, *row))
    coords = ["x", "y", "z"][:dim]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", *coords, "curvature", "margin"])
        for kind, *vals in rows:
            w.writerow([kind, *(_num(v) for v in vals)])
    return path


def write_history_csv(path, history) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sweep", "residual"])
        for k, r in enumerate(history, 1):
            w.writerow([k, _num(r)])
    return path


def write_convergence_csv(path, rows) -> Path:
    """Rows of (resolution, error, ratio-or-None)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["resolution", "error", "ratio"])
        for res, err, ratio in rows:
            w.writerow([_num(res), _num(err), "" if ratio is None else _num(ratio)])
    return path


def read_csv_rows(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
