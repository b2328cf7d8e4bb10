import numpy as np
import pytest

from cgc.bodies import body_intersect, disk, make_scenario, polygon
from cgc.errors import InvalidArgument
from cgc.io import (
    body_svg,
    load_patch_values,
    read_body,
    read_csv_rows,
    read_obj,
    write_body,
    write_convergence_csv,
    write_history_csv,
    write_patch_csv,
    write_patch_obj,
    write_svg,
    write_violations_csv,
)
from cgc.mongeampere import build_patch, cap_height
from cgc.probe import ProbeGrid, check_type_F, check_type_F_dual

CAP = make_scenario(1.0, 0.8, 0.25, 3)


def cap_patch():
    p = build_patch(CAP, CAP.rim_radius / 8)
    X, Y = p.grid
    p.v[p.inside] = -cap_height(CAP, X, Y)[p.inside]
    return p


def test_body_round_trip(tmp_path):
    lens = body_intersect(disk((-0.2, 0.0), 1.0), disk((0.3, 0.1), 0.7))
    path = write_body(tmp_path / "lens.txt", lens)
    assert read_body(path).to_text() == lens.to_text()


def test_svg(tmp_path):
    text = body_svg([("sq", polygon([(0, 0), (1, 0), (1, 1), (0, 1)]), "black"), ("d", disk(), "red")])
    assert text.startswith("<svg") and text.count("<path") == 2 and " A " in text
    write_svg(tmp_path / "x.svg", [("d", disk(), "red")])
    with pytest.raises(InvalidArgument):
        body_svg([])


def test_patch_csv_round_trip(tmp_path):
    p = cap_patch()
    path = write_patch_csv(tmp_path / "surface.csv", p)
    blank = build_patch(CAP, CAP.rim_radius / 8)
    back = load_patch_values(blank, path)
    assert np.array_equal(back.v[p.inside], p.v[p.inside])


def test_patch_csv_grid_mismatch(tmp_path):
    path = write_patch_csv(tmp_path / "surface.csv", cap_patch())
    with pytest.raises(InvalidArgument):
        load_patch_values(build_patch(CAP, CAP.rim_radius / 16 * 1.03), path)


def test_obj_mesh(tmp_path):
    p = cap_patch()
    verts, faces = read_obj(write_patch_obj(tmp_path / "mesh.obj", p))
    assert len(verts) == (p.inside | p.boundary).sum()
    assert faces.min() >= 0 and faces.max() < len(verts)
    assert np.isclose(verts[:, 2].max(), 0.8 + 2.0 - np.sqrt(3.64), atol=1e-3)


def test_violation_csv(tmp_path):
    grid = ProbeGrid(points=32)
    reports = {"F": check_type_F(disk(), 2.0, grid=grid), "dual": check_type_F_dual(disk(), 2.0, grid=grid)}
    rows = read_csv_rows(write_violations_csv(tmp_path / "v.csv", reports))
    assert len(rows) == 32 and set(rows[0]) == {"kind", "x", "y", "curvature", "margin"}
    assert all(r["kind"] == "F" for r in rows)


def test_tables(tmp_path):
    rows = read_csv_rows(write_history_csv(tmp_path / "h.csv", [1.0, 0.5, 0.1]))
    assert [r["sweep"] for r in rows] == ["1", "2", "3"] and float(rows[-1]["residual"]) == 0.1
    rows = read_csv_rows(write_convergence_csv(tmp_path / "c.csv", [(0.1, 1e-3, None), (0.05, 2.5e-4, 4.0)]))
    assert rows[0]["ratio"] == "" and float(rows[1]["ratio"]) == 4.0
