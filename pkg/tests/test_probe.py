import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgc.bodies import body_intersect, disk, is_type_F_smooth, make_scenario, polygon
from cgc.errors import InvalidArgument
from cgc.mongeampere import build_patch, cap_height
from cgc.probe import Probe, ProbeGrid, check_type_F, check_type_F_dual, probe_curvatures, reduced_shape
from cgc.symcone import SymMat, cone_member, det_cone, eig_sym, random_orthogonal

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
COARSE = ProbeGrid(points=64)


def test_reduced_shape_examples():
    c = 0.7
    assert np.allclose(reduced_shape(Probe((0, 0), (0, 1), SymMat.diag(c, 0.0), 0.1)).to_array(), [[c]])
    assert np.allclose(reduced_shape(Probe((0, 0), (0, 2), SymMat.diag(2.0, 0.0), 0.1)).to_array(), [[1.0]])
    q = reduced_shape(Probe((0, 0, 0), (0, 0, 1), SymMat.diag(3.0, 4.0, 0.0), 0.1))
    assert np.allclose(eig_sym(q), (3.0, 4.0))


def test_probe_validation():
    with pytest.raises(InvalidArgument):
        Probe((0, 0), (0, 0), SymMat.identity(2), 0.1)
    with pytest.raises(InvalidArgument):
        Probe((0, 0), (0, 1), SymMat.identity(2), 0.0)


def test_probe_value_vanishes_at_base():
    p = Probe((1.0, 2.0), (0.0, 1.0), SymMat.identity(2), 0.5)
    assert p.value(np.array([[1.0, 2.0]]))[0] == 0.0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31))
def test_reduced_shape_conjugation_invariance(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=3)
    q = SymMat.from_array(rng.normal(size=(3, 3)))
    m = random_orthogonal(3, rng)
    base = reduced_shape(Probe((0, 0, 0), tuple(a), q, 1.0))
    turned = reduced_shape(Probe((0, 0, 0), tuple(m.T @ a), q.conjugate(m), 1.0))
    assert np.allclose(eig_sym(base), eig_sym(turned), atol=1e-10)
    for t in (0.25, 1.0, 4.0):
        assert cone_member(base, det_cone(t, 2), 1e-7) == cone_member(turned, det_cone(t, 2), 1e-7)


def test_curvature_ladder():
    k = probe_curvatures(1.0, 0.05)
    assert 0.0 in k and 0.95 in k and 1.05 in k
    assert k.min() == 0.0 and math.isclose(k.max(), 80.0)


def test_unit_disk_examples():
    assert check_type_F(disk(), 1.0, 0.05).empty
    rep = check_type_F(disk(), 2.0, 0.05)
    assert len(rep) == rep.points_tested == 256
    assert all(v.margin > 0 and v.curvature <= 1.95 for v in rep.violations)
    assert check_type_F_dual(disk(), 1.0, 0.05).empty
    rep = check_type_F_dual(disk(), 0.5, 0.05)
    assert len(rep) == 256 and all(v.margin > 0 for v in rep.violations)


def test_square_edges_flagged():
    rep = check_type_F(polygon(SQUARE), 1.0, 0.5)
    hit = {tuple(np.round(v.point, 9)) for v in rep.violations}
    for mid in [(0.5, 0.0), (1.0, 0.5), (0.5, 1.0), (0.0, 0.5)]:
        assert mid in hit
    flat = [v for v in rep.violations if v.point == (0.5, 0.0)][0]
    assert flat.curvature <= 0.5 and flat.margin > 0


def test_report_counters_and_rows():
    rep = check_type_F(disk(), 2.0, grid=COARSE)
    assert rep.points_tested == 64 and rep.probes_tried >= 64
    assert len(rep.rows()[0]) == 4
    params = [v.param for v in rep.violations]
    assert params == sorted(params)


def test_bad_inputs():
    with pytest.raises(InvalidArgument):
        check_type_F(disk(), 0.0)
    with pytest.raises(InvalidArgument):
        check_type_F(disk(), 1.0, eps=0.0)
    with pytest.raises(InvalidArgument):
        check_type_F("disk", 1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0))
def test_agrees_with_smooth_test_on_circles(r, t):
    eps = 0.05 * t
    # keep the threshold clear of the circle's own curvature
    if abs(t - 1.0 / r) < 2 * eps:
        return
    probed = check_type_F(disk(radius=r), t, eps, grid=COARSE).empty
    assert probed == is_type_F_smooth(disk(radius=r), t)


def _one_sided(body, t, eps):
    f = {v.param for v in check_type_F(body, t, eps, grid=COARSE).violations}
    g = {v.param for v in check_type_F_dual(body, t, eps, grid=COARSE).violations}
    return f.isdisjoint(g)


@pytest.mark.parametrize("t", [0.3, 1.0, 3.0])
def test_one_sidedness(t):
    lens = body_intersect(disk((-0.3, 0), 1.0), disk((0.3, 0), 0.8))
    for body in (disk(), polygon(SQUARE), lens):
        assert _one_sided(body, t, 0.05 * t)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.02, 0.4), st.floats(0.1, 0.9))
def test_margin_monotonicity(t, eps, shrink):
    lens = body_intersect(disk((-0.3, 0), 1.0), disk((0.3, 0), 0.8))
    for body in (disk(radius=0.9), polygon(SQUARE), lens):
        for check in (check_type_F, check_type_F_dual):
            wide = {v.param for v in check(body, t, eps, grid=COARSE).violations}
            narrow = {v.param for v in check(body, t, eps * shrink, grid=COARSE).violations}
            assert wide <= narrow


def test_corners_of_type_F_intersection_pass():
    X = body_intersect(disk((0, 0), 0.9), disk((0.8, 0.3), 0.7))
    assert len(X.corners()) == 2
    assert check_type_F(X, 1.0, 0.05).empty


def test_interior_restriction():
    inner = disk(radius=0.5)
    rep = check_type_F(disk(), 2.0, interior_of=inner)
    assert rep.points_tested == 0 and rep.empty


def _cap_patch(t=0.25, div=16):
    s = make_scenario(1.0, 0.8, t, 3)
    p = build_patch(s, s.rim_radius / div)
    X, Y = p.grid
    p.v[p.inside] = -cap_height(s, X, Y)[p.inside]
    return p


def test_exact_cap_patch_passes_both():
    p = _cap_patch()
    assert check_type_F(p, 0.25).empty
    assert check_type_F_dual(p, 0.25).empty


def test_exact_cap_patch_flagged_at_other_thresholds():
    p = _cap_patch()
    rep = check_type_F(p, 0.5)
    assert len(rep) > 0.8 * rep.points_tested
    assert all(len(v.point) == 3 and v.margin > 0 for v in rep.violations)
    assert math.isclose(rep.violations[0].curvature, 0.475, rel_tol=1e-9)
    rep = check_type_F_dual(p, 0.1)
    assert len(rep) > 0.8 * rep.points_tested


def test_patch_lattice_directions_validated():
    with pytest.raises(InvalidArgument):
        check_type_F(_cap_patch(), 0.25, grid=ProbeGrid(angles=6))
