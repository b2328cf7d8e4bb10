"""Paraboloid probes on a few planar bodies.

A body is of type F_t when no interior probe of curvature below t can touch
it from inside; the dual test looks for exterior probes of curvature above t.

    python demos/probe_checks.py
"""
from cgc.bodies import body_intersect, disk, polygon
from cgc.probe import ProbeGrid, check_type_F, check_type_F_dual


def line(name, body, t, eps):
    f = check_type_F(body, t, eps)
    g = check_type_F_dual(body, t, eps)
    print(f"{name:<18} t={t:<4} F: {len(f):>3}/{f.points_tested:<4} dual: {len(g):>3}/{g.points_tested}")
    return f, g


def main():
    unit = disk()
    line("unit disk", unit, 1.0, 0.05)
    line("unit disk", unit, 2.0, 0.1)
    _, g = line("unit disk", unit, 0.5, 0.3)
    print(f"  an exterior probe of curvature {g.violations[0].curvature:.2f} fits at {g.violations[0].point}")

    lens = body_intersect(disk((0.0, 0.0), 0.9), disk((0.8, 0.3), 0.7))
    f, _ = line("two-disk lens", lens, 1.0, 0.05)
    print(f"  {len(lens.corners())} corners probed; both arcs curve more than t, so the dual test fails")

    square = polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    f, _ = line("unit square", square, 1.0, 0.5)
    worst = max(f.violations, key=lambda v: v.margin)
    print(f"  flat edges admit a probe of curvature {worst.curvature:.3f}, margin {worst.margin:.3f}")

    coarse = ProbeGrid(points=64, curvatures=6)
    f = check_type_F(unit, 2.0, grid=coarse)
    print(f"\ncoarse grid: {f.probes_tried} probes tried at {f.points_tested} points")


if __name__ == "__main__":
    main()
