"""Constant Gauss curvature bodies: cone rules, planar Perron construction,
a wide-stencil Monge-Ampere graph solver and viscosity probe checks."""

__version__ = "0.1.0"

from .errors import DegenerateIntersection, Infeasible, InvalidArgument, NonConvergence, NotSmooth, OutOfRange
from .symcone import SymMat, ConeSpec, psd, det_cone, closure_complement, dual_tilde, cone_member
from .symcone import dirichlet_check, invariance_check
from .bodies import Body2D, GraphPatch, Scenario, make_scenario, disk, polygon, hausdorff, body_intersect
from .perron2d import analytic_Kt, perron_solve2d
from .probe import Probe, ProbeReport, check_type_F, check_type_F_dual, reduced_shape
from .mongeampere import build_patch, solve, ma_operator_at, stencil, compare_to_cap

__all__ = [name for name in dir() if not name.startswith("_")]
