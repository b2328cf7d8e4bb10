"""Small symmetric matrices and the Dirichlet cones built on them.

The representable cones are the positive semi-definite cone ``P``, the
determinant cone ``F_t = {A in P : det A >= t}``, the closure of its
complement, and the dual cone ``-closure(F_t^c)``.  All membership tests are
tolerance-qualified and resolve ties as members.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgument

DEFAULT_TOL = 1e-9
JACOBI_TOL = 1e-13

# (row, col) order of the stored upper triangle per dimension
_UPPER_INDEX = {
    1: ((0, 0),),
    2: ((0, 0), (0, 1), (1, 1)),
    3: ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)),
}


@dataclass(frozen=True)
class SymMat:
    """Symmetric matrix of dimension 1-3 stored as its upper triangle (row major)."""

    dim: int
    upper: tuple

    def __post_init__(self):
        if self.dim not in _UPPER_INDEX:
            raise InvalidArgument(f"SymMat dimension must be 1, 2 or 3, got {self.dim}")
        if len(self.upper) != len(_UPPER_INDEX[self.dim]):
            raise InvalidArgument(
                f"dimension {self.dim} needs {len(_UPPER_INDEX[self.dim])} entries, "
                f"got {len(self.upper)}"
            )
        object.__setattr__(self, "upper", tuple(float(x) for x in self.upper))

    @classmethod
    def _raw(cls, dim: int, upper: tuple) -> "SymMat":
        # trusted fast path: entries already validated floats
        out = object.__new__(cls)
        object.__setattr__(out, "dim", dim)
        object.__setattr__(out, "upper", upper)
        return out

    @classmethod
    def from_array(cls, a) -> "SymMat":
        a = np.asarray(a, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        n = a.shape[0]
        if a.shape != (n, n):
            raise InvalidArgument(f"expected a square matrix, got shape {a.shape}")
        if n not in _UPPER_INDEX:
            raise InvalidArgument(f"SymMat dimension must be 1, 2 or 3, got {n}")
        # symmetrize rather than trust the lower triangle
        l = a.tolist()
        return cls._raw(n, tuple(0.5 * (l[i][j] + l[j][i]) for i, j in _UPPER_INDEX[n]))

    @classmethod
    def diag(cls, *values) -> "SymMat":
        return cls.from_array(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def identity(cls, dim: int) -> "SymMat":
        return cls.from_array(np.eye(dim))

    @classmethod
    def zero(cls, dim: int) -> "SymMat":
        return cls.from_array(np.zeros((dim, dim)))

    def to_array(self) -> np.ndarray:
        a = np.empty((self.dim, self.dim))
        for v, (i, j) in zip(self.upper, _UPPER_INDEX[self.dim]):
            a[i, j] = a[j, i] = v
        return a

    def __add__(self, other: "SymMat") -> "SymMat":
        if not isinstance(other, SymMat):
            return NotImplemented
        if other.dim != self.dim:
            raise InvalidArgument("dimension mismatch in SymMat addition")
        return SymMat._raw(self.dim, tuple(x + y for x, y in zip(self.upper, other.upper)))

    def __sub__(self, other: "SymMat") -> "SymMat":
        if not isinstance(other, SymMat):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "SymMat":
        return SymMat._raw(self.dim, tuple(-x for x in self.upper))

    def __mul__(self, scalar: float) -> "SymMat":
        return SymMat._raw(self.dim, tuple(float(scalar * x) for x in self.upper))

    __rmul__ = __mul__

    def conjugate(self, m) -> "SymMat":
        """Return ``M^T A M``."""
        m = np.asarray(m, dtype=float)
        return SymMat.from_array(m.T @ self.to_array() @ m)

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_array()))


def _jacobi3(a: list) -> tuple[list, list]:
    """Cyclic Jacobi rotations on a 3x3 symmetric matrix given as nested lists.

    Returns (diagonal, V) with the eigenvectors in the columns of V.
    """
    v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    scale = max(abs(a[i][j]) for i in range(3) for j in range(3))
    if scale == 0.0:
        return [0.0, 0.0, 0.0], v
    for _ in range(50):
        off = abs(a[0][1]) + abs(a[0][2]) + abs(a[1][2])
        if off <= JACOBI_TOL * scale:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p][q]
            if apq == 0.0:
                continue
            theta = (a[q][q] - a[p][p]) / (2.0 * apq)
            tan = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(tan * tan + 1.0)
            s = tan * c
            for k in range(3):
                akp, akq = a[k][p], a[k][q]
                a[k][p] = c * akp - s * akq
                a[k][q] = s * akp + c * akq
            for k in range(3):
                apk, aqk = a[p][k], a[q][k]
                a[p][k] = c * apk - s * aqk
                a[q][k] = s * apk + c * aqk
            for k in range(3):
                vkp, vkq = v[k][p], v[k][q]
                v[k][p] = c * vkp - s * vkq
                v[k][q] = s * vkp + c * vkq
    return [a[0][0], a[1][1], a[2][2]], v


def eigh_sym(a: SymMat) -> tuple[tuple, np.ndarray]:
    """Ascending eigenvalues and matching orthonormal eigenvectors (columns)."""
    if a.dim == 1:
        return (a.upper[0],), np.ones((1, 1))
    if a.dim == 2:
        p, q, r = a.upper
        mean = 0.5 * (p + r)
        rad = math.hypot(0.5 * (p - r), q)
        lo, hi = mean - rad, mean + rad
        if rad == 0.0:
            return (lo, hi), np.eye(2)
        # eigenvector of the larger eigenvalue, built from the better-conditioned row
        if p >= r:
            w = np.array([hi - r, q])
        else:
            w = np.array([q, hi - p])
        w /= math.hypot(w[0], w[1])
        vecs = np.array([[-w[1], w[0]], [w[0], w[1]]])
        return (lo, hi), vecs
    u = a.upper
    rows = [[u[0], u[1], u[2]], [u[1], u[3], u[4]], [u[2], u[4], u[5]]]
    vals, v = _jacobi3(rows)
    order = sorted(range(3), key=lambda i: vals[i])
    vecs = np.array([[v[k][i] for i in order] for k in range(3)])
    return tuple(vals[i] for i in order), vecs


def eig_sym(a: SymMat) -> tuple:
    """Eigenvalues of ``a`` in ascending order."""
    if a.dim == 1:
        return (a.upper[0],)
    if a.dim == 2:
        p, q, r = a.upper
        mean = 0.5 * (p + r)
        rad = math.hypot(0.5 * (p - r), q)
        return (mean - rad, mean + rad)
    return eigh_sym(a)[0]


def det_sym(a: SymMat) -> float:
    return math.prod(eig_sym(a))


class ConeKind(enum.Enum):
    PSD = "psd"
    DET = "det"
    CLOSURE_COMPLEMENT = "closure_complement"
    DUAL_TILDE = "dual_tilde"


@dataclass(frozen=True)
class ConeSpec:
    kind: ConeKind
    dim: int
    t: float | None = None

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise InvalidArgument(f"cone dimension must be 1, 2 or 3, got {self.dim}")
        if self.kind is ConeKind.PSD:
            if self.t is not None:
                raise InvalidArgument("the PSD cone takes no threshold")
        elif self.t is None or not self.t > 0:
            raise InvalidArgument(f"{self.kind.value} cone needs a threshold t > 0, got {self.t}")

    @property
    def name(self) -> str:
        if self.kind is ConeKind.PSD:
            return f"P[{self.dim}]"
        return f"{self.kind.value}(t={self.t:g})[{self.dim}]"

    def contains(self, a: SymMat, tol: float = DEFAULT_TOL) -> bool:
        if self.kind is ConeKind.DUAL_TILDE:
            return _closure_complement(-a, self.t, tol)
        eigs = eig_sym(a)
        if self.kind is ConeKind.PSD:
            return eigs[0] >= -tol
        if self.kind is ConeKind.DET:
            return eigs[0] >= -tol and math.prod(eigs) >= self.t - tol
        return eigs[0] <= tol or math.prod(eigs) <= self.t + tol


def _closure_complement(a: SymMat, t: float, tol: float) -> bool:
    eigs = eig_sym(a)
    return eigs[0] <= tol or math.prod(eigs) <= t + tol


def psd(dim: int = 2) -> ConeSpec:
    return ConeSpec(ConeKind.PSD, dim)


def det_cone(t: float, dim: int = 2) -> ConeSpec:
    return ConeSpec(ConeKind.DET, dim, t)


def closure_complement(t: float, dim: int = 2) -> ConeSpec:
    return ConeSpec(ConeKind.CLOSURE_COMPLEMENT, dim, t)


def dual_tilde(t: float, dim: int = 2) -> ConeSpec:
    return ConeSpec(ConeKind.DUAL_TILDE, dim, t)


@dataclass(frozen=True)
class CustomRule:
    """Ad hoc membership rule, used for negative controls of the property checks."""

    name: str
    dim: int
    predicate: Callable[[SymMat, float], bool] = field(compare=False)

    def contains(self, a: SymMat, tol: float = DEFAULT_TOL) -> bool:
        return bool(self.predicate(a, tol))


def cone_member(a: SymMat, cone, tol: float = DEFAULT_TOL) -> bool:
    if a.dim != cone.dim:
        raise InvalidArgument(f"matrix of dimension {a.dim} tested against {cone.dim}-dimensional cone")
    if tol < 0:
        raise InvalidArgument("tolerance must be non-negative")
    return cone.contains(a, tol)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _from_gaussian(g: np.ndarray) -> SymMat:
    return SymMat.from_array(g.T @ g)


def _rescale_to_det(a: SymMat, target: float) -> SymMat:
    factor = (target / det_sym(a)) ** (1.0 / a.dim)
    out = a * factor
    # guard the last ulps so that membership holds at zero tolerance
    while det_sym(out) < target:
        factor *= 1.0 + 1e-14
        out = a * factor
    return out


def sample_cone(cone: ConeSpec, seed=0) -> SymMat:
    """Draw one member of a PSD or determinant cone; deterministic per seed."""
    if not isinstance(cone, ConeSpec) or cone.kind not in (ConeKind.PSD, ConeKind.DET):
        raise InvalidArgument(f"sampling is only defined for PSD and determinant cones, not {cone!r}")
    rng = _rng(seed)
    a = _from_gaussian(rng.standard_normal((cone.dim, cone.dim)))
    if cone.kind is ConeKind.PSD:
        return a
    while eig_sym(a)[0] <= 0.0:
        a = _from_gaussian(rng.standard_normal((cone.dim, cone.dim)))
    return _rescale_to_det(a, cone.t * rng.uniform(1.0, 10.0))


def random_symmetric(dim: int, rng: np.random.Generator, scale: float = 1.0) -> SymMat:
    g = rng.standard_normal((dim, dim))
    return SymMat.from_array(scale * 0.5 * (g + g.T))


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian, signs fixed by R's diagonal)."""
    if dim == 2:
        # closed form is much cheaper than QR at this size
        th = rng.uniform(0.0, 2.0 * math.pi)
        c, s = math.cos(th), math.sin(th)
        flip = -1.0 if rng.uniform() < 0.5 else 1.0
        return np.array([[c, -flip * s], [s, flip * c]])
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def _draw_member(cone, rng: np.random.Generator, max_tries: int = 10000) -> SymMat:
    if isinstance(cone, ConeSpec) and cone.kind in (ConeKind.PSD, ConeKind.DET):
        return sample_cone(cone, rng)
    t = getattr(cone, "t", None) or 1.0
    scale = 2.0 * t ** (1.0 / cone.dim)
    if isinstance(cone, ConeSpec) and cone.kind is ConeKind.DUAL_TILDE and rng.uniform() < 0.5:
        # boundary-biased draw: -A sits in F_t's closed complement near its boundary
        a = _from_gaussian(rng.standard_normal((cone.dim, cone.dim)))
        while eig_sym(a)[0] <= 0.0:
            a = _from_gaussian(rng.standard_normal((cone.dim, cone.dim)))
        b = -_rescale_to_det(a, t * rng.uniform(0.1, 1.0))
        if cone.contains(b, 0.0):
            return b
    for _ in range(max_tries):
        a = random_symmetric(cone.dim, rng, scale)
        if cone.contains(a, 0.0):
            return a
    raise InvalidArgument(f"rejection sampling found no member of {cone!r}")


@dataclass(frozen=True)
class Violation:
    a: SymMat
    b: object
    detail: str = ""


def dirichlet_check(
    cone,
    sample_count: int,
    seed: int = 0,
    *,
    tol: float = DEFAULT_TOL,
    extra_pairs: Sequence[tuple[SymMat, SymMat]] = (),
) -> list[Violation]:
    """Search for pairs ``A in C, B in P`` with ``A + B`` outside ``C``.

    ``extra_pairs`` are checked first (when their preconditions hold), so a
    known counterexample can be injected for negative controls.
    """
    if sample_count < 1:
        raise InvalidArgument("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    p = psd(cone.dim)
    out = []
    for a, b in extra_pairs:
        if cone.contains(a, tol) and p.contains(b, tol) and not cone.contains(a + b, tol):
            out.append(Violation(a, b, "injected"))
    for _ in range(sample_count):
        a = _draw_member(cone, rng)
        b = sample_cone(p, rng)
        if not cone.contains(a + b, tol):
            out.append(Violation(a, b))
    return out


def invariance_check(
    cone,
    sample_count: int,
    seed: int = 0,
    *,
    tol: float = 1e-7,
    extra_pairs: Sequence[tuple[SymMat, np.ndarray]] = (),
) -> list[Violation]:
    """Search for matrices whose membership changes under ``A -> M^T A M``."""
    if sample_count < 1:
        raise InvalidArgument("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for a, m in extra_pairs:
        if cone.contains(a, tol) != cone.contains(a.conjugate(m), tol):
            out.append(Violation(a, np.asarray(m), "injected"))
    t = getattr(cone, "t", None) or 1.0
    for i in range(sample_count):
        # alternate between members and unconstrained matrices
        if i % 2 == 0:
            try:
                a = _draw_member(cone, rng)
            except InvalidArgument:
                a = random_symmetric(cone.dim, rng, 2.0 * t ** (1.0 / cone.dim))
        else:
            a = random_symmetric(cone.dim, rng, 2.0 * t ** (1.0 / cone.dim))
        m = random_orthogonal(cone.dim, rng)
        if cone.contains(a, tol) != cone.contains(a.conjugate(m), tol):
            out.append(Violation(a, m))
    return out


def non_dirichlet_rule(t: float = 1.0, dim: int = 2) -> CustomRule:
    """{det >= t} without the PSD requirement: not closed under adding P."""
    return CustomRule(f"det>={t:g} (no PSD)", dim, lambda a, tol: det_sym(a) >= t - tol)


def non_invariant_rule(dim: int = 2) -> CustomRule:
    """{A_11 >= 1}: a coordinate condition, not conjugation invariant."""
    return CustomRule("A11>=1", dim, lambda a, tol: a.to_array()[0, 0] >= 1.0 - tol)


@dataclass(frozen=True)
class SuiteRow:
    check: str
    cone: str
    samples: int
    violations: int
    expect_violations: bool

    @property
    def passed(self) -> bool:
        return (self.violations > 0) == self.expect_violations


def axiom_suite(samples: int = 10_000, seed: int = 0, dim: int = 2,
                thresholds=(0.25, 1.0, 4.0)) -> list[SuiteRow]:
    """Dirichlet and invariance checks on P, F_t and the dual cone, plus negative controls."""
    cones = [psd(dim)] + [det_cone(t, dim) for t in thresholds] + [dual_tilde(t, dim) for t in thresholds]
    rows = []
    for i, cone in enumerate(cones):
        rows.append(SuiteRow("dirichlet", cone.name, samples, len(dirichlet_check(cone, samples, seed + i)), False))
        rows.append(SuiteRow("invariance", cone.name, samples, len(invariance_check(cone, samples, seed + i)), False))
    if dim == 2:
        bad = non_dirichlet_rule(1.0, 2)
        pair = (SymMat.diag(-2.0, -2.0), SymMat.diag(4.0, 0.0))
        found = dirichlet_check(bad, samples, seed, extra_pairs=[pair])
        rows.append(SuiteRow("dirichlet", bad.name, samples + 1, len(found), True))
        coord = non_invariant_rule(2)
        quarter = np.array([[0.0, -1.0], [1.0, 0.0]])
        found = invariance_check(coord, samples, seed, extra_pairs=[(SymMat.diag(2.0, 0.0), quarter)])
        rows.append(SuiteRow("invariance", coord.name, samples + 1, len(found), True))
    return rows
