"""2x2 matrix groups acting on pairs (f, g) with f < g pointwise.

The invariance group of the strict-inequality cone decomposes through
conjugation by B = [[1, 1], [-1, 1]]: a matrix A preserves the cone exactly
when B A B^-1 is upper triangular with positive lower-right entry 2b and
nonzero upper-left entry 2a. Everything here works in that (a, b, c)
parameterisation:

    A = [[a+b-c, a-b+c],
         [a-b-c, a+b+c]]

Subgroups handled: positive dilations (lambda * I), the difference-preserving
two-parameter family [[p, q-1], [p-1, q]] with p+q != 1, and the two freely
acting slices a == b and a == 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInGroupError

SINGULARITY_EPS = 1e-12   # |det| at or below this is rejected outright
MEMBER_TOL = 1e-10        # tolerance on equality constraints in membership
ROUNDTRIP_TOL = 1e-12     # tolerance on algebraic round-trips

_B = np.array([[1.0, 1.0], [-1.0, 1.0]])
_B_INV = np.array([[0.5, -0.5], [0.5, 0.5]])


@dataclass(frozen=True)
class GroupElement:
    """Invertible 2x2 real matrix with its determinant cached."""

    entries: np.ndarray
    det: float

    @classmethod
    def from_matrix(cls, mat) -> "GroupElement":
        m = np.array(mat, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
        if abs(det) <= SINGULARITY_EPS:
            raise NotInGroupError(f"matrix is numerically singular (det={det:.3e})")
        m.flags.writeable = False
        return cls(m, det)

    def inverse(self) -> "GroupElement":
        m = self.entries
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / self.det
        return GroupElement.from_matrix(inv)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement.from_matrix(self.entries @ other.entries)

    def is_identity(self, tol: float = MEMBER_TOL) -> bool:
        return bool(np.all(np.abs(self.entries - np.eye(2)) <= tol))


@dataclass(frozen=True)
class ConjugatedParams:
    """(a, b, c) coordinates of the invariance group; a != 0, b > 0."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.a == 0.0:
            raise NotInGroupError("parameter a must be nonzero")
        if self.b <= 0.0:
            raise NotInGroupError("parameter b must be positive")


@dataclass(frozen=True)
class HParams:
    """(p, q) coordinates of the difference-preserving subgroup; p+q != 1."""

    p: float
    q: float

    def __post_init__(self):
        if self.p + self.q == 1.0:
            raise NotInGroupError("p + q must differ from 1")


@dataclass(frozen=True)
class DilationParam:
    """Positive scale factor of a dilation lambda * I."""

    scale: float

    def __post_init__(self):
        if self.scale <= 0.0:
            raise NotInGroupError("dilation scale must be positive")


@dataclass(frozen=True)
class FunctionPair:
    """Two functions stored by their values on a shared finite sample set."""

    f: np.ndarray
    g: np.ndarray

    @classmethod
    def from_values(cls, f, g) -> "FunctionPair":
        fv = np.asarray(f, dtype=float).copy()
        gv = np.asarray(g, dtype=float).copy()
        if fv.shape != gv.shape or fv.ndim != 1:
            raise ValueError("f and g must be 1-d arrays over the same samples")
        if not (np.all(np.isfinite(fv)) and np.all(np.isfinite(gv))):
            raise ValueError("function values must be finite on every sample")
        fv.flags.writeable = False
        gv.flags.writeable = False
        return cls(fv, gv)

    @classmethod
    def from_callables(cls, f, g, samples) -> "FunctionPair":
        pts = np.asarray(samples, dtype=float)
        return cls.from_values([f(x) for x in pts], [g(x) for x in pts])

    def difference(self) -> np.ndarray:
        return self.g - self.f

    def in_cone(self) -> bool:
        """True when f < g strictly on every sample."""
        return bool(self.f.size) and bool(np.all(self.g - self.f > 0))


def mat_from_abc(params: ConjugatedParams) -> GroupElement:
    """Expand (a, b, c) into the corresponding 2x2 matrix."""
    a, b, c = params.a, params.b, params.c
    return GroupElement.from_matrix(
        [[a + b - c, a - b + c], [a - b - c, a + b + c]]
    )


def abc_from_mat(elem: GroupElement, tol: float = MEMBER_TOL) -> ConjugatedParams:
    """Recover (a, b, c) by conjugating with B; rejects non-members.

    B A B^-1 must come out upper triangular with entries (2a, 2c; 0, 2b).
    """
    q = _B @ elem.entries @ _B_INV
    if abs(q[1, 0]) > tol:
        raise NotInGroupError(
            f"conjugated matrix is not upper triangular (residual {q[1, 0]:.3e})"
        )
    a, b, c = float(q[0, 0]) / 2.0, float(q[1, 1]) / 2.0, float(q[0, 1]) / 2.0
    if b <= tol:
        raise NotInGroupError(f"conjugated scale parameter b={b:.3e} is not positive")
    if abs(a) <= tol:
        raise NotInGroupError("conjugated parameter a vanishes")
    return ConjugatedParams(a, b, c)


def mat_from_h(params: HParams) -> GroupElement:
    p, q = params.p, params.q
    return GroupElement.from_matrix([[p, q - 1.0], [p - 1.0, q]])


def mat_from_dilation(params: DilationParam) -> GroupElement:
    return GroupElement.from_matrix(np.eye(2) * params.scale)


def is_in_T(elem: GroupElement, tol: float = MEMBER_TOL) -> bool:
    m = elem.entries
    return (
        abs(m[0, 1]) <= tol
        and abs(m[1, 0]) <= tol
        and abs(m[0, 0] - m[1, 1]) <= tol
        and m[0, 0] > tol
    )


def is_in_H(elem: GroupElement, tol: float = MEMBER_TOL) -> bool:
    m = elem.entries
    return (
        abs(m[0, 0] - m[1, 0] - 1.0) <= tol
        and abs(m[1, 1] - m[0, 1] - 1.0) <= tol
        and abs(m[0, 0] + m[1, 1] - 1.0) > tol
    )


def is_in_G(elem: GroupElement, tol: float = MEMBER_TOL) -> bool:
    try:
        abc_from_mat(elem, tol)
    except NotInGroupError:
        return False
    return True


def is_in_J1(elem: GroupElement, tol: float = MEMBER_TOL) -> bool:
    try:
        p = abc_from_mat(elem, tol)
    except NotInGroupError:
        return False
    return abs(p.a - p.b) <= tol


def is_in_J2(elem: GroupElement, tol: float = MEMBER_TOL) -> bool:
    try:
        p = abc_from_mat(elem, tol)
    except NotInGroupError:
        return False
    return abs(p.a - 0.5) <= tol


def decompose_TH(elem: GroupElement) -> tuple[DilationParam, HParams]:
    """Split a member uniquely into dilation * difference-preserving parts."""
    p = abc_from_mat(elem)
    lam = 2.0 * p.b
    return (
        DilationParam(lam),
        HParams(float(p.a + p.b - p.c) / lam, float(p.a + p.b + p.c) / lam),
    )


def act(elem: GroupElement, pair: FunctionPair) -> FunctionPair:
    """Apply the linear action (f, g) -> (A11 f + A12 g, A21 f + A22 g)."""
    m = elem.entries
    return FunctionPair.from_values(
        m[0, 0] * pair.f + m[0, 1] * pair.g,
        m[1, 0] * pair.f + m[1, 1] * pair.g,
    )


def fixed_point_witness(
    elem: GroupElement, num_samples: int = 8, tol: float = MEMBER_TOL
) -> FunctionPair | None:
    """Construct a pair fixed by a non-identity member, when one exists.

    A fixed pair in the cone exists iff 2b == 1 and 2a != 1; it is the
    constant pair (f, g) = ((fbar - 1)/2, (fbar + 1)/2) with
    fbar = 2c / (1 - 2a).
    """
    if elem.is_identity(tol):
        raise ValueError("the identity fixes everything; witness is undefined")
    params = abc_from_mat(elem)
    if abs(2.0 * params.b - 1.0) > tol or abs(2.0 * params.a - 1.0) <= tol:
        return None
    fbar = 2.0 * params.c / (1.0 - 2.0 * params.a)
    ones = np.ones(num_samples)
    return FunctionPair.from_values((fbar - 1.0) / 2.0 * ones, (fbar + 1.0) / 2.0 * ones)


def pair_norm(pair: FunctionPair) -> float:
    """sup|f| + sup|g| over the sample set."""
    if pair.f.size == 0:
        raise ValueError("pair norm requires a nonempty sample set")
    return float(np.max(np.abs(pair.f)) + np.max(np.abs(pair.g)))


def smooth_p_grid(
    a_range: tuple[float, float],
    b_range: tuple[float, float],
    resolution: int,
    sharpness: float,
) -> np.ndarray:
    """Sampled smooth indicator of the parameter region a != 0, b > 0.

    Returns rows (a, b, p) with p = 1 + exp(-(sharpness*a)^2) - tanh(sharpness*b),
    row-major in a then b. p tends to 0 exactly on {a != 0, b > 0} as
    sharpness grows.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if sharpness <= 0:
        raise ValueError("sharpness must be positive")
    avals = np.linspace(a_range[0], a_range[1], resolution)
    bvals = np.linspace(b_range[0], b_range[1], resolution)
    aa = np.repeat(avals, resolution)
    bb = np.tile(bvals, resolution)
    p = 1.0 + np.exp(-((sharpness * aa) ** 2)) - np.tanh(sharpness * bb)
    return np.column_stack([aa, bb, p])


def write_p_grid_csv(path, grid: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("a,b,p\n")
        for a, b, p in grid:
            fh.write(f"{a!r},{b!r},{p!r}\n")
