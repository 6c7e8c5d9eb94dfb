"""The two-dimensional solvable group of affine maps t -> y t + x and its algebra.

Group elements are the matrices [[y, x], [0, 1]] with y > 0, stored as the pair
(x, y).  Left-invariant connections are encoded by algebra-valued bilinear
maps mu with nabla_X Y = mu(X, Y) for left-invariant X, Y.

Components of a bilinear map are stored as ``comps[k, i, j]`` = mu^k_{ij},
always relative to the orthonormal frame e1 = E1, e2 = E2 / lam, so the inner
product is the identity unless a test deliberately says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chart import SQRT2, ChartPoint, _check_lambda, _frozen, as_point
from .errors import DomainError, SingularMetricError


@dataclass(frozen=True)
class LieAlgebra2:
    """Structure constants c[k, i, j] with [E_i, E_j] = sum_k c^k_ij E_k."""

    structure: np.ndarray

    def __post_init__(self):
        c = _frozen(self.structure)
        if c.shape != (2, 2, 2):
            raise ValueError("structure constants must be 2x2x2")
        if np.abs(c + c.transpose(0, 2, 1)).max() > 1e-12:
            raise ValueError("structure constants are not antisymmetric")
        object.__setattr__(self, "structure", c)

    @classmethod
    def affine(cls) -> "LieAlgebra2":
        """Basis E1, E2 with [E1, E2] = -E1."""
        return cls.scaled_frame(1.0)

    @classmethod
    def scaled_frame(cls, lam: float) -> "LieAlgebra2":
        """Basis e1 = E1, e2 = E2/lam with [e1, e2] = -e1/lam."""
        lam = _check_lambda(lam)
        c = np.zeros((2, 2, 2))
        c[0, 0, 1] = -1.0 / lam
        c[0, 1, 0] = 1.0 / lam
        return cls(c)

    @classmethod
    def abelian(cls) -> "LieAlgebra2":
        return cls(np.zeros((2, 2, 2)))


@dataclass(frozen=True)
class InnerProduct:
    gram: np.ndarray = None

    def __post_init__(self):
        g = _frozen(np.eye(2) if self.gram is None else self.gram)
        if g.shape != (2, 2) or np.abs(g - g.T).max() > 1e-12:
            raise ValueError("Gram matrix must be a symmetric 2x2 matrix")
        if abs(np.linalg.det(g)) < 1e-300:
            raise SingularMetricError("Gram matrix is singular")
        if np.linalg.eigvalsh(g).min() <= 0:
            raise ValueError("Gram matrix is not positive definite")
        object.__setattr__(self, "gram", g)

    def __call__(self, u, v) -> float:
        return float(np.asarray(u) @ self.gram @ np.asarray(v))

    def lower(self, comps: np.ndarray) -> np.ndarray:
        """<m(e_i, e_j), e_l> for a vector-valued array comps[k, ...]."""
        return np.tensordot(self.gram, comps, axes=([0], [0]))

    def raise_index(self, lowered: np.ndarray) -> np.ndarray:
        return np.tensordot(np.linalg.inv(self.gram), lowered, axes=([1], [0]))


@dataclass(frozen=True)
class BilinearMap:
    comps: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        m = _frozen(self.comps)
        if m.shape != (2, 2, 2):
            raise ValueError("bilinear map components must be 2x2x2")
        if self.symmetric and np.abs(m - m.transpose(0, 2, 1)).max() > 1e-12:
            raise ValueError("map flagged symmetric but m^k_ij != m^k_ji")
        object.__setattr__(self, "comps", m)

    def __call__(self, X, Y) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.comps, X, Y)

    def __add__(self, other: "BilinearMap") -> "BilinearMap":
        return BilinearMap(self.comps + other.comps, self.symmetric and other.symmetric)

    def __sub__(self, other: "BilinearMap") -> "BilinearMap":
        return BilinearMap(self.comps - other.comps, self.symmetric and other.symmetric)

    def __mul__(self, s: float) -> "BilinearMap":
        return BilinearMap(s * self.comps, self.symmetric)

    __rmul__ = __mul__

    def __neg__(self) -> "BilinearMap":
        return BilinearMap(-self.comps, self.symmetric)

    @property
    def sym(self) -> "BilinearMap":
        return BilinearMap(0.5 * (self.comps + self.comps.transpose(0, 2, 1)), True)

    @property
    def skew(self) -> "BilinearMap":
        return BilinearMap(0.5 * (self.comps - self.comps.transpose(0, 2, 1)))

    @classmethod
    def zero(cls) -> "BilinearMap":
        return cls(np.zeros((2, 2, 2)), True)


@dataclass(frozen=True)
class GroupElement:
    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)) or y <= 0:
            raise DomainError(f"group element needs finite x and y > 0, got ({x!r}, {y!r})")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def matrix(self) -> np.ndarray:
        return np.array([[self.y, self.x], [0.0, 1.0]])

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return group_mul(self, other)


IDENTITY = GroupElement(0.0, 1.0)


def bracket(alg: LieAlgebra2, X, Y) -> np.ndarray:
    return np.einsum("kij,i,j->k", alg.structure, X, Y)


def bracket_map(alg: LieAlgebra2) -> BilinearMap:
    """The bracket itself as a bilinear map."""
    return BilinearMap(alg.structure)


def u_map(alg: LieAlgebra2, ip: InnerProduct | None = None) -> BilinearMap:
    """Symmetric U with 2<U(X,Y),Z> = <[Z,X],Y> + <X,[Z,Y]>."""
    ip = ip or InnerProduct()
    c, g = alg.structure, ip.gram
    # ad_lowered[m, i, j] = <[e_m, e_i], e_j>
    ad_lowered = np.einsum("kmi,kj->mij", c, g)
    rhs = 0.5 * (ad_lowered + ad_lowered.transpose(0, 2, 1))  # rhs[m, i, j] = <U(e_i,e_j), e_m>
    comps = np.linalg.solve(g, rhs.reshape(2, 4)).reshape(2, 2, 2)
    return BilinearMap(comps, True)


def bi_invariance_check(alg: LieAlgebra2, ip: InnerProduct | None = None, tol: float = 1e-12) -> bool:
    return bool(np.abs(u_map(alg, ip).comps).max() < tol)


def levi_civita_left_invariant(alg: LieAlgebra2, ip: InnerProduct | None = None) -> BilinearMap:
    return bracket_map(alg) * 0.5 + u_map(alg, ip)


def torsion(alg: LieAlgebra2, mu: BilinearMap) -> BilinearMap:
    m = mu.comps
    return BilinearMap(-alg.structure + m - m.transpose(0, 2, 1))


def connection_from_nu(alg: LieAlgebra2, nu: BilinearMap) -> BilinearMap:
    """The torsion-free connection with symmetric part nu."""
    if not nu.symmetric and np.abs(nu.comps - nu.comps.transpose(0, 2, 1)).max() > 1e-12:
        raise ValueError("nu must be symmetric")
    return BilinearMap(nu.comps + 0.5 * alg.structure)


def alpha_connection_left_invariant(alpha: float, lam: float = SQRT2) -> BilinearMap:
    lam = _check_lambda(lam)
    m = np.zeros((2, 2, 2))
    m[1, 0, 0] = (1.0 - alpha) / lam
    m[0, 0, 1] = -(1.0 + alpha) / lam
    m[0, 1, 0] = -alpha / lam
    m[1, 1, 1] = -2.0 * alpha / lam
    return BilinearMap(m)


# ---------------------------------------------------------------------------
# the group and its actions


def group_mul(a: GroupElement, b: GroupElement) -> GroupElement:
    return GroupElement(a.y * b.x + a.x, a.y * b.y)


def group_inv(a: GroupElement) -> GroupElement:
    return GroupElement(-a.x / a.y, 1.0 / a.y)


def act_on_line(a: GroupElement, t):
    return a.y * t + a.x


def standardize(mu: float, sigma: float, t):
    """Carry a N(mu, sigma^2) sample to the standard normal scale."""
    return act_on_line(group_inv(GroupElement(mu, sigma)), t)


def left_translation(a: GroupElement, p) -> ChartPoint:
    p = as_point(p)
    return ChartPoint(a.y * p.x + a.x, a.y * p.y)


def left_translation_jacobian(a: GroupElement) -> np.ndarray:
    return a.y * np.eye(2)


def pullback_metric(a: GroupElement, metric_field, p) -> np.ndarray:
    """(L_a^* g)_p = J^T g_{L_a p} J."""
    J = left_translation_jacobian(a)
    return J.T @ np.asarray(metric_field(left_translation(a, p))) @ J


# ---------------------------------------------------------------------------
# frame <-> coordinates


def frame_matrices(lam: float, p):
    """Return (A, dA) with d_i = sum_a A[i, a] e_a and dA[c, i, a] = d_c A[i, a].

    A = diag(1/y, lam/y) comes from psi^{-1} d_x psi = E1/y, psi^{-1} d_y psi = E2/y.
    """
    lam = _check_lambda(lam)
    p = as_point(p)
    y = p.y
    A = np.diag([1.0 / y, lam / y])
    dA = np.zeros((2, 2, 2))
    dA[1] = np.diag([-1.0 / y**2, -lam / y**2])
    return A, dA


def frame_to_coordinates(lam: float, p, tensor, kind: str = "covariant") -> np.ndarray:
    """Express a left-invariant object in chart components at p.

    kind:
      "covariant"  -- any rank, all slots lower (inner products, cubic forms,
                      nabla C); each slot picks up a factor of A.
      "vector"     -- axis 0 is an algebra (upper) index, remaining axes lower;
                      covers K, nabla^g K, curvature.
      "connection" -- a bilinear map mu giving left-invariant nabla; includes
                      the inhomogeneous term from differentiating the frame.
    """
    A, dA = frame_matrices(lam, p)
    B = np.linalg.inv(A)  # e_a = sum_i B[a, i] d_i
    t = np.asarray(getattr(tensor, "comps", getattr(tensor, "gram", getattr(tensor, "components", tensor))), dtype=float)
    if kind == "covariant":
        out = t
        for slot in range(t.ndim):
            out = np.moveaxis(np.tensordot(A, out, axes=([1], [slot])), 0, slot)
        return out
    if kind == "vector":
        out = np.tensordot(B, t, axes=([0], [0]))
        for slot in range(1, t.ndim):
            out = np.moveaxis(np.tensordot(A, out, axes=([1], [slot])), 0, slot)
        return out
    if kind == "connection":
        # nabla_{d_i} d_j = (d_i A[j, b]) e_b + A[i, a] A[j, b] mu(e_a, e_b)
        frame_part = np.einsum("ia,jb,cab->cij", A, A, t) + np.einsum("ijb->bij", dA)
        return np.einsum("ck,cij->kij", B, frame_part)
    raise ValueError(f"unknown tensor kind {kind!r}")
