"""Tensor calculus on the upper half-plane chart (x, y) = (mu, sigma).

Index conventions used throughout:

* Christoffel symbols ``gamma[k, i, j]`` mean Gamma^k_{ij}, so that
  ``nabla_{d_i} d_j = sum_k gamma[k, i, j] d_k``.
* Curvature ``R[l, k, i, j]`` means R(d_i, d_j) d_k = sum_l R^l_{kij} d_l with
  R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y].
* Covariant tensors are plain arrays with one axis per slot.

Every closed form in here has a finite-difference counterpart so the two can
be checked against each other.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DegeneratePlaneError, DomainError, SingularMetricError

SQRT2 = math.sqrt(2.0)
Y_MIN = 1e-12
DEFAULT_H = 1e-5

TensorField = Callable[["ChartPoint"], np.ndarray]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be positive and finite, got {lam!r}")
    return lam


@dataclass(frozen=True)
class ChartPoint:
    """A point of the half-plane; ``x`` plays the mean, ``y`` the standard deviation."""

    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DomainError(f"non-finite chart point ({x!r}, {y!r})")
        if y < Y_MIN:
            raise DomainError(f"y must be > {Y_MIN:g}, got {y!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def mu(self) -> float:
        return self.x

    @property
    def sigma(self) -> float:
        return self.y

    def coords(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def moved(self, axis: int, delta: float) -> "ChartPoint":
        if axis == 0:
            return ChartPoint(self.x + delta, self.y)
        return ChartPoint(self.x, self.y + delta)


def as_point(p) -> ChartPoint:
    if isinstance(p, ChartPoint):
        return p
    x, y = p
    return ChartPoint(x, y)


@dataclass(frozen=True)
class MetricTensor:
    components: np.ndarray

    def __post_init__(self):
        g = _frozen(self.components)
        if g.shape != (2, 2):
            raise ValueError(f"metric must be 2x2, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise DomainError("metric has non-finite components")
        if abs(g[0, 1] - g[1, 0]) > 1e-12 * max(1.0, np.abs(g).max()):
            raise ValueError("metric is not symmetric")
        if not (g[0, 0] > 0 and np.linalg.det(g) > 0):
            raise ValueError("metric is not positive definite")
        object.__setattr__(self, "components", g)

    @property
    def det(self) -> float:
        g = self.components
        return float(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0])

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.components)

    def __call__(self, u, v) -> float:
        return float(np.asarray(u) @ self.components @ np.asarray(v))


@dataclass(frozen=True)
class Tensor3Sym:
    """Rank-3 covariant tensor, e.g. a cubic form.

    ``basepoint`` is None for tensors living on the Lie algebra.
    """

    components: np.ndarray
    basepoint: Optional[ChartPoint] = None

    def __post_init__(self):
        c = _frozen(self.components)
        if c.shape != (2, 2, 2):
            raise ValueError(f"expected a 2x2x2 array, got shape {c.shape}")
        object.__setattr__(self, "components", c)

    def __getitem__(self, idx):
        return self.components[idx]

    def symmetry_residual(self) -> float:
        return symmetry_residual(self.components)

    def is_symmetric(self, tol: float = 1e-7) -> bool:
        return self.symmetry_residual() < tol


@dataclass(frozen=True)
class CurvatureTensor:
    components: np.ndarray

    def __post_init__(self):
        r = _frozen(self.components)
        if r.shape != (2, 2, 2, 2):
            raise ValueError(f"expected a 2x2x2x2 array, got shape {r.shape}")
        object.__setattr__(self, "components", r)

    def antisymmetry_residual(self) -> float:
        r = self.components
        return float(np.abs(r + r.transpose(0, 1, 3, 2)).max())


@dataclass(frozen=True)
class ConnectionField:
    """Coordinate Christoffel symbols as a function of the point.

    ``alpha`` is set only for members of the alpha-family.
    """

    gamma: TensorField
    lam: float = SQRT2
    alpha: Optional[float] = None
    name: str = field(default="", compare=False)

    def __call__(self, p) -> np.ndarray:
        return np.asarray(self.gamma(as_point(p)), dtype=float)

    def torsion_residual(self, p) -> float:
        g = self(p)
        return float(np.abs(g - g.transpose(0, 2, 1)).max())


def symmetry_residual(t: np.ndarray) -> float:
    """Max |T - T o perm| over all permutations of the axes."""
    t = np.asarray(t)
    worst = 0.0
    for perm in itertools.permutations(range(t.ndim)):
        worst = max(worst, float(np.abs(t - t.transpose(perm)).max()))
    return worst


# ---------------------------------------------------------------------------
# closed forms


def metric_at(lam: float, p) -> MetricTensor:
    """Left-invariant metric (dx^2 + lam^2 dy^2) / y^2; lam = sqrt(2) is Fisher."""
    lam = _check_lambda(lam)
    p = as_point(p)
    y2 = p.y * p.y
    return MetricTensor(np.diag([1.0 / y2, lam * lam / y2]))


def metric_field(lam: float) -> TensorField:
    lam = _check_lambda(lam)
    return lambda p: metric_at(lam, p).components


def alpha_christoffels(alpha: float, lam: float, p) -> np.ndarray:
    lam = _check_lambda(lam)
    p = as_point(p)
    y = p.y
    gamma = np.zeros((2, 2, 2))
    gamma[1, 0, 0] = (1.0 - alpha) / (lam * lam * y)
    gamma[0, 0, 1] = gamma[0, 1, 0] = -(1.0 + alpha) / y
    gamma[1, 1, 1] = -(1.0 + 2.0 * alpha) / y
    return gamma


def alpha_connection(alpha: float, lam: float = SQRT2) -> ConnectionField:
    lam = _check_lambda(lam)
    alpha = float(alpha)
    return ConnectionField(
        gamma=lambda p: alpha_christoffels(alpha, lam, p),
        lam=lam,
        alpha=alpha,
        name=f"alpha={alpha:g}",
    )


def cubic_form_closed(lam: float, p) -> Tensor3Sym:
    """Cubic form of the alpha = 1 structure in coordinates.

    Nonzero entries are C_xxy (and permutations) = 2/y^3 and C_yyy = 4 lam^2/y^3.
    """
    lam = _check_lambda(lam)
    p = as_point(p)
    y3 = p.y ** 3
    c = np.zeros((2, 2, 2))
    c[0, 0, 1] = c[0, 1, 0] = c[1, 0, 0] = 2.0 / y3
    c[1, 1, 1] = 4.0 * lam * lam / y3
    return Tensor3Sym(c, basepoint=p)


def cubic_field(lam: float) -> TensorField:
    lam = _check_lambda(lam)
    return lambda p: cubic_form_closed(lam, p).components


# ---------------------------------------------------------------------------
# finite-difference machinery


def partials(f: TensorField, p, h: float = DEFAULT_H) -> np.ndarray:
    """Central differences of a tensor field; result[i] = d_i f at p.

    The step in both directions is ``h * y``.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    p = as_point(p)
    step = h * p.y
    out = []
    for axis in (0, 1):
        fp = np.asarray(f(p.moved(axis, step)), dtype=float)
        fm = np.asarray(f(p.moved(axis, -step)), dtype=float)
        out.append((fp - fm) / (2.0 * step))
    return np.stack(out)


def levi_civita_fd(metric_field: TensorField, p, h: float = DEFAULT_H, det_tol: float = 1e-300) -> np.ndarray:
    p = as_point(p)
    g = np.asarray(metric_field(p), dtype=float)
    if abs(np.linalg.det(g)) < det_tol:
        raise SingularMetricError(f"metric is singular at {p}")
    ginv = np.linalg.inv(g)
    dg = partials(metric_field, p, h)  # dg[i, j, l] = d_i g_jl
    # lowered[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    lowered = dg.transpose(2, 0, 1) + dg.transpose(2, 1, 0) - dg
    return 0.5 * np.einsum("kl,lij->kij", ginv, lowered)


def levi_civita_connection(metric_field: TensorField, h: float = DEFAULT_H, lam: float = SQRT2) -> ConnectionField:
    return ConnectionField(
        gamma=lambda p: levi_civita_fd(metric_field, p, h),
        lam=lam,
        name="levi-civita (fd)",
    )


def curvature_fd(conn: ConnectionField, p, h: float = DEFAULT_H) -> CurvatureTensor:
    p = as_point(p)
    gam = conn(p)
    dgam = partials(conn, p, h)  # dgam[i, l, j, k] = d_i Gamma^l_jk
    r = (
        np.einsum("iljk->lkij", dgam)
        - np.einsum("jlik->lkij", dgam)
        + np.einsum("lim,mjk->lkij", gam, gam)
        - np.einsum("ljm,mik->lkij", gam, gam)
    )
    return CurvatureTensor(r)


def sectional_curvature(metric: MetricTensor, R: CurvatureTensor, tol: float = 1e-300) -> float:
    g = metric.components
    denom = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    if denom < tol:
        raise DegeneratePlaneError("coordinate plane is degenerate for this metric")
    # g(R(dx, dy) dy, dx)
    num = float(g[0] @ R.components[:, 1, 0, 1])
    return num / denom


def covariant_derivative(conn: ConnectionField, tensor_field: TensorField, p, h: float = DEFAULT_H) -> np.ndarray:
    """Covariant derivative of a fully covariant tensor field.

    Returns an array with a new leading axis: out[i, ...] = (nabla_i T)_{...}.
    """
    p = as_point(p)
    gam = conn(p)
    t = np.asarray(tensor_field(p), dtype=float)
    out = partials(tensor_field, p, h)
    for slot in range(t.ndim):
        # sum_m Gamma^m_{i j_slot} T_{.. m ..}
        term = np.tensordot(gam, t, axes=([0], [slot]))
        out = out - np.moveaxis(term, 1, slot + 1)
    return out


def covariant_derivative_t3(conn: ConnectionField, C_field: TensorField, p, h: float = DEFAULT_H) -> np.ndarray:
    return covariant_derivative(conn, C_field, p, h)
