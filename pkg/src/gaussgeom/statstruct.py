"""Left-invariant statistical structures on the two-dimensional solvable group.

A structure is a symmetric bilinear map ``nu`` on the algebra; the connection
is nabla_X Y = nu(X, Y) + [X, Y]/2.  It is statistical when its cubic form
C = nabla g is totally symmetric.  This module computes C, the skewness
operator K, the dual connection, curvature, and the four symmetry/curvature
conditions that single out the alpha-family.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chart import SQRT2, Tensor3Sym, _check_lambda, symmetry_residual
from .errors import IncompatibleStructureError, RankAnomalyError
from .lie import (
    BilinearMap,
    InnerProduct,
    LieAlgebra2,
    alpha_connection_left_invariant,
    connection_from_nu,
    levi_civita_left_invariant,
    u_map,
)

DEFAULT_TOL = 1e-9
COMPAT_TOL = 1e-9
NULLSPACE_RTOL = 1e-10
CUBIC_PATTERN = np.array([0.0, 1.0, 0.0, 2.0])  # (C111, C112, C122, C222)


@dataclass(frozen=True)
class StatisticalStructure:
    algebra: LieAlgebra2
    ip: InnerProduct
    nu: BilinearMap

    def __post_init__(self):
        if not self.nu.symmetric:
            object.__setattr__(self, "nu", BilinearMap(self.nu.comps, True))

    @property
    def mu(self) -> BilinearMap:
        return connection_from_nu(self.algebra, self.nu)

    @property
    def mu_levi_civita(self) -> BilinearMap:
        return levi_civita_left_invariant(self.algebra, self.ip)

    @classmethod
    def alpha(cls, alpha: float, lam: float = SQRT2) -> "StatisticalStructure":
        alg = LieAlgebra2.scaled_frame(lam)
        return cls(alg, InnerProduct(), alpha_connection_left_invariant(alpha, lam).sym)

    @classmethod
    def levi_civita(cls, algebra: LieAlgebra2, ip: InnerProduct | None = None) -> "StatisticalStructure":
        ip = ip or InnerProduct()
        return cls(algebra, ip, u_map(algebra, ip))

    @classmethod
    def from_cubic(cls, algebra: LieAlgebra2, ip: InnerProduct, cubic) -> "StatisticalStructure":
        """nu = U - K/2 where <K(X,Y),Z> = C(X,Y,Z)."""
        c = np.asarray(getattr(cubic, "components", cubic), dtype=float)
        K = ip.raise_index(c.transpose(2, 0, 1))
        return cls(algebra, ip, u_map(algebra, ip) - BilinearMap(0.5 * K, True))


def cubic_coords_to_tensor(v) -> np.ndarray:
    """(C111, C112, C122, C222) -> the totally symmetric 2x2x2 array."""
    c = np.empty((2, 2, 2))
    for idx in itertools.product(range(2), repeat=3):
        c[idx] = v[sum(idx)]
    return c


def _lowered(ip: InnerProduct, m: BilinearMap) -> np.ndarray:
    # out[z, x, y] = <m(e_x, e_y), e_z>
    return ip.lower(m.comps)


def cubic_left_invariant(s: StatisticalStructure) -> Tensor3Sym:
    """C(X,Y,Z) = -<mu(X,Y),Z> - <Y,mu(X,Z)> on basis triples."""
    ml = _lowered(s.ip, s.mu)
    c = -ml.transpose(1, 2, 0) - ml.transpose(1, 0, 2)
    return Tensor3Sym(c)


def compatibility_residual(s: StatisticalStructure) -> float:
    return symmetry_residual(cubic_left_invariant(s).components)


def compatibility_check(s: StatisticalStructure, tol: float = COMPAT_TOL) -> bool:
    return compatibility_residual(s) < tol


def _require_compatible(s: StatisticalStructure, tol: float = COMPAT_TOL):
    r = compatibility_residual(s)
    if not r < tol:
        raise IncompatibleStructureError(f"cubic form is not totally symmetric (residual {r:.3e})")


def skewness(s: StatisticalStructure, tol: float = COMPAT_TOL) -> BilinearMap:
    """K = 2(U - nu), from nabla - nabla^g = -K/2."""
    _require_compatible(s, tol)
    return (u_map(s.algebra, s.ip) - s.nu) * 2.0


def dual_connection(s: StatisticalStructure) -> BilinearMap:
    """mu* defined by <mu(X,Y),Z> + <Y,mu*(X,Z)> = 0 for left-invariant fields."""
    ml = _lowered(s.ip, s.mu)
    return BilinearMap(s.ip.raise_index(-ml.transpose(2, 1, 0)))


def dual_structure(s: StatisticalStructure) -> StatisticalStructure:
    return StatisticalStructure(s.algebra, s.ip, dual_connection(s).sym)


def nabla_g_K(s: StatisticalStructure) -> np.ndarray:
    """out[l, x, y, z] = ((nabla^g_{e_x} K)(e_y, e_z))^l."""
    K = skewness(s).comps
    mg = s.mu_levi_civita.comps
    return (
        np.einsum("lxm,myz->lxyz", mg, K)
        - np.einsum("lmz,mxy->lxyz", K, mg)
        - np.einsum("lym,mxz->lxyz", K, mg)
    )


def nabla_C(s: StatisticalStructure, which: str = "nabla") -> np.ndarray:
    """out[x, y, z, w] = (nabla_{e_x} C)(e_y, e_z, e_w) for nabla or nabla^g.

    Left-invariant tensors have constant components, so only the connection
    terms survive.
    """
    _require_compatible(s)
    if which in ("nabla", "statistical"):
        m = s.mu.comps
    elif which in ("levi-civita", "g", "levi_civita"):
        m = s.mu_levi_civita.comps
    else:
        raise ValueError(f"which must be 'nabla' or 'levi-civita', got {which!r}")
    c = cubic_left_invariant(s).components
    return -(
        np.einsum("mxy,mzw->xyzw", m, c)
        + np.einsum("mxz,ymw->xyzw", m, c)
        + np.einsum("mxw,yzm->xyzw", m, c)
    )


def curvature_left_invariant(alg: LieAlgebra2, mu: BilinearMap) -> np.ndarray:
    """R[l, k, i, j] with R(e_i, e_j) e_k = sum_l R[l, k, i, j] e_l."""
    m, c = mu.comps, alg.structure
    return (
        np.einsum("lim,mjk->lkij", m, m)
        - np.einsum("ljm,mik->lkij", m, m)
        - np.einsum("mij,lmk->lkij", c, m)
    )


def sectional_curvature_left_invariant(alg: LieAlgebra2, ip: InnerProduct, mu: BilinearMap) -> float:
    R = curvature_left_invariant(alg, mu)
    g = ip.gram
    return float(g[0] @ R[:, 1, 0, 1]) / float(g[0, 0] * g[1, 1] - g[0, 1] ** 2)


def curvature_decomposition_residual(s: StatisticalStructure) -> float:
    """Max-abs gap in R = R^g + [K(X),K(Y)]/4 - ((nabla^g_X K)(Y,.) - (nabla^g_Y K)(X,.))/2."""
    K = skewness(s).comps
    R = curvature_left_invariant(s.algebra, s.mu)
    Rg = curvature_left_invariant(s.algebra, s.mu_levi_civita)
    comm = np.einsum("lim,mjk->lkij", K, K) - np.einsum("ljm,mik->lkij", K, K)
    dK = nabla_g_K(s)  # dK[l, i, j, k]
    diff = np.einsum("lijk->lkij", dK) - np.einsum("ljik->lkij", dK)
    return float(np.abs(R - (Rg + 0.25 * comm - 0.5 * diff)).max())


# ---------------------------------------------------------------------------
# the five conditions


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of the five equivalent checks.

    cond1: the connection is an alpha-connection (``alpha`` holds the value, or None)
    cond2: nabla^g C is totally symmetric
    cond3: nabla C is totally symmetric
    cond4: nabla^g K is totally symmetric
    cond5: the curvature equals the curvature of the dual connection
    """

    alpha: Optional[float]
    cond2: bool
    cond3: bool
    cond4: bool
    cond5: bool
    residuals: dict = field(default_factory=dict)
    tol: float = DEFAULT_TOL

    @property
    def cond1(self) -> bool:
        return self.alpha is not None

    @property
    def conditions(self) -> tuple:
        return (self.cond1, self.cond2, self.cond3, self.cond4, self.cond5)

    @property
    def consistent(self) -> bool:
        """True when the five conditions are all true or all false."""
        return all(self.conditions) or not any(self.conditions)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "cond2": self.cond2,
            "cond3": self.cond3,
            "cond4": self.cond4,
            "cond5": self.cond5,
            "residuals": dict(self.residuals),
        }


def recover_alpha(s: StatisticalStructure, lam: float) -> tuple:
    """Read alpha off mu(e2, e2) = -2 alpha/lam e2 and measure the table mismatch."""
    lam = _check_lambda(lam)
    mu = s.mu.comps
    alpha = -0.5 * lam * mu[1, 1, 1]
    resid = float(np.abs(mu - alpha_connection_left_invariant(alpha, lam).comps).max())
    return alpha, resid


def _residual_sym_tail(t: np.ndarray) -> float:
    # symmetry over the three lower slots of a vector-valued tensor
    return max(float(np.abs(t - t.transpose((0,) + tuple(1 + q for q in perm))).max())
               for perm in itertools.permutations(range(3)))


def verify_conditions(s: StatisticalStructure, lam: float = SQRT2, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Evaluate all five checks with one tolerance; on this group they hold or fail together."""
    _require_compatible(s)
    alpha, r1 = recover_alpha(s, lam)
    r2 = symmetry_residual(nabla_C(s, "levi-civita"))
    r3 = symmetry_residual(nabla_C(s, "nabla"))
    r4 = _residual_sym_tail(nabla_g_K(s))
    R = curvature_left_invariant(s.algebra, s.mu)
    R_dual = curvature_left_invariant(s.algebra, dual_connection(s))
    r5 = float(np.abs(R - R_dual).max())
    residuals = {"cond1": r1, "cond2": r2, "cond3": r3, "cond4": r4, "cond5": r5}
    return VerificationReport(
        alpha=float(alpha) if r1 < tol else None,
        cond2=r2 < tol,
        cond3=r3 < tol,
        cond4=r4 < tol,
        cond5=r5 < tol,
        residuals=residuals,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# linear algebra: compatible structures and the characterization


def nullspace(M: np.ndarray, rtol: float = NULLSPACE_RTOL):
    """Orthonormal nullspace basis (rows) of M, using an SVD threshold relative to s_max."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    _, sv, vt = np.linalg.svd(M)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > rtol * smax)) if smax > 0 else 0
    return vt[rank:], sv


_SYM_PAIRS = ((0, 0), (0, 1), (1, 1))


def _sym_basis() -> list:
    """The six elementary symmetric bilinear maps."""
    out = []
    for k in range(2):
        for i, j in _SYM_PAIRS:
            m = np.zeros((2, 2, 2))
            m[k, i, j] = m[k, j, i] = 1.0
            out.append(m)
    return out


def compatible_nu_directions(alg: LieAlgebra2, ip: InnerProduct | None = None) -> list:
    """Basis of the linear part of the affine space of compatible nu.

    Compatible nu = U + (anything here).  The constraint <nu(Y,Z),X> = <nu(X,Z),Y>
    is solved on the 6-dim space of symmetric nu; the solution space must be
    4-dimensional, one direction per totally symmetric cubic form.
    """
    ip = ip or InnerProduct()
    basis = _sym_basis()
    cols = []
    for m in basis:
        low = ip.lower(m)  # low[x, y, z] = <m(e_y, e_z), e_x>
        cols.append((low - low.transpose(1, 0, 2)).ravel())
    null, _ = nullspace(np.array(cols).T)
    if null.shape[0] != 4:
        raise RankAnomalyError(f"compatible-nu space has dimension {null.shape[0]}, expected 4")
    return [BilinearMap(np.tensordot(v, np.array(basis), axes=1), True) for v in null]


def random_compatible_structure(rng: np.random.Generator, alg: LieAlgebra2, ip: InnerProduct | None = None,
                                scale: float = 1.0) -> StatisticalStructure:
    ip = ip or InnerProduct()
    dirs = compatible_nu_directions(alg, ip)
    coeffs = rng.normal(scale=scale, size=len(dirs))
    nu = u_map(alg, ip)
    for c, d in zip(coeffs, dirs):
        nu = nu + d * c
    return StatisticalStructure(alg, ip, nu)


def perturb_off_family(s: StatisticalStructure, size: float, rng: np.random.Generator) -> StatisticalStructure:
    """Move a structure by ``size`` along a compatible direction transverse to the alpha-family."""
    v = rng.normal(size=4)
    fam = CUBIC_PATTERN / np.linalg.norm(CUBIC_PATTERN)
    v -= (v @ fam) * fam
    v *= size / np.linalg.norm(v)
    base = cubic_left_invariant(s).components
    return StatisticalStructure.from_cubic(s.algebra, s.ip, base + cubic_coords_to_tensor(v))


@dataclass(frozen=True)
class Characterization:
    lam: float
    basis: np.ndarray  # rows in (C111, C112, C122, C222)
    singular_values: np.ndarray
    generator: np.ndarray  # basis vector scaled so C112 = 1

    @property
    def dimension(self) -> int:
        return int(self.basis.shape[0])

    @property
    def pattern_residual(self) -> float:
        return float(np.abs(self.generator - CUBIC_PATTERN).max())

    def alpha_from_p(self, p: float) -> float:
        return p * self.lam / 2.0

    def structure(self, p: float) -> StatisticalStructure:
        alg = LieAlgebra2.scaled_frame(self.lam)
        return StatisticalStructure.from_cubic(alg, InnerProduct(), cubic_coords_to_tensor(p * self.generator))

    def connection_table(self, p: float) -> np.ndarray:
        return self.structure(p).mu.comps


def condition4_matrix(lam: float) -> np.ndarray:
    """8x4 matrix sending (C111, C112, C122, C222) to the X<->Y antisymmetrized
    nabla^g K residual, one row per ordered pair X != Y, Z and output component."""
    lam = _check_lambda(lam)
    alg = LieAlgebra2.scaled_frame(lam)
    ip = InnerProduct()
    mg = levi_civita_left_invariant(alg, ip).comps
    cols = []
    for q in range(4):
        v = np.zeros(4)
        v[q] = 1.0
        K = cubic_coords_to_tensor(v).transpose(2, 0, 1)  # orthonormal frame: K^l_ij = C_ijl
        T = (
            np.einsum("lxm,myz->lxyz", mg, K)
            - np.einsum("lmz,mxy->lxyz", K, mg)
            - np.einsum("lym,mxz->lxyz", K, mg)
        )
        rows = [T[l, x, y, z] - T[l, y, x, z]
                for x, y in ((0, 1), (1, 0)) for z in range(2) for l in range(2)]
        cols.append(rows)
    return np.array(cols).T


def characterize_solutions(lam: float = SQRT2, tol: float = NULLSPACE_RTOL) -> Characterization:
    lam = _check_lambda(lam)
    null, sv = nullspace(condition4_matrix(lam), rtol=tol)
    if null.shape[0] != 1:
        raise RankAnomalyError(f"symmetry-condition nullspace has dimension {null.shape[0]}, expected 1")
    v = null[0]
    if abs(v[1]) < 1e-300:
        gen = np.full(4, math.nan)
    else:
        gen = v / v[1]
    return Characterization(lam=lam, basis=null, singular_values=sv, generator=gen)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepResult:
    lam: float
    tol: float
    reports: list = field(default_factory=list)
    expected_in_family: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.reports)

    @property
    def disagreements(self) -> int:
        """Structures whose five conditions are not all equal."""
        return sum(not r.consistent for r in self.reports)

    @property
    def membership_errors(self) -> int:
        """Structures built on (off) the family that were not (were) recognized as such."""
        return sum(r.cond1 != want for r, want in zip(self.reports, self.expected_in_family))

    def max_residual(self, in_family: bool) -> float:
        vals = [max(r.residuals.values()) for r, f in zip(self.reports, self.expected_in_family) if f == in_family]
        return max(vals) if vals else 0.0

    def min_residual(self, in_family: bool) -> float:
        vals = [min(r.residuals.values()) for r, f in zip(self.reports, self.expected_in_family) if f == in_family]
        return min(vals) if vals else math.inf

    @property
    def passed(self) -> bool:
        return self.disagreements == 0 and self.membership_errors == 0


def equivalence_sweep(n_random: int = 500, n_family: int = 100, lam: float = SQRT2, seed: int = 0,
                      tol: float = DEFAULT_TOL) -> SweepResult:
    """Check the five conditions on random compatible structures and on the alpha-family.

    The random part alternates between generic compatible structures and
    alpha-structures pushed off the family by 10^-4 .. 10^-1 along a
    transverse compatible direction.
    """
    lam = _check_lambda(lam)
    rng = np.random.default_rng(seed)
    alg = LieAlgebra2.scaled_frame(lam)
    ip = InnerProduct()
    out = SweepResult(lam=lam, tol=tol)
    for i in range(n_random):
        if i % 2 == 0:
            s = random_compatible_structure(rng, alg, ip, scale=rng.uniform(0.1, 3.0))
        else:
            base = StatisticalStructure.alpha(rng.uniform(-3, 3), lam)
            s = perturb_off_family(base, 10 ** rng.uniform(-4, -1), rng)
        out.reports.append(verify_conditions(s, lam, tol))
        out.expected_in_family.append(False)
    for _ in range(n_family):
        s = StatisticalStructure.alpha(rng.uniform(-5, 5), lam)
        out.reports.append(verify_conditions(s, lam, tol))
        out.expected_in_family.append(True)
    return out
