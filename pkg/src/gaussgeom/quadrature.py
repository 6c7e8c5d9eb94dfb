"""Gauss-Hermite expectations under a normal density.

The Fisher metric and the cubic form of the normal family are defined as
expectations of products of score functions.  Here they are recomputed
directly from those definitions, independently of the geometric closed forms
in :mod:`gaussgeom.chart`.

For t ~ N(mu, sigma^2), substitute t = mu + sqrt(2) sigma u so that

    E[f] = pi^{-1/2} * int f(mu + sqrt(2) sigma u) exp(-u^2) du
         ~ pi^{-1/2} * sum_i w_i f(mu + sqrt(2) sigma u_i).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chart import MetricTensor, Tensor3Sym, ChartPoint
from .errors import DomainError, NonFiniteError

MAX_ORDER = 200
DEFAULT_ORDER = 16
_PI_M4 = math.pi ** -0.25


@dataclass(frozen=True)
class GaussianParam:
    mu: float
    sigma: float

    def __post_init__(self):
        mu, sigma = float(self.mu), float(self.sigma)
        if not math.isfinite(mu) or not math.isfinite(sigma):
            raise DomainError("non-finite Gaussian parameter")
        if sigma <= 0.0:
            raise DomainError(f"sigma must be positive, got {sigma!r}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    def as_point(self) -> ChartPoint:
        return ChartPoint(self.mu, self.sigma)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        for name in ("nodes", "weights"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)


def _hermite_orthonormal(z: float, n: int):
    """Orthonormal Hermite polynomials p_n(z), p_{n-1}(z) by recurrence."""
    p1, p2 = _PI_M4, 0.0
    for j in range(1, n + 1):
        p3 = p2
        p2 = p1
        p1 = z * math.sqrt(2.0 / j) * p2 - math.sqrt((j - 1) / j) * p3
    return p1, p2


def _polish_roots(lo: np.ndarray, hi: np.ndarray, n: int) -> np.ndarray:
    """Newton on p_n inside sign-change brackets, bisecting when a step leaves its bracket."""
    f_lo = _hermite_orthonormal(lo, n)[0]
    z = 0.5 * (lo + hi)
    for _ in range(200):
        p1, p2 = _hermite_orthonormal(z, n)
        same = np.sign(p1) == np.sign(f_lo)
        lo = np.where(same, z, lo)
        f_lo = np.where(same, p1, f_lo)
        hi = np.where(same, hi, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            z_new = z - p1 / (math.sqrt(2.0 * n) * p2)  # p_n' = sqrt(2n) p_{n-1}
        outside = ~((lo < z_new) & (z_new < hi))
        z_new = np.where(outside | (p1 == 0.0), np.where(p1 == 0.0, z, 0.5 * (lo + hi)), z_new)
        done = np.abs(z_new - z) <= 4e-16 * np.maximum(1.0, np.abs(z))
        z = z_new
        if done.all():
            return z
    raise ArithmeticError(f"Hermite roots of order {n} did not converge")


@lru_cache(maxsize=None)
def _hermite_nodes_weights(n: int):
    # All roots lie in (-sqrt(2n+1), sqrt(2n+1)) and are at least ~pi/sqrt(2n+1)
    # apart, so a grid ten times finer than that brackets each positive root.
    bound = math.sqrt(2.0 * n + 1.0)
    h = 0.1 * math.pi / bound
    grid = np.arange(0.5 * h, bound + h, h)
    vals = _hermite_orthonormal(grid, n)[0]
    flips = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if len(flips) != n // 2:
        raise ArithmeticError(f"bracketed {len(flips)} positive roots for order {n}, expected {n // 2}")
    positive = _polish_roots(grid[flips], grid[flips + 1], n)
    roots = np.concatenate([-positive[::-1], [0.0] if n % 2 else [], positive])
    pp = math.sqrt(2.0 * n) * np.broadcast_to(_hermite_orthonormal(roots, n)[1], roots.shape)
    weights = 2.0 / (pp * pp)
    # enforce exact mirror symmetry
    weights = 0.5 * (weights + weights[::-1])
    return roots, weights


def hermite_rule(n: int = DEFAULT_ORDER) -> QuadratureRule:
    """n-point Gauss-Hermite rule for the weight exp(-u^2), 1 <= n <= 200."""
    if isinstance(n, bool) or int(n) != n or not 1 <= n <= MAX_ORDER:
        raise DomainError(f"rule order must be an integer in [1, {MAX_ORDER}], got {n!r}")
    nodes, weights = _hermite_nodes_weights(int(n))
    return QuadratureRule(nodes, weights, int(n))


def expectation(f, theta: GaussianParam, rule: QuadratureRule) -> float:
    """E_theta[f(t)] by Gauss-Hermite quadrature; ``f`` must accept an array of t."""
    t = theta.mu + math.sqrt(2.0) * theta.sigma * rule.nodes
    vals = np.asarray(f(t), dtype=float)
    if vals.shape != t.shape:
        vals = np.broadcast_to(vals, t.shape)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError("integrand is not finite at every quadrature node")
    return float(rule.weights @ vals) / math.sqrt(math.pi)


def score(theta: GaussianParam, t):
    """(d/dmu log p, d/dsigma log p) at t; works elementwise on arrays."""
    d = np.asarray(t, dtype=float) - theta.mu
    s = theta.sigma
    return d / (s * s), -1.0 / s + d * d / (s ** 3)


def _score_product(theta: GaussianParam, idx):
    idx = list(idx)
    return lambda t: np.prod(np.stack(score(theta, t))[idx], axis=0)


def fisher_matrix_numeric(theta: GaussianParam, rule: QuadratureRule) -> np.ndarray:
    """Raw quadrature Fisher matrix; not validated, so low-order rules can be inspected."""
    g = np.empty((2, 2))
    for i, j in itertools.product(range(2), repeat=2):
        g[i, j] = expectation(_score_product(theta, (i, j)), theta, rule)
    return g


def fisher_metric_numeric(theta: GaussianParam, rule: QuadratureRule) -> MetricTensor:
    return MetricTensor(fisher_matrix_numeric(theta, rule))


def cubic_numeric(theta: GaussianParam, rule: QuadratureRule) -> Tensor3Sym:
    c = np.empty((2, 2, 2))
    for idx in itertools.product(range(2), repeat=3):
        c[idx] = expectation(_score_product(theta, idx), theta, rule)
    return Tensor3Sym(c, basepoint=theta.as_point())
