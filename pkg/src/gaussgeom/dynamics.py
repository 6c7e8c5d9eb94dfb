"""Alpha-geodesics on the chart and natural-gradient fitting of a normal model."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .chart import SQRT2, ChartPoint, alpha_christoffels, metric_at
from .errors import BoundaryEvent, DivergenceError, DomainError, StepSizeError
from .quadrature import GaussianParam

Y_BOUNDARY = 1e-9
SIGMA_RANGE = (1e-9, 1e9)


@dataclass(frozen=True)
class GeodesicState:
    point: ChartPoint
    velocity: tuple

    def __post_init__(self):
        v = tuple(float(c) for c in self.velocity)
        if len(v) != 2:
            raise ValueError("velocity must have two components")
        object.__setattr__(self, "velocity", v)

    def as_array(self) -> np.ndarray:
        return np.array([self.point.x, self.point.y, *self.velocity])


@dataclass(frozen=True)
class SampleSet:
    data: tuple

    def __post_init__(self):
        d = tuple(float(t) for t in self.data)
        if len(d) < 2:
            raise DomainError("a sample set needs at least two observations")
        if not all(math.isfinite(t) for t in d):
            raise DomainError("sample set contains non-finite values")
        object.__setattr__(self, "data", d)

    def __len__(self):
        return len(self.data)

    def array(self) -> np.ndarray:
        return np.asarray(self.data)

    def mle(self) -> GaussianParam:
        """Closed-form maximum-likelihood estimate (std with 1/n normalization)."""
        a = self.array()
        return GaussianParam(a.mean(), a.std())

    @classmethod
    def from_file(cls, path) -> "SampleSet":
        values = []
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    values.extend(float(tok) for tok in line.replace(",", " ").split())
        return cls(values)


def _rhs(state: np.ndarray, alpha: float, lam: float) -> np.ndarray:
    x, y, vx, vy = state
    gam = alpha_christoffels(alpha, lam, ChartPoint(x, y))
    v = state[2:]
    acc = -np.einsum("kij,i,j->k", gam, v, v)
    return np.array([vx, vy, acc[0], acc[1]])


def integrate_geodesic(alpha: float, lam: float, init: GeodesicState, step: float, n_steps: int,
                       y_min: float = Y_BOUNDARY) -> list:
    """Classical fixed-step RK4 for x'' + Gamma(x', x') = 0.

    Returns ``n_steps + 1`` states including the initial one.  Raises
    BoundaryEvent (carrying the partial trajectory) if y drops to ``y_min``.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    s = init.as_array()
    traj = [init]
    for n in range(n_steps):
        try:
            k1 = _rhs(s, alpha, lam)
            k2 = _rhs(s + 0.5 * step * k1, alpha, lam)
            k3 = _rhs(s + 0.5 * step * k2, alpha, lam)
            k4 = _rhs(s + step * k3, alpha, lam)
        except DomainError as exc:
            raise BoundaryEvent(f"stage left the half-plane at step {n}: {exc}", traj) from exc
        s = s + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(s)):
            raise StepSizeError(f"non-finite state at step {n + 1}; reduce the step size")
        # RK4 truncation scales like step^5 |k4 - k1|; blow-up means the step is hopeless
        if step * np.abs(k4 - k1).max() > 1e3 * (1.0 + np.abs(s).max()):
            raise StepSizeError(f"stage derivatives exploded at step {n + 1}; reduce the step size")
        if s[1] <= y_min:
            raise BoundaryEvent(f"y = {s[1]:.3e} reached the boundary at step {n + 1}", traj)
        traj.append(GeodesicState(ChartPoint(s[0], s[1]), (s[2], s[3])))
    return traj


def speed_squared(lam: float, state: GeodesicState) -> float:
    g = metric_at(lam, state.point)
    return g(state.velocity, state.velocity)


def trajectory_csv(traj: Sequence[GeodesicState], step: float) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "t", "x", "y", "vx", "vy"])
    for i, st in enumerate(traj):
        w.writerow([i, repr(i * step), repr(st.point.x), repr(st.point.y),
                    repr(st.velocity[0]), repr(st.velocity[1])])
    return buf.getvalue()


def vertical_geodesic_y(y0: float, v0: float, t, alpha: float = 0.0):
    """Closed-form y(t) for x' = 0: y'' = (1 + 2 alpha) y'^2 / y."""
    k = 1.0 + 2.0 * alpha
    t = np.asarray(t, dtype=float)
    if abs(k - 1.0) < 1e-15:
        return y0 * np.exp(v0 * t / y0)
    return (y0 ** (1 - k) + (1 - k) * v0 * y0 ** (-k) * t) ** (1.0 / (1 - k))


# ---------------------------------------------------------------------------
# fitting


def nll(theta: GaussianParam, s: SampleSet) -> float:
    d = s.array() - theta.mu
    n = len(s)
    return 0.5 * n * math.log(2 * math.pi) + n * math.log(theta.sigma) + float(d @ d) / (2 * theta.sigma ** 2)


def nll_gradient(theta: GaussianParam, s: SampleSet) -> np.ndarray:
    d = s.array() - theta.mu
    sig = theta.sigma
    return np.array([-d.sum() / sig ** 2, len(s) / sig - float(d @ d) / sig ** 3])


class FitResult(NamedTuple):
    theta: GaussianParam
    iterations: int
    converged: bool


def _check_sigma(sigma: float, it: int):
    lo, hi = SIGMA_RANGE
    if not (lo < sigma < hi) or not math.isfinite(sigma):
        raise DivergenceError(f"sigma = {sigma!r} left ({lo:g}, {hi:g}) at iteration {it}")


def natural_gradient_fit(s: SampleSet, init: GaussianParam, rate: float = 1.0, tol: float = 1e-10,
                         max_iter: int = 200) -> FitResult:
    """theta <- theta - rate * G^{-1} grad NLL, G = n * Fisher metric at theta.

    The NLL is summed over the sample, so the matching Fisher information is n
    times the single-observation metric (dmu^2 + 2 dsigma^2)/sigma^2.
    """
    if not 0 < rate <= 1:
        raise ValueError("rate must lie in (0, 1]")
    if s.array().std() == 0.0:
        raise DivergenceError("all observations are equal; the MLE has sigma = 0, off the manifold")
    n = len(s)
    theta = init
    for it in range(max_iter + 1):
        grad = nll_gradient(theta, s)
        if np.linalg.norm(grad) < tol:
            return FitResult(theta, it, True)
        if it == max_iter:
            break
        G = n * metric_at(SQRT2, theta.as_point()).components
        mu, sigma = np.array([theta.mu, theta.sigma]) - rate * np.linalg.solve(G, grad)
        _check_sigma(sigma, it + 1)
        theta = GaussianParam(mu, sigma)
    return FitResult(theta, max_iter, False)


def gradient_fit(s: SampleSet, init: GaussianParam, rate: float = 1e-2, tol: float = 1e-10,
                 max_iter: int = 10000) -> FitResult:
    """Plain gradient descent on the mean NLL, for comparison with the natural step."""
    n = len(s)
    theta = init
    for it in range(max_iter + 1):
        grad = nll_gradient(theta, s)
        if np.linalg.norm(grad) < tol:
            return FitResult(theta, it, True)
        if it == max_iter:
            break
        mu, sigma = np.array([theta.mu, theta.sigma]) - rate * grad / n
        _check_sigma(sigma, it + 1)
        theta = GaussianParam(mu, sigma)
    return FitResult(theta, max_iter, False)
