"""Lyapunov-inequality certification and the principal Dirichlet eigenvalue of T_alpha u + lam u = 0."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .calculus import SmoothProbe
from .core import (
    GridFunction,
    Interval,
    Order,
    ScalarFunction,
    build_weighted_quadrature,
    uniform_grid,
    weighted_integral,
)
from .linear import GreenKernel, green_integral

CERTIFY_TOL = 1e-10


class EigenConvergenceError(RuntimeError):
    pass


class HypothesisViolation(ValueError):
    """The function handed to the Borg evaluator is not positive inside (a, b)."""


@dataclass(frozen=True)
class LyapunovReport:
    weighted_q_integral: float
    bound: float
    margin: float
    certified: bool
    alpha: float
    interval: Interval

    def to_dict(self) -> dict:
        return {
            "a": self.interval.a,
            "b": self.interval.b,
            "alpha": self.alpha,
            "weighted_q_integral": self.weighted_q_integral,
            "bound": self.bound,
            "margin": self.margin,
            "certified": self.certified,
        }


def weighted_q_norm(q: ScalarFunction, interval: Interval, order: Order, rule_size: int = 64) -> float:
    """Integral of |q(s)| (s - a)**(alpha - 2) over [a, b]."""
    rule = build_weighted_quadrature(interval, order, rule_size)
    return weighted_integral(rule, lambda s: np.abs(np.asarray(q(s), dtype=float)))


def lyapunov_check(q: ScalarFunction, interval: Interval, order: Order, rule_size: int = 64) -> LyapunovReport:
    """Evaluate the necessary condition integral |q| rho >= 4/(b - a).

    An uncertified report means T_alpha u + q u = 0 with Dirichlet
    conditions admits only the trivial solution.
    """
    value = weighted_q_norm(q, interval, order, rule_size)
    bound = 4.0 / interval.length()
    margin = value - bound
    return LyapunovReport(value, bound, margin, bool(margin >= -CERTIFY_TOL), order.alpha, interval)


@dataclass(frozen=True)
class EigenResult:
    lambda1: float
    eigenfunction: GridFunction
    discretization_size: int
    estimated_error: float
    lambda1_extrapolated: float
    symmetric_gap: float
    iterations: int


def nystrom_matrix(interval: Interval, order: Order, n: int):
    """K[i, j] = G(s_i, s_j) w_j on the n-point Gauss-Jacobi rule for rho."""
    rule = build_weighted_quadrature(interval, order, n, levels=0)
    s, w = rule.nodes, rule.weights
    K = GreenKernel(interval)(s[:, None], s[None, :]) * w[None, :]
    return K, s, w


def power_iteration(K: np.ndarray, tol: float = 1e-12, max_steps: int = 10_000):
    """Dominant eigenpair of a matrix with a positive dominant eigenvalue."""
    v = np.ones(K.shape[0]) / np.sqrt(K.shape[0])
    mu = 0.0
    for step in range(1, max_steps + 1):
        Kv = K @ v
        mu_new = float(v @ Kv) / float(v @ v)
        v = Kv / np.linalg.norm(Kv)
        if step > 1 and abs(mu_new - mu) <= tol * abs(mu_new):
            return mu_new, v, step
        mu = mu_new
    raise EigenConvergenceError(f"power iteration stagnated after {max_steps} steps (last estimate {mu})")


def _lambda1(interval: Interval, order: Order, n: int):
    K, s, w = nystrom_matrix(interval, order, n)
    mu, v, steps = power_iteration(K)
    # D^(1/2) K D^(-1/2) is symmetric because G is; its top eigenvalue must agree
    sw = np.sqrt(w)
    S = sw[:, None] * GreenKernel(interval)(s[:, None], s[None, :]) * sw[None, :]
    mu_sym = float(np.linalg.eigvalsh(S)[-1])
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return 1.0 / mu, v, s, abs(mu - mu_sym) / mu_sym, steps


def principal_eigenvalue(interval: Interval, order: Order, n: int = 256, n_grid: int = 201) -> EigenResult:
    """Smallest positive lam with a nontrivial Dirichlet solution of T_alpha u + lam u = 0.

    Nystrom discretization of u = lam * integral G rho u on n Gauss-Jacobi
    nodes, solved by power iteration; the same is done at 2n and the
    O(n**-2) Richardson difference gives the error estimate. The
    eigenfunction is the operator applied once more to a spline of the nodal
    eigenvector, sampled on a uniform grid of ``n_grid`` points.
    """
    if n < 8:
        raise ValueError(f"n must be >= 8, got {n}")
    lam, v, s, gap, steps = _lambda1(interval, order, n)
    lam2, *_ = _lambda1(interval, order, 2 * n)
    extrapolated = lam2 + (lam2 - lam) / 3.0
    error = abs(extrapolated - lam)

    nodal = GridFunction(np.concatenate([[interval.a], s, [interval.b]]),
                         np.concatenate([[0.0], v, [0.0]]))
    grid = uniform_grid(interval, n_grid)
    values = np.zeros(n_grid)
    values[1:-1] = lam * green_integral(interval, order, grid[1:-1], nodal)
    values /= np.max(np.abs(values))
    return EigenResult(lam, GridFunction(grid, values), n, error, extrapolated, gap, steps)


def sharpness_probe(interval: Interval, order: Order, n: int = 256) -> float:
    """lambda1 * integral(rho) / (4/(b - a)); at least 1 by the Lyapunov inequality."""
    lam = principal_eigenvalue(interval, order, n).lambda1
    return lam * interval.weight_mass(order) / (4.0 / interval.length())


BORG_TRUNCATIONS = tuple(10.0 ** -k for k in range(2, 9))
BORG_BLOWUP = 1e12


def borg_ratio(u: SmoothProbe, interval: Interval, samples: int = 10_000) -> float:
    """Integral of |u''|/u over (a, b) divided by 4/(b - a), for u > 0 inside.

    The integral is taken adaptively over [a + d L, b - d L] for shrinking
    fractions d from 1e-2 down to 1e-8. Truncation only lowers the value, so
    the inequality direction is kept. If the partial integrals exceed 1e12
    or their increments stop shrinking, the integral is reported divergent
    and the ratio is +inf.
    """
    a, b = interval.a, interval.b
    L = interval.length()
    ts = np.linspace(a, b, samples + 2)[1:-1]
    us = u.value(ts)
    if np.any(us <= 0):
        i = int(np.argmax(us <= 0))
        raise HypothesisViolation(f"u must be positive on (a, b); u({ts[i]!r}) = {us[i]!r}")

    def integrand(t):
        return float(abs(u.second(t)) / u.value(t))

    def piece(lo, hi):
        # divergent integrands trip QUADPACK warnings; the partial-sum test below decides instead
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return integrate.quad(integrand, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-11)[0]

    partial = []
    total = 0.0
    lo_prev, hi_prev = None, None
    for d in BORG_TRUNCATIONS:
        lo, hi = a + d * L, b - d * L
        if lo_prev is None:
            total = piece(lo, hi)
        else:
            total += piece(lo, lo_prev) + piece(hi_prev, hi)
        partial.append(total)
        lo_prev, hi_prev = lo, hi
        if total > BORG_BLOWUP:
            return float("inf")
    increments = np.diff(partial)
    # convergent tails shrink with d; a logarithmic divergence adds a fixed amount per decade
    if increments[-1] > 1e-3 * max(increments[0], np.finfo(float).tiny):
        return float("inf")
    return partial[-1] / (4.0 / L)
