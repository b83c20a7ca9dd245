"""Shared types, grids and quadrature against the weight (s - a)**(alpha - 2).

The weighted rule is a composite Gauss rule on a geometric mesh graded toward
the singular endpoint. Every panel is a genuine Gauss rule for the weight, so
the composite rule integrates ``p(s) * (s - a)**(alpha - 2)`` exactly for
polynomials ``p`` of degree ``2 * n_points - 1``; the grading additionally
resolves integrands that carry their own algebraic factor ``(s - a)**gamma``,
which is what appears once a conformable derivative is fed back through the
integral.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.linalg import eigh_tridiagonal
from scipy.special import roots_jacobi

ScalarFunction = Callable[[np.ndarray], np.ndarray]

#: Geometric ratio between consecutive panels of the graded mesh.
GRADING_RATIO = 0.2
#: Number of graded panels placed in front of the innermost Gauss-Jacobi panel.
GRADING_LEVELS = 14


class DomainError(ValueError):
    """An argument lies outside the domain where an operator is defined."""


class QuadratureEvaluationError(ArithmeticError):
    """The integrand produced a non-finite value at a quadrature node."""

    def __init__(self, node: float, value: float):
        self.node = node
        self.value = value
        super().__init__(f"integrand is not finite at node s={node!r} (value {value!r})")


@dataclass(frozen=True)
class Order:
    """Conformable order ``alpha`` restricted to the open interval (1, 2)."""

    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not np.isfinite(alpha) or not 1.0 < alpha < 2.0:
            raise DomainError(f"order alpha must satisfy 1 < alpha < 2, got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)

    def beta(self) -> float:
        return self.alpha - 1.0

    def weight_exponent(self) -> float:
        return self.alpha - 2.0


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (np.isfinite(a) and np.isfinite(b)):
            raise DomainError(f"interval endpoints must be finite, got [{self.a!r}, {self.b!r}]")
        if not a < b:
            raise DomainError(f"interval requires a < b, got [{a!r}, {b!r}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def length(self) -> float:
        return self.b - self.a

    def contains(self, t) -> bool:
        t = np.asarray(t, dtype=float)
        return bool(np.all((t >= self.a) & (t <= self.b)))

    def weight(self, s, order: Order) -> np.ndarray:
        """rho(s) = (s - a)**(alpha - 2)."""
        return (np.asarray(s, dtype=float) - self.a) ** order.weight_exponent()

    def weight_mass(self, order: Order) -> float:
        """Exact value of the integral of rho over [a, b]."""
        return self.length() ** order.beta() / order.beta()


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on a strictly increasing node set.

    Off-node evaluation uses a not-a-knot cubic spline by default
    (``kind="spline"``, fourth order, exact on quadratics) or the monotone
    Hermite variant (``kind="pchip"``), which never overshoots the data but
    drops to second order at local extrema.
    """

    nodes: np.ndarray
    values: np.ndarray
    kind: str = "spline"
    _interp: object = field(init=False, repr=False)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        values = np.array(self.values, dtype=float)
        if nodes.ndim != 1 or values.shape != nodes.shape:
            raise ValueError("nodes and values must be 1-d arrays of the same length")
        if nodes.size < 3:
            raise ValueError(f"a grid function needs at least 3 nodes, got {nodes.size}")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        nodes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        if self.kind == "spline":
            interp = CubicSpline(nodes, values, bc_type="not-a-knot")
        elif self.kind == "pchip":
            interp = PchipInterpolator(nodes, values)
        else:
            raise ValueError(f"unknown interpolation kind {self.kind!r}")
        object.__setattr__(self, "_interp", interp)

    @property
    def interval(self) -> Interval:
        return Interval(self.nodes[0], self.nodes[-1])

    def __len__(self) -> int:
        return self.nodes.size

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        # clip guards against last-ulp excursions of quadrature nodes
        return self._interp(np.clip(t, self.nodes[0], self.nodes[-1]))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def basis(self, t) -> np.ndarray:
        """Matrix B with ``self(t) == B @ self.values``; shape t.shape + (len(self),).

        Only the spline rule is linear in the data, so pchip grids raise.
        """
        if self.kind != "spline":
            raise ValueError("basis matrices exist only for the linear spline rule")
        t = np.clip(np.asarray(t, dtype=float), self.nodes[0], self.nodes[-1])
        return CubicSpline(self.nodes, np.eye(self.nodes.size), bc_type="not-a-knot")(t)

    @classmethod
    def sample(cls, fn: ScalarFunction, nodes, kind: str = "spline") -> GridFunction:
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, evaluate(fn, nodes), kind)

    def with_values(self, values) -> GridFunction:
        return GridFunction(self.nodes, values, self.kind)


def uniform_grid(interval: Interval, n: int) -> np.ndarray:
    if n < 3:
        raise ValueError(f"a grid needs at least 3 nodes, got {n}")
    nodes = np.linspace(interval.a, interval.b, n)
    nodes[0], nodes[-1] = interval.a, interval.b
    return nodes


def cosine_grid(interval: Interval, n: int) -> np.ndarray:
    """Nodes clustered toward both endpoints (Chebyshev-Lobatto spacing)."""
    if n < 3:
        raise ValueError(f"a grid needs at least 3 nodes, got {n}")
    x = (1.0 - np.cos(np.pi * np.arange(n) / (n - 1))) / 2.0
    nodes = interval.a + interval.length() * x
    nodes[0], nodes[-1] = interval.a, interval.b
    return nodes


def evaluate(fn: ScalarFunction, s: np.ndarray) -> np.ndarray:
    """Evaluate ``fn`` elementwise on ``s``, vectorized when ``fn`` allows it."""
    s = np.asarray(s, dtype=float)
    try:
        out = np.asarray(fn(s), dtype=float)
    except (TypeError, ValueError):
        out = None
    if out is None or out.shape != s.shape:
        if out is not None and out.ndim == 0:
            out = np.full(s.shape, float(out))
        else:
            out = np.vectorize(lambda x: float(fn(x)), otypes=[float])(s)
    return out


@dataclass(frozen=True, eq=False)
class WeightedQuadrature:
    """Nodes/weights approximating the integral of phi(s) * (s - a)**(alpha - 2) over [a, b]."""

    interval: Interval
    order: Order
    nodes: np.ndarray
    weights: np.ndarray
    declared_degree: int

    def __len__(self) -> int:
        return self.nodes.size


def _gauss_from_measure(x: np.ndarray, w: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """m-point Gauss rule of the discrete measure sum_i w_i delta(x_i).

    Lanczos with full reorthogonalization produces the Jacobi matrix; the
    rule follows from its eigen-decomposition (Golub-Welsch).
    """
    q = np.sqrt(w)
    basis = np.zeros((m, x.size))
    basis[0] = q / np.linalg.norm(q)
    diag = np.zeros(m)
    off = np.zeros(max(m - 1, 0))
    for k in range(m):
        v = x * basis[k]
        diag[k] = basis[k] @ v
        v -= diag[k] * basis[k]
        if k > 0:
            v -= off[k - 1] * basis[k - 1]
        for _ in range(2):
            v -= basis[: k + 1].T @ (basis[: k + 1] @ v)
        if k < m - 1:
            off[k] = np.linalg.norm(v)
            basis[k + 1] = v / off[k]
    if m == 1:
        return diag.copy(), np.array([w.sum()])
    nodes, vecs = eigh_tridiagonal(diag, off)
    return nodes, w.sum() * vecs[0] ** 2


@lru_cache(maxsize=256)
def _reference_rule(alpha: float, n_points: int, levels: int, ratio: float):
    """Composite rule on [0, 1] for the weight r**(alpha - 2)."""
    beta = alpha - 2.0
    nodes, weights = [], []

    if levels > 0:
        # one Gauss rule for r**beta on [ratio, 1]; panel k is its image under r -> ratio**k * r
        n_disc = max(4 * n_points, 64)
        xg, wg = leggauss(n_disc)
        r = ratio + (1.0 - ratio) * (xg + 1.0) / 2.0
        wr = wg * (1.0 - ratio) / 2.0 * r**beta
        pr, pw = _gauss_from_measure(r, wr, n_points)
        for k in range(levels):
            scale = ratio**k
            nodes.append(scale * pr)
            weights.append(pw * scale ** (alpha - 1.0))

    h0 = ratio**levels
    xj, wj = roots_jacobi(n_points, 0.0, beta)
    nodes.append(h0 * (xj + 1.0) / 2.0)
    weights.append(wj * (h0 / 2.0) ** (alpha - 1.0))

    r = np.concatenate(nodes[::-1])
    w = np.concatenate(weights[::-1])
    order = np.argsort(r)
    r, w = r[order], w[order]
    r.setflags(write=False)
    w.setflags(write=False)
    return r, w


def reference_rule(order: Order, n_points: int, levels: int = GRADING_LEVELS,
                   ratio: float = GRADING_RATIO) -> tuple[np.ndarray, np.ndarray]:
    """Nodes in (0, 1] and weights for the weight r**(alpha - 2) on [0, 1].

    A rule for [a, t] follows by ``s = a + (t - a) * r`` and
    ``w * (t - a)**(alpha - 1)``.
    """
    if n_points < 1:
        raise ValueError(f"n_points must be positive, got {n_points}")
    if levels < 0:
        raise ValueError(f"levels must be non-negative, got {levels}")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"grading ratio must lie in (0, 1), got {ratio}")
    return _reference_rule(order.alpha, int(n_points), int(levels), float(ratio))


def build_weighted_quadrature(interval: Interval, order: Order, n_points: int, *,
                              levels: int = GRADING_LEVELS,
                              ratio: float = GRADING_RATIO) -> WeightedQuadrature:
    """Quadrature for the integral of phi(s) * (s - a)**(alpha - 2) over ``interval``.

    ``n_points`` is the number of Gauss points per panel; the rule carries
    ``n_points * (levels + 1)`` nodes and is exact for polynomial ``phi`` of
    degree ``2 * n_points - 1``. ``levels=0`` gives plain Gauss-Jacobi.
    """
    if int(n_points) != n_points or n_points < 2:
        raise ValueError(f"n_points must be an integer >= 2, got {n_points!r}")
    length = interval.length()
    levels = int(levels)
    while True:
        r, w = reference_rule(order, n_points, levels, ratio)
        nodes = interval.a + length * r
        # nodes must stay strictly right of the singular endpoint
        if levels == 0 or nodes[0] > interval.a:
            break
        levels -= 1
    if nodes[0] <= interval.a:
        raise DomainError("interval too short relative to |a| for a weighted rule in double precision")
    weights = w * length**order.beta()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return WeightedQuadrature(interval, order, nodes, weights, 2 * int(n_points) - 1)


def weighted_integral(rule: WeightedQuadrature, phi: ScalarFunction) -> float:
    """Rule-weighted sum approximating the integral of phi(s) * rho(s) over the rule interval."""
    values = evaluate(phi, rule.nodes)
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise QuadratureEvaluationError(float(rule.nodes[i]), float(values[i]))
    return float(rule.weights @ values)


def second_differences(nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Three-point second derivative at interior nodes (non-uniform spacing allowed)."""
    h0 = np.diff(nodes)[:-1]
    h1 = np.diff(nodes)[1:]
    v0, v1, v2 = values[:-2], values[1:-1], values[2:]
    return 2.0 * (h0 * v2 - (h0 + h1) * v1 + h1 * v0) / (h0 * h1 * (h0 + h1))
