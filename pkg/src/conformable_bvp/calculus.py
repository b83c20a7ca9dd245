"""Conformable derivative and integral for orders in (1, 2).

For twice differentiable ``g`` the derivative has the closed form
``T_alpha g(t) = (t - a)**(2 - alpha) * g''(t)``; the integral is
``I_alpha g(t) = integral_a^t (t - s) (s - a)**(alpha - 2) g(s) ds``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    DomainError,
    Interval,
    Order,
    ScalarFunction,
    build_weighted_quadrature,
    evaluate,
    weighted_integral,
)

EXTREMUM_SAMPLES = 10_000
EXTREMUM_TOL = 1e-9
SIGN_TOL = 1e-10


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a property check; ``witness`` locates a violation when there is one."""

    status: Verdict
    value: Optional[float] = None
    witness: Optional[dict] = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status is Verdict.PASS

    def __bool__(self) -> bool:
        return self.passed


def _fd_step(t) -> np.ndarray:
    return np.finfo(float).eps ** (1.0 / 3.0) * np.maximum(1.0, np.abs(t))


def central_derivative(fn: ScalarFunction, t) -> np.ndarray:
    """Central difference with step eps**(1/3) * max(1, |t|)."""
    t = np.asarray(t, dtype=float)
    h = _fd_step(t)
    return (evaluate(fn, t + h) - evaluate(fn, t - h)) / (2.0 * h)


@dataclass(frozen=True)
class SmoothProbe:
    """A function bundled with its first and second derivatives.

    Missing derivatives are recovered by central differences: ``g2`` from
    ``g1`` when available, otherwise by a second difference of ``g`` with the
    larger step eps**(1/4) that balances rounding against truncation.
    """

    g: ScalarFunction
    g1: Optional[ScalarFunction] = None
    g2: Optional[ScalarFunction] = None
    limits_at_a: bool = True

    def value(self, t) -> np.ndarray:
        return evaluate(self.g, t)

    def first(self, t) -> np.ndarray:
        if self.g1 is not None:
            return evaluate(self.g1, t)
        return central_derivative(self.g, t)

    def second(self, t) -> np.ndarray:
        if self.g2 is not None:
            return evaluate(self.g2, t)
        if self.g1 is not None:
            return central_derivative(self.g1, t)
        t = np.asarray(t, dtype=float)
        h = np.finfo(float).eps ** 0.25 * np.maximum(1.0, np.abs(t))
        return (evaluate(self.g, t + h) - 2.0 * evaluate(self.g, t) + evaluate(self.g, t - h)) / h**2


def _check_right_of_a(interval: Interval, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t <= interval.a) or np.any(t > interval.b) or not np.all(np.isfinite(t)):
        raise DomainError(f"t must satisfy a < t <= b on [{interval.a}, {interval.b}], got {t}")
    return t


def _as_output(x: np.ndarray):
    return float(x) if np.ndim(x) == 0 else x


def conformable_derivative(probe: SmoothProbe, order: Order, interval: Interval, t):
    """T_alpha g(t) = (t - a)**(2 - alpha) * g''(t) for a < t <= b."""
    t = _check_right_of_a(interval, t)
    return _as_output((t - interval.a) ** (2.0 - order.alpha) * probe.second(t))


def conformable_derivative_sub1(g1: ScalarFunction, beta: float, a: float, t,
                                dg1: Optional[ScalarFunction] = None):
    """Order-beta conformable derivative of ``g1``: (t - a)**(1 - beta) * g1'(t), 0 < beta < 1.

    Applied to g' with beta = alpha - 1 it reproduces the order-alpha
    derivative of g; applied to g itself it is the sub-unit derivative.
    """
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    t = np.asarray(t, dtype=float)
    if np.any(t <= a):
        raise DomainError(f"t must exceed a={a}, got {t}")
    slope = evaluate(dg1, t) if dg1 is not None else central_derivative(g1, t)
    return _as_output((t - a) ** (1.0 - beta) * slope)


def conformable_integral(phi: ScalarFunction, order: Order, interval: Interval, t: float,
                         rule_size: int = 64) -> float:
    """I_alpha phi(t) = integral_a^t (t - s) (s - a)**(alpha - 2) phi(s) ds."""
    t = float(_check_right_of_a(interval, t))
    rule = build_weighted_quadrature(Interval(interval.a, t), order, rule_size)
    return weighted_integral(rule, lambda s: (t - s) * evaluate(phi, s))


def inversion_check(probe: SmoothProbe, order: Order, interval: Interval, t: float,
                    rule_size: int = 64) -> float:
    """I_alpha[T_alpha g](t) - (g(t) - g(a) - g'(a) (t - a)).

    The left side is integrated numerically from point values of the
    conformable derivative; the Taylor remainder on the right is analytic.
    """
    t = float(_check_right_of_a(interval, t))
    a = interval.a
    g_a = float(probe.value(a))
    dg_a = float(probe.first(a))
    if not (np.isfinite(g_a) and np.isfinite(dg_a)):
        raise DomainError("probe needs finite g(a) and g'(a)")
    lhs = conformable_integral(
        lambda s: conformable_derivative(probe, order, interval, s), order, interval, t, rule_size
    )
    rhs = float(probe.value(t)) - g_a - dg_a * (t - a)
    return lhs - rhs


def extremum_sign_check(probe: SmoothProbe, order: Order, interval: Interval, xi: float,
                        kind: str = "max") -> CheckResult:
    """Sign of T_alpha g at an interior global extremum (non-positive at a max, non-negative at a min).

    The extremum claim is checked on 10**4 uniform samples first; if the
    samples contradict it the result is inconclusive.
    """
    if kind not in ("max", "min"):
        raise ValueError(f"kind must be 'max' or 'min', got {kind!r}")
    if not interval.a < xi < interval.b:
        raise DomainError(f"xi must lie strictly inside ({interval.a}, {interval.b}), got {xi}")

    ts = np.linspace(interval.a, interval.b, EXTREMUM_SAMPLES)
    gs = probe.value(ts)
    g_xi = float(probe.value(xi))
    sign = 1.0 if kind == "max" else -1.0
    excess = sign * (gs - g_xi)
    if np.max(excess) > EXTREMUM_TOL:
        i = int(np.argmax(excess))
        return CheckResult(Verdict.INCONCLUSIVE, witness={"t": float(ts[i]), "g": float(gs[i])},
                           detail=f"xi={xi} is not a global {kind} of the probe")

    value = conformable_derivative(probe, order, interval, xi)
    ok = value <= SIGN_TOL if kind == "max" else value >= -SIGN_TOL
    if ok:
        return CheckResult(Verdict.PASS, value=value)
    return CheckResult(Verdict.FAIL, value=value, witness={"xi": xi, "T_alpha": value})
