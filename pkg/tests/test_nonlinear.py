import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conformable_bvp.calculus import SmoothProbe, Verdict
from conformable_bvp.core import GridFunction, Interval, Order, uniform_grid
from conformable_bvp.linear import LinearProblem, solve_linear
from conformable_bvp.nonlinear import (
    Bracket,
    BracketError,
    NonlinearProblem,
    SolveConfig,
    apply_A,
    modify_rhs,
    solve_nonlinear,
    verify_lower,
    verify_upper,
)

UNIT = Interval(0.0, 1.0)


def constant(c):
    return SmoothProbe(lambda t: c + 0 * t, lambda t: 0 * t, lambda t: 0 * t)


def const_bracket(lo, up, n_grid=101, interval=UNIT):
    return Bracket.from_functions(interval, lambda t: lo + 0 * t, lambda t: up + 0 * t, n_grid)


def manufactured(alpha):
    """f with exact solution t(1 - t): T_alpha u* = -2 t**(2 - alpha)."""
    u_star = lambda t: t * (1 - t)
    return u_star, NonlinearProblem(UNIT, Order(alpha), lambda t, x: 2 * t ** (2 - alpha) - (x - u_star(t)))


def manufactured_sine(alpha):
    u_star = lambda t: np.sin(np.pi * t)
    f = lambda t, x: np.pi**2 * t ** (2 - alpha) * np.sin(np.pi * t) - (x - u_star(t))
    return u_star, NonlinearProblem(UNIT, Order(alpha), f)


def relaxation_oracle(alpha, k, t, terms=80):
    """Power-series solution of T_alpha u + k (1 - u) = 0, u(0) = u(1) = 0.

    v = u - 1 solves v'' = k t**(alpha - 2) v; the two Frobenius series are
    sum a_j t**(j alpha) and sum b_j t**(1 + j alpha).
    """
    j = np.arange(1, terms)
    a = np.concatenate([[1.0], np.cumprod(k / ((j * alpha) * (j * alpha - 1)))])
    b = np.concatenate([[1.0], np.cumprod(k / ((1 + j * alpha) * (j * alpha)))])
    e0 = np.arange(terms) * alpha
    phi0 = lambda x: np.sum(a * np.power.outer(x, e0), axis=-1)
    phi1 = lambda x: np.sum(b * np.power.outer(x, 1 + e0), axis=-1)
    c1 = (phi0(1.0) - 1.0) / phi1(1.0)
    return 1.0 - phi0(t) + c1 * phi1(t)


# ---- verify_lower / verify_upper

def test_verify_lower_examples():
    zero_rhs = NonlinearProblem(UNIT, Order(1.5), lambda t, x: 0 * x)
    assert verify_lower(constant(0.0), zero_rhs).status is Verdict.PASS

    negative = NonlinearProblem(UNIT, Order(1.5), lambda t, x: -1.0 + 0 * x)
    res = verify_lower(constant(0.0), negative)
    assert res.status is Verdict.FAIL
    assert 0.0 < res.witness["t"] < 1.0

    alpha = 1.5
    sq = NonlinearProblem(UNIT, Order(alpha), lambda t, x: 2 * t ** (2 - alpha) + x**2)
    probe = SmoothProbe(lambda t: -t * (1 - t), lambda t: 2 * t - 1, lambda t: 2 + 0 * t)
    res = verify_lower(probe, sq)
    assert res.passed
    # symbolic value of T sigma + f at the check nodes: 4 t**(2 - alpha) + t**2 (1 - t)**2
    t = uniform_grid(UNIT, 201)[1:-1]
    assert res.value == pytest.approx(np.min(4 * t**0.5 + t**2 * (1 - t) ** 2), rel=1e-12)


def test_verify_upper_examples():
    sine = NonlinearProblem(UNIT, Order(1.5), lambda t, x: np.sin(x))
    assert verify_upper(constant(np.pi), sine).passed

    one = NonlinearProblem(UNIT, Order(1.5), lambda t, x: 1.0 + 0 * x)
    assert verify_upper(constant(1.0), one).status is Verdict.FAIL

    linear = NonlinearProblem(UNIT, Order(1.5), lambda t, x: -(1 + t) * x, sample_bound=1e3)
    assert verify_upper(constant(1e3), linear).passed


def test_verify_boundary_signs():
    zero_rhs = NonlinearProblem(UNIT, Order(1.5), lambda t, x: 0 * x)
    res = verify_lower(constant(0.5), zero_rhs)
    assert res.status is Verdict.FAIL and "boundary" in res.detail
    assert verify_upper(constant(-0.5), zero_rhs).status is Verdict.FAIL


def test_verify_grid_candidate():
    alpha = 1.5
    u_star, problem = manufactured(alpha)
    nodes = uniform_grid(UNIT, 101)
    assert verify_lower(GridFunction(nodes, u_star(nodes) - 1), problem).passed
    assert verify_upper(GridFunction(nodes, u_star(nodes) + 1), problem).passed
    assert not verify_upper(GridFunction(nodes, u_star(nodes) - 1), problem).passed


def test_verify_rejects_missing_derivative_data():
    zero_rhs = NonlinearProblem(UNIT, Order(1.5), lambda t, x: 0 * x)
    with pytest.raises(TypeError):
        verify_lower(lambda t: 0 * t, zero_rhs)


# ---- bracket

def test_bracket_rejects_crossing_and_bad_boundary_signs():
    with pytest.raises(BracketError):
        const_bracket(1.0, 0.0)
    with pytest.raises(BracketError):
        const_bracket(0.5, 1.0)
    with pytest.raises(BracketError):
        const_bracket(-1.0, -0.5)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_problem_rejects_non_finite_f():
    with pytest.raises(ValueError):
        NonlinearProblem(UNIT, Order(1.5), lambda t, x: np.log(x - 5))


# ---- modified right-hand side

def test_modified_rhs_examples():
    zero = NonlinearProblem(UNIT, Order(1.5), lambda t, x: 0 * x)
    F = modify_rhs(zero, const_bracket(0.0, 1.0))
    assert float(F(0.3, 2.0)) == pytest.approx(-0.5, abs=1e-14)
    assert float(F(0.3, -3.0)) == pytest.approx(0.75, abs=1e-14)

    f = NonlinearProblem(UNIT, Order(1.5), lambda t, x: np.sin(3 * t) * x**2)
    F = modify_rhs(f, const_bracket(-1.0, 2.0))
    t = np.linspace(0, 1, 50)
    x = np.linspace(-1, 2, 50)
    assert np.array_equal(F(t, x), f(t, x))


def test_modified_rhs_bound_constant():
    f = NonlinearProblem(UNIT, Order(1.5), lambda t, x: 3 * x + t)
    F = modify_rhs(f, const_bracket(-1.0, 1.0))
    # max |f| over the bracket region is 4 at (1, 1); inflated by 10 %
    assert F.M0 == pytest.approx(4.4, rel=1e-12)
    assert F.M == pytest.approx(F.M0 + 1.0)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(0, 1), x=st.floats(-1e6, 1e6), c=st.floats(-3, 3))
def test_modified_rhs_truncation_bound(t, x, c):
    f = NonlinearProblem(UNIT, Order(1.5), lambda t, x: c * np.cos(x) + t * x)
    bracket = Bracket.from_functions(UNIT, lambda s: -s * (1 - s) - 0.5, lambda s: 1 + s**2, 51)
    F = modify_rhs(f, bracket)
    value = float(F(t, x))
    assert abs(value) <= F.M
    lo, up = float(bracket.lower(t)), float(bracket.upper(t))
    clamped = float(f(t, np.clip(x, lo, up)))
    if lo <= x <= up:
        assert value == clamped
    else:
        assert abs(value - clamped) < 1.0


@pytest.mark.parametrize("side", ["upper", "lower"])
def test_modified_rhs_seam_continuity(side):
    f = NonlinearProblem(UNIT, Order(1.5), lambda t, x: np.exp(t) * x**3 - x)
    bracket = const_bracket(-0.5, 1.5)
    F = modify_rhs(f, bracket)
    t = np.linspace(0.01, 0.99, 25)
    edge = bracket.upper(t) if side == "upper" else bracket.lower(t)
    direction = 1.0 if side == "upper" else -1.0
    hs = (1e-4, 1e-6, 1e-8)
    jumps = [np.max(np.abs(F(t, edge + direction * h) - F(t, edge))) for h in hs]
    assert jumps[0] > jumps[1] > jumps[2]
    # outside the bracket only the correction term moves, and it has unit slope: |jump| = h / (1 + h)
    for h, jump in zip(hs, jumps):
        assert jump == pytest.approx(h / (1 + h), rel=1e-6)


# ---- operator A

def test_apply_A_zero_rhs():
    zero = NonlinearProblem(UNIT, Order(1.5), lambda t, x: 0 * x)
    F = modify_rhs(zero, const_bracket(-1.0, 1.0))
    u = GridFunction.sample(np.sin, uniform_grid(UNIT, 41))
    assert np.all(apply_A(u, F).values == 0)


def test_apply_A_constant_rhs_matches_linear_solve():
    ones = NonlinearProblem(UNIT, Order(1.5), lambda t, x: 1.0 + 0 * x)
    F = modify_rhs(ones, const_bracket(0.0, 2.0))
    u = GridFunction.sample(np.cos, uniform_grid(UNIT, 41))
    Au = apply_A(u, F)
    ref = solve_linear(LinearProblem(UNIT, Order(1.5), lambda t: np.ones_like(t)), n_grid=41)
    np.testing.assert_allclose(Au.values, ref.values, atol=1e-14)
    assert Au.values[0] == 0.0 and Au.values[-1] == 0.0


def test_apply_A_bound_monte_carlo():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        a = rng.uniform(-2, 2)
        iv = Interval(a, a + rng.uniform(0.2, 3))
        alpha = rng.uniform(1.05, 1.95)
        c = rng.uniform(-5, 5, 3)
        f = NonlinearProblem(iv, Order(alpha), lambda t, x: c[0] * np.sin(c[1] * x) + c[2] * t)
        bracket = const_bracket(-1.0, 1.0, n_grid=31, interval=iv)
        F = modify_rhs(f, bracket)
        nodes = uniform_grid(iv, 31)
        u = GridFunction(nodes, rng.uniform(-3, 3, 31))
        bound = F.M * iv.length() ** alpha / (alpha - 1)
        assert apply_A(u, F).sup_norm() <= bound


# ---- solver

def test_solve_constant_rhs_is_linear_solution():
    alpha = 1.5
    problem = NonlinearProblem(UNIT, Order(alpha), lambda t, x: 1.0 + 0 * x)
    u_lin = lambda t: (t - t**alpha) / (alpha * (alpha - 1))
    # a constant is never an upper solution for f = 1 (T_alpha c + 1 = 1 > 0)
    assert not verify_upper(constant(2.0), problem)
    valid = Bracket.from_functions(UNIT, lambda t: 0 * t, lambda t: u_lin(t) + 2, 101)
    unchecked = const_bracket(0.0, 2.0, n_grid=101)
    for bracket, check in ((valid, True), (unchecked, False)):
        report = solve_nonlinear(problem, bracket, SolveConfig(method="picard"), check_bracket=check)
        assert report.converged and report.localized
        assert report.iterations <= 2
        assert report.solution(0.5) == pytest.approx(0.19526214587563495, abs=1e-10)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_solve_manufactured_quadratic(alpha):
    u_star, problem = manufactured(alpha)
    bracket = Bracket.from_functions(UNIT, lambda t: u_star(t) - 1, lambda t: u_star(t) + 1, 101)
    report = solve_nonlinear(problem, bracket)
    err = np.max(np.abs(report.solution.values - u_star(report.solution.nodes)))
    assert report.converged and report.localized
    assert err < 1e-6
    assert report.iterations <= 50
    assert report.max_abs_F <= report.M
    assert report.fixed_point_gap <= 10 * SolveConfig().tol


def test_solve_sine_converges_to_trivial_solution():
    problem = NonlinearProblem(UNIT, Order(1.5), lambda t, x: np.sin(x), sample_bound=4.0)
    report = solve_nonlinear(problem, const_bracket(0.0, np.pi))
    assert report.converged and report.localized
    assert report.solution.sup_norm() < 1e-7
    assert report.residual_norm < 1e-6


@pytest.mark.parametrize("method", ["picard", "damped_picard", "newton_collocation"])
@pytest.mark.parametrize("k", [1.0, 5.0])
def test_solve_against_series_oracle(method, k):
    alpha = 1.5
    problem = NonlinearProblem(UNIT, Order(alpha), lambda t, x: k * (1 - x))
    report = solve_nonlinear(problem, const_bracket(0.0, 2.0, n_grid=201), SolveConfig(method=method))
    assert report.converged and report.localized and report.method == method
    err = np.max(np.abs(report.solution.values - relaxation_oracle(alpha, k, report.solution.nodes)))
    assert err < 1e-6
    assert report.fixed_point_gap <= 10 * SolveConfig().tol


def test_stalled_damped_picard_falls_back_to_newton():
    alpha, k = 1.5, 40.0
    problem = NonlinearProblem(UNIT, Order(alpha), lambda t, x: k * (1 - x))
    report = solve_nonlinear(problem, const_bracket(0.0, 2.0, n_grid=201))
    assert report.method == "newton_collocation"
    assert report.converged and report.localized
    err = np.max(np.abs(report.solution.values - relaxation_oracle(alpha, k, report.solution.nodes)))
    assert err < 1e-4


def test_non_convergence_is_reported():
    problem = NonlinearProblem(UNIT, Order(1.5), lambda t, x: 40.0 * (1 - x))
    report = solve_nonlinear(problem, const_bracket(0.0, 2.0, n_grid=51), SolveConfig(method="picard", max_iter=20))
    assert not report.converged
    assert report.iterations == 20 and len(report.history) == 20
    assert report.to_dict()["converged"] is False


def test_solve_rejects_invalid_bracket():
    problem = NonlinearProblem(UNIT, Order(1.5), lambda t, x: 1.0 + 0 * x)
    with pytest.raises(BracketError):
        solve_nonlinear(problem, const_bracket(0.0, 1.0))


def test_solve_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(method="bisection")
    with pytest.raises(ValueError):
        SolveConfig(damping=0.0)
    with pytest.raises(ValueError):
        SolveConfig(max_iter=0)


def test_manufactured_refinement_does_not_increase_residual():
    # for t(1 - t) the spline is exact, so the residual is pure rounding (~eps / h**2); allow that floor
    u_star, problem = manufactured(1.5)
    residuals = []
    for n in (51, 101, 201, 401):
        bracket = Bracket.from_functions(UNIT, lambda t: u_star(t) - 1, lambda t: u_star(t) + 1, n)
        report = solve_nonlinear(problem, bracket)
        residuals.append((report.residual_norm, 1e3 * np.finfo(float).eps * (n - 1) ** 2))
    for (coarse, _), (fine, floor) in zip(residuals, residuals[1:]):
        assert fine <= max(coarse, floor)


@pytest.mark.parametrize("alpha", [1.2, 1.5])
def test_manufactured_sine_refinement(alpha):
    u_star, problem = manufactured_sine(alpha)
    residuals, errors = [], []
    for n in (51, 101, 201, 401):
        bracket = Bracket.from_functions(UNIT, lambda t: u_star(t) - 1, lambda t: u_star(t) + 1, n)
        report = solve_nonlinear(problem, bracket)
        assert report.converged and report.localized
        residuals.append(report.residual_norm)
        errors.append(np.max(np.abs(report.solution.values - u_star(report.solution.nodes))))
    assert all(fine < coarse for coarse, fine in zip(residuals, residuals[1:]))
    assert errors[-1] < 1e-9
