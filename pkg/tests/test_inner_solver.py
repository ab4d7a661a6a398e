import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcid_hub.core.exceptions import InnerSolverError
from mcid_hub.core.inner_solver import (
    InnerProblem,
    LinearTerm,
    smooth_gradient,
    smooth_part,
    solve_inner,
    subproblem_objective,
)
from mcid_hub.core.kernels import KernelSpec, gram
from mcid_hub.core.models import make_rng
from mcid_hub.core.personalized import full_objective, majorizer, s2_subgradient

seeds = st.integers(min_value=0, max_value=10**6)


def _problem(seed: int, n: int = 7, kernel: str = "gaussian") -> tuple[InnerProblem, LinearTerm]:
    rng = make_rng(seed)
    z = rng.standard_normal((n, 2))
    spec = KernelSpec.gaussian(1.0) if kernel == "gaussian" else KernelSpec.linear()
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    problem = InnerProblem(gram(spec, z).K, rng.standard_normal(n), y, 0.3, float(rng.uniform(0.05, 2.0)))
    # линейный член того же вида, что строит DCA
    active = rng.random(n) < 0.4
    coef = np.where(active, y, 0.0) * problem.box
    return problem, LinearTerm(float(coef.sum()), coef)


def test_small_instance_known_solution():
    problem = InnerProblem(np.zeros((3, 3)), np.array([1.0, -1.0, 0.05]), np.array([1.0, -1.0, 1.0]), 0.1, 1.0)
    result = solve_inner(problem, LinearTerm.zero(3))
    assert result.converged
    assert result.objective == pytest.approx(0.0, abs=1e-12)
    assert result.b == pytest.approx(-0.475)
    assert result.gap == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, kernel=st.sampled_from(["gaussian", "linear"]))
def test_gap_certifies_optimality(seed, kernel):
    problem, linear = _problem(seed, kernel=kernel)
    result = solve_inner(problem, linear, tol=1e-8)
    trials = make_rng(seed + 1)
    for _ in range(20):
        b = float(trials.normal(result.b, 1.0))
        w = result.w + trials.normal(0.0, 0.5, problem.n)
        assert subproblem_objective(problem, linear, b, w) >= result.objective - result.gap - 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_coefficients_are_bounded(seed):
    problem, linear = _problem(seed)
    result = solve_inner(problem, linear)
    bound = np.linalg.norm(linear.coef) + np.sqrt(problem.n) * problem.box
    assert problem.lam * np.linalg.norm(result.w) <= bound + 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_smooth_gradient_matches_finite_differences(seed):
    problem, linear = _problem(seed)
    rng = make_rng(seed + 7)
    b, w = float(rng.normal()), rng.standard_normal(problem.n)
    grad_b, grad_w = smooth_gradient(problem, linear, b, w)
    h = 1e-6
    assert grad_b == pytest.approx(
        (smooth_part(problem, linear, b + h, w) - smooth_part(problem, linear, b - h, w)) / (2 * h), abs=1e-5)
    for i in range(problem.n):
        step = np.zeros(problem.n)
        step[i] = h
        numeric = (smooth_part(problem, linear, b, w + step) - smooth_part(problem, linear, b, w - step)) / (2 * h)
        assert grad_w[i] == pytest.approx(numeric, abs=1e-5)


@settings(max_examples=40, deadline=None)
@given(seed=seeds)
def test_majorizer_touches_and_bounds_objective(seed):
    problem, _ = _problem(seed)
    rng = make_rng(seed + 3)
    b_k, w_k = float(rng.normal()), rng.normal(0.0, 0.3, problem.n)
    assert majorizer(problem, b_k, w_k, b_k, w_k) == pytest.approx(full_objective(problem, b_k, w_k), abs=1e-12)
    for _ in range(10):
        b, w = float(rng.normal()), rng.normal(0.0, 0.3, problem.n)
        assert majorizer(problem, b_k, w_k, b, w) >= full_objective(problem, b, w) - 1e-12


def test_subgradient_offset_is_sum_of_coefficients():
    problem, _ = _problem(3)
    linear = s2_subgradient(problem, 0.0, np.zeros(problem.n))
    assert linear.offset == pytest.approx(linear.coef.sum())
    assert np.all(np.abs(linear.coef) <= problem.box)


def test_inconsistent_linear_term_is_rejected():
    problem = InnerProblem(np.eye(2), np.array([0.0, 1.0]), np.array([1.0, 1.0]), 0.5, 1.0)
    with pytest.raises(InnerSolverError):
        solve_inner(problem, LinearTerm(-5.0, np.zeros(2)))
