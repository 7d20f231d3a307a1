import numpy as np
import pytest

from vmof.benchmarks import make_sp1
from vmof.core import (
    Direction,
    EvalBudget,
    Population,
    Problem,
    Solution,
    clamp_to_bounds,
    evaluate_batch,
    evaluate_population,
    evaluate_solution,
    random_directions,
    random_population,
)
from vmof.errors import BudgetExhausted, DimensionMismatch, NonFiniteObjective


def unit_problem(d, fn=lambda x: np.array([x.sum(), -x.sum()])):
    return Problem(d, 2, np.zeros(d), np.ones(d), fn)


def test_problem_validates_shape():
    with pytest.raises(ValueError):
        Problem(0, 2, 0.0, 1.0, lambda x: x)
    with pytest.raises(ValueError):
        Problem(3, 1, 0.0, 1.0, lambda x: x)
    with pytest.raises(ValueError):
        Problem(2, 2, [0, 1], [1, 0], lambda x: x)
    p = Problem(3, 2, 0.0, 2.0, lambda x: x[:2])
    assert p.lower.shape == (3,) and np.all(p.span == 2.0)


def test_evaluate_sp1_examples():
    p = make_sp1(30)
    b = EvalBudget(10)
    x = np.zeros(30)
    s = evaluate_solution(p, Solution(x), b)
    np.testing.assert_allclose(s.f, [0, 1])
    assert b.consumed == 1 and s.eval_id == 1 and s.evaluated
    x[0] = 1
    np.testing.assert_allclose(evaluate_solution(p, Solution(x), b).f, [1, 0], atol=1e-15)
    x[0] = 0.25
    np.testing.assert_allclose(evaluate_solution(p, Solution(x), b).f, [0.25, 0.5])
    assert b.consumed == 3


def test_budget_ids_are_sequence_numbers_and_truncate():
    p = unit_problem(4)
    b = EvalBudget(7)
    seen = []
    b.subscribe(lambda F, ids: seen.append(ids.copy()))
    F, ids = evaluate_batch(p, np.zeros((5, 4)), b)
    assert ids.tolist() == [1, 2, 3, 4, 5]
    F, ids = evaluate_batch(p, np.zeros((5, 4)), b)
    assert ids.tolist() == [6, 7] and len(F) == 2
    assert b.remaining == 0
    with pytest.raises(BudgetExhausted):
        evaluate_batch(p, np.zeros((1, 4)), b)
    assert [s.tolist() for s in seen] == [[1, 2, 3, 4, 5], [6, 7]]


def test_budget_validation_and_phase_budget():
    with pytest.raises(ValueError):
        EvalBudget(0)
    with pytest.raises(ValueError):
        EvalBudget(10, phase_fraction=0)
    assert EvalBudget(100_000).phase_budget == 5000


def test_non_finite_objective_raises():
    p = unit_problem(2, lambda x: np.array([np.nan, 0.0]))
    with pytest.raises(NonFiniteObjective):
        evaluate_batch(p, np.zeros((1, 2)), EvalBudget(5))


def test_batch_and_single_evaluation_agree(rng):
    calls = []

    def single(x):
        calls.append(1)
        return np.array([x[0], 1 - x[0]])

    p = Problem(3, 2, 0.0, 1.0, single)
    X = rng.random((6, 3))
    F, _ = evaluate_batch(p, X, EvalBudget(10))
    assert len(calls) == 6
    np.testing.assert_array_equal(F[:, 0], X[:, 0])


def test_clamp_examples():
    p = unit_problem(3)
    np.testing.assert_array_equal(clamp_to_bounds(np.array([-0.5, 0.5, 1.5]), p), [0, 0.5, 1])
    x = np.array([0.1, 0.2, 0.3])
    np.testing.assert_array_equal(clamp_to_bounds(x, p), x)
    q = unit_problem(2)
    np.testing.assert_array_equal(clamp_to_bounds(np.array([0.0, 1.0]), q), [0, 1])


def test_random_population_determinism_and_bounds():
    p = Problem(5, 2, -2.0, 3.0, lambda x: x[:2])
    a = random_population(p, 100, np.random.default_rng(7))
    b = random_population(p, 100, np.random.default_rng(7))
    np.testing.assert_array_equal(a.X, b.X)
    assert a.X.min() >= -2 and a.X.max() <= 3
    assert not a.evaluated and np.all(a.ids == 0)


def test_random_population_degenerate_bounds():
    p = Problem(4, 2, [0, 0.5, 0, 0], [1, 0.5, 1, 1], lambda x: x[:2])
    pop = random_population(p, 20, np.random.default_rng(0))
    assert np.all(pop.X[:, 1] == 0.5)


def test_random_population_million_dims_memory():
    import tracemalloc

    p = make_sp1(1_000_000)
    tracemalloc.start()
    pop = random_population(p, 100, np.random.default_rng(0))
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    assert pop.X.shape == (100, 1_000_000)
    assert peak < 2 * 1024**3
    del pop


def test_random_directions_range_and_limits():
    p = unit_problem(50)
    D = random_directions(p, 30, 0.1, np.random.default_rng(1))
    assert np.abs(D).max() <= 0.1
    assert np.all(random_directions(p, 5, 0.0, np.random.default_rng(1)) == 0)
    np.testing.assert_array_equal(D, random_directions(p, 30, 0.1, np.random.default_rng(1)))
    with pytest.raises(ValueError):
        random_directions(p, 3, -1, np.random.default_rng(0))


def test_direction_validation():
    assert Direction([1, 2]).v.dtype == np.float64
    with pytest.raises(DimensionMismatch):
        Direction(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        Direction([np.inf])


def test_population_helpers():
    sols = [Solution(np.zeros(3)), Solution(np.ones(3), np.array([1.0, 2.0]), 4)]
    pop = Population.from_solutions(sols, 2)
    assert pop.ids.tolist() == [0, 4]
    assert pop[0].f is None and pop[1].f.tolist() == [1, 2]
    both = Population.concat([pop, pop.take([1])])
    assert len(both) == 3 and both.ids.tolist() == [0, 4, 4]
    assert len(Population.empty(3, 2)) == 0
    assert [s.eval_id for s in pop.solutions()] == [0, 4]


def test_evaluate_population_truncated():
    p = unit_problem(2)
    pop = evaluate_population(p, np.zeros((5, 2)), EvalBudget(3))
    assert len(pop) == 3 and pop.evaluated
