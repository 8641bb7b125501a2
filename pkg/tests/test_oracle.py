import numpy as np
import pytest

from conftest import MIXED, RHO_UP, random_mixed
from qdiscrim.errors import ProblemTooLarge, SingularNormalizer
from qdiscrim.minimax import minimax_n
from qdiscrim.oracle import brute_force_minimax, diagonal_exhaustive, normalize_povm, sample_povm
from qdiscrim.problem import DiscriminationProblem

DOWN = np.diag([0.0, 1.0])


@pytest.mark.parametrize("seed", range(10))
def test_sample_povm_valid(seed):
    p = sample_povm(2, 2, seed)
    assert p.completeness_residual() <= 1e-9
    assert p.min_eigenvalue() >= -1e-10


def test_sample_povm_deterministic():
    a = sample_povm(3, 4, seed=7).as_array()
    b = sample_povm(3, 4, seed=7).as_array()
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_povm(3, 4, seed=8).as_array())


def test_sample_povm_rejects_bad_args():
    with pytest.raises(ValueError):
        sample_povm(2, 1, 0)


def test_identical_operators_normalize_to_uniform():
    a = np.array([[2, 1j], [-1j, 1]])
    p = normalize_povm([a, a, a])
    for e in p:
        np.testing.assert_allclose(e, np.eye(2) / 3, atol=1e-14)


def test_singular_normalizer():
    with pytest.raises(SingularNormalizer):
        normalize_povm([np.diag([1.0, 0]), np.diag([2.0, 0])])


def test_sampling_approaches_up_vs_mixed(up_vs_mixed):
    report = brute_force_minimax(up_vs_mixed, n_samples=10_000, grid_step=1e-2, seed=0, polish=0)
    assert report.primal_bound <= 1 / 3 + 0.01


def test_brute_force_up_vs_mixed(up_vs_mixed):
    report = brute_force_minimax(up_vs_mixed, n_samples=10_000, grid_step=1e-3, seed=1)
    assert report.contains(1 / 3)
    assert report.sandwich_width <= 0.02
    assert report.dual_bound <= report.primal_bound + 1e-9


def test_brute_force_orthogonal():
    report = brute_force_minimax(DiscriminationProblem((RHO_UP, DOWN)), n_samples=500, seed=0)
    assert report.dual_bound == pytest.approx(0.0, abs=1e-9)
    assert report.primal_bound <= 1e-3


def test_brute_force_identical():
    rho = random_mixed(2, np.random.default_rng(1))
    report = brute_force_minimax(DiscriminationProblem((rho, rho)), n_samples=500, seed=0)
    assert report.primal_bound == pytest.approx(0.5, abs=1e-6)
    assert report.dual_bound == pytest.approx(0.5, abs=1e-6)


def test_brute_force_deterministic(up_vs_mixed):
    a = brute_force_minimax(up_vs_mixed, n_samples=300, seed=5, polish=1)
    b = brute_force_minimax(up_vs_mixed, n_samples=300, seed=5, polish=1)
    assert (a.primal_bound, a.dual_bound) == (b.primal_bound, b.dual_bound)
    assert np.array_equal(a.best_povm.as_array(), b.best_povm.as_array())


def test_brute_force_candidates(up_vs_mixed):
    best = minimax_n(up_vs_mixed).povm
    report = brute_force_minimax(up_vs_mixed, n_samples=10, seed=0, candidates=[best], polish=0)
    assert report.primal_bound == pytest.approx(1 / 3, abs=up_vs_mixed.gap_tol)


@pytest.mark.parametrize("seed", range(3))
def test_brute_force_brackets_solver(seed):
    rng = np.random.default_rng(40 + seed)
    problem = DiscriminationProblem(tuple(random_mixed(2, rng) for _ in range(3)))
    report = brute_force_minimax(problem, n_samples=2000, seed=seed)
    sol = minimax_n(problem)
    assert report.dual_bound <= report.primal_bound + 1e-9
    # sampled POVMs cannot beat the certified lower bound
    assert report.primal_bound >= sol.bound - 1e-9
    assert report.dual_bound <= sol.risk + 1e-9


def test_diagonal_up_vs_mixed(up_vs_mixed):
    report = diagonal_exhaustive(up_vs_mixed, grid_step=1 / 300)
    assert abs(report.primal_bound - 1 / 3) <= 1 / 300
    assert report.dual_bound <= report.primal_bound + 1e-12
    np.testing.assert_allclose(report.best_povm[0], np.diag([2 / 3, 0]), atol=1 / 300)


def test_diagonal_trivial():
    assert diagonal_exhaustive(DiscriminationProblem((RHO_UP, DOWN))).primal_bound == pytest.approx(0.0)
    same = diagonal_exhaustive(DiscriminationProblem((RHO_UP, RHO_UP)))
    assert same.primal_bound == pytest.approx(0.5)
    assert same.dual_bound == pytest.approx(0.5)


def test_diagonal_rejects_large_and_offdiagonal():
    states = tuple(np.diag(np.eye(4)[k]) for k in range(2))
    with pytest.raises(ProblemTooLarge):
        diagonal_exhaustive(DiscriminationProblem(states))
    with pytest.raises(ValueError):
        diagonal_exhaustive(DiscriminationProblem((RHO_UP, np.full((2, 2), 0.5))))


def test_diagonal_three_states():
    states = (np.diag([1.0, 0]), np.diag([0.5, 0.5]), np.diag([0.0, 1]))
    report = diagonal_exhaustive(DiscriminationProblem(states), grid_step=0.05)
    sol = minimax_n(DiscriminationProblem(states))
    # each lower bound sits below the other side's upper bound
    assert report.dual_bound <= sol.risk + 1e-12
    assert sol.bound <= report.primal_bound + 1e-12
    assert abs(sol.risk - report.primal_bound) <= 1e-6
