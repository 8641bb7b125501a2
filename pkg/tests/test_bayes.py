import numpy as np
import pytest

from conftest import MIXED, RHO_UP, random_mixed, random_unitary, trine_states
from qdiscrim.bayes import DualCertificate, bayes_risk_n, check_certificate, helstrom_two_state
from qdiscrim.errors import ConvergenceFailure, DimensionMismatch, InfeasibleCertificate, InvalidPrior
from qdiscrim.herm import pure_state, trace_norm
from qdiscrim.oracle import random_density_matrix
from qdiscrim.problem import DiscriminationProblem


def helstrom_error(r1, r2, a):
    return 0.5 * (1 - trace_norm(a[0] * r1 - a[1] * r2))


def test_helstrom_orthogonal():
    sol = helstrom_two_state(RHO_UP, np.diag([0.0, 1.0]))
    assert sol.risk == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(sol.povm[0], np.diag([1, 0]), atol=1e-15)


def test_helstrom_up_vs_mixed_prior():
    sol = helstrom_two_state(RHO_UP, MIXED, prior=(1 / 3, 2 / 3))
    assert sol.risk == pytest.approx(1 / 3, abs=1e-10)
    assert sol.certificate.bound == pytest.approx(1 / 3, abs=1e-10)


def test_helstrom_pure_overlap():
    c = np.cos(np.pi / 4)
    psi1, psi2 = np.array([1, 0]), np.array([c, np.sqrt(1 - c * c)])
    sol = helstrom_two_state(pure_state(psi1), pure_state(psi2))
    assert sol.risk == pytest.approx((1 - 1 / np.sqrt(2)) / 2, abs=1e-10)


def test_helstrom_kernel_weight():
    # D = diag(0, -1/3): kernel spans |0>
    to_one = helstrom_two_state(RHO_UP, MIXED, prior=(1 / 3, 2 / 3))
    to_two = helstrom_two_state(RHO_UP, MIXED, prior=(1 / 3, 2 / 3), kernel_weight=0.0)
    np.testing.assert_allclose(to_one.povm[0], np.diag([1, 0]), atol=1e-14)
    np.testing.assert_allclose(to_two.povm[0], 0, atol=1e-14)
    assert to_one.risk == pytest.approx(to_two.risk, abs=1e-12)


def test_helstrom_errors():
    with pytest.raises(DimensionMismatch):
        helstrom_two_state(RHO_UP, np.eye(3) / 3)
    with pytest.raises(InvalidPrior):
        helstrom_two_state(RHO_UP, MIXED, prior=(0.5, 0.6))


@pytest.mark.parametrize("seed", range(4))
def test_helstrom_matches_trace_norm_formula(seed):
    rng = np.random.default_rng(seed)
    for _ in range(25):
        d = int(rng.integers(2, 5))
        r1, r2 = random_mixed(d, rng), random_mixed(d, rng)
        a1 = rng.uniform()
        sol = helstrom_two_state(r1, r2, prior=(a1, 1 - a1))
        assert abs(sol.risk - helstrom_error(r1, r2, (a1, 1 - a1))) <= 1e-10
        assert sol.gap <= 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_helstrom_unitary_invariance(seed):
    rng = np.random.default_rng(100 + seed)
    r1, r2 = random_mixed(3, rng), random_mixed(3, rng)
    u = random_unitary(3, seed)
    a = helstrom_two_state(r1, r2, prior=(0.3, 0.7)).risk
    b = helstrom_two_state(u @ r1 @ u.conj().T, u @ r2 @ u.conj().T, prior=(0.3, 0.7)).risk
    assert abs(a - b) <= 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_bayes_n_agrees_with_helstrom(seed):
    rng = np.random.default_rng(200 + seed)
    for _ in range(25):
        r1, r2 = random_density_matrix(2, rng), random_density_matrix(2, rng)
        a1 = rng.uniform(0.05, 0.95)
        prior = (a1, 1 - a1)
        sol = bayes_risk_n(DiscriminationProblem((r1, r2)), prior)
        assert abs(sol.risk - helstrom_two_state(r1, r2, prior).risk) <= 1e-8


def test_bayes_identical_states():
    rho = random_density_matrix(2, np.random.default_rng(3))
    sol = bayes_risk_n(DiscriminationProblem((rho, rho, rho)), np.full(3, 1 / 3))
    assert sol.risk == pytest.approx(2 / 3, abs=1e-8)


def test_bayes_trine(trine):
    sol = bayes_risk_n(trine, np.full(3, 1 / 3))
    assert sol.risk == pytest.approx(1 / 3, abs=1e-8)
    np.testing.assert_allclose(sol.success_per_state, 2 / 3, atol=1e-7)
    assert check_certificate(sol.certificate, trine) == pytest.approx(1 / 3, abs=1e-7)


@pytest.mark.parametrize("seed", range(6))
def test_bayes_solution_invariants(seed):
    rng = np.random.default_rng(300 + seed)
    n, d = int(rng.integers(2, 5)), int(rng.integers(2, 4))
    states = tuple(random_mixed(d, rng) for _ in range(n))
    weights = rng.uniform(0, 2, size=(n, n))
    problem = DiscriminationProblem(states, weights=weights)
    prior = rng.dirichlet(np.ones(n))
    sol = bayes_risk_n(problem, prior)
    recomputed = prior @ problem.per_state_risk(sol.povm)
    assert abs(recomputed - sol.risk) <= 1e-9
    check_certificate(sol.certificate, problem)
    assert -1e-9 <= sol.gap <= problem.gap_tol
    # the recorded central-path risks never increase
    assert np.all(np.diff(sol.risk_trace) <= 1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_bayes_risk_concave_in_prior(seed):
    rng = np.random.default_rng(400 + seed)
    problem = DiscriminationProblem(tuple(random_mixed(2, rng) for _ in range(3)))
    for _ in range(5):
        a, b = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
        t = rng.uniform()
        mid = bayes_risk_n(problem, t * a + (1 - t) * b).risk
        ends = t * bayes_risk_n(problem, a).risk + (1 - t) * bayes_risk_n(problem, b).risk
        assert mid >= ends - 2 * problem.gap_tol


def test_check_certificate_zero(up_vs_mixed):
    assert check_certificate(DualCertificate(np.zeros((2, 2)), np.array([0.3, 0.7])), up_vs_mixed) == 0.0


def test_check_certificate_up_vs_mixed(up_vs_mixed):
    y = np.diag([1 / 3, 0.0])
    assert check_certificate(DualCertificate(y, np.array([1 / 3, 2 / 3])), up_vs_mixed) == pytest.approx(1 / 3)


def test_check_certificate_violation(up_vs_mixed):
    with pytest.raises(InfeasibleCertificate) as info:
        check_certificate(DualCertificate(np.eye(2), np.array([1 / 3, 2 / 3])), up_vs_mixed)
    assert info.value.violation > 0.5
    assert info.value.outcome in (0, 1)


def test_check_certificate_shape(up_vs_mixed):
    with pytest.raises(DimensionMismatch):
        check_certificate(DualCertificate(np.zeros((3, 3)), np.array([0.5, 0.5])), up_vs_mixed)


def test_convergence_failure_carries_partial(trine):
    with pytest.raises(ConvergenceFailure) as info:
        bayes_risk_n(trine, np.full(3, 1 / 3), max_newton=3)
    assert info.value.partial is not None
    assert info.value.best_gap > trine.gap_tol
    check_certificate(info.value.partial.certificate, trine)


def test_trine_states_helper_overlap():
    s = trine_states()
    assert abs(np.trace(s[0] @ s[1]).real - 0.25) < 1e-14
