import numpy as np
import pytest
from scipy.stats import unitary_group

from qdiscrim.errors import LinearlyDependent
from qdiscrim.oracle import random_pure_state
from qdiscrim.unambiguous import PureStateSet, dual_basis, refine, unambiguous_minimax, uniqueness_test


def planar_pair(c):
    return np.array([[1, 0], [c, np.sqrt(1 - c * c)]], dtype=complex)


def three_state(c=0.5):
    return PureStateSet(np.array([[1, 0, 0], [c, np.sqrt(1 - c * c), 0], [0, 0, 1]], dtype=complex))


def cross_terms(states, povm):
    n = states.n
    return max(
        abs(np.vdot(states.vectors[i], povm[j] @ states.vectors[i]))
        for i in range(n)
        for j in range(n)
        if i != j
    )


def test_state_set_validation():
    with pytest.raises(ValueError):
        PureStateSet(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(LinearlyDependent):
        PureStateSet(np.eye(3)[:, :2])
    s = PureStateSet.normalized([[1, 1], [1, -1]])
    np.testing.assert_allclose(s.gram, np.eye(2), atol=1e-15)


def test_dual_basis_orthonormal():
    states = PureStateSet(np.eye(4)[:3])
    np.testing.assert_allclose(dual_basis(states).vectors, states.vectors)


@pytest.mark.parametrize("c", [0.2, 0.5, 0.8])
def test_dual_basis_norm(c):
    dual = dual_basis(PureStateSet(planar_pair(c)))
    np.testing.assert_allclose(np.sum(np.abs(dual.vectors) ** 2, axis=1), 1 / (1 - c * c), rtol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_dual_basis_unitary_columns(seed):
    u = unitary_group.rvs(4, random_state=seed)
    states = PureStateSet(u.T)
    np.testing.assert_allclose(dual_basis(states).vectors, states.vectors, atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_biorthogonality(seed):
    rng = np.random.default_rng(seed)
    states = PureStateSet(np.stack([random_pure_state(5, rng) for _ in range(4)]))
    dual = dual_basis(states)
    overlaps = dual.vectors.conj() @ states.vectors.T
    np.testing.assert_allclose(overlaps, np.eye(4), atol=1e-9)


def test_dual_basis_rejects_near_dependence():
    v = np.array([[1, 0], [1, 1e-5]], dtype=complex)
    with pytest.raises(LinearlyDependent):
        dual_basis(PureStateSet.normalized(v))


def test_two_state_half_overlap():
    sol = unambiguous_minimax(PureStateSet(planar_pair(0.5)))
    assert sol.kappa == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(sol.success_per_state, 0.5, atol=1e-10)
    assert sol.unique and sol.witnesses == ()


def test_orthonormal_states():
    states = PureStateSet(np.eye(3)[:2])
    sol = unambiguous_minimax(states)
    assert sol.kappa == pytest.approx(1.0)
    np.testing.assert_allclose(sol.povm[0], np.diag([1, 0, 0]), atol=1e-15)
    np.testing.assert_allclose(sol.povm[2], np.diag([0, 0, 1]), atol=1e-15)
    # omega_i are orthogonal to the complement projector, so nothing to refine
    assert sol.unique
    assert refine(sol, dual_basis(states), states) is sol


def test_orthonormal_full_dimension():
    sol = unambiguous_minimax(PureStateSet(np.eye(3)))
    assert sol.unique
    np.testing.assert_allclose(sol.povm[-1], 0, atol=1e-15)


def test_three_state_construction():
    states = three_state()
    sol = unambiguous_minimax(states)
    assert sol.kappa == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(sol.success_per_state, 0.5, atol=1e-10)
    assert not sol.unique
    # zero-based: the third state is the witness
    assert sol.witnesses == (2,)
    assert uniqueness_test(sol, dual_basis(states)) == (False, [2])


def test_refine_three_state():
    states = three_state()
    dual = dual_basis(states)
    sol = unambiguous_minimax(states)
    out = refine(sol, dual, states)
    np.testing.assert_allclose(out.kappas, [0.5, 0.5, 1.0], atol=1e-12)
    np.testing.assert_allclose(out.povm[2], np.diag([0, 0, 1]), atol=1e-12)
    np.testing.assert_allclose(out.povm[0], sol.povm[0], atol=1e-15)
    np.testing.assert_allclose(out.povm[1], sol.povm[1], atol=1e-15)
    assert min(out.success_per_state) == pytest.approx(min(sol.success_per_state), abs=1e-12)
    assert not out.matches_canonical
    assert [idx for idx, _ in out.refinement_trace] == [(2,)]
    assert uniqueness_test(out, dual)[0]


@pytest.mark.parametrize("seed", range(4))
def test_refine_monotone_random(seed):
    # planar pair plus extra orthogonal states, rotated by a random unitary
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.1, 0.9)
    vecs = np.zeros((4, 5), dtype=complex)
    vecs[:2, :2] = planar_pair(c)
    vecs[2, 2] = vecs[3, 3] = 1
    u = unitary_group.rvs(5, random_state=seed)
    states = PureStateSet(vecs @ u.T)
    sol = unambiguous_minimax(states)
    out = refine(sol, dual_basis(states), states)
    assert np.all(out.success_per_state >= sol.success_per_state - 1e-12)
    assert min(out.success_per_state) == pytest.approx(sol.kappa, abs=1e-10)
    assert np.linalg.eigvalsh(out.povm[-1])[0] >= -1e-10
    assert cross_terms(states, out.povm) <= 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_solution_invariants_random(seed):
    rng = np.random.default_rng(10 + seed)
    for _ in range(20):
        d = int(rng.integers(2, 6))
        n = int(rng.integers(2, d + 1))
        states = PureStateSet(np.stack([random_pure_state(d, rng) for _ in range(n)]))
        try:
            sol = unambiguous_minimax(states)
        except LinearlyDependent:
            continue
        assert cross_terms(states, sol.povm) <= 1e-9
        assert np.linalg.eigvalsh(sol.povm[-1])[0] >= -1e-10
        np.testing.assert_allclose(sol.success_per_state, sol.kappa, atol=1e-10)
        frame = dual_basis(states).projectors().sum(axis=0)
        assert np.linalg.eigvalsh(np.eye(d) - sol.kappa * (1 + 1e-6) * frame)[0] < 0


@pytest.mark.parametrize("d", [2, 3, 4])
def test_two_state_kappa_formula(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        v = np.stack([random_pure_state(d, rng) for _ in range(2)])
        sol = unambiguous_minimax(PureStateSet(v))
        assert sol.kappa == pytest.approx(1 - abs(np.vdot(v[0], v[1])), abs=1e-9)
