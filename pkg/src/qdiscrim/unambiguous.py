"""Minimax unambiguous discrimination of linearly independent pure states.

Conclusive outcomes must never err, so ``P_i`` is a multiple of
``|omega_i><omega_i|`` where ``{omega_i}`` is the dual basis of the states.
Maximizing the smallest success probability gives the same multiplier
``kappa`` for every state, the largest one keeping the inconclusive element
``I - kappa sum_i |omega_i><omega_i|`` positive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, LinearlyDependent
from .herm import Povm, support_projector

log = logging.getLogger(__name__)

NORM_TOL = 1e-12
INDEPENDENCE_TOL = 1e-8
MEMBERSHIP_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class PureStateSet:
    """Unit vectors ``vectors[i]`` (rows) in dimension ``dim``."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        if v.ndim != 2 or v.shape[0] < 1:
            raise DimensionMismatch(f"expected an (N, d) array of state vectors, got shape {v.shape}")
        if v.shape[0] > v.shape[1]:
            raise LinearlyDependent(f"{v.shape[0]} states in dimension {v.shape[1]} cannot be independent")
        norms = np.linalg.norm(v, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise ValueError(f"state vectors must have unit norm (got {norms})")
        object.__setattr__(self, "vectors", v)

    @classmethod
    def normalized(cls, vectors) -> PureStateSet:
        v = np.atleast_2d(np.asarray(vectors, dtype=complex))
        return cls(v / np.linalg.norm(v, axis=1, keepdims=True))

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def gram(self) -> np.ndarray:
        """``gram[i, j] = <psi_i|psi_j>``."""
        return self.vectors.conj() @ self.vectors.T


@dataclass(frozen=True, eq=False)
class DualBasis:
    vectors: np.ndarray  # rows omega_i

    def projectors(self) -> np.ndarray:
        return np.einsum("ia,ib->iab", self.vectors, self.vectors.conj())


@dataclass(frozen=True, eq=False)
class UnambiguousSolution:
    """POVM with N conclusive elements plus a final inconclusive one.

    ``kappa`` is the common multiplier of the canonical solution (the minimum
    over ``kappas`` after refinement).  ``matches_canonical`` is False when a
    refinement moved the endpoint away from the uniform-multiplier POVM.
    """

    povm: Povm
    kappa: float
    kappas: np.ndarray
    success_per_state: np.ndarray
    unique: bool
    witnesses: tuple = ()
    refinement_trace: tuple = field(default=())
    matches_canonical: bool = True


def dual_basis(states: PureStateSet, independence_tol: float = INDEPENDENCE_TOL) -> DualBasis:
    """Vectors ``omega_i = sum_j (G^-1)_ji psi_j`` with ``<omega_i|psi_j> = delta_ij``."""
    gram = states.gram
    lam_min = np.linalg.eigvalsh(gram)[0]
    if lam_min <= independence_tol:
        raise LinearlyDependent(f"Gram matrix minimum eigenvalue {lam_min:.3e} <= {independence_tol:.1e}")
    # G = L L^dag, G^-1 = L^-dag L^-1
    chol = np.linalg.cholesky(gram)
    eye = np.eye(states.n)
    g_inv = np.linalg.solve(chol.conj().T, np.linalg.solve(chol, eye))
    return DualBasis(g_inv.T @ states.vectors)


def _assemble(states, dual, kappas):
    proj = dual.projectors()
    conclusive = kappas[:, None, None] * proj
    inconclusive = np.eye(states.dim) - conclusive.sum(axis=0)
    povm = Povm(tuple(conclusive) + (inconclusive,))
    success = np.einsum("ia,iab,ib->i", states.vectors.conj(), conclusive, states.vectors).real
    return povm, success


def unambiguous_minimax(states: PureStateSet) -> UnambiguousSolution:
    """Canonical optimum ``P_i = kappa |omega_i><omega_i|`` with ``1/kappa = lambda_max(sum_i |omega_i><omega_i|)``."""
    dual = dual_basis(states)
    frame = dual.projectors().sum(axis=0)
    kappa = 1.0 / np.linalg.eigvalsh(frame)[-1]
    kappas = np.full(states.n, kappa)
    povm, success = _assemble(states, dual, kappas)
    sol = UnambiguousSolution(povm, float(kappa), kappas, success, unique=True)
    unique, witnesses = uniqueness_test(sol, dual)
    return replace(sol, unique=unique, witnesses=tuple(witnesses))


def uniqueness_test(solution: UnambiguousSolution, dual: DualBasis, membership_tol: float = MEMBERSHIP_TOL):
    """Indices ``i`` with ``omega_i`` inside the support of the inconclusive element.

    The optimum is unique exactly when this witness list is empty.
    """
    inconclusive = solution.povm[-1]
    supp = support_projector(inconclusive, 1e-9 * max(1.0, np.max(np.abs(inconclusive))))
    witnesses = []
    for i, omega in enumerate(dual.vectors):
        outside = np.linalg.norm(omega - supp @ omega)
        if outside <= membership_tol * np.linalg.norm(omega):
            witnesses.append(i)
    return not witnesses, witnesses


def _max_level(residual, omegas, floors, weights):
    """Largest ``t`` with ``residual - sum_i max(floor_i, t w_i) |omega_i><omega_i| >= 0``."""

    def feasible(t):
        k = np.maximum(floors, t * weights)
        op = residual - np.einsum("i,ia,ib->ab", k, omegas, omegas.conj())
        return np.linalg.eigvalsh(op)[0] >= -1e-13

    lo = float(np.min(floors / weights))
    # P_i <= I caps kappa_i at 1/||omega_i||^2
    hi = float(np.min(1.0 / (np.sum(np.abs(omegas) ** 2, axis=1) * weights)))
    if feasible(hi):
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return lo


def refine(solution: UnambiguousSolution, dual: DualBasis, states: PureStateSet | None = None) -> UnambiguousSolution:
    """Iteratively raise the witnesses' ``<omega_i|P_i|omega_i>`` among equally optimal POVMs.

    Each round takes the current witness set ``S_k``, keeps every other
    element fixed, and maximizes ``min_{i in S_k} <omega_i|P_i|omega_i>``
    without lowering any multiplier.  The next witness set is drawn from
    ``S_k`` only, and always loses at least the elements that hit the bound,
    so the loop terminates.
    """
    _, witnesses = uniqueness_test(solution, dual)
    if not witnesses:
        return solution
    if states is None:
        raise ValueError("refine needs the state set to recompute success probabilities")
    omegas = dual.vectors
    norm2 = np.sum(np.abs(omegas) ** 2, axis=1)
    kappas = solution.kappas.astype(float).copy()
    trace = []
    current = list(witnesses)
    while current:
        idx = np.array(current)
        others = np.setdiff1d(np.arange(len(kappas)), idx)
        residual = np.eye(omegas.shape[1]) - np.einsum(
            "i,ia,ib->ab", kappas[others], omegas[others], omegas[others].conj()
        )
        # <omega_i|P_i|omega_i> = kappa_i ||omega_i||^4, so a common level t means kappa_i = t / ||omega_i||^4
        weights = 1.0 / norm2[idx] ** 2
        level = _max_level(residual, omegas[idx], kappas[idx], weights)
        kappas[idx] = np.maximum(kappas[idx], level * weights)
        povm, success = _assemble(states, dual, kappas)
        trace.append((tuple(int(i) for i in idx), povm))
        log.debug("refine: witnesses %s raised to level %.6g", current, level)
        probe = replace(solution, povm=povm)
        _, still = uniqueness_test(probe, dual)
        at_level = set(int(i) for i in idx[np.isclose(kappas[idx] * norm2[idx] ** 2, level, rtol=1e-9)])
        nxt = [i for i in current if i in still and i not in at_level]
        current = nxt
    povm, success = _assemble(states, dual, kappas)
    return UnambiguousSolution(
        povm=povm,
        kappa=float(kappas.min()),
        kappas=kappas,
        success_per_state=success,
        unique=solution.unique,
        witnesses=solution.witnesses,
        refinement_trace=tuple(trace),
        matches_canonical=bool(np.allclose(kappas, solution.kappa, rtol=0, atol=1e-12)),
    )
