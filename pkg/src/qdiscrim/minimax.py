"""Minimax discrimination: no prior, minimize the worst per-state risk.

The minimax risk equals the Bayes risk at the least favorable prior, and an
optimal minimax measurement is a Bayes-optimal measurement at that prior
whose per-state risks are equal on the prior's support.

* two states: bisection on the equalization function
  ``f(a) = Tr[rho1 P1(a)] - Tr[rho2 P2(a)]`` (nondecreasing in ``a``), then
  equalization through the kernel of ``a rho1 - (1 - a) rho2``;
* N states: concave maximization of the Bayes risk over the simplex, coarse
  grid then LP cutting planes, whose master LP also yields the equalizing
  mixture of inner-solver POVMs;
* covariant families: group-average a Bayes solution at the uniform prior.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .bayes import DualCertificate, bayes_risk_n, helstrom_two_state, solve_cost_operators
from .errors import (
    ConvergenceFailure,
    DegenerateKernel,
    DimensionMismatch,
    NonUnitaryRep,
)
from .herm import Povm, as_density_matrix, default_kernel_tol, is_unitary, max_abs, signed_parts
from .problem import DiscriminationProblem

log = logging.getLogger(__name__)

SUPPORT_TOL = 1e-6
GRID_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class MinimaxSolution:
    povm: Povm
    risk: float
    worst_prior: np.ndarray
    certificate: DualCertificate
    per_state_risk: np.ndarray
    equalized: bool
    unique: bool = True
    sandwich_trace: tuple = field(default=())

    @property
    def bound(self) -> float:
        return self.certificate.bound

    @property
    def width(self) -> float:
        """Primal risk minus certified lower bound."""
        return self.risk - self.certificate.bound


@dataclass(frozen=True, eq=False)
class EqualizationProfile:
    """``f_minus``/``f_plus``: the equalization function with the kernel given to outcome 2 / outcome 1."""

    a: np.ndarray
    f_minus: np.ndarray
    f_plus: np.ndarray

    @property
    def grid(self):
        return list(zip(self.a.tolist(), self.f_minus.tolist(), self.f_plus.tolist()))

    def is_monotone(self, slack: float = 1e-9) -> bool:
        return bool(
            np.all(np.diff(self.f_minus) >= -slack)
            and np.all(np.diff(self.f_plus) >= -slack)
            and np.all(self.f_minus <= self.f_plus + slack)
        )

    def endpoints_ok(self, slack: float = 1e-9) -> bool:
        return bool(self.f_minus[0] <= slack and self.f_plus[-1] >= -slack)


def _pair(rho1, rho2):
    r1, r2 = as_density_matrix(rho1), as_density_matrix(rho2)
    if r1.shape != r2.shape:
        raise DimensionMismatch(f"states have shapes {r1.shape} and {r2.shape}")
    return r1, r2


def _tr(a, b):
    return float(np.vdot(a, b).real)


def _equalization_values(r1, r2, a, kernel_tol):
    pos, ker, neg = signed_parts(a * r1 - (1.0 - a) * r2, kernel_tol)
    t1p, t1k = _tr(pos, r1), _tr(ker, r1)
    t2n, t2k = _tr(neg, r2), _tr(ker, r2)
    return t1p - t2n - t2k, t1p + t1k - t2n, (pos, ker, neg)


def equalization_profile(rho1, rho2, grid_step: float = 0.01, kernel_tol=None) -> EqualizationProfile:
    if not 0.0 < grid_step <= 0.5:
        raise ValueError("grid_step must lie in (0, 0.5]")
    r1, r2 = _pair(rho1, rho2)
    m = int(round(1.0 / grid_step))
    a = np.linspace(0.0, 1.0, m + 1)
    vals = np.array([_equalization_values(r1, r2, x, kernel_tol)[:2] for x in a])
    return EqualizationProfile(a, vals[:, 0], vals[:, 1])


def _kernel_dim_on_support(r1, r2, a, kernel_tol):
    total = r1 + r2
    w, v = np.linalg.eigh(total)
    basis = v[:, w > default_kernel_tol(total)]
    diff = basis.conj().T @ (a * r1 - (1.0 - a) * r2) @ basis
    tol = kernel_tol if kernel_tol is not None else default_kernel_tol(diff)
    return int(np.sum(np.abs(np.linalg.eigvalsh(diff)) <= tol))


def minimax_two_state(
    rho1,
    rho2,
    kernel_tol=None,
    equalization_tol: float = 1e-9,
    bracket_tol: float = 1e-12,
) -> MinimaxSolution:
    """Equalized Bayes-optimal measurement at the least favorable prior ``(a0, 1 - a0)``.

    Bisection keeps ``f_plus(lo) < 0 < f_minus(hi)``.  A midpoint with
    ``f_minus <= 0 <= f_plus`` is a valid ``a0``; there the kernel weight
    ``alpha`` solves ``Tr[rho1 (Pi_+ + alpha K)] = Tr[rho2 (Pi_- + (1 - alpha) K)]``.
    If the bracket closes first, the two one-sided measurements are mixed
    in the ratio that zeroes ``f``.
    """
    r1, r2 = _pair(rho1, rho2)
    eye = np.eye(r1.shape[0])
    lo, hi = 0.0, 1.0
    hit = None
    while hi - lo > bracket_tol:
        mid = 0.5 * (lo + hi)
        f_minus, f_plus, parts = _equalization_values(r1, r2, mid, kernel_tol)
        if f_minus > equalization_tol:
            hi = mid
        elif f_plus < -equalization_tol:
            lo = mid
        else:
            hit = (mid, f_minus, f_plus, parts)
            break
    if hit is None:
        for end in (lo, hi):
            f_minus, f_plus, parts = _equalization_values(r1, r2, end, kernel_tol)
            if f_minus <= equalization_tol and f_plus >= -equalization_tol:
                hit = (end, f_minus, f_plus, parts)
                break

    if hit is not None:
        a0, f_minus, f_plus, (pos, ker, _) = hit
        spread = f_plus - f_minus
        alpha = float(np.clip(-f_minus / spread, 0.0, 1.0)) if spread > 1e-15 else 1.0
        b1 = pos + alpha * ker
    else:
        # f jumps across the bracket: mix the one-sided limits to zero it
        f_left, f_right = (
            _equalization_values(r1, r2, lo, kernel_tol)[1],
            _equalization_values(r1, r2, hi, kernel_tol)[0],
        )
        left = helstrom_two_state(r1, r2, (lo, 1 - lo), kernel_weight=1.0, kernel_tol=kernel_tol).povm[0]
        right = helstrom_two_state(r1, r2, (hi, 1 - hi), kernel_weight=0.0, kernel_tol=kernel_tol).povm[0]
        b1 = (f_right * left - f_left * right) / (f_right - f_left)
        a0 = 0.5 * (lo + hi)

    povm = Povm((b1, eye - b1))
    success = np.array([_tr(povm[0], r1), _tr(povm[1], r2)])
    per_state = 1.0 - success
    prior = np.array([a0, 1.0 - a0])
    cert = helstrom_two_state(r1, r2, prior, kernel_tol=kernel_tol).certificate
    unique = _kernel_dim_on_support(r1, r2, a0, kernel_tol) < 2
    if not unique:
        warnings.warn(
            "equalizing operator has a kernel of dimension >= 2 on the joint support; "
            "the returned minimax measurement is one of many",
            DegenerateKernel,
            stacklevel=2,
        )
    risk = float(per_state.max())
    return MinimaxSolution(
        povm=povm,
        risk=risk,
        worst_prior=prior,
        certificate=cert,
        per_state_risk=per_state,
        equalized=bool(abs(success[0] - success[1]) <= equalization_tol),
        unique=unique,
        sandwich_trace=(risk - cert.bound,),
    )


def simplex_grid(n: int, step: float) -> np.ndarray:
    """Barycentric grid on the probability simplex, lexicographically ascending."""
    m = max(1, int(round(1.0 / step)))
    rows = []

    def fill(prefix, remaining, slots):
        if slots == 1:
            rows.append(prefix + [remaining])
            return
        for k in range(remaining + 1):
            fill(prefix + [k], remaining - k, slots - 1)

    fill([], m, n)
    return np.array(rows, dtype=float) / m


def _per_state_risks(states, weights, povms):
    conf = np.einsum("iab,kjba->kij", states, povms).real
    return np.sum(weights[None] * conf, axis=2)


def _master_lp(columns):
    """min_delta over mixtures: returns (mixture weights, dual prior)."""
    k, n = columns.shape
    c = np.zeros(k + 1)
    c[-1] = 1.0
    a_ub = np.hstack([columns.T, -np.ones((n, 1))])
    a_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(n),
        A_eq=a_eq,
        b_eq=[1.0],
        bounds=[(0, None)] * k + [(None, None)],
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"master LP failed: {res.message}")
    lam = np.clip(res.x[:k], 0.0, None)
    mu = np.clip(-res.ineqlin.marginals, 0.0, None)
    return lam / lam.sum(), mu / mu.sum()


def _best_index(bounds, priors):
    top = np.flatnonzero(bounds == bounds.max())
    if top.size == 1:
        return int(top[0])
    return int(min(top, key=lambda i: tuple(priors[i])))


def minimax_n(
    problem: DiscriminationProblem,
    sandwich_tol: float | None = None,
    max_rounds: int = 500,
    grid_step: float | None = None,
) -> MinimaxSolution:
    """Minimax measurement for N states by maximizing the Bayes risk over priors.

    Every evaluated prior contributes a POVM column (its per-state risks) and
    a certified lower bound.  The master LP picks the best mixture of
    collected POVMs (an upper bound) and its dual prior is evaluated next,
    until upper minus certified lower bound is at most ``sandwich_tol``
    (default ``problem.gap_tol``).  Tolerances refer to weights rescaled so
    that ``max w_ij = 1``.
    """
    n = problem.n
    if sandwich_tol is None:
        sandwich_tol = problem.gap_tol
    step = problem.simplex_grid_step if grid_step is None else grid_step
    scale = float(problem.weights.max())
    if scale <= 0:
        scale = 1.0
    weights = problem.weights / scale
    states = problem.state_array()

    def cost_ops(priors):
        return np.einsum("ij,bi,ixy->bjxy", weights, priors, states)

    priors = simplex_grid(n, step)
    povms, ys, bounds = [], [], []
    for start in range(0, len(priors), GRID_CHUNK):
        res = solve_cost_operators(cost_ops(priors[start : start + GRID_CHUNK]), target_gap=1e-6)
        povms.append(res.povms)
        ys.append(res.y)
        bounds.append(res.bounds)
    povms = np.concatenate(povms)
    ys = np.concatenate(ys)
    bounds = np.concatenate(bounds)
    columns = _per_state_risks(states, weights, povms)

    trace = []
    lam = None
    for _ in range(max_rounds):
        lam, mu = _master_lp(columns)
        upper = float(np.max(lam @ columns))
        width = upper - float(bounds.max())
        trace.append(width)
        if width <= sandwich_tol:
            break
        res = solve_cost_operators(cost_ops(mu[None]), target_gap=1e-9)
        priors = np.vstack([priors, mu])
        povms = np.concatenate([povms, res.povms])
        ys = np.concatenate([ys, res.y])
        bounds = np.concatenate([bounds, res.bounds])
        columns = np.vstack([columns, _per_state_risks(states, weights, res.povms)])
    else:
        lam, _ = _master_lp(columns)

    best = _best_index(bounds, priors)
    worst_prior = priors[best]
    mixture = np.einsum("k,kjab->jab", lam, povms)
    candidates = [povms[best], mixture]
    risks = [np.max(_per_state_risks(states, weights, c[None])[0]) for c in candidates]
    chosen = candidates[0] if risks[0] <= risks[1] + 1e-12 else candidates[1]

    norm = max_abs(chosen.sum(axis=0) - np.eye(problem.dim))
    povm = Povm(tuple(chosen)) if norm <= 1e-9 else _renormalize(chosen)
    per_state = problem.per_state_risk(povm)
    risk = float(per_state.max())
    cert = DualCertificate(ys[best] * scale, worst_prior)
    support = worst_prior > SUPPORT_TOL
    spread = float(np.ptp(per_state[support])) if support.any() else 0.0
    sol = MinimaxSolution(
        povm=povm,
        risk=risk,
        worst_prior=worst_prior,
        certificate=cert,
        per_state_risk=per_state,
        equalized=spread <= max(problem.equalization_tol, sandwich_tol * scale),
        unique=True,
        sandwich_trace=tuple(w * scale for w in trace),
    )
    log.debug("minimax_n: %d priors evaluated, width %.3e", len(priors), sol.width)
    if sol.width > sandwich_tol * scale:
        raise ConvergenceFailure(
            f"sandwich width {sol.width:.3e} above {sandwich_tol * scale:.1e} after {max_rounds} rounds",
            best_gap=sol.width,
            partial=sol,
        )
    return sol


def _renormalize(arr):
    total = arr.sum(axis=0)
    w, v = np.linalg.eigh(total)
    m = (v / np.sqrt(w)) @ v.conj().T
    return Povm(tuple(m @ p @ m for p in arr))


def _check_reps(reps, dim):
    reps = [np.asarray(u, dtype=complex) for u in reps]
    for u in reps:
        if u.shape != (dim, dim):
            raise DimensionMismatch(f"representation matrix has shape {u.shape}, expected {(dim, dim)}")
        if not is_unitary(u):
            raise NonUnitaryRep("representation matrix is not unitary within 1e-10")
    for ui in reps:
        for uj in reps:
            prod = ui @ uj.conj().T
            if not any(abs(abs(np.vdot(uk, prod)) - dim) <= 1e-8 * dim for uk in reps):
                raise NonUnitaryRep("representation is not closed under composition (up to phase)")
    return reps


def covariantize(povm: Povm, reps) -> Povm:
    """Group-average a POVM: ``P'_i = U_i K U_i^dag`` with ``K = mean_j U_j^dag P_j U_j``."""
    if len(reps) != povm.n:
        raise DimensionMismatch(f"{len(reps)} representation matrices for {povm.n} outcomes")
    reps = _check_reps(reps, povm.dim)
    seed = sum(u.conj().T @ p @ u for u, p in zip(reps, povm)) / povm.n
    return Povm(tuple(u @ seed @ u.conj().T for u in reps))


def minimax_covariant(rho0, reps, gap_tol: float = 1e-7) -> MinimaxSolution:
    """Minimax solution for the orbit ``rho_i = U_i rho0 U_i^dag`` (error weights).

    A covariant Bayes-optimal measurement at the uniform prior is also
    minimax optimal, with the same success probability for every state.
    """
    rho0 = as_density_matrix(rho0)
    reps = _check_reps(reps, rho0.shape[0])
    states = [u @ rho0 @ u.conj().T for u in reps]
    problem = DiscriminationProblem(states, gap_tol=gap_tol)
    uniform = np.full(problem.n, 1.0 / problem.n)
    bayes = bayes_risk_n(problem, uniform)
    povm = covariantize(bayes.povm, reps)
    per_state = problem.per_state_risk(povm)
    risk = float(per_state.max())
    return MinimaxSolution(
        povm=povm,
        risk=risk,
        worst_prior=uniform,
        certificate=bayes.certificate,
        per_state_risk=per_state,
        equalized=bool(np.ptp(per_state) <= 1e-8),
        unique=True,
        sandwich_trace=(risk - bayes.certificate.bound,),
    )
