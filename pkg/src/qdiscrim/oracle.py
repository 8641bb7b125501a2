"""Brute-force bounds used to cross-check the solvers.

Nothing here calls the barrier solver.  Upper bounds come from evaluating
randomly sampled POVMs (plus any candidates handed in); lower bounds come
from explicitly constructed dual-feasible operators ``Y <= W_j`` on a prior
grid.  Both sides are certified, so the reported sandwich always satisfies
weak duality.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import minimize

from .errors import ProblemTooLarge, SingularNormalizer
from .herm import Povm, max_abs
from .minimax import simplex_grid
from .problem import DiscriminationProblem

log = logging.getLogger(__name__)

MAX_RESAMPLE = 10
MAX_DIAGONAL_DIMS = 6
MAX_DIAGONAL_COMBOS = 5_000_000


@dataclass(frozen=True, eq=False)
class OracleReport:
    primal_bound: float
    dual_bound: float
    samples: int
    seed: int | None
    best_povm: Povm | None = None
    best_prior: np.ndarray | None = None

    @property
    def sandwich_width(self) -> float:
        return self.primal_bound - self.dual_bound

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.dual_bound - tol <= value <= self.primal_bound + tol


def random_pure_state(dim: int, rng) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density_matrix(dim: int, rng, rank: int | None = None) -> np.ndarray:
    """Normalized ``G G^dag`` with a complex Gaussian ``dim x rank`` factor."""
    g = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _normalize(factors):
    """``P_j = S^-1/2 A_j S^-1/2`` for ``A_j = G_j G_j^dag``; batched over leading axes."""
    a = factors @ np.conj(np.swapaxes(factors, -1, -2))
    s = a.sum(axis=-3)
    w, v = np.linalg.eigh(s)
    cond = w[..., 0] / w[..., -1]
    inv = (v / np.sqrt(np.abs(w))[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    p = inv[..., None, :, :] @ a @ inv[..., None, :, :]
    return 0.5 * (p + np.conj(np.swapaxes(p, -1, -2))), cond


def normalize_povm(ops) -> Povm:
    """Rescale positive operators so they sum to the identity."""
    a = np.asarray(ops, dtype=complex)
    s = a.sum(axis=0)
    w, v = np.linalg.eigh(0.5 * (s + s.conj().T))
    if w[0] <= 1e-12 * max(1.0, w[-1]):
        raise SingularNormalizer(f"sum of operators is singular (min eigenvalue {w[0]:.3e})")
    inv = (v / np.sqrt(w)) @ v.conj().T
    return Povm(tuple(inv @ x @ inv for x in a))


def _factors(rng, count, n, dim):
    """Complex Gaussian ``dim x dim`` factors with a uniformly random number of nonzero columns."""
    shape = (count, n, dim, dim)
    g = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    rank = rng.integers(1, dim + 1, size=(count, n, 1, 1))
    return np.where(np.arange(dim) < rank, g, 0.0)


def _draw(rng, count, n, dim):
    g = _factors(rng, count, n, dim)
    for _ in range(MAX_RESAMPLE):
        p, cond = _normalize(g)
        bad = cond <= 1e-10
        if not bad.any():
            return p
        g[bad] = _factors(rng, int(bad.sum()), n, dim)
    raise SingularNormalizer(f"normalizer stayed singular after {MAX_RESAMPLE} draws")


def sample_povm(dim: int, n_outcomes: int, seed=None) -> Povm:
    """Random POVM from squared complex Gaussian factors of random rank, jointly renormalized."""
    if dim < 1 or n_outcomes < 2:
        raise ValueError("need dim >= 1 and at least two outcomes")
    rng = np.random.default_rng(seed)
    return Povm(tuple(_draw(rng, 1, n_outcomes, dim)[0]))


def _state_risks(problem, povms):
    conf = np.einsum("iab,kjba->kij", problem.state_array(), povms).real
    return np.sum(problem.weights[None] * conf, axis=2)


def _polish_primal(problem, start, maxiter):
    """Nelder-Mead on the Gaussian-factor parametrization, started at the square roots of ``start``."""
    n, d = problem.n, problem.dim
    w, v = np.linalg.eigh(start)
    g0 = v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]
    x0 = np.concatenate([g0.real.ravel(), g0.imag.ravel()])

    def unpack(x):
        half = x.size // 2
        return (x[:half] + 1j * x[half:]).reshape(n, d, d)

    def objective(x):
        p, cond = _normalize(unpack(x))
        if not cond > 1e-12:
            return np.inf
        return float(_state_risks(problem, p[None]).max())

    res = minimize(objective, x0, method="Nelder-Mead", options={"maxiter": maxiter, "xatol": 1e-10, "fatol": 1e-12})
    p, cond = _normalize(unpack(res.x))
    return p if cond > 1e-12 else start


def _certified(w, h):
    """Shift a Hermitian guess to satisfy ``Y <= W_j`` for every j."""
    h = 0.5 * (h + h.conj().T)
    top = max(np.linalg.eigvalsh(h - wj)[-1] for wj in w)
    return h - top * np.eye(h.shape[0])


def _polish_dual(w, y0, maxiter):
    """Maximize the concave ``Tr H - d max_j lambda_max(H - W_j)`` over Hermitian H."""
    d = y0.shape[0]
    iu = np.triu_indices(d, 1)

    def unpack(x):
        h = np.diag(x[:d]).astype(complex)
        k = len(iu[0])
        h[iu] = x[d : d + k] + 1j * x[d + k :]
        return h + np.triu(h, 1).conj().T

    def objective(x):
        return -float(np.trace(_certified(w, unpack(x))).real)

    x0 = np.concatenate([y0.diagonal().real, y0[iu].real, y0[iu].imag])
    res = minimize(objective, x0, method="Powell", options={"maxiter": maxiter, "xtol": 1e-10, "ftol": 1e-13})
    y = _certified(w, unpack(res.x))
    return y if np.trace(y).real > np.trace(y0).real else y0


def brute_force_minimax(
    problem: DiscriminationProblem,
    n_samples: int = 10_000,
    grid_step: float | None = None,
    seed: int | None = 0,
    candidates=(),
    polish: int = 3,
) -> OracleReport:
    """Sandwich the minimax risk between sampled POVMs and grid dual certificates.

    The sample set always contains the trivial measurement ``P_j = I/n``.
    ``polish`` is the number of best grid priors (and best samples) that get
    a derivative-free local improvement; 0 disables it.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    n, d = problem.n, problem.dim
    rng = np.random.default_rng(seed)
    povms = np.concatenate([np.broadcast_to(np.eye(d) / n, (1, n, d, d)), _draw(rng, n_samples, n, d)])
    extra = [np.asarray(p.as_array() if isinstance(p, Povm) else p, dtype=complex) for p in candidates]
    if extra:
        povms = np.concatenate([povms, np.stack(extra)])
    risks = _state_risks(problem, povms)
    worst = risks.max(axis=1)
    order = np.argsort(worst, kind="stable")
    for k in order[: max(polish, 0)]:
        p = _polish_primal(problem, povms[k], maxiter=2000 * n * d)
        povms = np.concatenate([povms, p[None]])
        worst = np.append(worst, _state_risks(problem, p[None]).max())
    best = int(np.argmin(worst))

    step = problem.simplex_grid_step if grid_step is None else grid_step
    priors = simplex_grid(n, step)
    # cheap certificate per prior: Hermitian part of sum_j W_j P_j for its best sample
    best_per_prior = np.argmin(priors @ risks.T, axis=1)
    cost = np.einsum("ij,ki,iab->kjab", problem.weights, priors, problem.state_array())
    guess = np.einsum("kjab,kjbc->kac", cost, povms[best_per_prior])
    guess = 0.5 * (guess + np.conj(np.swapaxes(guess, -1, -2)))
    top = np.linalg.eigvalsh(guess[:, None] - cost)[..., -1].max(axis=1)
    bounds = np.trace(guess, axis1=1, axis2=2).real - d * top
    ranked = np.argsort(-bounds, kind="stable")
    best_y = {}
    for k in ranked[: max(polish, 0)]:
        y = _polish_dual(cost[k], guess[k] - top[k] * np.eye(d), maxiter=200 * d * d)
        bounds[k] = np.trace(y).real
        best_y[k] = y
    k_star = int(np.argmax(bounds))
    report = OracleReport(
        primal_bound=float(worst[best]),
        dual_bound=float(bounds[k_star]),
        samples=n_samples,
        seed=seed,
        best_povm=Povm(tuple(povms[best])),
        best_prior=priors[k_star],
    )
    log.debug("oracle sandwich [%.9f, %.9f]", report.dual_bound, report.primal_bound)
    return report


def _diagonal_costs(problem):
    states = problem.state_array()
    off = max(max_abs(s - np.diag(np.diag(s))) for s in states)
    if off > 1e-12:
        raise ValueError(f"diagonal_exhaustive needs diagonal states (off-diagonal entry {off:.2e})")
    return np.stack([np.diag(s).real for s in states])  # (n, d)


def diagonal_exhaustive(problem: DiscriminationProblem, grid_step: float = 1 / 300) -> OracleReport:
    """Exact search over diagonal POVMs on a grid, for commuting diagonal states.

    Each basis vector k is split across the outcomes as ``P_j[k, k] = q_kj``
    with ``q_k`` on the barycentric grid.  The lower bound uses the classical
    dual ``Y = diag(min_j W_j[k, k])``, exact for diagonal problems.
    """
    n, d = problem.n, problem.dim
    if n * d > MAX_DIAGONAL_DIMS:
        raise ProblemTooLarge(f"{n} outcomes x dimension {d} exceeds {MAX_DIAGONAL_DIMS} grid dimensions")
    m = max(1, int(round(1.0 / grid_step)))
    per_k = comb(m + n - 1, n - 1)
    if per_k**d > MAX_DIAGONAL_COMBOS:
        raise ProblemTooLarge(f"{per_k}^{d} diagonal POVMs exceed the limit {MAX_DIAGONAL_COMBOS}")
    diag = _diagonal_costs(problem)
    splits = simplex_grid(n, 1.0 / m)  # (c, n): q_k for one basis vector
    # contribution of basis vector k to state i's risk: sum_j w_ij rho_i[k, k] q_kj
    contrib = np.einsum("ij,ik,cj->kci", problem.weights, diag, splits)
    total = np.zeros((1, n))
    for k in range(d):
        total = (total[:, None, :] + contrib[k][None]).reshape(-1, n)
    worst = total.max(axis=1)
    best = int(np.argmin(worst))
    idx = np.unravel_index(best, (per_k,) * d)
    q = splits[list(idx)]  # (d, n)
    povm = Povm(tuple(np.diag(q[:, j]).astype(complex) for j in range(n)))

    priors = simplex_grid(n, 1.0 / m)
    w_diag = np.einsum("ij,pi,ik->pjk", problem.weights, priors, diag)
    bounds = w_diag.min(axis=1).sum(axis=1)
    k_star = int(np.argmax(bounds))
    return OracleReport(
        primal_bound=float(worst[best]),
        dual_bound=float(bounds[k_star]),
        samples=int(total.shape[0]),
        seed=None,
        best_povm=povm,
        best_prior=priors[k_star],
    )
