"""Bayesian minimum-risk discrimination.

Two entry points: the closed-form Helstrom measurement for two states, and a
general solver for ``min_P sum_j Tr[W_j P_j]`` with cost operators
``W_j = sum_i w_ij a_i rho_i``.  The general solver runs a log-barrier method
on the dual program

    maximize Tr Y   subject to   Y <= W_j  for every outcome j,

which is strictly feasible (``Y = (min_j lambda_min(W_j) - 1) I``), so every
iterate is a valid certificate.  On the central path ``P_j = (W_j - Y)^{-1}/t``
is a POVM with duality gap ``n d / t``; the primal is read off there.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, InfeasibleCertificate
from .herm import Povm, as_density_matrix, signed_parts
from .problem import DiscriminationProblem, as_prior

log = logging.getLogger(__name__)

CERTIFICATE_TOL = 1e-8
DEFAULT_MAX_NEWTON = 100_000


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Hermitian ``y`` with ``y <= sum_i w_ij prior_i rho_i`` for all j; ``Tr y`` lower-bounds the risk."""

    y: np.ndarray
    prior: np.ndarray

    @property
    def bound(self) -> float:
        return float(np.trace(self.y).real)


@dataclass(frozen=True, eq=False)
class BayesSolution:
    povm: Povm
    risk: float
    success_per_state: np.ndarray
    certificate: DualCertificate
    prior: np.ndarray
    risk_trace: tuple = field(default=())

    @property
    def gap(self) -> float:
        return self.risk - self.certificate.bound


def _herm(a):
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def _inv_sqrt_batch(t):
    w, v = np.linalg.eigh(t)
    return (v / np.sqrt(w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def _barrier_value(w, y, t):
    _, logdet = np.linalg.slogdet(w - y[:, None])
    return -t * np.trace(y, axis1=1, axis2=2).real - logdet.real.sum(axis=1)


def _feasible_shift(w, y):
    """Shift ``y`` down by any residual violation of ``y <= W_j``."""
    worst = np.linalg.eigvalsh(w - y[:, None])[..., 0].min(axis=1)
    return y + np.minimum(worst, 0.0)[:, None, None] * np.eye(y.shape[-1])


@dataclass
class BarrierResult:
    povms: np.ndarray  # (B, n, d, d)
    y: np.ndarray  # (B, d, d)
    risks: np.ndarray  # (B,)
    bounds: np.ndarray  # (B,)
    risk_trace: np.ndarray  # (stages, B)
    newton_steps: int


def solve_cost_operators(
    w: np.ndarray,
    target_gap: float = 1e-9,
    max_newton: int = DEFAULT_MAX_NEWTON,
    growth: float = 50.0,
) -> BarrierResult:
    """Minimize ``sum_j Tr[W_j P_j]`` for a batch of cost-operator sets.

    ``w`` has shape (B, n, d, d).  Instances share the barrier schedule; each
    gets its own line search.  Costs are expected to be O(1); callers scale.
    """
    w = _herm(np.asarray(w, dtype=complex))
    nb, n, d, _ = w.shape
    eye = np.eye(d)
    y = (np.linalg.eigvalsh(w)[..., 0].min(axis=1) - 1.0)[:, None, None] * eye.astype(complex)
    t = 1.0
    t_final = n * d / target_gap
    steps = 0
    trace = []
    while True:
        todo = np.arange(nb)
        for _ in range(200):
            wt, yt = w[todo], y[todo]
            s_mat = wt - yt[:, None]
            s_inv = _herm(np.linalg.inv(s_mat))
            grad = -t * eye + s_inv.sum(axis=1)
            hess = np.einsum("bjae,bjfc->bacef", s_inv, s_inv).reshape(len(todo), d * d, d * d)
            delta = np.linalg.solve(hess, -grad.reshape(len(todo), d * d, 1)).reshape(-1, d, d)
            delta = _herm(delta)
            dec2 = np.maximum(-np.einsum("bij,bji->b", grad, delta).real, 0.0)
            steps += 1
            keep = dec2 / 2 >= 1e-10
            if not keep.any() or steps >= max_newton:
                break
            todo, wt, yt, s_mat, delta, dec2 = (x[keep] for x in (todo, wt, yt, s_mat, delta, dec2))
            # largest step keeping every W_j - Y positive definite
            chol_inv = np.linalg.inv(np.linalg.cholesky(s_mat))
            scaled = _herm(chol_inv @ delta[:, None] @ np.conj(np.swapaxes(chol_inv, -1, -2)))
            top = np.linalg.eigvalsh(scaled)[..., -1].max(axis=1)
            s_max = np.where(top > 0, 1.0 / np.where(top > 0, top, 1.0), np.inf)
            step = np.minimum(1.0, 0.99 * s_max)
            quadratic = np.sqrt(dec2) < 0.25
            pending = np.flatnonzero(~quadratic)
            if pending.size:
                f0 = _barrier_value(wt[pending], yt[pending], t)
                for _ls in range(60):
                    trial = yt[pending] + step[pending, None, None] * delta[pending]
                    ok = _barrier_value(wt[pending], trial, t) <= f0 - 0.25 * step[pending] * dec2[pending]
                    if ok.all():
                        break
                    step[pending[~ok]] *= 0.5
                    pending, f0 = pending[~ok], f0[~ok]
            # in the quadratic region a boundary-limited step means rounding noise dominates
            moving = ~(quadratic & (step < 1e-2))
            if not moving.any():
                break
            todo = todo[moving]
            y[todo] = yt[moving] + step[moving, None, None] * delta[moving]
        s_inv = _herm(np.linalg.inv(w - y[:, None])) / t
        norm = _inv_sqrt_batch(s_inv.sum(axis=1))
        povms = _herm(norm[:, None] @ s_inv @ norm[:, None])
        risks = np.einsum("bjxy,bjyx->b", w, povms).real
        trace.append(risks)
        if t >= t_final or steps >= max_newton:
            break
        t = min(t * growth, t_final)

    y = _feasible_shift(w, y)
    # second certificate: Hermitian part of sum_j W_j P_j, shifted to feasibility
    y_alt = _feasible_shift(w, _herm(np.einsum("bjxy,bjyz->bxz", w, povms)))
    tr, tr_alt = (np.trace(m, axis1=1, axis2=2).real for m in (y, y_alt))
    y = np.where((tr_alt > tr)[:, None, None], y_alt, y)
    bounds = np.maximum(tr, tr_alt)
    return BarrierResult(povms, y, risks, bounds, np.array(trace), steps)


def _check_pair(rho1, rho2):
    r1, r2 = as_density_matrix(rho1), as_density_matrix(rho2)
    if r1.shape != r2.shape:
        raise DimensionMismatch(f"states have shapes {r1.shape} and {r2.shape}")
    return r1, r2


def helstrom_two_state(rho1, rho2, prior=(0.5, 0.5), kernel_weight: float = 1.0, kernel_tol=None):
    """Optimal two-state Bayes measurement from the sign of ``a1 rho1 - a2 rho2``.

    ``kernel_weight`` is the share of the kernel of that operator given to
    outcome 1; the default hands all of it to outcome 1.
    """
    r1, r2 = _check_pair(rho1, rho2)
    a = as_prior(prior, 2)
    if not 0.0 <= kernel_weight <= 1.0:
        raise ValueError("kernel_weight must lie in [0, 1]")
    diff = a[0] * r1 - a[1] * r2
    pos, ker, neg = signed_parts(diff, kernel_tol)
    p1 = pos + kernel_weight * ker
    povm = Povm((p1, np.eye(r1.shape[0]) - p1))
    success = np.array([np.vdot(povm[0], r1).real, np.vdot(povm[1], r2).real])
    risk = float(a[0] * (1 - success[0]) + a[1] * (1 - success[1]))
    # Y = a2 rho2 - (negative part of diff); its trace equals the Helstrom error
    y = a[1] * r2 + neg @ diff @ neg
    w = np.stack([a[1] * r2, a[0] * r1])
    y = _feasible_shift(w, _herm(y)[None])[0]
    return BayesSolution(povm, risk, success, DualCertificate(y, a), a)


def bayes_risk_n(
    problem: DiscriminationProblem,
    prior,
    gap_tol: float | None = None,
    max_newton: int = DEFAULT_MAX_NEWTON,
) -> BayesSolution:
    """Minimum expected cost ``min_P sum_i a_i sum_j w_ij Tr[rho_i P_j]`` with a dual certificate.

    Raises ConvergenceFailure when the certified gap exceeds ``gap_tol``
    after the Newton budget; the exception carries the best solution.
    """
    a = as_prior(prior, problem.n)
    gap_tol = problem.gap_tol if gap_tol is None else gap_tol
    scale = float(problem.weights.max())
    if scale <= 0:
        scale = 1.0
    w = problem.cost_operators(a) / scale
    res = solve_cost_operators(w[None], target_gap=min(1e-9, gap_tol / 100), max_newton=max_newton)
    sol = _assemble(problem, a, res.povms[0], res.y[0] * scale, res.risk_trace[:, 0] * scale)
    log.debug("bayes_risk_n: %d Newton steps, gap %.3e", res.newton_steps, sol.gap)
    if sol.gap > gap_tol:
        raise ConvergenceFailure(
            f"duality gap {sol.gap:.3e} above {gap_tol:.1e} after {res.newton_steps} Newton steps",
            best_gap=sol.gap,
            partial=sol,
        )
    return sol


def _assemble(problem, prior, povm_arr, y, trace=()):
    povm = Povm(tuple(povm_arr))
    conf = povm.confusion(problem.state_array())
    risk = float(prior @ np.sum(problem.weights * conf, axis=1))
    return BayesSolution(
        povm=povm,
        risk=risk,
        success_per_state=np.diag(conf).copy(),
        certificate=DualCertificate(_herm(y), prior),
        prior=prior,
        risk_trace=tuple(float(r) for r in trace),
    )


def certificate_slack(cert: DualCertificate, problem: DiscriminationProblem) -> np.ndarray:
    """Minimum eigenvalue of ``sum_i w_ij mu_i rho_i - Y`` for each outcome j."""
    y = np.asarray(cert.y)
    if y.shape != (problem.dim, problem.dim):
        raise DimensionMismatch(f"certificate has shape {y.shape}, problem dimension is {problem.dim}")
    w = problem.cost_operators(cert.prior)
    return np.linalg.eigvalsh(w - _herm(y)[None])[:, 0]


def check_certificate(cert: DualCertificate, problem: DiscriminationProblem, tol: float = CERTIFICATE_TOL) -> float:
    """Verify dual feasibility and return the certified lower bound ``Tr Y``."""
    slack = certificate_slack(cert, problem)
    j = int(np.argmin(slack))
    if slack[j] < -tol:
        raise InfeasibleCertificate(
            f"Y exceeds the cost operator of outcome {j} by {-slack[j]:.3e}",
            outcome=j,
            violation=float(-slack[j]),
        )
    return cert.bound
