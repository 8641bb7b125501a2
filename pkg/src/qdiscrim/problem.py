"""Problem records shared by every solver: states, weights, priors, tolerances."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb

import numpy as np

from .errors import DimensionMismatch, InvalidPrior, InvalidWeights
from .herm import as_density_matrix

PRIOR_SUM_TOL = 1e-12


def as_prior(weights, n: int | None = None) -> np.ndarray:
    """Validate a probability vector; returns a float array."""
    a = np.asarray(weights, dtype=float).ravel()
    if n is not None and a.size != n:
        raise InvalidPrior(f"prior has {a.size} entries, expected {n}")
    if a.size == 0 or not np.all(np.isfinite(a)):
        raise InvalidPrior("prior must be a non-empty finite vector")
    if np.any(a < 0):
        raise InvalidPrior(f"prior has negative entries: {a}")
    if abs(a.sum() - 1.0) > PRIOR_SUM_TOL:
        raise InvalidPrior(f"prior sums to {a.sum()!r}, expected 1")
    return a


def error_weights(n: int) -> np.ndarray:
    """Unit cost for every misidentification, ``w_ij = 1 - delta_ij``."""
    return 1.0 - np.eye(n)


def as_weights(w, n: int, zero_diagonal: bool = False) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (n, n):
        raise InvalidWeights(f"weight matrix has shape {w.shape}, expected {(n, n)}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InvalidWeights("weights must be finite and nonnegative")
    if zero_diagonal and np.any(np.diag(w) != 0):
        raise InvalidWeights("error-type weights need a zero diagonal")
    return w


def default_grid_step(n: int) -> float:
    """Barycentric grid step: 0.02 up to three states, then coarsened to keep ~2000 points."""
    if n <= 3:
        return 0.02
    m = 1
    while comb(m + 1 + n - 1, n - 1) <= 2000:
        m += 1
    return 1.0 / m


@dataclass(frozen=True, eq=False)
class DiscriminationProblem:
    """States, cost matrix and numerical tolerances.

    ``weights[i, j]`` is the price of declaring ``j`` when the state was ``i``.
    ``kernel_tol=None`` means the relative default ``1e-9 * max(1, ||D||)``.
    """

    states: tuple
    weights: np.ndarray = None
    kernel_tol: float | None = None
    gap_tol: float = 1e-7
    equalization_tol: float = 1e-9
    simplex_grid_step: float | None = None
    labels: tuple = field(default=None)

    def __post_init__(self):
        states = tuple(as_density_matrix(s) for s in self.states)
        if len(states) < 2:
            raise DimensionMismatch("a discrimination problem needs at least two states")
        d = states[0].shape[0]
        if any(s.shape != (d, d) for s in states):
            raise DimensionMismatch("states have different dimensions")
        n = len(states)
        w = error_weights(n) if self.weights is None else as_weights(self.weights, n)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", w)
        if self.simplex_grid_step is None:
            object.__setattr__(self, "simplex_grid_step", default_grid_step(n))
        for name in ("gap_tol", "equalization_tol", "simplex_grid_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.kernel_tol is not None and not self.kernel_tol > 0:
            raise ValueError("kernel_tol must be positive")

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def state_array(self) -> np.ndarray:
        return np.stack(self.states)

    def cost_operators(self, prior) -> np.ndarray:
        """``W_j = sum_i w_ij a_i rho_i`` for each outcome j, shape (n, d, d)."""
        a = as_prior(prior, self.n)
        return np.einsum("ij,i,iab->jab", self.weights, a, self.state_array())

    def per_state_risk(self, povm) -> np.ndarray:
        """``sum_j w_ij Tr[rho_i P_j]`` for each state i."""
        conf = povm.confusion(self.state_array())
        return np.sum(self.weights * conf, axis=1)

    def with_weights(self, weights) -> DiscriminationProblem:
        return replace(self, weights=np.asarray(weights, dtype=float))
