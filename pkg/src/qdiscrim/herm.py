"""Dense Hermitian linear algebra on small complex matrices.

All operator norms written ``||.||_inf`` below are the largest absolute
entry of the matrix.  Degenerate eigenspaces are only ever consumed through
projectors, never through individual eigenvectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidDensityMatrix,
    InvalidPovm,
    NegativeOperator,
    NonHermitian,
)

HERMITICITY_TOL = 1e-12
DENSITY_EIG_TOL = 1e-10
DENSITY_TRACE_TOL = 1e-10
POVM_POSITIVITY_TOL = 1e-10
POVM_COMPLETENESS_TOL = 1e-9


def max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def default_kernel_tol(m: np.ndarray) -> float:
    return 1e-9 * max(1.0, max_abs(m))


def as_hermitian(m, tol: float = HERMITICITY_TOL, atol: float = 0.0) -> np.ndarray:
    """Return ``m`` as a complex square array, symmetrized.

    Raises NonHermitian when ``||m - m^dag||_inf > tol * ||m||_inf + atol``.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonHermitian("matrix has non-finite entries")
    asym = max_abs(a - a.conj().T)
    if asym > tol * max_abs(a) + atol:
        raise NonHermitian(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order; ``eigenvectors[:, k]`` pairs with ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def projector(self, mask) -> np.ndarray:
        v = self.eigenvectors[:, np.asarray(mask, dtype=bool)]
        return v @ v.conj().T


def eig_hermitian(m) -> SpectralDecomposition:
    h = as_hermitian(m)
    w, v = np.linalg.eigh(h)
    order = np.argsort(w)[::-1]
    return SpectralDecomposition(eigenvalues=w[order], eigenvectors=v[:, order])


def trace_norm(m) -> float:
    """Sum of the absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(as_hermitian(m)))))


def signed_parts(m, kernel_tol: float | None = None):
    """Split the identity into spectral projectors of ``m``.

    Returns ``(pos, ker, neg)``: projectors onto the eigenspaces with
    eigenvalue ``> kernel_tol``, ``|eigenvalue| <= kernel_tol`` and
    ``< -kernel_tol``.  They are mutually orthogonal and sum to I.
    """
    h = as_hermitian(m)
    if kernel_tol is None:
        kernel_tol = default_kernel_tol(h)
    dec = eig_hermitian(h)
    lam = dec.eigenvalues
    return (
        dec.projector(lam > kernel_tol),
        dec.projector(np.abs(lam) <= kernel_tol),
        dec.projector(lam < -kernel_tol),
    )


def support_projector(m, tol: float | None = None) -> np.ndarray:
    """Projector onto the span of eigenvectors of a PSD ``m`` with eigenvalue > tol."""
    h = as_hermitian(m)
    if tol is None:
        tol = default_kernel_tol(h)
    dec = eig_hermitian(h)
    if dec.eigenvalues[-1] < -tol:
        raise NegativeOperator(f"minimum eigenvalue {dec.eigenvalues[-1]:.3e} below -{tol:.1e}")
    return dec.projector(dec.eigenvalues > tol)


def as_density_matrix(m) -> np.ndarray:
    rho = as_hermitian(m)
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -DENSITY_EIG_TOL:
        raise InvalidDensityMatrix(f"density matrix has eigenvalue {lam_min:.3e} < 0")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > DENSITY_TRACE_TOL:
        raise InvalidDensityMatrix(f"density matrix has trace {tr!r}, expected 1")
    return rho


def pure_state(vec) -> np.ndarray:
    """Density matrix ``|v><v|`` of a vector, normalized."""
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return max_abs(u @ u.conj().T - np.eye(u.shape[0])) <= tol


def inv_sqrt_psd(s: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (s + s.conj().T))
    return (v / np.sqrt(w)) @ v.conj().T


@dataclass(frozen=True, eq=False)
class Povm:
    """An ordered list of positive semidefinite operators summing to the identity.

    Construction validates positivity (min eigenvalue >= -1e-10) and
    completeness (``||sum P - I||_inf <= 1e-9``) unless ``validate=False``.
    Solvers always produce at least two outcomes; a single outcome (the
    identity) is accepted so that trivial groups can be covariantized.
    """

    elements: tuple
    validate: bool = True

    def __post_init__(self):
        # elements are bounded by I, so rounding noise on a near-zero element is judged absolutely
        els = tuple(as_hermitian(e, tol=1e-9, atol=1e-12) for e in self.elements)
        if not els:
            raise InvalidPovm("a POVM needs at least one element")
        d = els[0].shape[0]
        if any(e.shape != (d, d) for e in els):
            raise DimensionMismatch("POVM elements have different dimensions")
        object.__setattr__(self, "elements", els)
        if self.validate:
            if self.min_eigenvalue() < -POVM_POSITIVITY_TOL:
                raise InvalidPovm(f"POVM element has eigenvalue {self.min_eigenvalue():.3e}")
            if self.completeness_residual() > POVM_COMPLETENESS_TOL:
                raise InvalidPovm(
                    f"POVM elements sum to identity only within {self.completeness_residual():.3e}"
                )

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, j):
        return self.elements[j]

    def __iter__(self):
        return iter(self.elements)

    def as_array(self) -> np.ndarray:
        return np.stack(self.elements)

    def min_eigenvalue(self) -> float:
        return float(min(np.linalg.eigvalsh(e)[0] for e in self.elements))

    def completeness_residual(self) -> float:
        return max_abs(sum(self.elements) - np.eye(self.dim))

    def probabilities(self, rho) -> np.ndarray:
        """Outcome probabilities ``Tr[rho P_j]``."""
        rho = np.asarray(rho)
        return np.array([np.real(np.vdot(e, rho)) for e in self.elements])

    def confusion(self, states) -> np.ndarray:
        """Matrix ``C[i, j] = Tr[rho_i P_j]``."""
        return np.einsum("iab,jba->ij", np.asarray(states), self.as_array()).real

    def is_orthogonal(self, tol: float = 1e-8) -> bool:
        """True when every element is a projector (so distinct elements are orthogonal)."""
        return all(max_abs(e @ e - e) <= tol for e in self.elements)


def mix_povms(povms, weights) -> Povm:
    """Convex combination of POVMs with identical outcome count."""
    weights = np.asarray(weights, dtype=float)
    arr = np.einsum("k,kjab->jab", weights, np.stack([p.as_array() for p in povms]))
    return Povm(tuple(arr))
