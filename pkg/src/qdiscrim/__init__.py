"""Optimal discrimination of quantum states: Bayes, minimax and unambiguous criteria."""

from .bayes import BayesSolution, DualCertificate, bayes_risk_n, check_certificate, helstrom_two_state
from .errors import (
    ConvergenceFailure,
    DegenerateKernel,
    DimensionMismatch,
    DiscriminationError,
    InfeasibleCertificate,
    InvalidDensityMatrix,
    InvalidPovm,
    InvalidPrior,
    InvalidWeights,
    LinearlyDependent,
    NegativeOperator,
    NonHermitian,
    NonUnitaryRep,
    ProblemTooLarge,
    SingularNormalizer,
)
from .herm import Povm, SpectralDecomposition, eig_hermitian, signed_parts, support_projector, trace_norm
from .minimax import (
    EqualizationProfile,
    MinimaxSolution,
    covariantize,
    equalization_profile,
    minimax_covariant,
    minimax_n,
    minimax_two_state,
)
from .oracle import OracleReport, brute_force_minimax, diagonal_exhaustive, sample_povm
from .problem import DiscriminationProblem
from .unambiguous import (
    DualBasis,
    PureStateSet,
    UnambiguousSolution,
    dual_basis,
    refine,
    unambiguous_minimax,
    uniqueness_test,
)

__version__ = "0.1.0"

__all__ = [
    "BayesSolution",
    "ConvergenceFailure",
    "DegenerateKernel",
    "DimensionMismatch",
    "DiscriminationError",
    "DiscriminationProblem",
    "DualBasis",
    "DualCertificate",
    "EqualizationProfile",
    "InfeasibleCertificate",
    "InvalidDensityMatrix",
    "InvalidPovm",
    "InvalidPrior",
    "InvalidWeights",
    "LinearlyDependent",
    "MinimaxSolution",
    "NegativeOperator",
    "NonHermitian",
    "NonUnitaryRep",
    "OracleReport",
    "Povm",
    "ProblemTooLarge",
    "PureStateSet",
    "SingularNormalizer",
    "SpectralDecomposition",
    "UnambiguousSolution",
    "bayes_risk_n",
    "brute_force_minimax",
    "check_certificate",
    "covariantize",
    "diagonal_exhaustive",
    "dual_basis",
    "eig_hermitian",
    "equalization_profile",
    "helstrom_two_state",
    "minimax_covariant",
    "minimax_n",
    "minimax_two_state",
    "refine",
    "sample_povm",
    "signed_parts",
    "support_projector",
    "trace_norm",
    "unambiguous_minimax",
    "uniqueness_test",
]
