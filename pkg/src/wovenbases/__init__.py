"""Deciding and certifying woven bases.

Finite-dimensional bases are decided through the class W of matrices whose
central submatrices are all invertible; shift-invariant families are
certified from sampled spectra.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BasisError,
    DimensionError,
    DomainError,
    FormatError,
    GridMismatchError,
    RecoveryImpossibleError,
    SingularSystemError,
    SizeError,
    SymmetryError,
    WovenError,
)
from .numeric import DOUBLE, PrecisionConfig, certify_invertibility, det, solve  # noqa: E402
from .reconstruct import MixedSamples, recover, sample, two_matrix_recover, weaving_operator  # noqa: E402
from .weaving import (  # noqa: E402
    BasisPair,
    FinitePerturbation,
    IndexSet,
    WeavingCertificate,
    are_woven,
    classify_class_w,
    classify_finite_perturbation,
    woven_up_to_permutation,
)

__all__ = [
    "BasisError",
    "BasisPair",
    "DOUBLE",
    "DimensionError",
    "DomainError",
    "FinitePerturbation",
    "FormatError",
    "GridMismatchError",
    "IndexSet",
    "MixedSamples",
    "PrecisionConfig",
    "RecoveryImpossibleError",
    "SingularSystemError",
    "SizeError",
    "SymmetryError",
    "WeavingCertificate",
    "WovenError",
    "are_woven",
    "certify_invertibility",
    "classify_class_w",
    "classify_finite_perturbation",
    "det",
    "recover",
    "sample",
    "solve",
    "two_matrix_recover",
    "weaving_operator",
    "woven_up_to_permutation",
]
