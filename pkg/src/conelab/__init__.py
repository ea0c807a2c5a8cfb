"""Spectral radii, bounds and formal eigenvectors of order-preserving
homogeneous maps on polyhedral cones, with checkable certificates."""

from .bounds import (LOWER, UPPER, FormalEigenCert, LowerBoundCert, VerificationReport,
                     WeakBoundCert, adjoint_weak_upper, formal_eigenvector, lower_bound,
                     verify_adjoint_equality, verify_formal_eigenvector, verify_lower_bound,
                     verify_weak_bound, weak_lower_from_lower, weak_upper_bound_polyhedral)
from .certificates import certificate_from_json, certificate_to_json, verify_certificate
from .cone import ConeSpec, Ray, contains, dual, extreme_rays_dual, in_interior, leq, polyhedral, standard
from .dad import (DADDecomposition, ScalingResult, dad_decompose, dad_formal_eigenvector,
                  fully_indecomposable, is_direct_sum_of_fully_indecomposable, sinkhorn)
from .errors import (CertificateRejected, ConeError, ConelabError, DimensionError, DomainError,
                     InconclusiveError, IterationLimitError, SizeLimitError, UnsupportedMapError)
from .extended import INF, ExtendedVector, reciprocal
from .hilbert import ProjectiveDistance, hilbert_distance, hilbert_mM, max_scale_inside
from .maps import (DAD, Composed, Conjugated, MapSpec, Matrix, MaxTimes, MinTimes, Perturbed,
                   compose, conjugate, evaluate, evaluate_extended, identity, map_from_json,
                   perturb)
from .spectral import (EigenResult, SpectralEstimate, collatz_bracket, interior_eigenvector,
                       perturbed_eigenvector, spectral_radius)

__version__ = "0.1.0"

__all__ = [
    "CertificateRejected",
    "Composed",
    "ConeError",
    "ConeSpec",
    "ConelabError",
    "Conjugated",
    "DAD",
    "DADDecomposition",
    "DimensionError",
    "DomainError",
    "EigenResult",
    "ExtendedVector",
    "FormalEigenCert",
    "INF",
    "InconclusiveError",
    "IterationLimitError",
    "LOWER",
    "LowerBoundCert",
    "MapSpec",
    "Matrix",
    "MaxTimes",
    "MinTimes",
    "Perturbed",
    "ProjectiveDistance",
    "Ray",
    "ScalingResult",
    "SizeLimitError",
    "SpectralEstimate",
    "UPPER",
    "UnsupportedMapError",
    "VerificationReport",
    "WeakBoundCert",
    "adjoint_weak_upper",
    "certificate_from_json",
    "certificate_to_json",
    "collatz_bracket",
    "compose",
    "conjugate",
    "contains",
    "dad_decompose",
    "dad_formal_eigenvector",
    "dual",
    "evaluate",
    "evaluate_extended",
    "extreme_rays_dual",
    "formal_eigenvector",
    "fully_indecomposable",
    "hilbert_distance",
    "hilbert_mM",
    "identity",
    "in_interior",
    "interior_eigenvector",
    "is_direct_sum_of_fully_indecomposable",
    "leq",
    "lower_bound",
    "map_from_json",
    "max_scale_inside",
    "perturb",
    "perturbed_eigenvector",
    "polyhedral",
    "reciprocal",
    "sinkhorn",
    "spectral_radius",
    "standard",
    "verify_adjoint_equality",
    "verify_certificate",
    "verify_formal_eigenvector",
    "verify_lower_bound",
    "verify_weak_bound",
    "weak_lower_from_lower",
    "weak_upper_bound_polyhedral",
]
