"""
kackit: finite-dimensional C*-algebra inclusions and weak Kac algebras.

Markov traces, basic constructions and Pimsner-Popa bases for inclusions of
multi-matrix algebras; commuting squares and basis transfer; weak Hopf and
weak Kac structures, their duals, actions and crossed products.
"""

__version__ = "0.1.0"

from .base import AxiomReport, CheckResult
from .bases import (
    BasisSide,
    PPBasis,
    basis_summary,
    canonical_unitary_onb,
    dft_unitary_onb,
    fourier_lift,
    gram_schmidt_onb,
    jones_projection_family,
    matrix_unit_onb,
    onb_from_flat_unitary,
    pauli_basis,
    product_basis,
    sylvester_weyl_basis,
    verify,
    verify_left_basis,
    verify_orthonormal,
    verify_right_basis,
    verify_two_sided,
    verify_unitary,
)
from .batch import AsyncVerifier, BatchOutcome, run_checks
from .commsq import (
    CommutingSquareData,
    hadamard_square,
    nondegeneracy_by_norms,
    popa_transfer,
    tensor_square,
    verify_commuting,
    verify_nondegenerate,
)
from .crossprod import (
    ActionData,
    CrossedProductData,
    counital_action,
    crossed_product,
    fixed_points,
    group_action,
    inner_action,
    minimality_check,
    trivial_action,
    verify_action,
)
from .exceptions import ConfigurationError, InvalidInput, KacKitError
from .fdca import (
    AlgElem,
    MMAlgebra,
    TraceState,
    UnitalEmbedding,
    conditional_expectation,
    inclusion_matrix,
    is_connected,
    markov_trace,
    relative_commutant,
    standard_embedding,
    watatani_index,
)
from .metrics import InMemoryMetricsCollector, MetricsMiddleware, create_metrics_system
from .presentation import StarAlgebraPresentation, Subalgebra, wedderburn
from .serialization import from_json, to_json
from .tower import basic_construction, depth_from_tower, index_formula, is_basic_construction_triple
from .wha import (
    Certification,
    Groupoid,
    WHAStructure,
    check_all,
    counital_subalgebras,
    dual_wha,
    groupoid_algebra,
    is_biconnected,
    verify_antipode,
    verify_weak_bialgebra,
    verify_weak_kac,
)

__all__ = [
    "AxiomReport",
    "CheckResult",
    "KacKitError",
    "ConfigurationError",
    "InvalidInput",
    "MMAlgebra",
    "AlgElem",
    "TraceState",
    "UnitalEmbedding",
    "standard_embedding",
    "inclusion_matrix",
    "is_connected",
    "markov_trace",
    "conditional_expectation",
    "relative_commutant",
    "watatani_index",
    "StarAlgebraPresentation",
    "Subalgebra",
    "wedderburn",
    "basic_construction",
    "is_basic_construction_triple",
    "depth_from_tower",
    "index_formula",
    "BasisSide",
    "PPBasis",
    "verify",
    "verify_right_basis",
    "verify_left_basis",
    "verify_two_sided",
    "verify_orthonormal",
    "verify_unitary",
    "dft_unitary_onb",
    "onb_from_flat_unitary",
    "pauli_basis",
    "sylvester_weyl_basis",
    "matrix_unit_onb",
    "canonical_unitary_onb",
    "gram_schmidt_onb",
    "jones_projection_family",
    "fourier_lift",
    "product_basis",
    "basis_summary",
    "CommutingSquareData",
    "verify_commuting",
    "verify_nondegenerate",
    "nondegeneracy_by_norms",
    "popa_transfer",
    "tensor_square",
    "hadamard_square",
    "Certification",
    "Groupoid",
    "WHAStructure",
    "verify_weak_bialgebra",
    "verify_antipode",
    "verify_weak_kac",
    "check_all",
    "counital_subalgebras",
    "dual_wha",
    "groupoid_algebra",
    "is_biconnected",
    "ActionData",
    "CrossedProductData",
    "verify_action",
    "crossed_product",
    "minimality_check",
    "fixed_points",
    "group_action",
    "inner_action",
    "trivial_action",
    "counital_action",
    "to_json",
    "from_json",
    "AsyncVerifier",
    "BatchOutcome",
    "run_checks",
    "MetricsMiddleware",
    "InMemoryMetricsCollector",
    "create_metrics_system",
]
