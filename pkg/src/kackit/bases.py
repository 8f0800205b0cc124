"""
Pimsner-Popa bases of finite-dimensional inclusions.

A right basis of A over B reconstructs every x as sum_j l_j E(l_j* x); a left
basis as sum_i E(x l_i*) l_i. Verification turns each identity into a single
operator equation on coordinates of A, so one comparison with the identity
matrix covers a whole linear basis of A.
"""

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.linalg

from .base import CheckResult
from .exceptions import (
    IncompatibleTower,
    InputNotBasis,
    InvalidInput,
    NonMarkovTrace,
    NotFlat,
    NotUnitary,
    NotUnitaryONB,
    NumericalDegeneracy,
    UnsupportedAlgebraShape,
)
from .fdca import (
    AlgElem,
    MMAlgebra,
    TraceState,
    UnitalEmbedding,
    compose,
    conditional_expectation,
    restrict_trace,
    scalar_embedding,
    standard_embedding,
)
from .tower import BasicConstructionData, GNSSpace
from .utils import make_rng, max_abs, resolve_tolerance

logger = logging.getLogger(__name__)


class BasisSide(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    TWO_SIDED = "two-sided"


@dataclass(frozen=True, eq=False)
class PPBasis:
    """
    A candidate Pimsner-Popa basis of A over B.

    Attributes:
        inclusion: The embedding B -> A.
        trace: Trace on A defining the conditional expectation.
        elements: The candidate elements of A.
        side: Which reconstruction identity the basis claims.
        orthonormal: Claimed orthonormality.
        unitary: Claimed unitarity of every element.
    """

    inclusion: UnitalEmbedding
    trace: TraceState
    elements: Tuple[AlgElem, ...]
    side: BasisSide = BasisSide.RIGHT
    orthonormal: bool = False
    unitary: bool = False

    def __post_init__(self) -> None:
        if self.trace.parent.block_dims != self.inclusion.target.block_dims:
            raise InvalidInput("trace does not live on the ambient algebra", "trace")
        for index, x in enumerate(self.elements):
            if x.parent.block_dims != self.inclusion.target.block_dims:
                raise InvalidInput("element does not lie in the ambient algebra", f"elements[{index}]")
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "side", BasisSide(self.side))

    @property
    def ambient(self) -> MMAlgebra:
        return self.inclusion.target

    @property
    def subalgebra(self) -> MMAlgebra:
        return self.inclusion.source

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class BasisCheck(CheckResult):
    """Verdict of a reconstruction identity; jones_residual is set when cross-checked."""

    jones_residual: Optional[float] = None


def _reconstruction_operator(candidate: PPBasis, side: BasisSide, tol: Optional[float]) -> np.ndarray:
    algebra = candidate.ambient
    projector = conditional_expectation(candidate.inclusion, candidate.trace, tol).projector
    total = np.zeros((algebra.dim, algebra.dim), dtype=complex)
    for x in candidate.elements:
        u, u_star = x.vector, algebra.star(x.vector)
        if side is BasisSide.RIGHT:
            total += algebra.left_multiplication(u) @ projector @ algebra.left_multiplication(u_star)
        else:
            total += algebra.right_multiplication(u) @ projector @ algebra.right_multiplication(u_star)
    return total


def _jones_sum(candidate: PPBasis, tol: Optional[float]) -> float:
    gns = GNSSpace(candidate.trace)
    e = gns.jones_projection(candidate.inclusion, tol)
    algebra = candidate.ambient
    total = sum(
        (gns.left(x.vector) @ e @ gns.left(algebra.star(x.vector)) for x in candidate.elements),
        np.zeros((algebra.dim, algebra.dim), dtype=complex),
    )
    return max_abs(total - np.eye(algebra.dim))


def verify_right_basis(candidate: PPBasis, tol: Optional[float] = None, jones: bool = False) -> BasisCheck:
    """
    Check x = sum_j l_j E(l_j* x) on every coordinate of A.

    Args:
        candidate: The basis.
        tol: Numerical tolerance.
        jones: Also check sum_j l_j e_1 l_j* = 1 on L^2(A).
    """
    tol = resolve_tolerance(tol)
    residual = max_abs(_reconstruction_operator(candidate, BasisSide.RIGHT, tol) - np.eye(candidate.ambient.dim))
    jones_residual = _jones_sum(candidate, tol) if jones else None
    passed = residual <= tol and (jones_residual is None or jones_residual <= tol)
    return BasisCheck(passed, residual, "right reconstruction", jones_residual)


def verify_left_basis(candidate: PPBasis, tol: Optional[float] = None) -> BasisCheck:
    """Check x = sum_i E(x l_i*) l_i on every coordinate of A."""
    tol = resolve_tolerance(tol)
    residual = max_abs(_reconstruction_operator(candidate, BasisSide.LEFT, tol) - np.eye(candidate.ambient.dim))
    return BasisCheck(residual <= tol, residual, "left reconstruction")


def verify_two_sided(candidate: PPBasis, tol: Optional[float] = None) -> BasisCheck:
    right = verify_right_basis(candidate, tol)
    left = verify_left_basis(candidate, tol)
    return BasisCheck(right.passed and left.passed, max(right.residual, left.residual), "two-sided reconstruction")


def verify(candidate: PPBasis, tol: Optional[float] = None) -> BasisCheck:
    """Run the reconstruction check matching the candidate's side."""
    if candidate.side is BasisSide.LEFT:
        return verify_left_basis(candidate, tol)
    if candidate.side is BasisSide.RIGHT:
        return verify_right_basis(candidate, tol)
    return verify_two_sided(candidate, tol)


@dataclass(frozen=True, eq=False)
class OrthonormalityCheck:
    """
    Both Gram arrays of a candidate.

    gram_left[i, j] holds the coordinates in B of E(l_i l_j*), gram_right[i, j]
    those of E(l_i* l_j). The verdict uses the array matching the side: right
    bases use gram_right, left bases gram_left, two-sided bases both.
    """

    passed: bool
    gram_left: np.ndarray
    gram_right: np.ndarray
    residual: float
    side: BasisSide

    @property
    def gram(self) -> np.ndarray:
        array = self.gram_left if self.side is BasisSide.LEFT else self.gram_right
        return array[:, :, 0] if array.shape[-1] == 1 else array

    def __bool__(self) -> bool:
        return self.passed


def verify_orthonormal(candidate: PPBasis, tol: Optional[float] = None) -> OrthonormalityCheck:
    tol = resolve_tolerance(tol)
    algebra = candidate.ambient
    expectation = conditional_expectation(candidate.inclusion, candidate.trace, tol)
    vectors = np.array([x.vector for x in candidate.elements])
    stars = algebra.star(vectors)
    left = algebra.multiply(vectors[:, None, :], stars[None, :, :]) @ expectation.matrix.T
    right = algebra.multiply(stars[:, None, :], vectors[None, :, :]) @ expectation.matrix.T
    m = len(candidate.elements)
    target = np.eye(m)[:, :, None] * candidate.subalgebra.unit_vector()[None, None, :]
    left_residual, right_residual = max_abs(left - target), max_abs(right - target)
    if candidate.side is BasisSide.LEFT:
        residual = left_residual
    elif candidate.side is BasisSide.RIGHT:
        residual = right_residual
    else:
        residual = max(left_residual, right_residual)
    return OrthonormalityCheck(residual <= tol, left, right, residual, candidate.side)


def verify_unitary(candidate: PPBasis, tol: Optional[float] = None) -> CheckResult:
    one = candidate.ambient.unit()
    residual = max(
        [max((x.adjoint() * x).distance(one), (x * x.adjoint()).distance(one)) for x in candidate.elements],
        default=0.0,
    )
    return CheckResult(residual <= resolve_tolerance(tol), residual, "unitarity")


def index_count(candidate: PPBasis) -> float:
    """sum_i tr(l_i* l_i); equals ||Lambda||^2 for an orthonormal basis and the Markov trace."""
    return float(sum(candidate.trace(x.adjoint() * x).real for x in candidate.elements))


def _omega(n: int) -> complex:
    return complex(np.exp(-2j * np.pi / n))


def dft_unitary_onb(n: int, algebra: Optional[MMAlgebra] = None) -> PPBasis:
    """
    Unitary orthonormal basis of C^n over C from the DFT matrix.

    Element i has entries omega^(j i), omega = exp(-2 pi i / n); element 0 is the unit.
    """
    if n < 1:
        raise InvalidInput(f"n must be positive, got {n}", "n")
    algebra = algebra or MMAlgebra.commutative(n)
    if algebra.block_dims != (1,) * n:
        raise InvalidInput(f"DFT basis needs C^{n}, got {algebra}", "algebra")
    omega = _omega(n)
    elements = tuple(algebra.from_vector(np.array([omega ** (j * i) for j in range(n)])) for i in range(n))
    return PPBasis(
        scalar_embedding(algebra),
        TraceState.canonical(algebra),
        elements,
        BasisSide.TWO_SIDED,
        orthonormal=True,
        unitary=True,
    )


def onb_from_flat_unitary(U: np.ndarray, tol: Optional[float] = None) -> PPBasis:
    """
    Unitary orthonormal basis of C^n over C with l_i = sqrt(n) * (column i of U).

    Raises:
        NotUnitary: If U is not unitary.
        NotFlat: If some entry of U has modulus other than 1/sqrt(n).
    """
    tol = resolve_tolerance(tol)
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {U.shape}", "U")
    n = U.shape[0]
    if max_abs(U.conj().T @ U - np.eye(n)) > tol:
        raise NotUnitary("matrix is not unitary")
    if max_abs(np.abs(U) - 1.0 / math.sqrt(n)) > tol:
        raise NotFlat(f"entries of a flat unitary must have modulus 1/sqrt({n})")
    algebra = MMAlgebra.commutative(n)
    elements = tuple(algebra.from_vector(math.sqrt(n) * U[:, i]) for i in range(n))
    return PPBasis(
        scalar_embedding(algebra),
        TraceState.canonical(algebra),
        elements,
        BasisSide.TWO_SIDED,
        orthonormal=True,
        unitary=True,
    )


def flat_unitary_from_onb(basis: PPBasis, tol: Optional[float] = None) -> np.ndarray:
    """
    Inverse of onb_from_flat_unitary.

    Raises:
        NotUnitary: If the basis is not a unitary orthonormal basis of C^n.
        NotFlat: If the resulting matrix is not flat.
    """
    tol = resolve_tolerance(tol)
    n = basis.ambient.dim
    if not basis.ambient.is_commutative or basis.subalgebra.dim != 1 or len(basis) != n:
        raise InvalidInput("expected a basis of C^n over C with n elements", "basis")
    if not verify_unitary(basis, tol):
        raise NotUnitary("basis elements are not unitary")
    U = np.column_stack([x.vector for x in basis.elements]) / math.sqrt(n)
    if max_abs(U.conj().T @ U - np.eye(n)) > tol:
        raise NotUnitary("basis is not orthonormal for the uniform trace")
    if max_abs(np.abs(U) - 1.0 / math.sqrt(n)) > tol:
        raise NotFlat("resulting unitary is not flat")
    return U


def pauli_basis() -> PPBasis:
    """I, sigma_x, sigma_y, sigma_z in M_2 over C with the normalized trace."""
    algebra = MMAlgebra.full(2)
    matrices = [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ]
    return PPBasis(
        scalar_embedding(algebra),
        TraceState.canonical(algebra),
        tuple(algebra.element([m]) for m in matrices),
        BasisSide.TWO_SIDED,
        orthonormal=True,
        unitary=True,
    )


def clock_and_shift(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Clock U = diag(omega^k) and shift V e_k = e_(k+1 mod n); they satisfy UV = omega VU."""
    omega = _omega(n)
    clock = np.diag([omega**k for k in range(n)])
    shift = np.roll(np.eye(n, dtype=complex), 1, axis=0)
    return clock, shift


def sylvester_weyl_basis(n: int, algebra: Optional[MMAlgebra] = None) -> PPBasis:
    """The n^2 products U^i V^j, identity first, as a unitary basis of M_n over C."""
    if n < 1:
        raise InvalidInput(f"n must be positive, got {n}", "n")
    algebra = algebra or MMAlgebra.full(n)
    if algebra.block_dims != (n,):
        raise InvalidInput(f"clock and shift basis needs M_{n}, got {algebra}", "algebra")
    clock, shift = clock_and_shift(n)
    elements = tuple(
        algebra.element([np.linalg.matrix_power(clock, i) @ np.linalg.matrix_power(shift, j)])
        for i in range(n)
        for j in range(n)
    )
    return PPBasis(
        scalar_embedding(algebra),
        TraceState.canonical(algebra),
        elements,
        BasisSide.TWO_SIDED,
        orthonormal=True,
        unitary=True,
    )


def matrix_unit_onb(algebra: MMAlgebra, trace: TraceState) -> PPBasis:
    """Weighted matrix units e_ij / sqrt(t_b), a two-sided orthonormal basis over C."""
    if trace.parent.block_dims != algebra.block_dims:
        raise InvalidInput("trace does not live on the algebra", "trace")
    elements = tuple(
        algebra.from_vector(algebra.basis_vector(algebra.index(b, i, j)) / math.sqrt(trace.weights[b]))
        for b, i, j in algebra.matrix_units()
    )
    candidate = PPBasis(scalar_embedding(algebra), trace, elements, BasisSide.TWO_SIDED, orthonormal=True)
    unitary = bool(verify_unitary(candidate))
    return PPBasis(candidate.inclusion, trace, elements, BasisSide.TWO_SIDED, orthonormal=True, unitary=unitary)


def gram_schmidt_onb(trace: TraceState, seed: Optional[int] = None) -> PPBasis:
    """
    Orthonormal basis of A over C for tr, obtained from a seeded random basis of A.

    Inner products tr(x* y) are evaluated through the algebra product and the
    trace functional, and the random basis is orthonormalized with the Cholesky
    factor of their Gram matrix. No matrix unit is used.

    Raises:
        NumericalDegeneracy: If the random family is numerically dependent.
    """
    algebra = trace.parent
    rng = make_rng(seed)
    raw = np.column_stack([algebra.random_vector(rng) for _ in range(algebra.dim)])
    columns = list(raw.T)
    gram = np.array([[trace(algebra.multiply(algebra.star(x), y)) for y in columns] for x in columns])
    try:
        factor = scipy.linalg.cholesky((gram + gram.conj().T) / 2, lower=True)
    except np.linalg.LinAlgError as e:
        raise NumericalDegeneracy("random family is not a basis of the algebra", e)
    # L^H C = 1, so C^H G C = 1
    coefficients = scipy.linalg.solve_triangular(factor, np.eye(algebra.dim), lower=True, trans="C")
    onb = raw @ coefficients
    elements = tuple(algebra.from_vector(onb[:, k]) for k in range(algebra.dim))
    return PPBasis(scalar_embedding(algebra), trace, elements, BasisSide.RIGHT, orthonormal=True)


def canonical_unitary_onb(algebra: MMAlgebra) -> PPBasis:
    """
    Unitary orthonormal basis of a simple or commutative algebra over C for the Markov trace.

    Raises:
        UnsupportedAlgebraShape: If the algebra has several blocks, one of them non-trivial.
    """
    if algebra.is_commutative:
        return dft_unitary_onb(algebra.num_blocks, algebra)
    if algebra.is_simple:
        return sylvester_weyl_basis(algebra.block_dims[0], algebra)
    raise UnsupportedAlgebraShape(f"no canonical unitary basis for {algebra}")


def _require_unitary_onb(basis: PPBasis, tol: float) -> None:
    if not verify_unitary(basis, tol):
        raise NotUnitaryONB("basis elements are not unitary")
    right = PPBasis(basis.inclusion, basis.trace, basis.elements, BasisSide.RIGHT)
    if not verify_orthonormal(right, tol):
        raise NotUnitaryONB("basis is not orthonormal")


def _check_tower(basis: PPBasis, bc: BasicConstructionData, tol: float) -> None:
    if (
        basis.inclusion.source.block_dims != bc.lower.source.block_dims
        or basis.ambient.block_dims != bc.lower.target.block_dims
        or max_abs(basis.inclusion.matrix - bc.lower.matrix) > tol
    ):
        raise IncompatibleTower("basis and basic construction describe different inclusions")


def jones_projection_family(basis: PPBasis, bc: BasicConstructionData, tol: Optional[float] = None) -> "JonesFamily":
    """
    The projections l_i e_1 l_i* in A_1.

    For a unitary orthonormal basis they are mutually orthogonal and sum to 1.
    """
    tol = resolve_tolerance(tol)
    _check_tower(basis, bc, tol)
    big = bc.algebra
    e = bc.jones_projection.vector
    images = [bc.upper.matrix @ x.vector for x in basis.elements]
    projections = [big.multiply(big.multiply(u, e), big.star(u)) for u in images]
    residual = max_abs(sum(projections, np.zeros(big.dim, dtype=complex)) - big.unit_vector())
    for i, p in enumerate(projections):
        residual = max(residual, max_abs(big.multiply(p, p) - p), max_abs(big.star(p) - p))
        for q in projections[i + 1 :]:
            residual = max(residual, max_abs(big.multiply(p, q)))
    return JonesFamily(tuple(big.from_vector(p) for p in projections), residual, residual <= tol)


@dataclass(frozen=True, eq=False)
class JonesFamily:
    projections: Tuple[AlgElem, ...]
    residual: float
    passed: bool

    def __bool__(self) -> bool:
        return self.passed


def fourier_lift(basis: PPBasis, bc: BasicConstructionData, tol: Optional[float] = None) -> PPBasis:
    """
    Lift a unitary orthonormal basis of A over B to one of A_1 over A.

    v_k = sum_i omega^(k i) l_i e_1 l_i*, k = 0..n-1, with omega = exp(-2 pi i / n).
    The lifted family is verified before it is returned with its claims.

    Raises:
        NotUnitaryONB: If the input is not a unitary orthonormal basis.
        NonMarkovTrace: If n * tau differs from 1.
        IncompatibleTower: If the basis and the construction disagree on B in A.
        NumericalDegeneracy: If the lifted family fails reconstruction, orthonormality or unitarity.
    """
    tol = resolve_tolerance(tol)
    _require_unitary_onb(basis, tol)
    _check_tower(basis, bc, tol)
    n = len(basis)
    if abs(n * bc.tau - 1.0) > math.sqrt(tol):
        raise NonMarkovTrace(f"lift needs n * tau = 1, got {n * bc.tau:.12g}")
    family = jones_projection_family(basis, bc, tol)
    omega = _omega(n)
    big = bc.algebra
    lifted = []
    for k in range(n):
        terms = (omega ** (k * i) * p.vector for i, p in enumerate(family.projections))
        v = sum(terms, np.zeros(big.dim, dtype=complex))
        lifted.append(big.from_vector(v))
    candidate = PPBasis(bc.upper, bc.trace, tuple(lifted), BasisSide.TWO_SIDED)
    checks = {
        "reconstruction": verify_two_sided(candidate, tol),
        "orthonormality": verify_orthonormal(candidate, tol),
        "unitarity": verify_unitary(candidate, tol),
    }
    failed = {name: check.residual for name, check in checks.items() if not check}
    if failed:
        raise NumericalDegeneracy(f"lifted family fails {', '.join(failed)} (residuals {failed})")
    logger.debug(f"lifted {n} unitaries to {big}")
    return replace(candidate, orthonormal=True, unitary=True)


def product_basis(inner: PPBasis, outer: PPBasis, tol: Optional[float] = None) -> PPBasis:
    """
    The basis {v_j u_i} of M over N from a basis {u_i} of R over N and {v_j} of M over R.

    Both inputs must pass verify_right_basis. The result is verified the same
    way; it claims orthonormality or unitarity only when both inputs claim it
    and the product passes the matching check.

    Raises:
        IncompatibleTower: If R does not match or the traces disagree on R.
        InputNotBasis: If either input is not a right basis.
        NumericalDegeneracy: If the product of two verified bases fails verification.
    """
    tol = resolve_tolerance(tol)
    if inner.ambient.block_dims != outer.subalgebra.block_dims:
        raise IncompatibleTower(f"middle algebras differ: {inner.ambient} and {outer.subalgebra}")
    restricted = restrict_trace(outer.inclusion, outer.trace)
    if max_abs(np.asarray(restricted.weights) - np.asarray(inner.trace.weights)) > math.sqrt(tol):
        raise IncompatibleTower("trace on M does not restrict to the trace of the inner basis")
    for name, candidate in (("inner", inner), ("outer", outer)):
        check = verify_right_basis(candidate, tol)
        if not check:
            raise InputNotBasis(f"{name} basis fails right reconstruction (residual {check.residual:.3g})")
    inclusion = compose(inner.inclusion, outer.inclusion)
    elements = tuple(v * outer.inclusion(u) for v in outer.elements for u in inner.elements)
    product = PPBasis(inclusion, outer.trace, elements, BasisSide.RIGHT)
    check = verify_right_basis(product, tol)
    if not check:
        raise NumericalDegeneracy(f"product basis fails right reconstruction (residual {check.residual:.3g})")
    orthonormal = inner.orthonormal and outer.orthonormal and bool(verify_orthonormal(product, tol))
    unitary = inner.unitary and outer.unitary and bool(verify_unitary(product, tol))
    return replace(product, orthonormal=orthonormal, unitary=unitary)


def diagonal_inclusion(n: int) -> UnitalEmbedding:
    """C^n as the diagonal of M_n."""
    return standard_embedding(MMAlgebra.commutative(n), [[1] * n])


def basis_summary(candidate: PPBasis, tol: Optional[float] = None) -> Dict[str, Any]:
    """Re-verify every claim of a candidate."""
    reconstruction = verify(candidate, tol)
    orthonormality = verify_orthonormal(candidate, tol)
    unitarity = verify_unitary(candidate, tol)
    return {
        "side": candidate.side.value,
        "size": len(candidate),
        "reconstruction": reconstruction.to_dict(),
        "orthonormal": orthonormality.passed,
        "orthonormal_residual": orthonormality.residual,
        "unitary": unitarity.passed,
        "unitary_residual": unitarity.residual,
        "claims_hold": bool(reconstruction)
        and (orthonormality.passed or not candidate.orthonormal)
        and (unitarity.passed or not candidate.unitary),
    }
