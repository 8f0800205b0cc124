"""
Jones' basic construction for finite-dimensional inclusions.

The construction is realized on the GNS space L^2(A, tr) in coordinates that
are orthonormal for the trace inner product: left multiplication by A and the
projection onto L^2(B) generate A_1, which equals the commutant of the right
action of B. Depth and index arithmetic work at the level of inclusion
matrices.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .exceptions import InvalidInput, NumericalDegeneracy
from .fdca import (
    AlgElem,
    MMAlgebra,
    TraceState,
    UnitalEmbedding,
    compose,
    conditional_expectation,
    parse_inclusion_matrix,
    restrict_trace,
)
from .presentation import Subalgebra
from .utils import (
    hermitian_kernel,
    is_perfect_square,
    is_prime,
    make_rng,
    max_abs,
    null_space,
    numerical_rank,
    polar_unitary,
    resolve_tolerance,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GNSSpace:
    """L^2(A, tr) with coordinates scaled to be orthonormal."""

    trace: TraceState

    @cached_property
    def scale(self) -> np.ndarray:
        return np.sqrt(self.trace.gram_weights)

    @property
    def algebra(self) -> MMAlgebra:
        return self.trace.parent

    def _conjugate(self, operator: np.ndarray) -> np.ndarray:
        return self.scale[:, None] * operator / self.scale[None, :]

    def left(self, u: np.ndarray) -> np.ndarray:
        """Left multiplication by u as an operator on L^2."""
        return self._conjugate(self.algebra.left_multiplication(u))

    def right(self, u: np.ndarray) -> np.ndarray:
        """Right multiplication by u as an operator on L^2."""
        return self._conjugate(self.algebra.right_multiplication(u))

    def jones_projection(self, emb: UnitalEmbedding, tol: Optional[float] = None) -> np.ndarray:
        """Orthogonal projection of L^2(A) onto L^2(B)."""
        expectation = conditional_expectation(emb, self.trace, tol)
        return self._conjugate(expectation.projector)


@dataclass(frozen=True, eq=False)
class BasicConstructionData:
    """
    The tower B in A in A_1 = <A, e_1>.

    Attributes:
        lower: Embedding B -> A.
        upper: Embedding A -> A_1.
        jones_projection: e_1 as an element of A_1.
        tau: Normalizing constant of the trace on A_1; 1/||Lambda||^2 for Markov traces.
        trace: Trace on A_1 with weight tau * s_j on the block of q_j e_1.
        base_trace: The trace on A used for the construction.
        is_markov: Whether the trace on A_1 extends base_trace.
        gns_map: Columns are operators on L^2(A) (row-major) for each coordinate of A_1.
    """

    lower: UnitalEmbedding
    upper: UnitalEmbedding
    jones_projection: AlgElem
    tau: float
    trace: TraceState
    base_trace: TraceState
    is_markov: bool
    gns_map: np.ndarray = field(repr=False)

    @property
    def algebra(self) -> MMAlgebra:
        return self.upper.target

    def operator(self, x: AlgElem) -> np.ndarray:
        """x in A_1 as an operator on L^2(A)."""
        hilbert = self.upper.source.dim
        return (self.gns_map @ x.vector).reshape(hilbert, hilbert)

    def jones_residual(self, tol: Optional[float] = None) -> float:
        """Max over a basis of A of |e x e - E_B(x) e|, plus |e^2 - e| and |e* - e|."""
        return jones_relation_residual(self.lower, self.upper, self.base_trace, self.jones_projection, tol)


def jones_relation_residual(
    lower: UnitalEmbedding,
    upper: UnitalEmbedding,
    trace: TraceState,
    projection: AlgElem,
    tol: Optional[float] = None,
) -> float:
    big = upper.target
    e = projection.vector
    expectation = conditional_expectation(lower, trace, tol)
    into_big = compose(lower, upper).matrix
    residual = max(max_abs(big.multiply(e, e) - e), max_abs(big.star(e) - e))
    for k in range(upper.source.dim):
        x = upper.matrix[:, k]
        lhs = big.multiply(big.multiply(e, x), e)
        rhs = big.multiply(into_big @ expectation.matrix[:, k], e)
        residual = max(residual, max_abs(lhs - rhs))
    return residual


def _right_commutant(gns: GNSSpace, emb: UnitalEmbedding, tol: float) -> np.ndarray:
    hilbert = gns.algebra.dim
    if emb.source.dim == 1:
        return np.eye(hilbert * hilbert, dtype=complex)
    identity = np.eye(hilbert)
    gram = np.zeros((hilbert * hilbert, hilbert * hilbert), dtype=complex)
    for k in range(emb.source.dim):
        rho = gns.right(emb.matrix[:, k])
        # vec(T rho - rho T) for row-major vec
        equation = np.kron(identity, rho.T) - np.kron(rho, identity)
        gram += equation.conj().T @ equation
    return hermitian_kernel(gram, tol)


def basic_construction(
    emb: UnitalEmbedding,
    trace: TraceState,
    tol: Optional[float] = None,
    seed: Optional[int] = None,
) -> BasicConstructionData:
    """
    Realize B in A in A_1 on the GNS space of (A, tr).

    Args:
        emb: The inclusion B -> A.
        trace: Faithful trace on A.
        tol: Numerical tolerance.
        seed: Seed for the block decomposition of A_1.

    Returns:
        BasicConstructionData; A_1 is a single block whenever it fills B(L^2(A)).
    """
    tol = resolve_tolerance(tol)
    algebra = emb.target
    if trace.parent.block_dims != algebra.block_dims:
        raise InvalidInput("trace does not live on the target of the embedding", "trace")
    gns = GNSSpace(trace)
    hilbert = algebra.dim
    e = gns.jones_projection(emb, tol)

    commutant = _right_commutant(gns, emb, tol)
    if commutant.shape[1] == hilbert * hilbert:
        big = MMAlgebra((hilbert,), "A1")
        gns_map = np.eye(hilbert * hilbert, dtype=complex)
        to_big = np.eye(hilbert * hilbert, dtype=complex)
    else:
        ambient = MMAlgebra((hilbert,))
        decomposition = Subalgebra(ambient, commutant).decompose(tol, seed)
        big = MMAlgebra(decomposition.algebra.block_dims, "A1")
        gns_map = commutant @ decomposition.iso
        to_big = decomposition.inverse @ commutant.conj().T

    upper_matrix = np.column_stack([to_big @ gns.left(algebra.basis_vector(k)).reshape(-1) for k in range(hilbert)])
    upper = UnitalEmbedding(algebra, big, upper_matrix)
    projection = big.from_vector(to_big @ e.reshape(-1))

    source_trace = restrict_trace(emb, trace)
    weights = np.zeros(big.num_blocks)
    assigned = np.zeros(big.num_blocks, dtype=bool)
    for j in range(emb.source.num_blocks):
        q = emb.matrix @ emb.source.basis_vector(emb.source.index(j, 0, 0))
        image = big.split(to_big @ (gns.left(q) @ e).reshape(-1))
        block = int(np.argmax([max_abs(x) for x in image]))
        if assigned[block]:
            raise NumericalDegeneracy("two blocks of B landed in the same block of A_1")
        assigned[block] = True
        weights[block] = source_trace.weights[j]
    if not assigned.all():
        raise NumericalDegeneracy("A_1 has a block not reached by B e_1")
    tau = 1.0 / float(np.dot(big.block_dims, weights))
    big_trace = TraceState(big, tuple(tau * weights))

    restricted = upper.inclusion.T @ np.asarray(big_trace.weights)
    is_markov = max_abs(restricted - np.asarray(trace.weights)) <= math.sqrt(tol) * max(trace.weights)
    logger.debug(f"basic construction of {emb.source} in {algebra}: A_1 = {big}, tau = {tau:.12g}")
    return BasicConstructionData(
        lower=emb,
        upper=upper,
        jones_projection=projection,
        tau=tau,
        trace=big_trace,
        base_trace=trace,
        is_markov=is_markov,
        gns_map=gns_map,
    )


@dataclass(frozen=True)
class TripleReport:
    """
    Outcome of the basic-construction test for B in A in A_1.

    Attributes:
        matrix_match: Inclusion matrix of A in A_1 is the transpose of B in A up to block order.
        relation_residual: Residual of e x e = E_B(x) e for the projection found.
        ideal_spans: Whether A e A spans A_1.
        tolerance: Bound applied to relation_residual.
        projection: The projection e in A_1 when one was found.
        diagnostic: Human-readable reason for a negative answer.
    """

    matrix_match: bool
    relation_residual: float
    ideal_spans: bool
    tolerance: float
    projection: Optional[AlgElem] = field(default=None, compare=False)
    diagnostic: str = ""

    @property
    def passed(self) -> bool:
        return self.matrix_match and self.relation_residual <= self.tolerance and self.ideal_spans

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "matrix_match": self.matrix_match,
            "relation_residual": self.relation_residual,
            "ideal_spans": self.ideal_spans,
            "diagnostic": self.diagnostic,
        }


def _rows_match(upper: np.ndarray, lower: np.ndarray) -> bool:
    if upper.shape != lower.T.shape:
        return False
    return sorted(map(tuple, upper.tolist())) == sorted(map(tuple, lower.T.tolist()))


def _intertwiner(first: List[np.ndarray], second: List[np.ndarray], rng: np.random.Generator, tol: float) -> np.ndarray:
    """Unitary U with U first[k] U* = second[k] for all k."""
    n = first[0].shape[0]
    identity = np.eye(n)
    equations = np.vstack([np.kron(identity, a.T) - np.kron(b, identity) for a, b in zip(first, second)])
    kernel = null_space(equations, tol)
    if kernel.shape[1] == 0:
        raise NumericalDegeneracy("representations are not equivalent")
    candidate = kernel @ (rng.standard_normal(kernel.shape[1]) + 1j * rng.standard_normal(kernel.shape[1]))
    return polar_unitary(candidate.reshape(n, n))


def is_basic_construction_triple(
    lower: UnitalEmbedding,
    upper: UnitalEmbedding,
    trace: Optional[TraceState] = None,
    tol: Optional[float] = None,
    seed: Optional[int] = None,
) -> TripleReport:
    """
    Decide whether B in A in A_1 is an instance of the basic construction.

    The inclusion matrices are compared first. When they match, the standard
    basic construction for the trace restricted to A is built and carried onto
    A_1 block by block with intertwining unitaries; the image of its Jones
    projection is the witness e.

    Args:
        lower: Embedding B -> A.
        upper: Embedding A -> A_1.
        trace: Trace on A_1 (canonical trace if omitted).
        tol: Numerical tolerance.
        seed: Seed for the randomized searches.
    """
    tol = resolve_tolerance(tol)
    loose = math.sqrt(tol)
    if lower.target.block_dims != upper.source.block_dims:
        return TripleReport(False, math.inf, False, loose, diagnostic="embeddings are not composable")
    lam_lower, lam_upper = lower.inclusion, upper.inclusion
    if not _rows_match(lam_upper, lam_lower):
        return TripleReport(
            False,
            math.inf,
            False,
            loose,
            diagnostic=f"inclusion matrix {lam_upper.tolist()} is not the transpose of {lam_lower.tolist()}",
        )

    big = upper.target
    trace = trace or TraceState.canonical(big)
    base_trace = restrict_trace(upper, trace)
    standard = basic_construction(lower, base_trace, tol, seed)
    lam_standard = standard.upper.inclusion
    rng = make_rng(seed)

    small = upper.source
    images = [upper.target.split(upper.matrix[:, k]) for k in range(small.dim)]
    standard_images = [standard.algebra.split(standard.upper.matrix[:, k]) for k in range(small.dim)]
    e_standard = standard.algebra.split(standard.jones_projection.vector)
    unused = list(range(standard.algebra.num_blocks))
    blocks = []
    for c in range(big.num_blocks):
        match = next((p for p in unused if np.array_equal(lam_standard[p], lam_upper[c])), None)
        if match is None:
            return TripleReport(False, math.inf, False, loose, diagnostic=f"block {c} of A_1 has no partner")
        unused.remove(match)
        unitary = _intertwiner([x[match] for x in standard_images], [x[c] for x in images], rng, tol)
        blocks.append(unitary @ e_standard[match] @ unitary.conj().T)
    projection = big.element(blocks)

    residual = jones_relation_residual(lower, upper, base_trace, projection, tol)
    e = projection.vector
    spans = []
    for k in range(small.dim):
        left = big.multiply(upper.matrix[:, k], e)
        spans.extend(big.multiply(left, upper.matrix[:, l]) for l in range(small.dim))
    ideal_spans = numerical_rank(np.array(spans), tol) == big.dim
    diagnostic = "" if residual <= loose else f"Jones relation residual {residual:.3g}"
    if not ideal_spans:
        diagnostic = diagnostic or "A e A does not span A_1"
    return TripleReport(True, residual, ideal_spans, loose, projection, diagnostic)


@dataclass(frozen=True)
class DepthResult:
    """Depth of a relative-commutant tower, or None when the available levels do not decide it."""

    depth: Optional[int]
    reason: str

    @property
    def determined(self) -> bool:
        return self.depth is not None

    def __str__(self) -> str:
        return str(self.depth) if self.depth is not None else "undetermined at available length"


def depth_from_tower(
    matrices: Sequence[Sequence[Sequence[int]]], index: float, tol: Optional[float] = None
) -> DepthResult:
    """
    Least k at which the relative-commutant tower becomes a basic construction.

    matrices[j] is the inclusion matrix of the j-th step of the tower. Level
    k >= 2 is a basic construction when ||matrices[k-2]||^2 equals the index
    and, if the next matrix is available, it is the transpose of matrices[k-2]
    up to block order.

    Args:
        matrices: Successive inclusion matrices.
        index: The index beta.
        tol: Numerical tolerance.
    """
    tol = resolve_tolerance(tol)
    if not isinstance(matrices, (list, tuple)) or not matrices:
        raise InvalidInput("at least one inclusion matrix is required", "matrices")
    if not index > 0:
        raise InvalidInput(f"index must be positive, got {index}", "index")
    arrays = [parse_inclusion_matrix(m, f"matrices[{j}]") for j, m in enumerate(matrices)]
    if arrays[0].shape == (1, 1) and arrays[0][0, 0] == 1 and abs(index - 1.0) <= tol:
        return DepthResult(1, "trivial inclusion")
    for k in range(2, len(arrays) + 2):
        lower = arrays[k - 2]
        norm_sq = float(np.linalg.norm(lower, 2) ** 2)
        if abs(norm_sq - index) > tol * max(1.0, index):
            continue
        if k - 1 < len(arrays) and not _rows_match(arrays[k - 1], lower):
            continue
        return DepthResult(k, f"||Lambda_{k - 2}||^2 = {norm_sq:.12g} equals the index")
    return DepthResult(None, "no level of the available tower is a basic construction")


def _positive_int(value: int, name: str) -> int:
    if int(value) != value or value < 1:
        raise InvalidInput(f"must be a positive integer, got {value}", name)
    return int(value)


def index_formula(weyl_order: int, relcom_dim: int) -> int:
    """Index as |G| * dim(N' cap M)."""
    return _positive_int(weyl_order, "weyl_order") * _positive_int(relcom_dim, "relcom_dim")


@dataclass(frozen=True)
class ConsistencyReport:
    index: int
    relcom_dim: int
    findings: List[str]

    @property
    def consistent(self) -> bool:
        return not self.findings

    def __bool__(self) -> bool:
        return self.consistent

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "relcom_dim": self.relcom_dim,
            "consistent": self.consistent,
            "findings": list(self.findings),
        }


def consistency_check(index: int, relcom_dim: int) -> ConsistencyReport:
    """
    Arithmetic constraints linking an integer index to dim(N' cap M).

    A prime index forces an irreducible inclusion; an index equal to the
    relative-commutant dimension forces that dimension to be a square; and the
    index is always a multiple of the dimension.
    """
    index = _positive_int(index, "index")
    relcom_dim = _positive_int(relcom_dim, "relcom_dim")
    findings = []
    if is_prime(index) and relcom_dim > 1:
        findings.append(f"prime index {index} forces dim(N' cap M) = 1, got {relcom_dim}")
    if index == relcom_dim and not is_perfect_square(index):
        findings.append(f"index equal to dim(N' cap M) must be a perfect square, got {index}")
    if index % relcom_dim:
        findings.append(f"index {index} is not a multiple of dim(N' cap M) = {relcom_dim}")
    return ConsistencyReport(index, relcom_dim, findings)
