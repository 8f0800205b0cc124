"""
Finite-dimensional C*-algebras presented as direct sums of full matrix blocks.

Coordinates of an element are the row-major entries of its blocks, concatenated
in block order. Traces are stored as one weight per block (the value on a
minimal projection), embeddings as explicit matrices on coordinates; inclusion
matrices are always derived from the embedding, never supplied.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Any, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import scipy.linalg

from .base import CheckResult
from .constants import HOMOMORPHISM_PROBES
from .exceptions import (
    DisconnectedInclusion,
    IncompatibleTower,
    InvalidInput,
    NotAHomomorphism,
    NotUnital,
    NotUnitary,
    SingularGram,
)
from .utils import make_rng, max_abs, null_space, resolve_tolerance

if TYPE_CHECKING:
    from .presentation import StarAlgebraPresentation, Subalgebra

logger = logging.getLogger(__name__)

Scalar = Union[int, float, complex]


@dataclass(frozen=True)
class MMAlgebra:
    """
    A multi-matrix algebra M_{n_1} + ... + M_{n_k}.

    Attributes:
        block_dims: Sizes of the full matrix blocks, in the order given.
        label: Free-form name, ignored by equality.
    """

    block_dims: Tuple[int, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.block_dims)
        if not dims:
            raise InvalidInput("an algebra needs at least one block", "blocks")
        for index, n in enumerate(dims):
            if n < 1:
                raise InvalidInput(f"block dimension must be positive, got {n}", f"blocks[{index}]")
        object.__setattr__(self, "block_dims", dims)

    @classmethod
    def full(cls, n: int, label: str = "") -> "MMAlgebra":
        """The simple algebra M_n."""
        return cls((n,), label or f"M{n}")

    @classmethod
    def commutative(cls, n: int, label: str = "") -> "MMAlgebra":
        """The commutative algebra C^n."""
        return cls((1,) * n, label or f"C^{n}")

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @cached_property
    def dim(self) -> int:
        return sum(n * n for n in self.block_dims)

    @cached_property
    def offsets(self) -> Tuple[int, ...]:
        starts = [0]
        for n in self.block_dims[:-1]:
            starts.append(starts[-1] + n * n)
        return tuple(starts)

    @property
    def is_simple(self) -> bool:
        return self.num_blocks == 1

    @property
    def is_commutative(self) -> bool:
        return all(n == 1 for n in self.block_dims)

    def block_slice(self, b: int) -> slice:
        return slice(self.offsets[b], self.offsets[b] + self.block_dims[b] ** 2)

    def index(self, b: int, i: int, j: int) -> int:
        """Coordinate index of the matrix unit e_ij in block b."""
        return self.offsets[b] + i * self.block_dims[b] + j

    def split(self, u: np.ndarray) -> List[np.ndarray]:
        """Split coordinate vectors (with optional leading batch axes) into blocks."""
        u = np.asarray(u)
        if u.shape[-1] != self.dim:
            raise InvalidInput(f"expected {self.dim} coordinates, got {u.shape[-1]}", "vector")
        lead = u.shape[:-1]
        return [u[..., self.block_slice(b)].reshape(lead + (n, n)) for b, n in enumerate(self.block_dims)]

    def join(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        """Inverse of split."""
        lead = np.asarray(blocks[0]).shape[:-2]
        return np.concatenate([np.asarray(x).reshape(lead + (-1,)) for x in blocks], axis=-1)

    def multiply(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Product of coordinate vectors; leading axes broadcast."""
        return self.join([x @ y for x, y in zip(self.split(u), self.split(v))])

    def star(self, u: np.ndarray) -> np.ndarray:
        return self.join([np.conj(np.swapaxes(x, -1, -2)) for x in self.split(u)])

    def unit_vector(self) -> np.ndarray:
        return self.join([np.eye(n, dtype=complex) for n in self.block_dims])

    def basis_vector(self, k: int) -> np.ndarray:
        vector = np.zeros(self.dim, dtype=complex)
        vector[k] = 1.0
        return vector

    def matrix_units(self) -> Iterator[Tuple[int, int, int]]:
        """(block, row, column) triples in coordinate order."""
        for b, n in enumerate(self.block_dims):
            for i in range(n):
                for j in range(n):
                    yield b, i, j

    def central_projection(self, b: int) -> np.ndarray:
        blocks = [np.zeros((n, n), dtype=complex) for n in self.block_dims]
        blocks[b] = np.eye(self.block_dims[b], dtype=complex)
        return self.join(blocks)

    def left_multiplication(self, u: np.ndarray) -> np.ndarray:
        """Matrix of y -> u y on coordinates."""
        return scipy.linalg.block_diag(*[np.kron(x, np.eye(len(x))) for x in self.split(np.asarray(u, dtype=complex))])

    def right_multiplication(self, u: np.ndarray) -> np.ndarray:
        """Matrix of y -> y u on coordinates."""
        return scipy.linalg.block_diag(
            *[np.kron(np.eye(len(x)), x.T) for x in self.split(np.asarray(u, dtype=complex))]
        )

    def involution_matrix(self) -> np.ndarray:
        """Permutation P with coordinates of x* equal to P applied to conj(x)."""
        perm = np.zeros((self.dim, self.dim))
        for b, i, j in self.matrix_units():
            perm[self.index(b, j, i), self.index(b, i, j)] = 1.0
        return perm

    def element(self, blocks: Sequence[Union[np.ndarray, Sequence, Scalar]]) -> "AlgElem":
        if len(blocks) != self.num_blocks:
            raise InvalidInput(f"expected {self.num_blocks} blocks, got {len(blocks)}", "blocks")
        arrays = []
        for b, (x, n) in enumerate(zip(blocks, self.block_dims)):
            array = np.asarray(x, dtype=complex).reshape(-1)
            if array.size != n * n:
                raise InvalidInput(f"block must be {n}x{n}", f"blocks[{b}]")
            arrays.append(array.reshape(n, n))
        return AlgElem(self, tuple(arrays))

    def from_vector(self, u: np.ndarray) -> "AlgElem":
        return AlgElem(self, tuple(np.array(x, dtype=complex) for x in self.split(u)))

    def unit(self) -> "AlgElem":
        return self.from_vector(self.unit_vector())

    def zero(self) -> "AlgElem":
        return self.from_vector(np.zeros(self.dim, dtype=complex))

    def random_vector(self, rng: np.random.Generator, hermitian: bool = False) -> np.ndarray:
        u = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return (u + self.star(u)) / 2 if hermitian else u

    def as_presentation(self, trace: Optional["TraceState"] = None) -> "StarAlgebraPresentation":
        """Structure-constant form in the matrix-unit basis."""
        from .presentation import StarAlgebraPresentation

        eye = np.eye(self.dim, dtype=complex)
        tensor = self.multiply(eye[:, None, :], eye[None, :, :])
        return StarAlgebraPresentation(
            structure=tensor,
            unit=self.unit_vector(),
            involution=self.involution_matrix().astype(complex),
            trace=None if trace is None else trace.functional,
            label=self.label,
        )

    def __str__(self) -> str:
        return " + ".join("C" if n == 1 else f"M{n}" for n in self.block_dims)


@dataclass(frozen=True, eq=False)
class AlgElem:
    """An element of a multi-matrix algebra, one complex matrix per block."""

    parent: MMAlgebra
    blocks: Tuple[np.ndarray, ...]

    @property
    def vector(self) -> np.ndarray:
        return self.parent.join(self.blocks)

    def adjoint(self) -> "AlgElem":
        return AlgElem(self.parent, tuple(x.conj().T for x in self.blocks))

    def _coerce(self, other: "AlgElem") -> "AlgElem":
        if other.parent.block_dims != self.parent.block_dims:
            raise InvalidInput(f"elements of {self.parent} and {other.parent} cannot be combined", "element")
        return other

    def __add__(self, other: "AlgElem") -> "AlgElem":
        other = self._coerce(other)
        return AlgElem(self.parent, tuple(x + y for x, y in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "AlgElem") -> "AlgElem":
        other = self._coerce(other)
        return AlgElem(self.parent, tuple(x - y for x, y in zip(self.blocks, other.blocks)))

    def __neg__(self) -> "AlgElem":
        return AlgElem(self.parent, tuple(-x for x in self.blocks))

    def __mul__(self, other: Union["AlgElem", Scalar]) -> "AlgElem":
        if isinstance(other, AlgElem):
            other = self._coerce(other)
            return AlgElem(self.parent, tuple(x @ y for x, y in zip(self.blocks, other.blocks)))
        return AlgElem(self.parent, tuple(x * other for x in self.blocks))

    def __rmul__(self, other: Scalar) -> "AlgElem":
        return AlgElem(self.parent, tuple(other * x for x in self.blocks))

    def distance(self, other: "AlgElem") -> float:
        return max_abs(self.vector - self._coerce(other).vector)

    def allclose(self, other: "AlgElem", tol: Optional[float] = None) -> bool:
        return self.distance(other) <= resolve_tolerance(tol)

    def is_unitary(self, tol: Optional[float] = None) -> bool:
        one = self.parent.unit()
        return (self.adjoint() * self).allclose(one, tol) and (self * self.adjoint()).allclose(one, tol)

    def __repr__(self) -> str:
        return f"AlgElem({self.parent}, {[x.tolist() for x in self.blocks]})"


@dataclass(frozen=True, eq=False)
class TraceState:
    """
    A faithful tracial state, tr(x) = sum_b weights[b] * Tr(x_b).

    Attributes:
        parent: The algebra the trace lives on.
        weights: Value on a minimal projection of each block.
    """

    parent: MMAlgebra
    weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        weights = tuple(float(np.real(w)) for w in self.weights)
        if len(weights) != self.parent.num_blocks:
            raise InvalidInput(f"expected {self.parent.num_blocks} weights, got {len(weights)}", "weights")
        for index, w in enumerate(weights):
            if not w > 0:
                raise InvalidInput(f"trace weights must be positive, got {w}", f"weights[{index}]")
        total = sum(n * w for n, w in zip(self.parent.block_dims, weights))
        if abs(total - 1.0) > math.sqrt(resolve_tolerance()):
            raise InvalidInput(f"trace must be normalized, sum n_i t_i = {total}", "weights")
        object.__setattr__(self, "weights", tuple(w / total for w in weights))

    @classmethod
    def from_weights(cls, parent: MMAlgebra, weights: Sequence[float]) -> "TraceState":
        """Build a trace from unnormalized positive weights."""
        w = np.asarray(weights, dtype=float)
        total = float(np.dot(parent.block_dims, w)) if w.size == parent.num_blocks else 1.0
        if total <= 0:
            raise InvalidInput("trace weights must be positive", "weights")
        return cls(parent, tuple(w / total))

    @classmethod
    def canonical(cls, parent: MMAlgebra) -> "TraceState":
        """Normalized trace of the left regular representation, t_b = n_b / dim."""
        return cls(parent, tuple(n / parent.dim for n in parent.block_dims))

    @cached_property
    def functional(self) -> np.ndarray:
        """Row vector f with tr(x) = f . coordinates(x)."""
        f = np.zeros(self.parent.dim, dtype=complex)
        for b, n in enumerate(self.parent.block_dims):
            for i in range(n):
                f[self.parent.index(b, i, i)] = self.weights[b]
        return f

    @cached_property
    def gram_weights(self) -> np.ndarray:
        """Diagonal of the Gram matrix of <x, y> = tr(x* y) in coordinates."""
        return np.concatenate([np.full(n * n, w) for n, w in zip(self.parent.block_dims, self.weights)])

    def __call__(self, x: Union[AlgElem, np.ndarray]) -> complex:
        vector = x.vector if isinstance(x, AlgElem) else np.asarray(x)
        return complex(self.functional @ vector)

    def inner(self, x: AlgElem, y: AlgElem) -> complex:
        return complex(np.sum(self.gram_weights * np.conj(x.vector) * y.vector))


@dataclass(frozen=True, eq=False)
class UnitalEmbedding:
    """
    A unital *-homomorphism source -> target given on coordinates.

    Attributes:
        source: The smaller algebra B.
        target: The larger algebra A.
        matrix: dim(A) x dim(B) complex matrix.
    """

    source: MMAlgebra
    target: MMAlgebra
    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=complex)
        expected = (self.target.dim, self.source.dim)
        if matrix.shape != expected:
            raise InvalidInput(f"embedding matrix must have shape {expected}, got {matrix.shape}", "matrix")
        object.__setattr__(self, "matrix", matrix)

    def apply(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u) @ self.matrix.T

    def __call__(self, x: AlgElem) -> AlgElem:
        return self.target.from_vector(self.matrix @ x.vector)

    def check(self, tol: Optional[float] = None, seed: Optional[int] = None) -> None:
        """
        Validate unitality, multiplicativity, *-preservation and injectivity.

        Raises:
            NotUnital: If the unit is not mapped to the unit.
            NotAHomomorphism: If products, adjoints or injectivity fail.
        """
        tol = resolve_tolerance(tol)
        unit_residual = max_abs(self.matrix @ self.source.unit_vector() - self.target.unit_vector())
        if unit_residual > tol:
            raise NotUnital(f"embedding maps 1 to an element {unit_residual:.3g} away from 1")
        rng = make_rng(seed)
        for _ in range(HOMOMORPHISM_PROBES):
            x = self.source.random_vector(rng)
            y = self.source.random_vector(rng)
            jx, jy = self.matrix @ x, self.matrix @ y
            scale = max(1.0, max_abs(jx) * max_abs(jy))
            product_residual = max_abs(self.matrix @ self.source.multiply(x, y) - self.target.multiply(jx, jy))
            if product_residual > tol * scale:
                raise NotAHomomorphism(f"embedding is not multiplicative (residual {product_residual:.3g})")
            star_residual = max_abs(self.matrix @ self.source.star(x) - self.target.star(jx))
            if star_residual > tol * max(1.0, max_abs(jx)):
                raise NotAHomomorphism(f"embedding does not preserve adjoints (residual {star_residual:.3g})")
        if np.linalg.matrix_rank(self.matrix, tol=tol) < self.source.dim:
            raise NotAHomomorphism("embedding is not injective")

    @cached_property
    def inclusion(self) -> np.ndarray:
        return inclusion_matrix(self)


def inclusion_matrix(emb: UnitalEmbedding, tol: Optional[float] = None) -> np.ndarray:
    """
    Multiplicity matrix of an embedding.

    Entry (i, j) is the rank of the image of a minimal projection of block j of
    the source inside block i of the target.

    Args:
        emb: The embedding B -> A.
        tol: Numerical tolerance.

    Returns:
        Nonnegative integer array of shape (blocks of A, blocks of B).

    Raises:
        NotAHomomorphism: If multiplicativity fails or a rank is not integral.
        NotUnital: If the unit is not preserved.
    """
    tol = resolve_tolerance(tol)
    emb.check(tol)
    source, target = emb.source, emb.target
    lam = np.zeros((target.num_blocks, source.num_blocks), dtype=int)
    for j in range(source.num_blocks):
        image = target.split(emb.matrix @ source.basis_vector(source.index(j, 0, 0)))
        for i, block in enumerate(image):
            rank = float(np.real(np.trace(block)))
            if abs(rank - round(rank)) > max(tol, 1e-7) * target.block_dims[i]:
                raise NotAHomomorphism(f"image of a minimal projection has trace {rank:.6g}")
            lam[i, j] = int(round(rank))
    if not np.array_equal(lam @ np.asarray(source.block_dims), np.asarray(target.block_dims)):
        raise NotUnital(f"multiplicities {lam.tolist()} do not fill the target blocks")
    logger.debug(f"inclusion matrix of {source} in {target}: {lam.tolist()}")
    return lam


def parse_inclusion_matrix(data: Any, field_path: str = "matrix") -> np.ndarray:
    """
    Nonnegative integer matrix from nested lists.

    Raises:
        InvalidInput: If the data is ragged, not two-dimensional, empty, or has
            entries that are not nonnegative integers.
    """
    try:
        lam = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise InvalidInput(f"inclusion matrix must be a numeric list of rows: {e}", field_path, e)
    if lam.ndim != 2 or lam.size == 0:
        raise InvalidInput("inclusion matrix must be a nonempty list of rows", field_path)
    if not np.all(np.isfinite(lam)) or np.any(lam < 0) or np.any(lam != np.round(lam)):
        raise InvalidInput("inclusion matrix entries must be nonnegative integers", field_path)
    return lam.astype(int)


def _as_matrix(inclusion: Union[UnitalEmbedding, np.ndarray, Sequence]) -> np.ndarray:
    if isinstance(inclusion, UnitalEmbedding):
        return inclusion.inclusion
    return parse_inclusion_matrix(inclusion)


def bratteli_graph(inclusion: Union[UnitalEmbedding, np.ndarray, Sequence]) -> nx.Graph:
    """Bipartite graph with nodes ('A', i) and ('B', j) and an edge per nonzero entry."""
    lam = _as_matrix(inclusion)
    graph = nx.Graph()
    graph.add_nodes_from((("A", i) for i in range(lam.shape[0])), bipartite=0)
    graph.add_nodes_from((("B", j) for j in range(lam.shape[1])), bipartite=1)
    for i, j in zip(*np.nonzero(lam)):
        graph.add_edge(("A", int(i)), ("B", int(j)), multiplicity=int(lam[i, j]))
    return graph


def is_connected(inclusion: Union[UnitalEmbedding, np.ndarray, Sequence]) -> bool:
    """True iff the Bratteli diagram is connected as an undirected graph."""
    return bool(nx.is_connected(bratteli_graph(inclusion)))


def bratteli_dot(emb: UnitalEmbedding) -> str:
    """Graphviz rendering of the Bratteli diagram, vertices labelled by block size."""
    graph = bratteli_graph(emb)
    dims = {"A": emb.target.block_dims, "B": emb.source.block_dims}
    lines = ["graph bratteli {", "  rankdir=BT;"]
    for side, index in sorted(graph.nodes):
        lines.append(f'  {side.lower()}{index} [label="{dims[side][index]}"];')
    for (side_u, u), (side_v, v), data in sorted(graph.edges(data=True)):
        top, bottom = (u, v) if side_u == "A" else (v, u)
        lines.append(f'  b{bottom} -- a{top} [label="{data["multiplicity"]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class MarkovTrace:
    """
    Markov trace of an inclusion B in A.

    Attributes:
        weights: Trace vector on the blocks of A, with sum n_i t_i = 1.
        index: The Perron eigenvalue ||Lambda||^2.
        residual: Max deviation of Lambda Lambda^t t from index * t.
        source_weights: Restriction of the trace to B, Lambda^t t.
        target_dims: Block dimensions of A.
        source_dims: Block dimensions of B.
    """

    weights: np.ndarray
    index: float
    residual: float
    source_weights: np.ndarray
    target_dims: Tuple[int, ...]
    source_dims: Tuple[int, ...]

    def as_trace(self, algebra: Optional[MMAlgebra] = None) -> TraceState:
        algebra = algebra or MMAlgebra(self.target_dims)
        if algebra.block_dims != self.target_dims:
            raise InvalidInput(f"trace vector does not fit {algebra}", "algebra")
        return TraceState(algebra, tuple(self.weights))

    def source_trace(self, algebra: Optional[MMAlgebra] = None) -> TraceState:
        algebra = algebra or MMAlgebra(self.source_dims)
        return TraceState(algebra, tuple(self.source_weights))


def markov_trace(
    inclusion: Union[UnitalEmbedding, np.ndarray, Sequence],
    source_dims: Optional[Sequence[int]] = None,
    tol: Optional[float] = None,
) -> MarkovTrace:
    """
    Markov trace of a connected inclusion from its inclusion matrix.

    The trace vector on A is the Perron eigenvector of Lambda Lambda^t; its
    restriction to B is the Perron eigenvector of Lambda^t Lambda, both with
    eigenvalue ||Lambda||^2.

    Args:
        inclusion: An embedding, or an inclusion matrix (blocks of A x blocks of B).
        source_dims: Block dimensions of B when a bare matrix is given (default all 1).
        tol: Numerical tolerance.

    Returns:
        MarkovTrace with trace vector, index and residual.

    Raises:
        DisconnectedInclusion: If the Bratteli graph is disconnected or the
            Perron eigenvalue is degenerate.
    """
    tol = resolve_tolerance(tol)
    lam = _as_matrix(inclusion)
    if isinstance(inclusion, UnitalEmbedding):
        dims_b = np.asarray(inclusion.source.block_dims)
    else:
        dims_b = np.ones(lam.shape[1], dtype=int) if source_dims is None else np.asarray(source_dims)
        if dims_b.shape != (lam.shape[1],):
            raise InvalidInput(f"expected {lam.shape[1]} source dimensions", "source_dims")
    dims_a = lam @ dims_b
    if np.any(dims_a == 0):
        raise InvalidInput("every block of the target must receive a block of the source", "matrix")
    if not is_connected(lam):
        raise DisconnectedInclusion(f"inclusion matrix {lam.tolist()} has a disconnected Bratteli diagram")

    gram = (lam @ lam.T).astype(float)
    values, vectors = np.linalg.eigh(gram)
    beta = float(values[-1])
    if len(values) > 1 and beta - values[-2] <= tol * max(beta, 1.0):
        raise DisconnectedInclusion(f"Perron eigenvalue {beta} is degenerate")
    vector = np.abs(vectors[:, -1])
    weights = vector / float(dims_a @ vector)
    residual = max_abs(gram @ weights - beta * weights)
    logger.debug(f"Markov trace for {lam.tolist()}: index {beta:.12g}, residual {residual:.3g}")
    return MarkovTrace(
        weights=weights,
        index=beta,
        residual=residual,
        source_weights=lam.T @ weights,
        target_dims=tuple(int(n) for n in dims_a),
        source_dims=tuple(int(n) for n in dims_b),
    )


def restrict_trace(emb: UnitalEmbedding, trace: TraceState) -> TraceState:
    """Restriction of a trace on the target to the source."""
    weights = emb.inclusion.T @ np.asarray(trace.weights)
    return TraceState(emb.source, tuple(weights))


@dataclass(frozen=True, eq=False)
class ConditionalExpectation:
    """
    Trace-preserving conditional expectation of A onto the image of B.

    Attributes:
        inclusion: The embedding B -> A.
        trace: The trace on A.
        matrix: dim(B) x dim(A) map to coordinates of B.
    """

    inclusion: UnitalEmbedding
    trace: TraceState
    matrix: np.ndarray

    @cached_property
    def projector(self) -> np.ndarray:
        """The expectation as an idempotent on coordinates of A."""
        return self.inclusion.matrix @ self.matrix

    def __call__(self, x: AlgElem) -> AlgElem:
        return self.inclusion.source.from_vector(self.matrix @ x.vector)

    def project(self, x: AlgElem) -> AlgElem:
        return self.inclusion.target.from_vector(self.projector @ x.vector)


def conditional_expectation(
    emb: UnitalEmbedding, trace: TraceState, tol: Optional[float] = None
) -> ConditionalExpectation:
    """
    Orthogonal projection onto B for <x, y> = tr(x* y).

    Raises:
        SingularGram: If the Gram matrix of B's basis is numerically singular.
    """
    tol = resolve_tolerance(tol)
    if trace.parent.block_dims != emb.target.block_dims:
        raise InvalidInput("trace does not live on the target of the embedding", "trace")
    weighted = trace.gram_weights[:, None] * emb.matrix
    gram = emb.matrix.conj().T @ weighted
    eigenvalues = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
    if eigenvalues[0] <= tol * max(eigenvalues[-1], 1.0):
        raise SingularGram(f"Gram matrix of the subalgebra is singular (min eigenvalue {eigenvalues[0]:.3g})")
    matrix = np.linalg.solve(gram, weighted.conj().T)
    return ConditionalExpectation(emb, trace, matrix)


def relative_commutant(emb: UnitalEmbedding, tol: Optional[float] = None) -> "Subalgebra":
    """
    The commutant of the image of B inside A.

    Solves x i(b) = i(b) x for every matrix unit b of B.
    """
    from .presentation import Subalgebra

    tol = resolve_tolerance(tol)
    source, target = emb.source, emb.target
    equations = []
    for k in range(source.dim):
        image = emb.matrix[:, k]
        equations.append(target.right_multiplication(image) - target.left_multiplication(image))
    basis = null_space(np.vstack(equations), tol)
    logger.debug(f"relative commutant of {source} in {target} has dimension {basis.shape[1]}")
    return Subalgebra(target, basis)


@dataclass(frozen=True, eq=False)
class WatataniIndex:
    """
    Watatani index of a trace on A, a central element with value c_b on block b.

    Attributes:
        values: Closed form n_b / t_b.
        oracle_values: Values read off the quasi-basis sum.
        is_scalar: Whether all values agree.
        scalar: The common value when scalar.
        discrepancy: Max difference between closed form and quasi-basis sum.
    """

    values: np.ndarray
    oracle_values: np.ndarray
    is_scalar: bool
    scalar: Optional[float]
    discrepancy: float


def watatani_index(trace: TraceState, tol: Optional[float] = None, seed: Optional[int] = None) -> WatataniIndex:
    """
    Index of tr: A -> C, both in closed form and as the sum of lambda lambda* over
    an orthonormal basis obtained by Gram-Schmidt from a seeded random basis.
    """
    from .bases import gram_schmidt_onb

    tol = resolve_tolerance(tol)
    algebra = trace.parent
    values = np.asarray(algebra.block_dims, dtype=float) / np.asarray(trace.weights)

    total = np.zeros(algebra.dim, dtype=complex)
    for element in gram_schmidt_onb(trace, seed).elements:
        total += algebra.multiply(element.vector, algebra.star(element.vector))
    oracle = np.array([np.trace(block).real / n for block, n in zip(algebra.split(total), algebra.block_dims)])
    central = algebra.join([v * np.eye(n) for v, n in zip(oracle, algebra.block_dims)])
    discrepancy = max(max_abs(values - oracle), max_abs(total - central))

    spread = float(values.max() - values.min())
    is_scalar = spread <= tol * max(1.0, float(values.max()))
    return WatataniIndex(
        values=values,
        oracle_values=oracle,
        is_scalar=is_scalar,
        scalar=float(values.mean()) if is_scalar else None,
        discrepancy=discrepancy,
    )


def standard_embedding(
    source: MMAlgebra, multiplicities: Sequence[Sequence[int]], target: Optional[MMAlgebra] = None
) -> UnitalEmbedding:
    """
    Block-diagonal embedding with the given multiplicity matrix.

    Block i of the target receives, down its diagonal, multiplicities[i][j]
    copies of block j of the source, for j in order.
    """
    lam = _as_matrix(multiplicities)
    if lam.shape[1] != source.num_blocks:
        raise InvalidInput(f"multiplicity matrix needs {source.num_blocks} columns", "matrix")
    dims = tuple(int(n) for n in lam @ np.asarray(source.block_dims))
    target = target or MMAlgebra(dims)
    if target.block_dims != dims:
        raise NotUnital(f"multiplicities {lam.tolist()} give blocks {dims}, not {target.block_dims}")
    matrix = np.zeros((target.dim, source.dim), dtype=complex)
    for i in range(target.num_blocks):
        start = 0
        for j in range(source.num_blocks):
            n = source.block_dims[j]
            for _ in range(lam[i, j]):
                for p in range(n):
                    for q in range(n):
                        matrix[target.index(i, start + p, start + q), source.index(j, p, q)] = 1.0
                start += n
    return UnitalEmbedding(source, target, matrix)


def scalar_embedding(target: MMAlgebra) -> UnitalEmbedding:
    """C inside A as multiples of the unit."""
    return UnitalEmbedding(MMAlgebra((1,), "C"), target, target.unit_vector()[:, None])


def identity_embedding(algebra: MMAlgebra) -> UnitalEmbedding:
    return UnitalEmbedding(algebra, algebra, np.eye(algebra.dim, dtype=complex))


def compose(first: UnitalEmbedding, second: UnitalEmbedding) -> UnitalEmbedding:
    """The embedding B -> C obtained from B -> A followed by A -> C."""
    if first.target.block_dims != second.source.block_dims:
        raise IncompatibleTower(f"cannot stack {first.target} under {second.source}")
    return UnitalEmbedding(first.source, second.target, second.matrix @ first.matrix)


def conjugate(emb: UnitalEmbedding, unitary: AlgElem, tol: Optional[float] = None) -> UnitalEmbedding:
    """The embedding x -> u i(x) u*."""
    if not unitary.is_unitary(tol):
        raise NotUnitary("conjugating element is not unitary")
    target = emb.target
    u = unitary.vector
    ad = target.left_multiplication(u) @ target.right_multiplication(target.star(u))
    return UnitalEmbedding(emb.source, target, ad @ emb.matrix)


def random_unitary(algebra: MMAlgebra, seed: Optional[int] = None) -> AlgElem:
    """Haar-random unitary, blockwise QR of a complex Gaussian matrix."""
    rng = make_rng(seed)
    blocks = []
    for n in algebra.block_dims:
        z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
        q, r = np.linalg.qr(z)
        d = np.diag(r)
        blocks.append(q * (d / np.abs(d)))
    return AlgElem(algebra, tuple(blocks))


def tensor_product(first: MMAlgebra, second: MMAlgebra) -> MMAlgebra:
    """A (x) B with blocks ordered (i, j) with i over A outermost."""
    dims = tuple(n * m for n in first.block_dims for m in second.block_dims)
    label = f"{first.label or first}(x){second.label or second}"
    return MMAlgebra(dims, label)


def tensor_elements(x: AlgElem, y: AlgElem) -> AlgElem:
    algebra = tensor_product(x.parent, y.parent)
    return AlgElem(algebra, tuple(np.kron(a, b) for a in x.blocks for b in y.blocks))


def tensor_embedding(first: UnitalEmbedding, second: UnitalEmbedding) -> UnitalEmbedding:
    """B1 (x) B2 inside A1 (x) A2."""
    source = tensor_product(first.source, second.source)
    target = tensor_product(first.target, second.target)
    matrix = np.zeros((target.dim, source.dim), dtype=complex)
    b1, b2 = first.source, second.source
    for i, n in enumerate(b1.block_dims):
        for j, m in enumerate(b2.block_dims):
            block = i * b2.num_blocks + j
            for p in range(n):
                for pp in range(n):
                    left = first(b1.from_vector(b1.basis_vector(b1.index(i, p, pp))))
                    for q in range(m):
                        for qq in range(m):
                            right = second(b2.from_vector(b2.basis_vector(b2.index(j, q, qq))))
                            column = source.index(block, p * m + q, pp * m + qq)
                            matrix[:, column] = tensor_elements(left, right).vector
    return UnitalEmbedding(source, target, matrix)


def tensor_legs(first: MMAlgebra, second: MMAlgebra) -> Tuple[UnitalEmbedding, UnitalEmbedding]:
    """The embeddings x -> x (x) 1 and y -> 1 (x) y."""
    left = tensor_embedding(identity_embedding(first), scalar_embedding(second))
    right = tensor_embedding(scalar_embedding(first), identity_embedding(second))
    # A (x) C has the block structure and coordinates of A itself
    return (
        UnitalEmbedding(first, left.target, left.matrix),
        UnitalEmbedding(second, right.target, right.matrix),
    )


def product_trace(first: TraceState, second: TraceState) -> TraceState:
    algebra = tensor_product(first.parent, second.parent)
    return TraceState(algebra, tuple(s * t for s in first.weights for t in second.weights))


def trace_is_tracial(trace: TraceState, seed: Optional[int] = None, tol: Optional[float] = None) -> CheckResult:
    """Probe tr(xy) = tr(yx) on random pairs."""
    tol = resolve_tolerance(tol)
    rng = make_rng(seed)
    algebra = trace.parent
    residual = 0.0
    for _ in range(HOMOMORPHISM_PROBES):
        x, y = algebra.random_vector(rng), algebra.random_vector(rng)
        residual = max(residual, abs(trace(algebra.multiply(x, y)) - trace(algebra.multiply(y, x))))
    return CheckResult(residual <= tol * algebra.dim, residual)
