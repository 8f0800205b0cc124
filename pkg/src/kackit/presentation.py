"""
Abstract finite-dimensional *-algebras given by structure constants.

Crossed products, duals of weak Kac algebras and subalgebras all arrive in
this form. wedderburn() turns a presentation with a faithful trace back into
a multi-matrix algebra together with an explicit *-isomorphism.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

import numpy as np

from .base import AlgebraLike, AxiomReport, CheckResult
from .constants import WEDDERBURN_MAX_ATTEMPTS
from .exceptions import InvalidInput, NotSemisimple, NumericalDegeneracy
from .fdca import MMAlgebra, TraceState, UnitalEmbedding
from .utils import (
    cluster_sorted,
    is_perfect_square,
    make_rng,
    max_abs,
    null_space,
    resolve_tolerance,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StarAlgebraPresentation:
    """
    A *-algebra on C^d.

    Attributes:
        structure: Tensor m with e_i e_j = sum_l m[i, j, l] e_l.
        unit: Coordinates of the unit.
        involution: Matrix S with coordinates(x*) = S conj(coordinates(x)).
        trace: Optional functional f with tr(x) = f . x.
        label: Free-form name.
    """

    structure: np.ndarray
    unit: np.ndarray
    involution: np.ndarray
    trace: Optional[np.ndarray] = None
    label: str = field(default="")

    def __post_init__(self) -> None:
        structure = np.asarray(self.structure, dtype=complex)
        if structure.ndim != 3 or len(set(structure.shape)) != 1:
            raise InvalidInput(f"structure tensor must be d x d x d, got {structure.shape}", "m")
        d = structure.shape[0]
        unit = np.asarray(self.unit, dtype=complex).reshape(-1)
        involution = np.asarray(self.involution, dtype=complex)
        if unit.shape != (d,):
            raise InvalidInput(f"unit must have {d} coordinates", "unit")
        if involution.shape != (d, d):
            raise InvalidInput(f"involution must be {d} x {d}", "star")
        object.__setattr__(self, "structure", structure)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "involution", involution)
        if self.trace is not None:
            trace = np.asarray(self.trace, dtype=complex).reshape(-1)
            if trace.shape != (d,):
                raise InvalidInput(f"trace must have {d} coordinates", "trace")
            object.__setattr__(self, "trace", trace)

    @property
    def dim(self) -> int:
        return int(self.structure.shape[0])

    def multiply(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("...i,...j,ijl->...l", u, v, self.structure)

    def star(self, u: np.ndarray) -> np.ndarray:
        return np.conj(u) @ self.involution.T

    def unit_vector(self) -> np.ndarray:
        return self.unit.copy()

    def left_multiplication(self, u: np.ndarray) -> np.ndarray:
        """Matrix of y -> u y."""
        return np.einsum("i,ijl->lj", u, self.structure)

    def right_multiplication(self, u: np.ndarray) -> np.ndarray:
        """Matrix of y -> y u."""
        return np.einsum("j,ijl->li", u, self.structure)

    @cached_property
    def trace_functional(self) -> np.ndarray:
        """The attached trace, or the normalized trace of the left regular representation."""
        if self.trace is not None:
            return self.trace
        return np.einsum("jii->j", self.structure) / self.dim

    def with_trace(self, trace: np.ndarray) -> "StarAlgebraPresentation":
        return StarAlgebraPresentation(self.structure, self.unit, self.involution, trace, self.label)

    def gram(self) -> np.ndarray:
        """Matrix of <x, y> = tr(x* y) on basis vectors."""
        return np.einsum("ki,kjl,l->ij", self.involution, self.structure, self.trace_functional)

    def check_axioms(self, tol: Optional[float] = None) -> AxiomReport:
        """Associativity, unit laws, involution laws and faithfulness of the trace form."""
        tol = resolve_tolerance(tol)
        m = self.structure
        eye = np.eye(self.dim, dtype=complex)
        left = np.einsum("ija,akl->ijkl", m, m)
        right = np.einsum("jkb,ibl->ijkl", m, m)
        unit_left = self.multiply(self.unit[None, :], eye) - eye
        unit_right = self.multiply(eye, self.unit[None, :]) - eye
        involutive = self.involution @ np.conj(self.involution) - eye
        products_star = self.star(m)
        stars = self.involution.T
        anti = products_star - self.multiply(stars[None, :, :], stars[:, None, :])
        gram = self.gram()
        hermitian = max_abs(gram - gram.conj().T)
        eigenvalues = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
        residuals = {
            "associativity": max_abs(left - right),
            "unit": max(max_abs(unit_left), max_abs(unit_right)),
            "involutive": max_abs(involutive),
            "anti_multiplicative": max_abs(anti),
            "trace_hermitian": hermitian,
        }
        flags = {"trace_positive": bool(eigenvalues[0] > tol * max(eigenvalues[-1], 1.0))}
        return AxiomReport(residuals, tol, flags)


def _closure_residual(ambient: AlgebraLike, basis: np.ndarray) -> float:
    rows = basis.T
    products = ambient.multiply(rows[:, None, :], rows[None, :, :])
    outside = products - (products @ np.conj(basis)) @ basis.T
    stars = ambient.star(rows)
    star_outside = stars - (stars @ np.conj(basis)) @ basis.T
    unit = ambient.unit_vector()
    unit_outside = unit - basis @ (basis.conj().T @ unit)
    return max(max_abs(outside), max_abs(star_outside), max_abs(unit_outside))


@dataclass(frozen=True, eq=False)
class Subalgebra:
    """
    A unital *-subalgebra given by orthonormal basis columns in ambient coordinates.

    Attributes:
        ambient: A multi-matrix algebra or a presentation.
        basis: d x r matrix with orthonormal columns.
    """

    ambient: Union[MMAlgebra, StarAlgebraPresentation]
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def coordinates(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u) @ np.conj(self.basis)

    def is_star_subalgebra(self, tol: Optional[float] = None) -> CheckResult:
        """Closure under product and involution, and containment of the unit."""
        tol = resolve_tolerance(tol)
        residual = _closure_residual(self.ambient, self.basis) if self.dim else math.inf
        return CheckResult(residual <= math.sqrt(tol), residual)

    def to_presentation(self) -> StarAlgebraPresentation:
        rows = self.basis.T
        products = self.ambient.multiply(rows[:, None, :], rows[None, :, :])
        structure = self.coordinates(products)
        involution = self.coordinates(self.ambient.star(rows)).T
        trace = None
        if isinstance(self.ambient, StarAlgebraPresentation) and self.ambient.trace is not None:
            trace = self.ambient.trace @ self.basis
        return StarAlgebraPresentation(
            structure=structure,
            unit=self.coordinates(self.ambient.unit_vector()),
            involution=involution,
            trace=trace,
        )

    def decompose(self, tol: Optional[float] = None, seed: Optional[int] = None) -> "WedderburnDecomposition":
        return wedderburn(self.to_presentation(), tol, seed)

    def embedding(self, tol: Optional[float] = None, seed: Optional[int] = None) -> UnitalEmbedding:
        """The subalgebra as a multi-matrix algebra embedded in its ambient algebra."""
        if not isinstance(self.ambient, MMAlgebra):
            raise InvalidInput("embedding needs a multi-matrix ambient algebra", "ambient")
        decomposition = self.decompose(tol, seed)
        return UnitalEmbedding(decomposition.algebra, self.ambient, self.basis @ decomposition.iso)


def center(presentation: StarAlgebraPresentation, tol: Optional[float] = None) -> np.ndarray:
    """Orthonormal basis (columns) of the center."""
    tol = resolve_tolerance(tol)
    m = presentation.structure
    # Row block k encodes e_k x - x e_k
    equations = np.einsum("kjl->klj", m) - np.einsum("ikl->kli", m)
    return null_space(equations.reshape(-1, presentation.dim), tol)


@dataclass(frozen=True, eq=False)
class WedderburnDecomposition:
    """
    A *-isomorphism from a multi-matrix algebra onto a presentation.

    Attributes:
        algebra: Blocks in ascending order.
        iso: Presentation coordinates of each matrix unit, column per coordinate.
        inverse: Inverse of iso.
        residual: Max deviation from multiplicativity and *-preservation.
        presentation: The decomposed presentation.
    """

    algebra: MMAlgebra
    iso: np.ndarray
    inverse: np.ndarray
    residual: float
    presentation: StarAlgebraPresentation

    def trace_state(self) -> TraceState:
        """The presentation's trace transported to the multi-matrix algebra."""
        f = self.presentation.trace_functional
        weights = [float(np.real(f @ self.iso[:, self.algebra.index(b, 0, 0)])) for b in range(self.algebra.num_blocks)]
        return TraceState.from_weights(self.algebra, weights)


class _SplitFailure(Exception):
    pass


def _clusters(hermitian: np.ndarray, tol: float) -> tuple:
    values, vectors = np.linalg.eigh((hermitian + hermitian.conj().T) / 2)
    scale = max(max_abs(values), 1.0)
    gap = math.sqrt(tol) * scale
    return cluster_sorted(values, gap), vectors


def _split_once(
    presentation: StarAlgebraPresentation,
    chol: np.ndarray,
    chol_inv: np.ndarray,
    central: np.ndarray,
    rng: np.random.Generator,
    tol: float,
) -> tuple:
    d = presentation.dim
    gram = chol.conj().T @ chol
    unit = presentation.unit

    def inner(u: np.ndarray, v: np.ndarray) -> complex:
        return complex(np.conj(u) @ gram @ v)

    def orthonormal_operator(u: np.ndarray) -> np.ndarray:
        return chol @ presentation.left_multiplication(u) @ chol_inv

    coefficients = rng.standard_normal(central.shape[1]) + 1j * rng.standard_normal(central.shape[1])
    z = central @ coefficients
    z = (z + presentation.star(z)) / 2
    clusters, vectors = _clusters(orthonormal_operator(z), tol)
    if len(clusters) != central.shape[1]:
        raise _SplitFailure(f"central element separated {len(clusters)} of {central.shape[1]} blocks")

    ideals = []
    for cluster in clusters:
        if not is_perfect_square(len(cluster)):
            raise _SplitFailure(f"ideal of dimension {len(cluster)} is not a full matrix block")
        ideals.append(vectors[:, cluster])
    ideals.sort(key=lambda q: q.shape[1])

    columns = []
    dims = []
    for q in ideals:
        n = math.isqrt(q.shape[1])
        dims.append(n)
        p = chol_inv @ (q @ (q.conj().T @ (chol @ unit)))
        h = chol_inv @ (q @ (rng.standard_normal(q.shape[1]) + 1j * rng.standard_normal(q.shape[1])))
        h = (h + presentation.star(h)) / 2
        restricted = q.conj().T @ orthonormal_operator(h) @ q
        sub_clusters, sub_vectors = _clusters(restricted, tol)
        if len(sub_clusters) != n or any(len(c) != n for c in sub_clusters):
            raise _SplitFailure(f"could not find {n} minimal projections")
        minimal = []
        for cluster in sub_clusters:
            eigenspace = q @ sub_vectors[:, cluster]
            minimal.append(chol_inv @ (eigenspace @ (eigenspace.conj().T @ (chol @ p))))

        a = chol_inv @ (q @ (rng.standard_normal(q.shape[1]) + 1j * rng.standard_normal(q.shape[1])))
        first_row = [minimal[0]]
        norm = inner(minimal[0], minimal[0]).real
        for k in range(1, n):
            x = presentation.multiply(presentation.multiply(minimal[0], a), minimal[k])
            c = inner(minimal[0], presentation.multiply(x, presentation.star(x))).real / norm
            if c <= tol:
                raise _SplitFailure("random element has a vanishing off-diagonal corner")
            first_row.append(x / math.sqrt(c))
        first_column = [presentation.star(e) for e in first_row]
        first_column[0] = minimal[0]
        for j in range(n):
            for k in range(n):
                columns.append(presentation.multiply(first_column[j], first_row[k]) if j or k else minimal[0])

    algebra = MMAlgebra(tuple(dims), presentation.label)
    iso = np.array(columns).T
    if iso.shape != (d, d):
        raise _SplitFailure("block sizes do not add up to the dimension")
    return algebra, iso


def _iso_residual(
    presentation: StarAlgebraPresentation, algebra: MMAlgebra, iso: np.ndarray, rng: np.random.Generator
) -> float:
    x, y = algebra.random_vector(rng), algebra.random_vector(rng)
    px, py = iso @ x, iso @ y
    scale = max(1.0, max_abs(px) * max_abs(py))
    product = max_abs(iso @ algebra.multiply(x, y) - presentation.multiply(px, py)) / scale
    star = max_abs(iso @ algebra.star(x) - presentation.star(px)) / max(1.0, max_abs(px))
    unit = max_abs(iso @ algebra.unit_vector() - presentation.unit)
    return max(product, star, unit)


def wedderburn(
    presentation: StarAlgebraPresentation, tol: Optional[float] = None, seed: Optional[int] = None
) -> WedderburnDecomposition:
    """
    Decompose a semisimple *-algebra into full matrix blocks.

    Central projections come from the eigenspaces of a random self-adjoint
    central element, minimal projections from a random self-adjoint element of
    each block, and matrix units from corners of a random element. All spectral
    work happens in coordinates orthonormal for the trace form, where
    self-adjoint elements act by Hermitian matrices.

    Args:
        presentation: The algebra; its canonical trace is used if none is attached.
        tol: Numerical tolerance.
        seed: Seed for the random elements.

    Returns:
        WedderburnDecomposition with blocks sorted ascending.

    Raises:
        NotSemisimple: If the trace form is singular.
        NumericalDegeneracy: If splitting fails on every attempt.
    """
    tol = resolve_tolerance(tol)
    gram = presentation.gram()
    gram = (gram + gram.conj().T) / 2
    eigenvalues = np.linalg.eigvalsh(gram)
    if eigenvalues[0] <= tol * max(eigenvalues[-1], 1.0):
        raise NotSemisimple(f"trace form is degenerate (min eigenvalue {eigenvalues[0]:.3g})")
    chol = np.linalg.cholesky(gram).conj().T
    chol_inv = np.linalg.inv(chol)
    central = center(presentation, tol)
    rng = make_rng(seed)

    for attempt in range(1, WEDDERBURN_MAX_ATTEMPTS + 1):
        try:
            algebra, iso = _split_once(presentation, chol, chol_inv, central, rng, tol)
        except _SplitFailure as e:
            logger.warning(f"Wedderburn attempt {attempt} failed: {e}")
            continue
        residual = _iso_residual(presentation, algebra, iso, rng)
        if residual > math.sqrt(tol):
            logger.warning(f"Wedderburn attempt {attempt} gave residual {residual:.3g}")
            continue
        logger.debug(f"decomposed {presentation.dim}-dimensional algebra as {algebra}")
        return WedderburnDecomposition(algebra, iso, np.linalg.inv(iso), residual, presentation)
    raise NumericalDegeneracy(f"block splitting failed after {WEDDERBURN_MAX_ATTEMPTS} attempts at tolerance {tol}")
