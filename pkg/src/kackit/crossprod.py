"""
Actions of weak Hopf *-algebras on finite-dimensional algebras and crossed products.

An action is stored as a tensor T with T[a, x, :] the coordinates of
b_a |> m_x. The crossed product is built on M (x) A, indexed x * dim(A) + a,
modulo the span of x (z |> 1) (x) a - x (x) z a over a basis of A_t.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .base import AxiomReport
from .exceptions import ActionNotVerified, InvalidInput, QuotientRankInstability
from .fdca import MMAlgebra
from .presentation import StarAlgebraPresentation, Subalgebra
from .utils import max_abs, null_space, resolve_tolerance, same_span
from .wha import Certification, WHAStructure, certify, counital_maps, counital_subalgebras

logger = logging.getLogger(__name__)

Target = Union[MMAlgebra, StarAlgebraPresentation]


def _as_presentation(target: Target) -> StarAlgebraPresentation:
    if isinstance(target, MMAlgebra):
        return target.as_presentation()
    return target


@dataclass(frozen=True, eq=False)
class ActionData:
    """
    A bilinear map A (x) M -> M.

    Attributes:
        acting: The weak Hopf algebra A.
        target: The algebra M.
        tensor: T[a, x, y], coefficient of m_y in b_a |> m_x.
    """

    acting: WHAStructure
    target: Target
    tensor: np.ndarray
    label: str = field(default="")

    def __post_init__(self) -> None:
        tensor = np.asarray(self.tensor, dtype=complex)
        expected = (self.acting.dim, self.target.dim, self.target.dim)
        if tensor.shape != expected:
            raise InvalidInput(f"action tensor must have shape {expected}, got {tensor.shape}", "tensor")
        object.__setattr__(self, "tensor", tensor)

    @cached_property
    def presentation(self) -> StarAlgebraPresentation:
        return _as_presentation(self.target)

    def act(self, a: np.ndarray, x: np.ndarray) -> np.ndarray:
        return np.einsum("a,x,axy->y", a, x, self.tensor)

    @cached_property
    def on_unit(self) -> np.ndarray:
        """Row a holds b_a |> 1."""
        return np.einsum("x,axy->ay", self.presentation.unit, self.tensor)


def verify_action(action: ActionData, tol: Optional[float] = None) -> AxiomReport:
    """
    Module laws, a |> xy = (a_1 |> x)(a_2 |> y), (a |> x)* = S(a)* |> x* and
    a |> 1 = eps_t(a) |> 1 read literally, with the kernel condition
    "a |> 1 = 0 iff eps_t(a) = 0" as a flag.
    """
    tol = resolve_tolerance(tol)
    w, T = action.acting, action.tensor
    mA, D, S, StA = w.algebra.structure, w.delta, w.antipode, w.algebra.involution
    target = action.presentation
    mM, StM = target.structure, target.involution

    unit = np.einsum("a,axy->xy", w.algebra.unit, T) - np.eye(target.dim)
    nested = np.einsum("bxy,ayz->abxz", T, T, optimize=True)
    product_first = np.einsum("abc,cxz->abxz", mA, T)

    act_on_product = np.einsum("xyz,azw->axyw", mM, T)
    split_action = np.einsum("ija,ixp,jyq,pqw->axyw", D, T, T, mM, optimize=True)

    star_of_action = np.einsum("yw,axw->axy", StM, np.conj(T))
    antipode_star = StA @ np.conj(S)
    action_of_star = np.einsum("ca,wx,cwy->axy", antipode_star, StM, T, optimize=True)

    maps = counital_maps(w)
    on_unit = action.on_unit
    literal = on_unit - maps.target.T @ on_unit
    kernel_match = same_span(null_space(on_unit.T, tol), null_space(maps.target, tol), tol)
    literal_ok = max_abs(literal) <= tol

    residuals = {
        "unit": max_abs(unit),
        "module": max_abs(nested - product_first),
        "multiplicative": max_abs(act_on_product - split_action),
        "star": max_abs(star_of_action - action_of_star),
        "counital_literal": max_abs(literal),
    }
    flags = {"counital_kernel": kernel_match, "readings_agree": literal_ok == kernel_match}
    if literal_ok != kernel_match:
        logger.info(
            f"counital condition holds {'literally' if literal_ok else 'only on kernels'} "
            f"for {action.label or 'action'}"
        )
    return AxiomReport(residuals, tol, flags)


@dataclass(frozen=True, eq=False)
class CrossedProductData:
    """
    The crossed product M x| A with its quotient bookkeeping.

    Attributes:
        action: The defining action.
        result: The crossed product as a presentation.
        quotient_basis: Pairs (x, a) whose classes form the basis of the result.
        projection: Matrix of M (x) A -> result.
        embed_M: Columns are the images of [m_x (x) 1].
        embed_A: Columns are the images of [1 (x) b_a].
        relation_rank: Dimension of the relation span.
        residual: Largest image of a relation under product or involution.
    """

    action: ActionData
    result: StarAlgebraPresentation
    quotient_basis: Tuple[Tuple[int, int], ...]
    projection: np.ndarray
    embed_M: np.ndarray
    embed_A: np.ndarray
    relation_rank: int
    residual: float

    @property
    def dim(self) -> int:
        return self.result.dim

    def covariance_residual(self) -> float:
        """Deviation from [1 (x) a][x (x) 1] = [(a_1 |> x) (x) a_2] on basis pairs."""
        w, T = self.action.acting, self.action.tensor
        dM, dA = self.action.target.dim, w.dim
        left = self.result.multiply(self.embed_A.T[:, None, :], self.embed_M.T[None, :, :])
        pairs = np.einsum("ija,ixp->axpj", w.delta, T).reshape(dA, dM, dM * dA)
        right = pairs @ self.projection.T
        return max_abs(left - right)

    def embedding_residual(self) -> float:
        """How far x -> [x (x) 1] is from a unital *-homomorphism."""
        target = self.action.presentation
        images = self.embed_M.T
        products = self.result.multiply(images[:, None, :], images[None, :, :])
        expected = np.einsum("xyz,wz->xyw", target.structure, self.embed_M)
        star = self.result.star(images) - (self.embed_M @ target.involution).T
        unit = self.embed_M @ target.unit - self.result.unit
        return max(max_abs(products - expected), max_abs(star), max_abs(unit))


def _require_verified(action: ActionData, tol: float) -> None:
    w = certify(action.acting, tol)
    if not w.at_least(Certification.WEAK_HOPF):
        raise ActionNotVerified(f"acting structure is only certified as {w.status.value}")
    report = verify_action(action, tol)
    if not report:
        raise ActionNotVerified(f"action fails {', '.join(report.failures)}")


def _relation_span(action: ActionData, tol: float) -> np.ndarray:
    """Orthonormal columns spanning the relations x (z |> 1) (x) a - x (x) z a."""
    w = action.acting
    target = action.presentation
    dM, dA = target.dim, w.dim
    at, _ = counital_subalgebras(w, tol)
    z = at.basis
    z_on_unit = z.T @ action.on_unit
    x_times = np.einsum("xpq,rp->rxq", target.structure, z_on_unit)
    z_times = np.einsum("cr,cab->rab", z, w.algebra.structure)
    relations = np.einsum("rxq,ab->rxaqb", x_times, np.eye(dA)) - np.einsum("xq,rab->rxaqb", np.eye(dM), z_times)
    relations = relations.reshape(-1, dM * dA)
    if max_abs(relations) == 0.0:
        return np.zeros((dM * dA, 0), dtype=complex)
    _, s, vh = np.linalg.svd(relations)
    rank = int(np.sum(s > tol * s[0]))
    ambiguous = int(np.sum((s > tol * s[0]) & (s <= math.sqrt(tol) * s[0])))
    if ambiguous:
        raise QuotientRankInstability(
            f"{ambiguous} singular values of the relation span lie between "
            f"{tol:.1e} and {math.sqrt(tol):.1e} of the largest"
        )
    logger.debug(f"relation span has rank {rank} in {dM * dA} dimensions")
    return vh[:rank].T


def crossed_product(action: ActionData, tol: Optional[float] = None) -> CrossedProductData:
    """
    Build M x| A as a presentation with [x (x) a][y (x) b] = [x (a_1 |> y) (x) a_2 b]
    and [x (x) a]* = [(a_1* |> x*) (x) a_2*].

    Raises:
        ActionNotVerified: If the acting structure or the action fails verification.
        QuotientRankInstability: If the relation rank is tolerance-ambiguous.
    """
    tol = resolve_tolerance(tol)
    _require_verified(action, tol)
    w, T = action.acting, action.tensor
    target = action.presentation
    mA, D, StA = w.algebra.structure, w.delta, w.algebra.involution
    mM, StM = target.structure, target.involution
    dM, dA = target.dim, w.dim
    dV = dM * dA

    relations = _relation_span(action, tol)
    complement = np.eye(dV) - relations @ relations.conj().T
    quotient_dim = dV - relations.shape[1]
    _, _, pivots = scipy.linalg.qr(complement, pivoting=True)
    representatives = sorted(int(p) for p in pivots[:quotient_dim])
    projection = np.linalg.pinv(complement[:, representatives]) @ complement

    product = np.einsum("ija,iyp,xpw,jbc->xaybwc", D, T, mM, mA, optimize=True).reshape(dV, dV, dV)
    involution = np.einsum("ija,ci,wx,cwp,qj->pqxa", np.conj(D), StA, StM, T, StA, optimize=True).reshape(dV, dV)

    structure = product[np.ix_(representatives, representatives)] @ projection.T
    star = projection @ involution[:, representatives]
    unit = projection @ np.kron(target.unit, w.algebra.unit)

    residual = 0.0
    if relations.shape[1]:
        left = np.einsum("iv,ijw->vjw", relations, product, optimize=True) @ projection.T
        right = np.einsum("jv,ijw->ivw", relations, product, optimize=True) @ projection.T
        starred = projection @ involution @ np.conj(relations)
        residual = max(max_abs(left), max_abs(right), max_abs(starred))
    if residual > math.sqrt(tol):
        logger.warning(f"crossed product formulas move relations by {residual:.3g}")

    result = StarAlgebraPresentation(structure, unit, star, label=f"{target.label or 'M'} x| {w.label or 'A'}")
    embed_M = projection @ np.kron(np.eye(dM), w.algebra.unit[:, None])
    embed_A = projection @ np.kron(target.unit[:, None], np.eye(dA))
    basis = tuple((r // dA, r % dA) for r in representatives)
    logger.debug(f"crossed product of dimension {len(basis)} from {dM} x {dA}")
    return CrossedProductData(action, result, basis, projection, embed_M, embed_A, relations.shape[1], residual)


@dataclass(frozen=True)
class MinimalityReport:
    """A' in (M x| A) against the embedded A_s, both as orthonormal columns."""

    minimal: bool
    commutant: np.ndarray
    source: np.ndarray

    def __bool__(self) -> bool:
        return self.minimal

    def to_dict(self) -> Dict[str, Any]:
        return {"minimal": self.minimal, "commutant_dim": self.commutant.shape[1], "source_dim": self.source.shape[1]}


def minimality_check(cp: CrossedProductData, tol: Optional[float] = None) -> MinimalityReport:
    tol = resolve_tolerance(tol)
    result = cp.result
    equations = np.vstack([result.left_multiplication(e) - result.right_multiplication(e) for e in cp.embed_A.T])
    commutant = null_space(equations, tol)
    _, source = counital_subalgebras(cp.action.acting, tol)
    embedded = cp.embed_A @ source.basis
    minimal = same_span(commutant, embedded, tol)
    logger.debug(f"relative commutant has dimension {commutant.shape[1]}, A_s has {source.dim}")
    return MinimalityReport(minimal, commutant, embedded)


def fixed_points(action: ActionData, tol: Optional[float] = None) -> Subalgebra:
    """{x in M : a |> x = eps_t(a) |> x for every basis element a}."""
    tol = resolve_tolerance(tol)
    T = action.tensor
    maps = counital_maps(action.acting)
    projected = np.einsum("ca,cxy->axy", maps.target, T)
    equations = np.transpose(T - projected, (0, 2, 1)).reshape(-1, action.target.dim)
    fixed = Subalgebra(action.target, null_space(equations, tol))
    check = fixed.is_star_subalgebra(tol)
    if not check:
        logger.warning(f"fixed points are not a unital *-subalgebra (residual {check.residual:.3g})")
    return fixed


def group_action(acting: WHAStructure, target: Target, maps: Sequence[np.ndarray]) -> ActionData:
    """
    Action of a group algebra by linear maps of M, one per group element,
    given as matrices on coordinates of M.
    """
    matrices = [np.asarray(g, dtype=complex) for g in maps]
    if len(matrices) != acting.dim:
        raise InvalidInput(f"need {acting.dim} maps, got {len(matrices)}", "maps")
    return ActionData(acting, target, np.stack([g.T for g in matrices]), "group action")


def inner_action(acting: WHAStructure, target: MMAlgebra, elements: Sequence[np.ndarray]) -> ActionData:
    """b_a |> x = g_a x g_a^{-1} for invertible elements g_a given as coordinate vectors."""
    maps = []
    for g in elements:
        blocks = target.split(np.asarray(g, dtype=complex))
        inverse = target.join([np.linalg.inv(b) for b in blocks])
        maps.append(target.left_multiplication(g) @ target.right_multiplication(inverse))
    return group_action(acting, target, maps)


def trivial_action(acting: WHAStructure, target: Target) -> ActionData:
    """b_a |> x = eps(b_a) x."""
    tensor = np.einsum("a,xy->axy", acting.counit, np.eye(target.dim))
    return ActionData(acting, target, tensor, "trivial action")


def counital_action(acting: WHAStructure, tol: Optional[float] = None) -> ActionData:
    """The action a |> z = eps_t(a z) on A_t."""
    tol = resolve_tolerance(tol)
    at, _ = counital_subalgebras(acting, tol)
    maps = counital_maps(acting)
    products = np.einsum("jx,ajl->axl", at.basis, acting.algebra.structure)
    tensor = at.coordinates(products @ maps.target.T)
    return ActionData(acting, at.to_presentation(), tensor, "counital action")
