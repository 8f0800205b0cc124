"""
Commuting squares of finite-dimensional algebras.

All four corners are stored as embeddings into the top-right corner M:

    K  ->  M
    ^      ^
    N  ->  L
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Optional

import numpy as np

from .base import CheckResult
from .bases import BasisSide, PPBasis, verify_right_basis
from .exceptions import (
    DegenerateSquare,
    DisconnectedInclusion,
    InputNotBasis,
    InvalidSquare,
    NotCommutingSquare,
)
from .fdca import (
    AlgElem,
    MMAlgebra,
    TraceState,
    UnitalEmbedding,
    compose,
    conditional_expectation,
    conjugate,
    identity_embedding,
    is_connected,
    product_trace,
    random_unitary,
    restrict_trace,
    scalar_embedding,
    standard_embedding,
    tensor_embedding,
    tensor_legs,
    tensor_product,
)
from .utils import make_rng, max_abs, numerical_rank, resolve_tolerance

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CommutingSquareData:
    """
    A square of inclusions N in K, N in L, K in M, L in M with a trace on M.

    Raises:
        InvalidSquare: If the corners do not fit together or N -> K -> M and
            N -> L -> M disagree.
    """

    n_in_k: UnitalEmbedding
    n_in_l: UnitalEmbedding
    k_in_m: UnitalEmbedding
    l_in_m: UnitalEmbedding
    trace: TraceState

    def __post_init__(self) -> None:
        if self.n_in_k.source.block_dims != self.n_in_l.source.block_dims:
            raise InvalidSquare("the two legs start from different algebras", "n_in_l")
        if self.n_in_k.target.block_dims != self.k_in_m.source.block_dims:
            raise InvalidSquare("N -> K does not land where K -> M starts", "k_in_m")
        if self.n_in_l.target.block_dims != self.l_in_m.source.block_dims:
            raise InvalidSquare("N -> L does not land where L -> M starts", "l_in_m")
        if self.k_in_m.target.block_dims != self.l_in_m.target.block_dims:
            raise InvalidSquare("K and L embed into different algebras", "l_in_m")
        if self.trace.parent.block_dims != self.k_in_m.target.block_dims:
            raise InvalidSquare("trace does not live on M", "trace")
        via_k = self.k_in_m.matrix @ self.n_in_k.matrix
        via_l = self.l_in_m.matrix @ self.n_in_l.matrix
        if max_abs(via_k - via_l) > math.sqrt(resolve_tolerance()):
            raise InvalidSquare("N -> K -> M and N -> L -> M differ", "n_in_l")

    @property
    def ambient(self) -> MMAlgebra:
        return self.k_in_m.target

    @cached_property
    def n_in_m(self) -> UnitalEmbedding:
        return compose(self.n_in_k, self.k_in_m)

    def projector(self, corner: str, tol: Optional[float] = None) -> np.ndarray:
        """Conditional expectation of M onto a corner ('N', 'K' or 'L') on coordinates of M."""
        embeddings = {"N": self.n_in_m, "K": self.k_in_m, "L": self.l_in_m}
        return conditional_expectation(embeddings[corner], self.trace, tol).projector


@dataclass(frozen=True)
class SquareCheck(CheckResult):
    """Commuting-square verdict with the E_K E_L = E_N cross-check."""

    cross_residual: float = 0.0


def verify_commuting(square: CommutingSquareData, tol: Optional[float] = None) -> SquareCheck:
    """
    Check E_L(k) = E_N(k) on a basis of K and E_K(l) = E_N(l) on a basis of L.
    """
    tol = resolve_tolerance(tol)
    p_n, p_k, p_l = (square.projector(c, tol) for c in "NKL")
    residual = max(
        max_abs((p_l - p_n) @ square.k_in_m.matrix),
        max_abs((p_k - p_n) @ square.l_in_m.matrix),
    )
    cross = max_abs(p_k @ p_l - p_n)
    return SquareCheck(residual <= tol, residual, "E_L on K equals E_N", cross)


@dataclass(frozen=True)
class NondegeneracyCheck:
    passed: bool
    rank_lk: int
    rank_kl: int
    dim: int

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "rank_lk": self.rank_lk, "rank_kl": self.rank_kl, "dim": self.dim}


def verify_nondegenerate(square: CommutingSquareData, tol: Optional[float] = None) -> NondegeneracyCheck:
    """True iff span{l k} and span{k l} are all of M."""
    tol = resolve_tolerance(tol)
    algebra = square.ambient
    k_images = square.k_in_m.matrix.T
    l_images = square.l_in_m.matrix.T
    lk = algebra.multiply(l_images[:, None, :], k_images[None, :, :]).reshape(-1, algebra.dim)
    kl = algebra.multiply(k_images[:, None, :], l_images[None, :, :]).reshape(-1, algebra.dim)
    rank_lk, rank_kl = numerical_rank(lk, tol), numerical_rank(kl, tol)
    return NondegeneracyCheck(rank_lk == algebra.dim and rank_kl == algebra.dim, rank_lk, rank_kl, algebra.dim)


@dataclass(frozen=True)
class NormCriterion:
    """||Lambda||^2 of N in K against ||Gamma||^2 of L in M."""

    passed: bool
    lambda_norm_sq: float
    gamma_norm_sq: float

    def __bool__(self) -> bool:
        return self.passed


def nondegeneracy_by_norms(square: CommutingSquareData, tol: Optional[float] = None) -> NormCriterion:
    """
    Sufficient criterion for non-degeneracy: equal squared norms of the two
    vertical inclusion matrices.

    Raises:
        DisconnectedInclusion: If N in K or L in M is disconnected.
    """
    tol = resolve_tolerance(tol)
    lam, gamma = square.n_in_k.inclusion, square.l_in_m.inclusion
    for name, matrix in (("N in K", lam), ("L in M", gamma)):
        if not is_connected(matrix):
            raise DisconnectedInclusion(f"{name} has inclusion matrix {matrix.tolist()}, which is disconnected")
    lam_sq = float(np.linalg.norm(lam, 2) ** 2)
    gamma_sq = float(np.linalg.norm(gamma, 2) ** 2)
    return NormCriterion(abs(lam_sq - gamma_sq) <= tol * max(1.0, lam_sq), lam_sq, gamma_sq)


@dataclass(frozen=True, eq=False)
class TransferResult:
    basis: PPBasis
    check: CheckResult

    def __bool__(self) -> bool:
        return bool(self.check)


def popa_transfer(square: CommutingSquareData, basis: PPBasis, tol: Optional[float] = None) -> TransferResult:
    """
    Carry a right basis of K over N to a right basis of M over L.

    Raises:
        NotCommutingSquare: If the square does not commute.
        DegenerateSquare: If the square is degenerate.
        InputNotBasis: If the input is not a right basis of K over N for the
            trace restricted from M.
    """
    tol = resolve_tolerance(tol)
    if not verify_commuting(square, tol):
        raise NotCommutingSquare("conditional expectations of the square do not commute")
    if not verify_nondegenerate(square, tol):
        raise DegenerateSquare("span of L K is not all of M")
    same_legs = (
        basis.inclusion.source.block_dims == square.n_in_k.source.block_dims
        and basis.inclusion.target.block_dims == square.n_in_k.target.block_dims
    )
    if not same_legs or max_abs(basis.inclusion.matrix - square.n_in_k.matrix) > tol:
        raise InputNotBasis("basis does not describe the inclusion N in K of the square")
    restricted = PPBasis(square.n_in_k, restrict_trace(square.k_in_m, square.trace), basis.elements, BasisSide.RIGHT)
    if not verify_right_basis(restricted, tol):
        raise InputNotBasis("input is not a right basis of K over N")

    transferred = PPBasis(
        square.l_in_m,
        square.trace,
        tuple(square.k_in_m(x) for x in basis.elements),
        BasisSide.RIGHT,
        orthonormal=basis.orthonormal,
        unitary=basis.unitary,
    )
    check = verify_right_basis(transferred, tol)
    if not check:
        logger.warning(f"transferred basis failed verification (residual {check.residual:.3g})")
    return TransferResult(transferred, check)


def tensor_square(
    inclusion: UnitalEmbedding,
    factor: MMAlgebra,
    trace: TraceState,
    factor_trace: Optional[TraceState] = None,
    seed: Optional[int] = None,
) -> CommutingSquareData:
    """
    The square (N, 1 (x) K, P (x) N, P (x) K) for N in K and a factor algebra P.

    With a seed, the two upper embeddings are conjugated by a random unitary of M.
    """
    factor_trace = factor_trace or TraceState.canonical(factor)
    algebra = tensor_product(factor, inclusion.target)
    _, k_in_m = tensor_legs(factor, inclusion.target)
    l_in_m = tensor_embedding(identity_embedding(factor), inclusion)
    _, n_in_l = tensor_legs(factor, inclusion.source)
    square_trace = product_trace(factor_trace, trace)
    if seed is not None:
        unitary = random_unitary(algebra, seed)
        k_in_m, l_in_m = conjugate(k_in_m, unitary), conjugate(l_in_m, unitary)
    return CommutingSquareData(inclusion, n_in_l, k_in_m, l_in_m, square_trace)


def hadamard_square(U: np.ndarray, seed: Optional[int] = None) -> CommutingSquareData:
    """
    The square (C, D, U D U*, M_n) with D the diagonal of M_n.

    It commutes exactly when U is a multiple of a flat unitary. With a seed, U
    is first multiplied by random diagonal phases on both sides.
    """
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    if seed is not None:
        rng = make_rng(seed)
        left = np.exp(2j * np.pi * rng.random(n))
        right = np.exp(2j * np.pi * rng.random(n))
        U = left[:, None] * U * right[None, :]
    algebra = MMAlgebra.full(n)
    diagonal = MMAlgebra.commutative(n)
    k_in_m = standard_embedding(diagonal, [[1] * n], algebra)
    unitary = AlgElem(algebra, (U,))
    l_in_m = conjugate(k_in_m, unitary)
    return CommutingSquareData(
        scalar_embedding(diagonal),
        scalar_embedding(diagonal),
        k_in_m,
        l_in_m,
        TraceState.canonical(algebra),
    )


def degenerate_square(inclusion: UnitalEmbedding, trace: TraceState) -> CommutingSquareData:
    """The square (B, B, B, A) for B in A; it commutes and is degenerate unless B = A."""
    identity = identity_embedding(inclusion.source)
    return CommutingSquareData(identity, identity, inclusion, inclusion, trace)


def square_summary(square: CommutingSquareData, tol: Optional[float] = None) -> Dict[str, Any]:
    commuting = verify_commuting(square, tol)
    nondegenerate = verify_nondegenerate(square, tol)
    summary: Dict[str, Any] = {
        "commuting": commuting.passed,
        "commuting_residual": commuting.residual,
        "cross_residual": commuting.cross_residual,
        "nondegenerate": nondegenerate.passed,
        "ranks": nondegenerate.to_dict(),
    }
    try:
        norms = nondegeneracy_by_norms(square, tol)
        summary["norm_criterion"] = norms.passed
        summary["norms"] = [norms.lambda_norm_sq, norms.gamma_norm_sq]
    except DisconnectedInclusion as e:
        summary["norm_criterion"] = None
        summary["norms_error"] = str(e)
    return summary
