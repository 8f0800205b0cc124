"""
Utility functions and helpers for kackit.

Tolerance and seed resolution live here together with the small pieces of
numerical linear algebra (ranks, kernels, span comparison) that every module
shares.
"""

import logging
import math
import os
from typing import List, Optional

import numpy as np
import scipy.linalg

from .constants import DEFAULT_SEED, DEFAULT_TOLERANCE, TOLERANCE_ENV_VAR
from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)


def resolve_tolerance(tol: Optional[float] = None) -> float:
    """
    Resolve the working tolerance.

    An explicit value wins; otherwise the KACKIT_TOL environment variable is
    consulted, and finally the library default.

    Args:
        tol: Explicit tolerance, or None.

    Returns:
        A positive float.

    Raises:
        ConfigurationError: If the tolerance is not a positive finite number.
    """
    source = "argument"
    if tol is None:
        raw = os.environ.get(TOLERANCE_ENV_VAR)
        if raw is None or raw.strip() == "":
            return DEFAULT_TOLERANCE
        source = TOLERANCE_ENV_VAR
        try:
            tol = float(raw)
        except ValueError as e:
            raise ConfigurationError(f"{TOLERANCE_ENV_VAR} must be a number, got {raw!r}", e)
    if not math.isfinite(tol) or tol <= 0:
        raise ConfigurationError(f"Tolerance from {source} must be positive, got {tol}")
    return float(tol)


def resolve_seed(seed: Optional[int] = None) -> int:
    """Return the seed, falling back to the library default."""
    return DEFAULT_SEED if seed is None else int(seed)


def make_rng(seed: Optional[int] = None) -> np.random.Generator:
    """Create a numpy Generator from a seed (or the default seed)."""
    return np.random.default_rng(resolve_seed(seed))


def max_abs(array: np.ndarray) -> float:
    """Largest absolute entry, 0.0 for empty arrays."""
    array = np.asarray(array)
    if array.size == 0:
        return 0.0
    return float(np.max(np.abs(array)))


def numerical_rank(matrix: np.ndarray, tol: float) -> int:
    """
    Rank by singular values above tol times the largest one.

    Args:
        matrix: Any 2-D array.
        tol: Relative cutoff.

    Returns:
        The numerical rank.
    """
    matrix = np.atleast_2d(np.asarray(matrix))
    if matrix.size == 0:
        return 0
    s = scipy.linalg.svdvals(matrix)
    if s.size == 0 or s[0] <= tol:
        return 0
    return int(np.sum(s > tol * s[0]))


def null_space(matrix: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of matrix."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    if matrix.shape[0] == 0 or max_abs(matrix) == 0.0:
        return np.eye(matrix.shape[1], dtype=complex)
    return scipy.linalg.null_space(matrix, rcond=tol)


def orthonormal_columns(matrix: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (columns) of the column span of matrix."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    if matrix.shape[1] == 0 or max_abs(matrix) == 0.0:
        return np.zeros((matrix.shape[0], 0), dtype=complex)
    return scipy.linalg.orth(matrix, rcond=tol)


def hermitian_kernel(gram: np.ndarray, tol: float) -> np.ndarray:
    """
    Kernel of a positive semidefinite Hermitian matrix via eigh.

    Eigenvalues at most tol times the largest are treated as zero.
    """
    gram = (gram + gram.conj().T) / 2
    values, vectors = np.linalg.eigh(gram)
    scale = max(float(values[-1]), 0.0) if values.size else 0.0
    if scale == 0.0:
        return np.eye(gram.shape[0], dtype=complex)
    return vectors[:, values <= tol * scale]


def same_span(first: np.ndarray, second: np.ndarray, tol: float) -> bool:
    """True when two sets of column vectors span the same subspace."""
    first = orthonormal_columns(first, tol)
    second = orthonormal_columns(second, tol)
    if first.shape[1] != second.shape[1]:
        return False
    if first.shape[1] == 0:
        return True
    # Projecting one orthonormal basis onto the other must preserve norms
    residual = second - first @ (first.conj().T @ second)
    return max_abs(residual) <= math.sqrt(tol)


def polar_unitary(matrix: np.ndarray) -> np.ndarray:
    """Unitary factor of the polar decomposition of a square matrix."""
    u, _, vh = np.linalg.svd(matrix)
    return u @ vh


def is_prime(n: int) -> bool:
    """Trial-division primality test for small integers."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    return all(n % k for k in range(3, math.isqrt(n) + 1, 2))


def is_perfect_square(n: int) -> bool:
    """True when n is the square of an integer."""
    return n >= 0 and math.isqrt(n) ** 2 == n


def cluster_sorted(values: np.ndarray, gap: float) -> List[List[int]]:
    """
    Group indices of ascending real values into runs separated by more than gap.

    Args:
        values: Real values in ascending order.
        gap: Minimum separation between neighbouring clusters.

    Returns:
        List of index lists, one per cluster.
    """
    clusters: List[List[int]] = []
    for index, value in enumerate(values):
        if clusters and value - values[clusters[-1][-1]] <= gap:
            clusters[-1].append(index)
        else:
            clusters.append([index])
    return clusters
