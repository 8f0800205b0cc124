"""Core inclusion tests.

Markov traces, conditional expectations, the Watatani index, the
basic-construction round trip and the index arithmetic that everything
else in the package builds on.
"""

import itertools
import time
from typing import Iterator, Tuple

import numpy as np
import pytest

from kackit.fdca import (
    MMAlgebra,
    TraceState,
    UnitalEmbedding,
    conditional_expectation,
    conjugate,
    identity_embedding,
    markov_trace,
    random_unitary,
    scalar_embedding,
    standard_embedding,
    watatani_index,
)
from kackit.tower import (
    basic_construction,
    consistency_check,
    depth_from_tower,
    index_formula,
    is_basic_construction_triple,
)
from kackit.utils import max_abs


def _block_shapes(limit: int, largest: int = 7) -> Iterator[Tuple[int, ...]]:
    """Non-increasing block dimensions with sum of squares at most limit."""
    yield from _shapes_below(limit, largest, ())


def _shapes_below(room: int, largest: int, prefix: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    if prefix:
        yield prefix
    for n in range(min(largest, int(np.sqrt(room))), 0, -1):
        yield from _shapes_below(room - n * n, n, prefix + (n,))


def _random_inclusion(rng: np.random.Generator) -> Tuple[UnitalEmbedding, np.ndarray]:
    """A proper inclusion with dim(A) <= 9 and pairwise distinct columns."""
    while True:
        source_dims = tuple(int(n) for n in rng.integers(1, 3, size=rng.integers(1, 3)))
        lam = rng.integers(0, 3, size=(int(rng.integers(1, 3)), len(source_dims)))
        if (lam.sum(axis=0) == 0).any() or (lam.sum(axis=1) == 0).any():
            continue
        if len({tuple(col) for col in lam.T}) < lam.shape[1]:
            continue
        dims_a = lam @ np.asarray(source_dims)
        dim_a = int((dims_a**2).sum())
        dim_b = sum(n * n for n in source_dims)
        if dim_a > 9 or dim_b >= dim_a:
            continue
        return standard_embedding(MMAlgebra(source_dims), lam.tolist()), lam


class TestMarkovTrace:
    """The Markov trace of C inside C^n."""

    @pytest.mark.core
    @pytest.mark.critical
    @pytest.mark.quick
    def test_uniform_on_commutative_algebras(self):
        start = time.perf_counter()
        for n in range(1, 11):
            markov = markov_trace(scalar_embedding(MMAlgebra.commutative(n)))
            assert np.allclose(markov.weights, 1.0 / n, atol=1e-12)
            assert markov.residual <= 1e-12
            assert markov.index == pytest.approx(n)
        assert time.perf_counter() - start < 1.0

    @pytest.mark.core
    def test_scalars_in_multi_matrix_algebras(self):
        """The Markov trace of C in A is the canonical trace with index dim(A)."""
        for shape in [(2,), (2, 1), (3, 2, 1), (1, 1, 1, 2)]:
            algebra = MMAlgebra(shape)
            markov = markov_trace(scalar_embedding(algebra))
            assert np.allclose(markov.weights, TraceState.canonical(algebra).weights)
            assert markov.index == pytest.approx(algebra.dim)


class TestConditionalExpectation:
    """E is an idempotent, trace-preserving, *-preserving bimodule map onto B."""

    @pytest.mark.core
    @pytest.mark.parametrize("seed", range(10))
    def test_randomized_properties(self, seed):
        rng = np.random.default_rng(seed)
        emb, _ = _random_inclusion(rng)
        emb = conjugate(emb, random_unitary(emb.target, seed))
        algebra = emb.target
        trace = TraceState.from_weights(algebra, rng.uniform(0.5, 2.0, algebra.num_blocks))
        expectation = conditional_expectation(emb, trace)
        projector = expectation.projector
        assert max_abs(projector @ projector - projector) < 1e-9
        assert max_abs(expectation.matrix @ emb.matrix - np.eye(emb.source.dim)) < 1e-9
        for _ in range(5):
            x = algebra.random_vector(rng)
            assert abs(trace(projector @ x) - trace(x)) < 1e-9
            assert max_abs(projector @ algebra.star(x) - algebra.star(projector @ x)) < 1e-9
            b = emb.matrix @ emb.source.random_vector(rng)
            lhs = projector @ algebra.multiply(b, x)
            assert max_abs(lhs - algebra.multiply(b, projector @ x)) < 1e-9


class TestWatataniIndex:
    """Index of the Markov trace of C inside every small multi-matrix algebra."""

    @pytest.mark.core
    @pytest.mark.slow
    def test_markov_index_is_dimension(self):
        shapes = list(_block_shapes(50))
        assert (7, 1) in shapes
        for shape in shapes:
            algebra = MMAlgebra(shape)
            trace = markov_trace(scalar_embedding(algebra)).as_trace(algebra)
            index = watatani_index(trace)
            assert index.is_scalar, shape
            assert index.scalar == pytest.approx(algebra.dim, abs=1e-8)
            assert index.discrepancy < 1e-8

    @pytest.mark.core
    @pytest.mark.slow
    def test_perturbed_weights_are_not_scalar(self):
        for shape in _block_shapes(50):
            if len(shape) < 2:
                continue
            algebra = MMAlgebra(shape)
            weights = np.asarray(TraceState.canonical(algebra).weights)
            weights[0] *= 1.05
            index = watatani_index(TraceState.from_weights(algebra, weights))
            assert not index.is_scalar, shape
            assert index.scalar is None
            assert index.discrepancy < 1e-8

    def test_quasi_basis_oracle_on_commutative_pair(self):
        algebra = MMAlgebra.commutative(2)
        index = watatani_index(TraceState(algebra, (0.75, 0.25)))
        assert np.allclose(index.values, (4 / 3, 4.0))
        assert np.allclose(index.oracle_values, index.values)


class TestBasicConstructionRoundTrip:
    """Outputs of basic_construction are recognized; shape violations are not."""

    @pytest.mark.core
    @pytest.mark.critical
    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(100))
    def test_constructed_triples_pass(self, seed):
        rng = np.random.default_rng(seed)
        emb, _ = _random_inclusion(rng)
        algebra = emb.target
        trace = TraceState.from_weights(algebra, rng.uniform(0.5, 2.0, algebra.num_blocks))
        bc = basic_construction(emb, trace, seed=seed)
        report = is_basic_construction_triple(bc.lower, bc.upper, bc.trace, seed=seed)
        assert report, report.to_dict()
        assert report.projection is not None
        assert report.relation_residual <= report.tolerance

    @pytest.mark.core
    @pytest.mark.parametrize("seed", range(100))
    def test_shape_violations_fail(self, seed):
        rng = np.random.default_rng(seed)
        emb, lam = _random_inclusion(rng)
        if seed % 2:
            upper = standard_embedding(emb.target, (2 * lam.T).tolist())
        else:
            upper = identity_embedding(emb.target)
        report = is_basic_construction_triple(emb, upper)
        assert not report
        assert not report.matrix_match
        assert "transpose" in report.diagnostic


class TestDepth:
    """A relative commutant tower starting with a commutative pattern has depth two."""

    @pytest.mark.core
    @pytest.mark.parametrize("n", range(2, 7))
    def test_commutative_relative_commutant(self, n):
        result = depth_from_tower([[[1] * n]], n)
        assert result.depth == 2
        assert depth_from_tower([[[1] * n], [[1]] * n], n).depth == 2


class TestIndexArithmetic:
    """Prime indices force irreducibility; index n^2 with dim n^2 is allowed."""

    @pytest.mark.core
    @pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
    def test_prime_index_with_nontrivial_commutant(self, p):
        assert consistency_check(p, 1)
        for dim in range(2, p + 1):
            report = consistency_check(p, dim)
            assert not report
            assert any("prime" in finding for finding in report.findings)

    @pytest.mark.core
    @pytest.mark.parametrize("n", range(2, 6))
    def test_square_index_equal_to_dimension(self, n):
        assert consistency_check(n * n, n * n)
        assert index_formula(1, n * n) == n * n

    def test_formula_output_is_a_multiple(self):
        for order, dim in itertools.product(range(1, 6), repeat=2):
            index = index_formula(order, dim)
            assert index == order * dim
            findings = consistency_check(index, dim).findings
            assert not any("multiple" in finding for finding in findings)
