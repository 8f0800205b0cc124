"""
Unit tests for commuting squares and the basis transfer.
"""

import numpy as np
import pytest
from scipy.linalg import dft

from kackit.bases import PPBasis, dft_unitary_onb, pauli_basis, verify_orthonormal
from kackit.commsq import (
    CommutingSquareData,
    degenerate_square,
    hadamard_square,
    nondegeneracy_by_norms,
    popa_transfer,
    square_summary,
    tensor_square,
    verify_commuting,
    verify_nondegenerate,
)
from kackit.exceptions import (
    DegenerateSquare,
    DisconnectedInclusion,
    InputNotBasis,
    InvalidSquare,
    NotCommutingSquare,
)
from kackit.fdca import (
    MMAlgebra,
    TraceState,
    UnitalEmbedding,
    identity_embedding,
    scalar_embedding,
    standard_embedding,
)


def _rotation(angle: float) -> np.ndarray:
    return np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])


@pytest.fixture
def scalars_in_c2():
    return scalar_embedding(MMAlgebra.commutative(2))


@pytest.fixture
def unequal_norm_square() -> CommutingSquareData:
    """N = C, K = C^2, L = C, M = C^3 with K landing as (a, b, b)."""
    two, three = MMAlgebra.commutative(2), MMAlgebra.commutative(3)
    return CommutingSquareData(
        scalar_embedding(two),
        identity_embedding(MMAlgebra.commutative(1)),
        standard_embedding(two, [[1, 0], [0, 1], [0, 1]]),
        scalar_embedding(three),
        TraceState.canonical(three),
    )


class TestCommutingSquareData:
    """Shape validation of the four corners."""

    def test_trace_must_live_on_top_corner(self, scalars_in_c2):
        with pytest.raises(InvalidSquare) as exc_info:
            CommutingSquareData(
                scalars_in_c2,
                scalars_in_c2,
                identity_embedding(scalars_in_c2.target),
                identity_embedding(scalars_in_c2.target),
                TraceState.canonical(MMAlgebra.full(2)),
            )
        assert exc_info.value.field_path == "trace"

    def test_corners_must_chain(self, scalars_in_c2):
        with pytest.raises(InvalidSquare) as exc_info:
            CommutingSquareData(
                scalars_in_c2,
                scalars_in_c2,
                identity_embedding(MMAlgebra.full(2)),
                identity_embedding(scalars_in_c2.target),
                TraceState.canonical(scalars_in_c2.target),
            )
        assert exc_info.value.field_path == "k_in_m"

    def test_square_must_close(self):
        two = MMAlgebra.commutative(2)
        swap = standard_embedding(two, [[0, 1], [1, 0]])
        with pytest.raises(InvalidSquare):
            CommutingSquareData(
                identity_embedding(two),
                identity_embedding(two),
                identity_embedding(two),
                swap,
                TraceState.canonical(two),
            )

    def test_closure_follows_configured_tolerance(self, scalars_in_c2, monkeypatch):
        nudged = UnitalEmbedding(
            scalars_in_c2.source, scalars_in_c2.target, scalars_in_c2.matrix + np.array([[1e-4], [0.0]])
        )
        top = identity_embedding(scalars_in_c2.target)
        corners = (scalars_in_c2, nudged, top, top)
        with pytest.raises(InvalidSquare):
            CommutingSquareData(*corners, TraceState.canonical(scalars_in_c2.target))
        monkeypatch.setenv("KACKIT_TOL", "1e-6")
        square = CommutingSquareData(*corners, TraceState.canonical(scalars_in_c2.target))
        assert square.n_in_l is nudged


class TestVerification:
    """Commuting and non-degeneracy checks."""

    @pytest.mark.quick
    def test_tensor_square(self, scalars_in_c2):
        square = tensor_square(scalars_in_c2, MMAlgebra.full(2), TraceState.canonical(scalars_in_c2.target))
        commuting = verify_commuting(square)
        assert commuting
        assert commuting.cross_residual < 1e-10
        assert verify_nondegenerate(square)

    def test_conjugated_tensor_square(self, scalars_in_c2):
        square = tensor_square(
            scalars_in_c2, MMAlgebra.commutative(2), TraceState.canonical(scalars_in_c2.target), seed=11
        )
        assert verify_commuting(square)
        assert verify_nondegenerate(square)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_fourier_hadamard_square(self, n):
        square = hadamard_square(dft(n, scale="sqrtn"), seed=n)
        assert verify_commuting(square)
        assert verify_nondegenerate(square)

    @pytest.mark.parametrize("angle", [0.0, np.pi / 6])
    def test_non_flat_unitary_does_not_commute(self, angle):
        assert not verify_commuting(hadamard_square(_rotation(angle)))

    def test_flat_rotation_commutes(self):
        assert verify_commuting(hadamard_square(_rotation(np.pi / 4)))

    def test_degenerate_square(self, scalars_in_c2):
        square = degenerate_square(scalars_in_c2, TraceState.canonical(scalars_in_c2.target))
        assert verify_commuting(square)
        check = verify_nondegenerate(square)
        assert not check
        assert check.rank_lk == 1
        assert check.to_dict()["dim"] == 2


class TestNormCriterion:
    def test_equal_norms(self, scalars_in_c2):
        square = tensor_square(scalars_in_c2, MMAlgebra.full(2), TraceState.canonical(scalars_in_c2.target))
        criterion = nondegeneracy_by_norms(square)
        assert criterion
        assert criterion.lambda_norm_sq == pytest.approx(2.0)
        assert criterion.gamma_norm_sq == pytest.approx(2.0)

    def test_unequal_norms(self, unequal_norm_square):
        criterion = nondegeneracy_by_norms(unequal_norm_square)
        assert not criterion
        assert (criterion.lambda_norm_sq, criterion.gamma_norm_sq) == pytest.approx((2.0, 3.0))
        assert not verify_nondegenerate(unequal_norm_square)

    def test_disconnected_inclusion(self):
        two = MMAlgebra.commutative(2)
        square = tensor_square(identity_embedding(two), MMAlgebra.full(2), TraceState.canonical(two))
        with pytest.raises(DisconnectedInclusion):
            nondegeneracy_by_norms(square)
        summary = square_summary(square)
        assert summary["norm_criterion"] is None
        assert "disconnected" in summary["norms_error"]


class TestPopaTransfer:
    """Transfer of a basis of K over N to M over L."""

    @pytest.mark.core
    def test_transfer_through_tensor_square(self, scalars_in_c2):
        square = tensor_square(scalars_in_c2, MMAlgebra.full(2), TraceState.canonical(scalars_in_c2.target), seed=4)
        result = popa_transfer(square, dft_unitary_onb(2))
        assert result
        assert len(result.basis) == 2
        assert result.basis.inclusion is square.l_in_m
        assert verify_orthonormal(result.basis)

    def test_transfer_through_hadamard_square(self):
        square = hadamard_square(dft(3, scale="sqrtn"))
        basis = dft_unitary_onb(3)
        assert popa_transfer(square, basis)

    def test_refuses_degenerate_square(self, scalars_in_c2):
        square = degenerate_square(scalars_in_c2, TraceState.canonical(scalars_in_c2.target))
        with pytest.raises(DegenerateSquare):
            popa_transfer(square, dft_unitary_onb(2))

    def test_refuses_non_commuting_square(self):
        with pytest.raises(NotCommutingSquare):
            popa_transfer(hadamard_square(np.eye(2)), dft_unitary_onb(2))

    def test_refuses_foreign_basis(self, scalars_in_c2):
        square = tensor_square(scalars_in_c2, MMAlgebra.full(2), TraceState.canonical(scalars_in_c2.target))
        with pytest.raises(InputNotBasis):
            popa_transfer(square, pauli_basis())

    def test_refuses_incomplete_basis(self, scalars_in_c2):
        square = tensor_square(scalars_in_c2, MMAlgebra.full(2), TraceState.canonical(scalars_in_c2.target))
        basis = dft_unitary_onb(2)
        partial = PPBasis(basis.inclusion, basis.trace, basis.elements[:1])
        with pytest.raises(InputNotBasis):
            popa_transfer(square, partial)


class TestSummary:
    def test_summary_keys(self):
        summary = square_summary(hadamard_square(dft(2, scale="sqrtn")))
        assert summary["commuting"]
        assert summary["nondegenerate"]
        assert summary["norm_criterion"]
        assert summary["norms"] == pytest.approx([2.0, 2.0])
