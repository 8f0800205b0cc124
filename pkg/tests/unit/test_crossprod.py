"""
Unit tests for actions of weak Hopf algebras and crossed products.
"""

from dataclasses import replace

import numpy as np
import pytest

from kackit.crossprod import (
    ActionData,
    counital_action,
    crossed_product,
    fixed_points,
    group_action,
    inner_action,
    minimality_check,
    trivial_action,
    verify_action,
)
from kackit.exceptions import ActionNotVerified, InvalidInput
from kackit.fdca import MMAlgebra
from kackit.presentation import wedderburn
from kackit.wha import Certification, cyclic_group, groupoid_algebra, pair_groupoid, symmetric_group

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])
# order three, not normal
SKEW = np.array([[0.0, -1.0], [1.0, -1.0]])


@pytest.fixture
def z2():
    return groupoid_algebra(cyclic_group(2))


@pytest.fixture
def swap_action(z2):
    return group_action(z2, MMAlgebra.commutative(2), [np.eye(2), SWAP])


class TestActionData:
    def test_tensor_shape(self, z2):
        with pytest.raises(InvalidInput) as exc_info:
            ActionData(z2, MMAlgebra.commutative(2), np.zeros((2, 2, 3)))
        assert exc_info.value.field_path == "tensor"

    def test_group_action_needs_one_map_per_element(self, z2):
        with pytest.raises(InvalidInput) as exc_info:
            group_action(z2, MMAlgebra.commutative(2), [np.eye(2)])
        assert exc_info.value.field_path == "maps"

    def test_act_and_unit(self, swap_action):
        g = np.array([0.0, 1.0])
        assert np.allclose(swap_action.act(g, np.array([3.0, 5.0])), [5.0, 3.0])
        assert np.allclose(swap_action.on_unit, [[1.0, 1.0], [1.0, 1.0]])


class TestVerifyAction:
    """Module laws and the action axioms."""

    @pytest.mark.quick
    def test_trivial_action(self):
        report = verify_action(trivial_action(groupoid_algebra(symmetric_group(3)), MMAlgebra((2, 1))))
        assert report, report.to_dict()

    def test_swap_action(self, swap_action):
        report = verify_action(swap_action)
        assert report
        assert report.flags == {"counital_kernel": True, "readings_agree": True}

    def test_unitary_inner_action(self, z2):
        action = inner_action(z2, MMAlgebra.full(2), [np.eye(2).reshape(-1), np.diag([1.0, -1.0]).reshape(-1)])
        assert verify_action(action)

    def test_non_unitary_conjugation_breaks_star_axiom(self):
        z3 = groupoid_algebra(cyclic_group(3))
        elements = [np.linalg.matrix_power(SKEW, k).reshape(-1) for k in range(3)]
        report = verify_action(inner_action(z3, MMAlgebra.full(2), elements))
        assert report.failures == ["star"]

    def test_non_multiplicative_maps(self, z2):
        doubling = group_action(z2, MMAlgebra.commutative(2), [np.eye(2), 2 * np.eye(2)])
        report = verify_action(doubling)
        assert "module" in report.failures
        assert "multiplicative" in report.failures

    def test_counital_action_of_groupoid_algebra(self):
        action = counital_action(groupoid_algebra(pair_groupoid(2)))
        assert action.target.dim == 2
        assert verify_action(action)


class TestCrossedProduct:
    """M x| A as an explicit presentation."""

    @pytest.mark.core
    def test_swap_action_gives_m2(self, swap_action):
        cp = crossed_product(swap_action)
        assert cp.dim == 4
        assert cp.relation_rank == 0
        assert cp.result.check_axioms()
        assert wedderburn(cp.result).algebra.block_dims == (2,)
        assert cp.covariance_residual() < 1e-9
        assert cp.embedding_residual() < 1e-9

    def test_trivial_action_multiplies_dimensions(self):
        acting = groupoid_algebra(symmetric_group(3))
        cp = crossed_product(trivial_action(acting, MMAlgebra((2,))))
        assert cp.dim == 24
        assert cp.result.check_axioms()

    def test_counital_action_recovers_acting_algebra(self):
        acting = groupoid_algebra(pair_groupoid(2))
        cp = crossed_product(counital_action(acting))
        assert cp.dim == acting.dim
        assert cp.relation_rank == 4
        assert cp.residual < 1e-9
        assert cp.result.check_axioms()

    def test_quotient_basis_indexes_representatives(self, swap_action):
        cp = crossed_product(swap_action)
        assert cp.quotient_basis == ((0, 0), (0, 1), (1, 0), (1, 1))

    def test_refuses_unverified_action(self):
        z3 = groupoid_algebra(cyclic_group(3))
        elements = [np.linalg.matrix_power(SKEW, k).reshape(-1) for k in range(3)]
        with pytest.raises(ActionNotVerified) as exc_info:
            crossed_product(inner_action(z3, MMAlgebra.full(2), elements))
        assert "star" in str(exc_info.value)

    def test_claimed_status_is_rechecked(self):
        z3 = groupoid_algebra(cyclic_group(3))
        broken = replace(z3, antipode=np.eye(3))
        assert broken.status is Certification.WEAK_KAC
        with pytest.raises(ActionNotVerified) as exc_info:
            crossed_product(trivial_action(broken, MMAlgebra.commutative(2)))
        assert "weak-bialgebra" in str(exc_info.value)


class TestMinimality:
    def test_swap_action_is_not_minimal(self, swap_action):
        report = minimality_check(crossed_product(swap_action))
        assert not report
        assert report.to_dict() == {"minimal": False, "commutant_dim": 2, "source_dim": 1}

    def test_scalars_over_trivial_group(self):
        acting = groupoid_algebra(cyclic_group(1))
        report = minimality_check(crossed_product(trivial_action(acting, MMAlgebra.full(1))))
        assert report.minimal

    def test_trivial_action_on_matrices(self, z2):
        report = minimality_check(crossed_product(trivial_action(z2, MMAlgebra.full(2))))
        assert not report
        assert report.commutant.shape[1] > report.source.shape[1]


class TestFixedPoints:
    def test_trivial_action_fixes_everything(self, z2):
        assert fixed_points(trivial_action(z2, MMAlgebra((2, 1)))).dim == 5

    def test_swap_fixes_constants(self, swap_action):
        fixed = fixed_points(swap_action)
        assert fixed.dim == 1
        assert np.allclose(np.abs(fixed.basis[:, 0]), 1 / np.sqrt(2))
