"""
Unit tests for groupoids and weak Hopf / weak Kac structures.
"""

from dataclasses import replace

import numpy as np
import pytest

from kackit.exceptions import InvalidGroupoid, InvalidInput
from kackit.utils import max_abs
from kackit.wha import (
    Certification,
    Groupoid,
    WHAStructure,
    cartan_subalgebras,
    certify,
    check_all,
    counit_is_multiplicative,
    counital_maps,
    counital_subalgebras,
    cyclic_group,
    discrete_groupoid,
    disjoint_union,
    dual_wha,
    group_from_table,
    groupoid_algebra,
    is_biconnected,
    is_connected_wha,
    is_hopf,
    klein_four_group,
    pair_groupoid,
    symmetric_group,
    two_sided_transversal,
    verify_antipode,
    verify_weak_bialgebra,
    verify_weak_kac,
)


class TestGroupoid:
    """Validation and the standard families."""

    @pytest.mark.quick
    def test_families(self):
        assert len(cyclic_group(4)) == 4
        assert len(symmetric_group(3)) == 6
        assert len(klein_four_group()) == 4
        assert len(pair_groupoid(3)) == 9
        assert len(discrete_groupoid(2)) == 2
        assert cyclic_group(4).is_group
        assert not pair_groupoid(2).is_group

    def test_pair_groupoid_names(self):
        groupoid = pair_groupoid(2)
        assert groupoid.morphisms == ("0<-0", "0<-1", "1<-0", "1<-1")
        assert groupoid.identities == (0, 3)
        assert groupoid.compose(1, 2) == 0
        assert groupoid.compose(1, 1) is None

    def test_disjoint_union_prefixes(self):
        union = disjoint_union(cyclic_group(2), discrete_groupoid(1))
        assert union.objects == ("a.*", "b.0")
        assert union.morphisms == ("a.0", "a.1", "b.id0")
        assert union.identities == (0, 2)

    def test_missing_composition(self):
        with pytest.raises(InvalidGroupoid) as exc_info:
            Groupoid(("x",), ("e", "g"), (0, 0), (0, 0), {(0, 0): 0, (0, 1): 1, (1, 0): 1}, (0, 1))
        assert exc_info.value.field_path == "compose"

    def test_wrong_inverse(self):
        table = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 0}
        with pytest.raises(InvalidGroupoid) as exc_info:
            Groupoid(("x",), ("e", "g"), (0, 0), (0, 0), table, (0, 0))
        assert exc_info.value.field_path == "inverse[1]"

    def test_no_objects(self):
        with pytest.raises(InvalidGroupoid):
            Groupoid((), (), (), (), {}, ())

    def test_non_associative_table(self):
        elements = [0, 1, 2]
        product = {(0, a): a for a in elements}
        product.update({(a, 0): a for a in elements})
        product.update({(1, 1): 1, (1, 2): 0, (2, 1): 0, (2, 2): 2})
        with pytest.raises(InvalidGroupoid):
            group_from_table(elements, product)

    def test_table_without_identity(self):
        with pytest.raises(InvalidGroupoid):
            group_from_table([0, 1], {(a, b): 1 for a in (0, 1) for b in (0, 1)})


class TestTransversal:
    """Simultaneous left and right coset representatives."""

    def test_s3_over_order_two_subgroup(self):
        group = symmetric_group(3)
        swap = group.morphisms.index("(1, 0, 2)")
        identity = group.identities[0]
        chosen = two_sided_transversal(group, [identity, swap])
        assert len(chosen) == 3
        left = {frozenset(group.table[(g, h)] for h in (identity, swap)) for g in chosen}
        right = {frozenset(group.table[(h, g)] for h in (identity, swap)) for g in chosen}
        assert len(left) == 3
        assert len(right) == 3

    def test_rejects_non_subgroup(self):
        group = symmetric_group(3)
        with pytest.raises(InvalidGroupoid) as exc_info:
            two_sided_transversal(group, [1, 2])
        assert exc_info.value.field_path == "subgroup"

    def test_rejects_groupoid(self):
        with pytest.raises(InvalidGroupoid):
            two_sided_transversal(pair_groupoid(2), [0])


class TestWHAStructure:
    def test_shape_validation(self):
        w = groupoid_algebra(cyclic_group(2))
        with pytest.raises(InvalidInput) as exc_info:
            WHAStructure(w.algebra, np.zeros((2, 2)), w.counit, w.antipode)
        assert exc_info.value.field_path == "Delta"
        with pytest.raises(InvalidInput) as exc_info:
            WHAStructure(w.algebra, w.delta, np.ones(3), w.antipode)
        assert exc_info.value.field_path == "eps"
        with pytest.raises(InvalidInput) as exc_info:
            WHAStructure(w.algebra, w.delta, w.counit, np.eye(3))
        assert exc_info.value.field_path == "S"

    def test_flat_coproduct_is_accepted(self):
        w = groupoid_algebra(cyclic_group(3))
        flat = WHAStructure(w.algebra, w.delta_matrix, w.counit, w.antipode, "pending")
        assert flat.delta.shape == (3, 3, 3)
        assert flat.status is Certification.PENDING
        assert not flat.at_least(Certification.WEAK_BIALGEBRA)


class TestGroupoidAlgebras:
    """Groupoid algebras satisfy every axiom."""

    @pytest.mark.core
    @pytest.mark.parametrize("groupoid", [cyclic_group(3), symmetric_group(3), pair_groupoid(2), discrete_groupoid(2)])
    def test_all_suites_pass(self, groupoid):
        w = groupoid_algebra(groupoid)
        assert verify_weak_bialgebra(w)
        assert verify_antipode(w)
        assert verify_weak_kac(w)
        report = check_all(w)
        assert report.status is Certification.WEAK_KAC
        assert report.to_dict()["status"] == "weak-kac"

    def test_hopf_exactly_for_groups(self):
        assert is_hopf(groupoid_algebra(cyclic_group(3)))
        assert counit_is_multiplicative(groupoid_algebra(cyclic_group(3)))
        assert not is_hopf(groupoid_algebra(pair_groupoid(2)))
        assert not counit_is_multiplicative(groupoid_algebra(pair_groupoid(2)))

    def test_counital_maps_are_idempotent(self):
        maps = counital_maps(groupoid_algebra(pair_groupoid(2)))
        assert maps.residual < 1e-12
        assert np.linalg.matrix_rank(maps.target) == 2

    def test_counital_subalgebras_are_spanned_by_identities(self):
        target, source = counital_subalgebras(groupoid_algebra(pair_groupoid(3)))
        assert target.dim == 3
        assert source.dim == 3
        assert target.is_star_subalgebra()
        assert cartan_subalgebras is counital_subalgebras

    def test_biconnected_group(self):
        w = groupoid_algebra(cyclic_group(3))
        assert is_connected_wha(w)
        assert is_biconnected(w)

    @pytest.mark.parametrize("groupoid", [discrete_groupoid(2), pair_groupoid(2)])
    def test_proper_groupoids_are_not_biconnected(self, groupoid):
        assert not is_biconnected(groupoid_algebra(groupoid))


class TestDuality:
    """The dual structure on the dual basis."""

    def test_dual_is_weak_kac(self):
        dual = dual_wha(groupoid_algebra(pair_groupoid(2)))
        assert dual.status is Certification.WEAK_KAC
        assert check_all(dual)

    def test_dual_of_group_algebra_is_commutative(self):
        dual = dual_wha(groupoid_algebra(symmetric_group(3)))
        m = dual.algebra.structure
        assert max_abs(m - np.transpose(m, (1, 0, 2))) < 1e-12
        assert check_all(dual)

    def test_double_dual_restores_tensors(self):
        w = groupoid_algebra(symmetric_group(3))
        back = dual_wha(dual_wha(w))
        assert max_abs(back.algebra.structure - w.algebra.structure) < 1e-12
        assert max_abs(back.delta - w.delta) < 1e-12
        assert max_abs(back.antipode - w.antipode) < 1e-12

    def test_pending_status_stays_pending(self):
        w = replace(groupoid_algebra(cyclic_group(2)), status=Certification.PENDING)
        assert dual_wha(w).status is Certification.PENDING


class TestCertification:
    """The suites run in order and stop at the first failure."""

    def test_broken_antipode_stops_at_bialgebra(self):
        w = replace(groupoid_algebra(cyclic_group(3)), antipode=np.eye(3), status=Certification.PENDING)
        report = check_all(w)
        assert report.status is Certification.WEAK_BIALGEBRA
        assert report.kac is None
        assert not report
        assert certify(w).status is Certification.WEAK_BIALGEBRA

    def test_broken_coproduct_is_pending(self):
        w = groupoid_algebra(cyclic_group(2))
        broken = replace(w, delta=2 * w.delta, status=Certification.PENDING)
        report = check_all(broken)
        assert report.status is Certification.PENDING
        assert report.antipode is None
        assert "antipode" not in report.to_dict()

    def test_certify_records_level(self):
        w = replace(groupoid_algebra(symmetric_group(3)), status=Certification.PENDING)
        assert certify(w).status is Certification.WEAK_KAC

    def test_antipode_twisted_by_automorphism_is_not_involutive(self):
        w = groupoid_algebra(cyclic_group(7))
        twisted = np.zeros((7, 7))
        for k in range(7):
            twisted[(-2 * k) % 7, k] = 1.0
        report = verify_weak_kac(replace(w, antipode=twisted, status=Certification.PENDING))
        assert "involutive" in report.failures
        assert "star_compatible" not in report.failures
