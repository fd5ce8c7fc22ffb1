"""Group construction, conjugacy data and lattice arithmetic."""
from __future__ import annotations

import pytest

from livsic import (
    BadShape,
    ClosureTooLarge,
    GroupSpec,
    NotAGroup,
    build_group,
    center,
    conjugacy_classes,
    smith_diagonal,
    subgroup_rank_and_index,
)
from corpus import q8_group, s3_group


def test_cyclic_names_and_arithmetic():
    g = build_group(GroupSpec.cyclic(4))
    assert g.names == ("e", "g", "g^2", "g^3")
    assert g.identity_index == 0
    assert g.mul(1, 3) == 0
    assert g.inv(1) == 3
    assert g.order == 4


def test_cyclic_rejects_nonpositive_order():
    with pytest.raises(BadShape):
        build_group(GroupSpec.cyclic(0))


def test_permutation_closure_s3():
    g = s3_group()
    assert g.order == 6
    assert g.names[0] == "e"
    assert g.associativity_verified
    # Every generator name appears as an element name.
    assert {"s", "r"} <= set(g.names)


def test_s3_conjugacy_classes_and_center():
    g = s3_group()
    sizes = sorted(len(c.members) for c in conjugacy_classes(g))
    assert sizes == [1, 2, 3]
    assert center(g) == (g.identity_index,)


def test_q8_table_is_a_group():
    g = q8_group()
    assert g.order == 8
    z = center(g)
    assert sorted(g.name_of(i) for i in z) == ["-1", "1"]
    sizes = sorted(len(c.members) for c in conjugacy_classes(g))
    assert sizes == [1, 1, 2, 2, 2]


def test_table_rejects_broken_rows():
    spec = GroupSpec.finite_table(["e", "a"], [[0, 0], [1, 0]])
    with pytest.raises(NotAGroup) as err:
        build_group(spec)
    assert "permutation" in str(err.value)


def test_table_rejects_missing_identity():
    # Latin square in which no element acts as a two-sided identity.
    table = [[1, 0, 2], [0, 2, 1], [2, 1, 0]]
    spec = GroupSpec.finite_table(["a", "b", "c"], table)
    with pytest.raises(NotAGroup) as err:
        build_group(spec)
    assert "identity" in str(err.value)


def test_table_rejects_nonassociative_square():
    # Order-5 Latin square with identity: forced nonassociative, since the
    # only group of order 5 is cyclic and this is not its table.
    table = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    spec = GroupSpec.finite_table(["e", "a", "b", "c", "d"], table)
    with pytest.raises(NotAGroup) as err:
        build_group(spec)
    assert "associativity" in str(err.value)
    assert err.value.witness is not None


def test_permutation_rejects_bad_generator():
    spec = GroupSpec.permutation(3, [(1, 1, 2)])
    with pytest.raises(NotAGroup):
        build_group(spec)


def test_closure_cap():
    # The symmetric group on 5 points has order 120.
    spec = GroupSpec.permutation(5, [(2, 1, 3, 4, 5), (2, 3, 4, 5, 1)])
    with pytest.raises(ClosureTooLarge):
        build_group(spec, max_order=100)


def test_free_abelian_arithmetic():
    g = build_group(GroupSpec.free_abelian(2))
    assert not g.is_finite
    assert g.order is None
    assert g.identity == (0, 0)
    assert g.mul((1, 2), (3, -1)) == (4, 1)
    assert g.inv((1, -2)) == (-1, 2)
    assert g.name_of((1, -2)) == "(1,-2)"


def test_smith_diagonal_samples():
    assert smith_diagonal([[2]], 1) == (2,)
    assert smith_diagonal([[1, 0], [0, 1]], 2) == (1, 1)
    assert smith_diagonal([[2, 0], [3, 0], [0, 1]], 2) == (1, 1)
    assert smith_diagonal([[2, 0], [0, 4]], 2) == (2, 4)
    assert smith_diagonal([[4, 6]], 2) == (2,)
    assert smith_diagonal([[0, 0]], 2) == ()


def test_smith_divisibility_chain():
    diag = smith_diagonal([[6, 4, 8], [4, 2, 6], [10, 8, 14]], 3)
    for a, b in zip(diag, diag[1:]):
        assert b % a == 0


def test_subgroup_report():
    full = subgroup_rank_and_index([(1, 0), (0, 1)], 2)
    assert full.full and full.index == 1 and full.rank == 2

    doubled = subgroup_rank_and_index([(2, 0), (0, 2)], 2)
    assert not doubled.full and doubled.index == 4

    line = subgroup_rank_and_index([(2, 4)], 2)
    assert line.rank == 1 and line.index is None and not line.full
