"""Symbolic dynamics core: validation, block graphs, orbits, censuses."""
from __future__ import annotations

import pytest

from livsic import (
    BadShape,
    DeadSymbol,
    NotIrreducible,
    PeriodicOrbit,
    RangeTooLarge,
    SftSpec,
    birkhoff_sum,
    build_block_graph,
    canonical_rotation,
    count_periodic_points,
    enumerate_periodic_orbits,
    is_primitive,
    make_cocycle,
    primitive_root,
    validate_sft,
)
from corpus import random_irreducible_sft, rng_for

GOLDEN_MEAN = SftSpec.from_rows([[1, 1], [1, 0]])
FULL_2 = SftSpec.full_shift(2)


def test_validate_full_shift():
    report = validate_sft(FULL_2)
    assert report.irreducible and report.aperiodic and report.period == 1


def test_validate_golden_mean():
    report = validate_sft(GOLDEN_MEAN)
    assert report.irreducible and report.period == 1


def test_validate_bipartite_period():
    report = validate_sft(SftSpec.from_rows([[0, 1], [1, 0]]))
    assert report.irreducible
    assert not report.aperiodic
    assert report.period == 2


def test_validate_rejects_bad_shapes():
    with pytest.raises(BadShape):
        validate_sft(SftSpec(k=2, transitions=((1, 1),)))
    with pytest.raises(BadShape):
        validate_sft(SftSpec.from_rows([[1, 2], [1, 1]]))


def test_validate_rejects_dead_symbols():
    with pytest.raises(DeadSymbol):
        validate_sft(SftSpec.from_rows([[1, 0], [1, 0]]))


def test_validate_rejects_reducible_with_witness():
    with pytest.raises(NotIrreducible) as err:
        validate_sft(SftSpec.from_rows([[1, 1], [0, 1]]))
    assert err.value.witness == (2, 1)


def test_admissible_words():
    assert GOLDEN_MEAN.is_admissible((1, 1, 2, 1))
    assert not GOLDEN_MEAN.is_admissible((2, 2))
    assert GOLDEN_MEAN.is_admissible((2, 1), cyclic=True)
    assert not GOLDEN_MEAN.is_admissible((2,), cyclic=True)


def test_block_graph_golden_mean_two_blocks():
    bg = build_block_graph(GOLDEN_MEAN, 2)
    assert bg.vertices == ((1, 1), (1, 2), (2, 1))
    assert bg.edges == ((1, 1, 1), (1, 1, 2), (1, 2, 1), (2, 1, 1), (2, 1, 2))
    assert bg.is_strongly_connected()


def test_block_graph_edges_connect_overlapping_blocks():
    bg = build_block_graph(FULL_2, 3)
    for e, word in enumerate(bg.edges):
        assert bg.vertices[bg.edge_tail[e]] == word[:-1]
        assert bg.vertices[bg.edge_head[e]] == word[1:]


def test_canonical_rotation_and_primitivity():
    assert canonical_rotation((2, 1, 1)) == (1, 1, 2)
    assert canonical_rotation((1,)) == (1,)
    assert is_primitive((1, 1, 2))
    assert not is_primitive((1, 2, 1, 2))
    assert primitive_root((1, 2, 1, 2)) == ((1, 2), 2)
    assert primitive_root((1, 1, 2)) == ((1, 1, 2), 1)


def test_orbit_enumeration_golden_mean():
    orbits = enumerate_periodic_orbits(GOLDEN_MEAN, 3)
    assert [o.word for o in orbits] == [(1,), (1, 2), (1, 1, 2)]


def test_orbit_enumeration_full_shift():
    orbits = enumerate_periodic_orbits(FULL_2, 3)
    assert [o.word for o in orbits] == [
        (1,),
        (2,),
        (1, 2),
        (1, 1, 2),
        (1, 2, 2),
    ]


def test_orbit_words_are_canonical_and_primitive():
    for orbit in enumerate_periodic_orbits(GOLDEN_MEAN, 7):
        assert orbit.word == canonical_rotation(orbit.word)
        assert is_primitive(orbit.word)
        assert GOLDEN_MEAN.is_admissible(orbit.word, cyclic=True)


def test_periodic_point_counts_golden_mean():
    assert [count_periodic_points(GOLDEN_MEAN, n) for n in (1, 2, 3, 4)] == [1, 3, 4, 7]


def test_periodic_point_counts_full_shift():
    assert [count_periodic_points(FULL_2, n) for n in (1, 2, 3)] == [2, 4, 8]


def test_census_matches_orbit_counts():
    for seed in range(5):
        spec = random_irreducible_sft(rng_for(401, seed), 4)
        orbits = enumerate_periodic_orbits(spec, 8)
        for n in range(1, 9):
            total = sum(o.period for o in orbits if n % o.period == 0)
            assert total == count_periodic_points(spec, n)


def test_enumeration_cap(monkeypatch):
    monkeypatch.setenv("LIVSIC_MAX_PERIOD", "4")
    with pytest.raises(RangeTooLarge):
        enumerate_periodic_orbits(FULL_2, 5)


def test_birkhoff_sum_rotation_invariant():
    cocycle = make_cocycle(
        GOLDEN_MEAN,
        1,
        {(1, 1): "1/2", (1, 2): "-1/3", (2, 1): "2"},
    )
    for word in [(1, 1, 2), (1, 2, 1, 1, 2)]:
        base = birkhoff_sum(cocycle, PeriodicOrbit(word=word))
        for i in range(1, len(word)):
            rotated = PeriodicOrbit(word=word[i:] + word[:i])
            assert birkhoff_sum(cocycle, rotated) == base
