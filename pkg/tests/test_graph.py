from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from randcurrent.graph import (
    CouplingField,
    FamilyError,
    PrecisionError,
    SizeError,
    build_box,
    build_long_range_chain,
    build_tree_ball,
    free_system,
    ghost_augment,
    ghost_system,
    nearest_neighbor_coupling,
    validate_conditions,
)

# ---------------------------------------------------------------------------
# Independent oracles.  Expected values below are frozen from these, not from
# the implementation.


def brute_box_pairs(dimension: int, side: int, wrap: bool) -> dict[tuple, int]:
    """Count nearest-neighbor bonds by scanning all coordinate pairs."""
    coords = list(itertools.product(range(side), repeat=dimension))
    bonds: dict[tuple, int] = {}
    for a, b in itertools.combinations(range(len(coords)), 2):
        mult = 0
        for axis in range(dimension):
            diff = abs(coords[a][axis] - coords[b][axis])
            rest = all(coords[a][i] == coords[b][i] for i in range(dimension) if i != axis)
            if not rest:
                continue
            if diff == 1:
                mult += 1
            if wrap and diff == side - 1 and side > 2:
                mult += 1
            if wrap and side == 2 and diff == 1:
                mult += 1  # the wrapped bond doubles the direct one
        if mult:
            bonds[(a, b)] = mult
    return bonds


def tree_ball_count(degree: int, depth: int) -> int:
    """Geometric series for the regular-tree ball size."""
    if depth == 0:
        return 1
    b = degree - 1
    if b == 1:
        return 1 + degree * depth
    return 1 + degree * (b**depth - 1) // (b - 1)


def ray_tail(start: int, exponent: float, terms: int = 2_000_000) -> tuple[float, float]:
    """Partial sum of sum_{k>=start} k^-exponent with an integral remainder bound."""
    total = sum(float(k) ** (-exponent) for k in range(start, start + terms))
    last = start + terms - 1
    remainder = last ** (1.0 - exponent) / (exponent - 1.0)
    return total, remainder


# Frozen from brute_box_pairs(2, 8, False): 2 * 8 * 7 bonds.
BOX_2_8_PAIRS = 112
# Frozen from tree_ball_count(3, 7): 1 + 3 * (2**7 - 1).
TREE_3_7_VERTICES = 382
# Frozen from sum(k**-2 for k in 1..9).
CHAIN10_ROW0 = 1.5397677311665408
# Frozen from ray_tail(10, 2.0): 0.105166335681686 with remainder < 5.1e-7.
CHAIN10_GHOST0 = 0.10516633568168564


def test_box_oracle_values_are_frozen_correctly():
    assert len(brute_box_pairs(2, 8, False)) == BOX_2_8_PAIRS
    assert tree_ball_count(3, 7) == TREE_3_7_VERTICES
    assert math.isclose(
        sum(float(k) ** -2 for k in range(1, 10)), CHAIN10_ROW0, rel_tol=1e-15
    )
    total, remainder = ray_tail(10, 2.0)
    assert remainder < 6e-7
    assert math.isclose(total, CHAIN10_GHOST0, abs_tol=6e-7)


# ---------------------------------------------------------------------------
# Boxes


def test_box_1d_path():
    g = build_box(1, 3, wrap=False)
    assert g.vertex_count == 3
    assert g.pairs == ((0, 1), (1, 2))


def test_box_2x2_torus_collapses_doubled_bonds():
    g = build_box(2, 2, wrap=True)
    assert g.vertex_count == 4
    assert g.pairs == ((0, 1), (0, 2), (1, 3), (2, 3))
    assert all(g.pair_multiplicity(p) == 2 for p in g.pairs)
    field = nearest_neighbor_coupling(g, 0.7)
    assert all(math.isclose(field.weight(*p), 1.4) for p in g.pairs)


def test_box_2_8_counts_match_brute_force():
    g = build_box(2, 8, wrap=False)
    assert g.vertex_count == 64
    assert len(g.pairs) == BOX_2_8_PAIRS
    assert set(g.pairs) == set(brute_box_pairs(2, 8, False))


@pytest.mark.parametrize("dimension,side,wrap", [(1, 5, True), (2, 4, True), (3, 3, True), (2, 3, False)])
def test_box_pairs_match_brute_force(dimension, side, wrap):
    g = build_box(dimension, side, wrap=wrap)
    brute = brute_box_pairs(dimension, side, wrap)
    assert set(g.pairs) == set(brute)
    assert {p: g.pair_multiplicity(p) for p in g.pairs} == brute


@pytest.mark.parametrize("dimension,side", [(1, 8), (2, 8), (3, 8), (2, 5)])
def test_unwrapped_box_closed_form_counts(dimension, side):
    g = build_box(dimension, side, wrap=False)
    assert g.vertex_count == side**dimension
    assert len(g.pairs) == dimension * side ** (dimension - 1) * (side - 1)


def test_box_rejects_bad_sizes():
    with pytest.raises(SizeError):
        build_box(0, 4)
    with pytest.raises(SizeError):
        build_box(3, 200)  # 8e6 vertices exceeds the budget


# ---------------------------------------------------------------------------
# Trees


def test_tree_depth_zero_and_one():
    g0 = build_tree_ball(3, 0)
    assert g0.vertex_count == 1 and g0.pairs == ()
    g1 = build_tree_ball(3, 1)
    assert g1.vertex_count == 4
    assert g1.pairs == ((0, 1), (0, 2), (0, 3))


def test_tree_3_7_count():
    g = build_tree_ball(3, 7)
    assert g.vertex_count == TREE_3_7_VERTICES
    assert len(g.pairs) == TREE_3_7_VERTICES - 1


@pytest.mark.parametrize("degree,depth", [(2, 5), (3, 4), (4, 3)])
def test_tree_degrees(degree, depth):
    g = build_tree_ball(degree, depth)
    assert g.vertex_count == tree_ball_count(degree, depth)
    # interior vertices have full degree, leaves degree 1
    leaf_count = sum(1 for x in range(g.vertex_count) if g.degree(x) == 1)
    if degree == 2:
        assert leaf_count == 2
    else:
        assert leaf_count == degree * (degree - 1) ** (depth - 1)
    for x in range(g.vertex_count):
        assert g.degree(x) in (1, degree)


def test_tree_rejects_bad_args():
    with pytest.raises(SizeError):
        build_tree_ball(1, 3)
    with pytest.raises(SizeError):
        build_tree_ball(3, -1)
    with pytest.raises(SizeError):
        build_tree_ball(3, 25)  # ball larger than the vertex budget


# ---------------------------------------------------------------------------
# Long-range chains


def test_chain_couplings():
    g, field = build_long_range_chain(3, 2.0)
    assert g.vertex_count == 3
    assert field.weight(0, 1) == 1.0
    assert field.weight(1, 2) == 1.0
    assert field.weight(0, 2) == 0.25


def test_chain_row_sum_matches_direct_summation():
    g, field = build_long_range_chain(10, 2.0)
    row0 = sum(field.weight(0, j) for j in range(1, 10))
    assert math.isclose(row0, CHAIN10_ROW0, rel_tol=1e-14)


def test_chain_rejects_divergent_exponent():
    with pytest.raises(FamilyError):
        build_long_range_chain(10, 1.0)
    with pytest.raises(FamilyError):
        build_long_range_chain(10, 0.5)


# ---------------------------------------------------------------------------
# Ghost augmentation


def test_ghost_box_corner_and_interior():
    g = build_box(2, 3, wrap=False)
    field = nearest_neighbor_coupling(g, 1.0)
    ghost = ghost_augment(g, field)
    corner = g.coordinates.index((0, 0))
    center = g.coordinates.index((1, 1))
    edge = g.coordinates.index((0, 1))
    assert ghost.ghost_coupling[corner] == 2.0
    assert ghost.ghost_coupling[center] == 0.0
    assert ghost.ghost_coupling[edge] == 1.0
    assert ghost.tail_error == 0.0
    assert ghost.ghost_index == 9


def test_ghost_torus_has_empty_exterior():
    g = build_box(2, 3, wrap=True)
    field = nearest_neighbor_coupling(g, 1.0)
    ghost = ghost_augment(g, field)
    assert all(j == 0.0 for j in ghost.ghost_coupling)


def test_ghost_tree_leaves():
    g = build_tree_ball(3, 2)
    field = nearest_neighbor_coupling(g, 0.5)
    ghost = ghost_augment(g, field)
    for x in range(g.vertex_count):
        expected = 0.5 * (3 - g.degree(x))
        assert ghost.ghost_coupling[x] == expected
    assert ghost.ghost_coupling[0] == 0.0


def test_ghost_chain_endpoint_tail():
    g, field = build_long_range_chain(10, 2.0)
    ghost = ghost_augment(g, field, tail_tol=1e-6)
    assert abs(ghost.ghost_coupling[0] - CHAIN10_GHOST0) <= 1e-6
    assert ghost.tail_error <= 1e-6
    # vertex 9 sees the exterior at distance 1
    t9, _ = ray_tail(1, 2.0)
    assert abs(ghost.ghost_coupling[9] - t9) <= 2e-6


def test_ghost_chain_line_ambient_adds_left_tail():
    g, field = build_long_range_chain(10, 2.0)
    ray = ghost_augment(g, field, ambient="ray")
    line = ghost_augment(g, field, ambient="line")
    t1, _ = ray_tail(1, 2.0)
    assert abs(line.ghost_coupling[0] - ray.ghost_coupling[0] - t1) <= 2e-6
    # the line ambient is symmetric under reversal
    for i in range(10):
        assert math.isclose(line.ghost_coupling[i], line.ghost_coupling[9 - i], rel_tol=1e-12)


def test_ghost_total_matches_crossing_couplings():
    # Embed a small box in a larger one and sum couplings across the cut.
    inner_side, outer_side, dim = 3, 7, 2
    offset = 2
    g = build_box(dim, inner_side, wrap=False)
    field = nearest_neighbor_coupling(g, 1.0)
    ghost = ghost_augment(g, field)
    big = build_box(dim, outer_side, wrap=False)
    big_field = nearest_neighbor_coupling(big, 1.0)
    inner_coords = {tuple(c + offset for c in coord) for coord in g.coordinates}
    crossing = sum(
        j
        for (u, v), j in big_field.pair_weight.items()
        if (big.coordinates[u] in inner_coords) != (big.coordinates[v] in inner_coords)
    )
    assert math.isclose(sum(ghost.ghost_coupling), crossing, rel_tol=1e-12)


def test_ghost_ambient_mismatch_errors():
    g = build_box(2, 3, wrap=False)
    field = nearest_neighbor_coupling(g, 1.0)
    with pytest.raises(FamilyError):
        ghost_augment(g, field, ambient="tree")
    with pytest.raises(FamilyError):
        ghost_augment(g, field, ambient="nowhere")
    g2, f2 = build_long_range_chain(5, 2.0)
    with pytest.raises(PrecisionError):
        ghost_augment(g2, f2, tail_tol=0.0)


# ---------------------------------------------------------------------------
# Condition validation


def test_validate_passes_on_shipped_families():
    cases = [
        (build_box(2, 4, wrap=False), None),
        (build_box(2, 4, wrap=True), None),
        (build_tree_ball(3, 3), None),
    ]
    for g, _ in cases:
        report = validate_conditions(g, nearest_neighbor_coupling(g, 1.0))
        assert report.passed, report.as_dict()
    g, field = build_long_range_chain(8, 2.0)
    assert validate_conditions(g, field).passed


def test_validate_flags_negative_coupling():
    g = build_box(1, 3, wrap=False)
    field = CouplingField(pair_weight={(0, 1): 1.0, (1, 2): -0.3}, family="table")
    report = validate_conditions(g, field)
    named = {c.condition: c for c in report.checks}
    assert not named["ferromagnetic"].passed
    assert "(1, 2)" in named["ferromagnetic"].witness


def test_validate_flags_broken_torus_invariance():
    g = build_box(2, 3, wrap=True)
    weights = dict(nearest_neighbor_coupling(g, 1.0).pair_weight)
    weights[g.pairs[0]] = 2.0
    report = validate_conditions(g, CouplingField(pair_weight=weights, family="table"))
    named = {c.condition: c for c in report.checks}
    assert not named["translation_invariant"].passed


def test_validate_flags_disconnection():
    g = build_box(1, 4, wrap=False)
    field = CouplingField(pair_weight={(0, 1): 1.0, (2, 3): 1.0}, family="table")
    report = validate_conditions(g, field)
    named = {c.condition: c for c in report.checks}
    assert not named["irreducible"].passed
    assert "unreachable" in named["irreducible"].witness


def test_validate_flags_divergent_family():
    # Build the divergent field directly; the constructor refuses it.
    length = 6
    weights = {
        (i, j): float(j - i) ** -0.5 for i in range(length) for j in range(i + 1, length)
    }
    g = build_box(1, length, wrap=False)
    field = CouplingField(pair_weight=weights, family="longrange", params={"exponent": 0.5})
    # harmonic comparison oracle: partial ambient row sums keep growing
    partials = list(itertools.accumulate(float(k) ** -0.5 for k in range(1, 2000)))
    assert partials[-1] > 5 * partials[15]
    report = validate_conditions(g, field)
    named = {c.condition: c for c in report.checks}
    assert not named["locally_finite"].passed


# ---------------------------------------------------------------------------
# Systems


def test_free_system_drops_zero_couplings():
    g = build_box(1, 3, wrap=False)
    field = CouplingField(pair_weight={(0, 1): 1.0, (1, 2): 0.0}, family="table")
    sys_ = free_system(g, field)
    assert sys_.pairs == ((0, 1),)
    assert sys_.coupling_of(1, 2) == 0.0
    assert sys_.strength == (1.0, 1.0, 0.0)


def test_ghost_system_appends_ghost_pairs():
    g = build_box(1, 2, wrap=False)
    field = nearest_neighbor_coupling(g, 0.5)
    ghost = ghost_augment(g, field)
    sys_ = ghost_system(ghost)
    assert sys_.vertex_count == 3
    assert sys_.ghost_index == 2
    assert sys_.pairs == ((0, 1), (0, 2), (1, 2))
    assert sys_.coupling_of(0, 2) == 0.5
    assert list(sys_.base_vertices()) == [0, 1]


def test_system_embedding():
    g = build_box(1, 3, wrap=False)
    field = nearest_neighbor_coupling(g, 1.0)
    free = free_system(g, field)
    ghost = ghost_system(ghost_augment(g, field))
    assert free.embeds_in(ghost)
    assert not ghost.embeds_in(free)


@given(
    dimension=st.integers(1, 3),
    side=st.integers(1, 4),
    wrap=st.booleans(),
    j0=st.floats(0.01, 4.0, allow_nan=False),
)
def test_box_systems_are_consistent(dimension, side, wrap, j0):
    g = build_box(dimension, side, wrap=wrap)
    field = nearest_neighbor_coupling(g, j0)
    sys_ = free_system(g, field)
    # strengths double-count each pair once per endpoint
    assert math.isclose(sum(sys_.strength), 2 * sum(sys_.couplings), rel_tol=1e-12)
    for (u, v), j in zip(sys_.pairs, sys_.couplings):
        assert 0 <= u < v < g.vertex_count
        assert j > 0
    if g.pairs:
        report = validate_conditions(g, field)
        assert report.passed
