"""Matrix groups and their symmetry actions on conv(G).

Oracles: Coxeter group orders as products of the invariant degrees; direct
matrix products for closure; sympy for determinants.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from birkhoff_facets.groups import (
    GroupTooLarge, TransposeError, build_symmetry_action, coxeter_group, generate_group,
    parse_group_name,
)
from birkhoff_facets.linalg import as_matrix, rank
from birkhoff_facets.scalar import qe_parse

DEGREES = {
    "A2": (2, 3), "A3": (2, 3, 4), "B3": (2, 4, 6), "B4": (2, 4, 6, 8),
    "F4": (2, 6, 8, 12), "H3": (2, 6, 10), "H4": (2, 12, 20, 30),
    "I2_3": (2, 3), "I2_5": (2, 5), "I2_6": (2, 6),
}


@pytest.mark.parametrize("name", sorted(DEGREES))
def test_order_is_product_of_degrees(name, cached):
    assert cached.group(name).order == math.prod(DEGREES[name])


def test_h4_needs_sqrt5(cached):
    assert cached.group("H4").d == 5
    assert cached.group("F4").d is None


@pytest.mark.parametrize("text,expected", [
    ("F4", ("F", 4)), ("h4", ("H", 4)), ("I2_5", ("I2", 5)), ("I2(7)", ("I2", 7)), ("A_3", ("A", 3)),
])
def test_parse_group_name(text, expected):
    assert parse_group_name(text) == expected


@pytest.mark.parametrize("bad", ["X9", "", "F", "Q4", "I2_"])
def test_unknown_group(bad):
    with pytest.raises(ValueError):
        coxeter_group(bad)


@pytest.mark.parametrize("name", ["F4", "H3", "I2_5"])
def test_closed_under_products(name, cached):
    G = cached.group(name)
    rng = np.random.default_rng(0)
    for _ in range(10):
        i, j = rng.integers(len(G), size=2)
        assert G.contains(G.element(int(i)).dot(G.element(int(j))))


@pytest.mark.parametrize("name", ["F4", "H4"])
def test_orthogonal_generators(name, cached):
    G = cached.group(name)
    for g in G.generators:
        assert np.array_equal(g.dot(g.T), as_matrix(np.eye(4, dtype=int), G.d))


def test_elements_distinct_and_invertible(cached):
    G = cached.group("H3")
    keys = {tuple(map(str, m.ravel())) for m in G.elements}
    assert len(keys) == G.order
    assert all(rank(m) == 3 for m in G.elements[:20])


def test_element_cap():
    with pytest.raises(GroupTooLarge):
        coxeter_group("B4", cap=100)


def test_singular_generator_rejected():
    with pytest.raises(ValueError):
        generate_group(2, [[[1, 0], [0, 0]]])


def test_export_text_roundtrip(cached):
    G = cached.group("I2_5")
    blocks = G.export_text().strip().split("\n\n")
    assert len(blocks) == 10
    m = [[qe_parse(x, G.d) for x in row.split()] for row in blocks[3].splitlines()]
    assert G.index_of(m) == 3


# symmetry action ------------------------------------------------------------------

SYM_ORDERS = {
    # |G|^2 / |Z(G)| for left-right, doubled by transpose (and by the F4 diagram automorphism)
    "A3": 24 * 24 * 2, "B4": 384 * 384 // 2 * 2, "H3": 120 * 120 // 2 * 2,
    "I2_5": 10 * 10 * 2, "F4": 1152 * 1152 // 2 * 2 * 2,
}


@pytest.mark.parametrize("name", sorted(SYM_ORDERS))
def test_symmetry_orders(name, cached):
    assert cached.symmetry(name).perm_group.order == SYM_ORDERS[name]


def test_h4_symmetry_order(cached):
    assert cached.symmetry("H4").perm_group.order == 14400 * 14400 // 2 * 2


def test_center_sizes(cached):
    assert len(cached.group("F4").center()) == 2
    assert len(cached.group("A3").center()) == 1


def test_transpose_needs_orthogonality(cached):
    with pytest.raises(TransposeError):
        build_symmetry_action(cached.group("I2_5"))
    assert cached.symmetry("I2_5").twisted


@given(st.integers(0, 1151), st.integers(0, 1151))
def test_left_right_perms_are_products(i, j):
    from conftest import group
    G = group("F4")
    x = G.element(j)
    assert G.left_perm(i)[j] == G.index_of(G.element(i).dot(x))
    assert G.right_perm(i)[j] == G.index_of(x.dot(G.element(i)))


def test_symmetries_preserve_traces(cached):
    # every generator of the action maps the F4 orbit-1 facet to a facet with the same incidence
    from birkhoff_facets.polytope import verify_inequality
    from birkhoff_facets.reference import F4_ORBIT1, matrix
    G = cached.group("F4")
    rep = verify_inequality(G, matrix(F4_ORBIT1), 1)
    inc = np.array(rep.incidence)
    for p in cached.symmetry("F4").perm_group.gens:
        img = np.sort(p[inc])
        assert cached.polytope("F4").is_facet_incidence(img)
