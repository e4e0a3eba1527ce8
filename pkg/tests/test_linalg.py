"""Exact linear algebra over Q and Q[sqrt(5)], plus the fraction-free ring layer.

Oracle: sympy matrices (rank, nullspace) and brute-force LP vertex checks.
"""

import itertools
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from birkhoff_facets import ring
from birkhoff_facets.linalg import (
    InconsistentSystem, as_matrix, kernel_basis, lp_solve, rank, rref, solve,
)
from birkhoff_facets.scalar import QuadExt, QuadInt

small = st.integers(-4, 4)


def int_matrix(rows=st.integers(1, 6), cols=st.integers(1, 6)):
    return st.tuples(rows, cols).flatmap(
        lambda rc: st.lists(st.lists(small, min_size=rc[1], max_size=rc[1]),
                            min_size=rc[0], max_size=rc[0]))


def quad_matrix():
    return int_matrix().flatmap(
        lambda m: st.lists(st.lists(small, min_size=len(m[0]), max_size=len(m[0])),
                           min_size=len(m), max_size=len(m)).map(
            lambda b: [[QuadExt(x, y, 5) for x, y in zip(r1, r2)] for r1, r2 in zip(m, b)]))


def to_sympy(m):
    def conv(x):
        if isinstance(x, QuadExt):
            return sympy.Rational(x.a.numerator, x.a.denominator) + \
                sympy.Rational(x.b.numerator, x.b.denominator) * sympy.sqrt(5)
        return sympy.Rational(int(x))
    return sympy.Matrix([[conv(x) for x in row] for row in m])


@given(int_matrix())
def test_rank_matches_sympy_rational(m):
    assert rank(m) == to_sympy(m).rank()


@given(quad_matrix())
def test_rank_matches_sympy_quadratic(m):
    assert rank(as_matrix(m, 5)) == to_sympy(m).rank(simplify=True)


@given(quad_matrix())
def test_kernel_is_kernel(m):
    a = as_matrix(m, 5)
    basis = kernel_basis(a)
    assert len(basis) == a.shape[1] - rank(a)
    for v in basis:
        assert all(x == 0 for x in a.dot(v))


@given(int_matrix())
def test_rref_is_reduced(m):
    r, piv = rref(m)
    for i, c in enumerate(piv):
        assert r[i, c] == 1
        assert all(r[j, c] == 0 for j in range(r.shape[0]) if j != i)
    assert all(not any(r[i]) for i in range(len(piv), r.shape[0]))


@given(int_matrix(), st.data())
def test_solve_or_certificate(m, data):
    a = as_matrix(m)
    b = data.draw(st.lists(small, min_size=a.shape[0], max_size=a.shape[0]))
    try:
        x = solve(a, b)
    except InconsistentSystem as exc:
        y = exc.certificate
        assert all(v == 0 for v in y.dot(a))
        assert sum(yi * bi for yi, bi in zip(y, b)) != 0
    else:
        assert list(a.dot(x)) == [Fraction(v) for v in b]


def test_solve_inconsistent_example():
    with pytest.raises(InconsistentSystem):
        solve([[1, 1], [2, 2]], [1, 3])


# LP ---------------------------------------------------------------------------

def _brute_force_max(cons, obj):
    """Optimum over all basic feasible solutions (bounded 2-D/3-D problems)."""
    n = len(obj)
    best = None
    for idx in combinations(range(len(cons)), n):
        a = as_matrix([cons[i][0] for i in idx])
        if rank(a) < n:
            continue
        x = solve(a, [cons[i][1] for i in idx])
        if all(sum(ci * xi for ci, xi in zip(c, x)) <= b for c, b in cons):
            v = sum(oi * xi for oi, xi in zip(obj, x))
            best = v if best is None or v > best else best
    return best


CUBE = [([1 if j == i else 0 for j in range(3)], 1) for i in range(3)] + \
       [([-1 if j == i else 0 for j in range(3)], 1) for i in range(3)]


@given(st.lists(st.integers(-9, 9), min_size=3, max_size=3),
       st.lists(st.tuples(st.lists(small, min_size=3, max_size=3), st.integers(0, 5)), max_size=4))
def test_lp_matches_vertex_enumeration(obj, extra):
    cons = CUBE + [(c, b) for c, b in extra]
    res = lp_solve(cons, obj)
    assert res.status == "optimal"  # the cube bounds it and 0 is feasible
    assert res.optimum == _brute_force_max(cons, obj)
    x = res.witness
    assert all(sum(ci * xi for ci, xi in zip(c, x)) <= b for c, b in cons)


def test_lp_statuses():
    assert lp_solve([([1, 0], 1)], [0, 1]).status == "unbounded"
    assert lp_solve([([1], -1), ([-1], -1)], [1]).status == "infeasible"


def test_lp_quadratic_field():
    phi = QuadExt(Fraction(1, 2), Fraction(1, 2), 5)
    res = lp_solve([([1], phi), ([-1], 0)], [QuadExt(1, 0, 5)])
    assert res.optimum == phi


def test_lp_cross_polytope_constraints():
    # max x+y+z over the octahedron |x|+|y|+|z| <= 1 (8 constraints) is 1
    cons = [([sx, sy, sz], 1) for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)]
    res = lp_solve(cons, [1, 1, 1])
    assert res.optimum == 1


# ring layer ---------------------------------------------------------------------

@given(int_matrix())
def test_modular_kernel_matches_field(m):
    a = np.array(m, dtype=object)
    ker = ring.kernel(a)
    assert len(ker) == a.shape[1] - rank(m)
    for v in ker:
        assert not any(a.dot(v))
        assert ring.content(v) == 1


@given(quad_matrix())
def test_quadint_kernel(m):
    a = np.array([[QuadInt(int(x.a), int(x.b), 5) for x in row] for row in m], dtype=object)
    ker = ring.kernel(a, d=5)
    assert len(ker) == a.shape[1] - rank(as_matrix(m, 5))
    for v in ker:
        assert all(not x for x in a.dot(v))


@given(st.lists(st.tuples(small, small), min_size=1, max_size=6), st.integers(1, 30))
def test_normalize_ray_is_scale_invariant(entries, k):
    v = np.array([QuadInt(a, b, 5) for a, b in entries], dtype=object)
    if not any(v):
        return
    w = np.array([x * QuadInt(k, 1, 5) for x in v], dtype=object)  # k + sqrt5 > 0
    assert list(ring.normalize_ray(v, 5)) == list(ring.normalize_ray(w, 5))


@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=1, max_size=20))
def test_split_sign_vectorized(pairs):
    a = np.array([p[0] for p in pairs], dtype=object)
    b = np.array([p[1] for p in pairs], dtype=object)
    got = ring.split_sign(a, b, 5)
    assert list(got) == [QuadInt(x, y, 5).sign() for x, y in pairs]


@given(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=12), min_size=4, max_size=4))
def test_lp_cross_polytope_r4(r):
    # 16 sign-pattern constraints; oracle: the 8 vertices +-e_i
    cons = [(list(s), 1) for s in itertools.product((1, -1), repeat=4)]
    res = lp_solve(cons, r)
    assert res.status == "optimal"
    assert res.optimum == max(max(x, -x) for x in r)
