"""Vertex-described polytopes, facets and inequality checks.

The engine works with a homogenized integral matrix ``H``: row ``i`` is
``N*D * (1, r_i)`` where ``r_i`` are reduced vertex coordinates (affine hull
coordinates centered at the barycenter), ``N`` the vertex count and ``D`` the
denominator of the input.  Facets of the polytope are exactly the extreme rays
of the cone ``{f : H f >= 0}``.

Pairing convention for matrix groups: ``Tr(X A) = sum_ij X_ij A_ji``, so a
row-major flattened vertex ``vec(X)`` pairs with ``vec(A^T)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key

import numpy as np

from . import ring
from .groups import MatGroup
from .linalg import as_matrix, as_vector, lp_solve, rank as field_rank
from .scalar import QuadExt, QuadInt, as_field, sign


@dataclass(frozen=True)
class Facet:
    """Facet ``<normal, x> <= rhs`` in reduced coordinates.

    ``incidence`` is the sorted tuple of vertex indices attaining equality.
    """

    normal: tuple
    rhs: object
    incidence: tuple

    @property
    def incidence_count(self) -> int:
        return len(self.incidence)


class VPolytope:
    """Convex hull of finitely many points given exactly.

    ``points`` is a 2-D object array of ring values (``int`` or ``QuadInt``)
    representing ``points / den``.  Duplicate points are removed; ``index_map``
    sends input positions to vertex indices.
    """

    def __init__(self, points: np.ndarray, den: int = 1, d: int | None = None):
        pts = np.asarray(points, dtype=object)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("need a nonempty 2-D point array")
        self.d = d
        self.den = den
        keys = {}
        keep = []
        index_map = []
        for i, row in enumerate(pts):
            key = tuple((x.a, x.b) if isinstance(x, QuadInt) else (int(x), 0) for x in row)
            if key not in keys:
                keys[key] = len(keep)
                keep.append(i)
            index_map.append(keys[key])
        self.index_map = np.array(index_map, dtype=np.int64)
        self.points = pts[keep]
        self.n_vertices, self.ambient_dim = self.points.shape
        self._build()

    # construction ---------------------------------------------------------
    def _build(self):
        n, m = self.points.shape
        total = self.points.sum(axis=0) if n else np.zeros(m, dtype=object)
        diffs = np.array([[n * x for x in row] for row in self.points], dtype=object) - total
        # pivot columns of the centered points span the affine hull
        if m:
            prow, pcol = ring.modp_echelon(ring.to_modp(diffs, self.d), self.d)
            exact_rank = ring.rank(diffs, d=self.d) if n > 1 else 0
            if len(pcol) != exact_rank:
                pcol = _exact_pivot_cols(diffs, self.d)
        else:
            pcol = []
        self.pivots = list(pcol)
        self.full_dim = len(self.pivots)
        nd = n * self.den
        h = np.empty((n, self.full_dim + 1), dtype=object)
        h[:, 0] = nd
        if self.full_dim:
            h[:, 1:] = diffs[:, self.pivots]
        self.H = h
        self.Hp = ring.to_modp(h, self.d)
        self.scale = nd  # H[i, 1:] = scale * r_i
        self.origin = [self._field(x, nd) for x in total]
        self._reduced = None
        self._span = None

    def _field(self, x, den):
        return ring.to_field_scalar(x, self.d, den)

    @property
    def vertices(self) -> np.ndarray:
        return np.array([[self._field(x, self.den) for x in row] for row in self.points], dtype=object)

    @property
    def reduced_vertices(self) -> np.ndarray:
        if self._reduced is None:
            self._reduced = np.array([[self._field(x, self.scale) for x in row[1:]] for row in self.H],
                                     dtype=object).reshape(self.n_vertices, self.full_dim)
        return self._reduced

    @property
    def span_basis(self) -> list[np.ndarray]:
        """Basis ``b_k`` with ``vertex_i = origin + sum_k r_ik b_k`` exactly."""
        if self._span is None:
            if self.full_dim == 0:
                self._span = []
            else:
                # v - o lies in the row space, whose RREF rows have unit pivots
                from .linalg import rref
                diffs = self.vertices - np.array(self.origin, dtype=object)
                red, piv = rref(diffs)
                self._span = [red[i] for i in range(len(piv))]
        return self._span

    def lift(self, reduced) -> np.ndarray:
        """Ambient point from reduced coordinates."""
        out = np.array(self.origin, dtype=object)
        for c, b in zip(reduced, self.span_basis):
            out = out + c * b
        return out

    # functionals -----------------------------------------------------------
    def functional_values(self, f) -> np.ndarray:
        return ring.dot_rows(self.H, np.asarray(f, dtype=object))

    def facet_from_functional(self, f) -> Facet:
        """Facet record for a ring functional ``f`` on homogenized rows."""
        vals = self.functional_values(f)
        signs = ring.sign_array(vals)
        if np.any(signs < 0):
            raise ValueError("functional is not valid on the polytope")
        inc = tuple(int(i) for i in np.nonzero(signs == 0)[0])
        f0 = ring.to_field_scalar(f[0], self.d)
        # f.h >= 0  <=>  <-f_x, r> <= f0
        fx = [-ring.to_field_scalar(x, self.d) for x in f[1:]]
        normal, rhs = _normalize(fx, f0)
        return Facet(tuple(normal), rhs, inc)

    def functional_of(self, facet: Facet) -> np.ndarray:
        """Primitive ring functional of a facet (inverse of the above)."""
        vec = [facet.rhs] + [-x for x in facet.normal]
        scaled, _ = ring.scale_to_ring(np.array(vec, dtype=object), self.d)
        return ring.normalize_ray(scaled, self.d)

    def functional_from_incidence(self, incidence) -> np.ndarray:
        """The unique (up to scale) valid functional vanishing on ``incidence``."""
        rows = np.asarray(sorted(incidence), dtype=np.int64)
        ker = ring.kernel(self.H[rows], self.Hp[rows], self.d)
        if len(ker) != 1:
            raise ValueError("incidence set does not determine a facet")
        f = ker[0]
        vals = ring.sign_array(self.functional_values(f))
        if np.any(vals < 0):
            f = -f
            vals = -vals
        if np.any(vals < 0):
            raise ValueError("incidence set is not a face")
        return ring.normalize_ray(f, self.d)

    def facet_from_incidence(self, incidence) -> Facet:
        return self.facet_from_functional(self.functional_from_incidence(incidence))

    def is_facet_incidence(self, incidence) -> bool:
        rows = np.asarray(sorted(incidence), dtype=np.int64)
        if len(rows) < self.full_dim:
            return False
        return ring.rank(self.H[rows], self.Hp[rows], self.d) == self.full_dim

    def check_facet(self, facet: Facet) -> bool:
        """Validity, exact incidence and facet rank."""
        f = self.functional_of(facet)
        signs = ring.sign_array(self.functional_values(f))
        if np.any(signs < 0):
            return False
        inc = tuple(int(i) for i in np.nonzero(signs == 0)[0])
        return inc == tuple(facet.incidence) and self.is_facet_incidence(inc)

    def ambient_inequality(self, facet: Facet):
        """Ambient normal ``a`` and rhs with ``<a, vertex> <= rhs`` on the polytope."""
        a = np.array([as_field(0, self.d)] * self.ambient_dim, dtype=object)
        # reduced coordinates are coordinates on the pivot columns
        for c, x in zip(self.pivots, facet.normal):
            a[c] = x
        rhs = facet.rhs + sum((a[c] * self.origin[c] for c in range(self.ambient_dim)),
                              as_field(0, self.d))
        return a, rhs


def _exact_pivot_cols(m, d):
    from .linalg import rref
    field = np.array([[ring.to_field_scalar(x, d) for x in row] for row in m], dtype=object)
    return rref(field)[1]


def _normalize(normal, rhs):
    """Scale to rhs 1, or (rhs 0) to a positive leading normal entry of 1."""
    if sign(rhs) != 0:
        return [x / rhs for x in normal], rhs / rhs
    lead = next(x for x in normal if x)
    s = abs(lead)
    return [x / s for x in normal], rhs


def build_vpolytope(G) -> VPolytope:
    """Polytope conv(G) with row-major flattened group elements as vertices."""
    if isinstance(G, MatGroup):
        rows, den = G.vertex_rows()
        return VPolytope(rows, den, G.d)
    raise TypeError("expected a MatGroup")


_POLY_CACHE: dict[int, VPolytope] = {}


def polytope_of(G: MatGroup) -> VPolytope:
    key = id(G)
    poly = _POLY_CACHE.get(key)
    if poly is None or poly.n_vertices != len(G):
        poly = _POLY_CACHE[key] = build_vpolytope(G)
    return poly


# ------------------------------------------------------------- initial facet

def _generic_objective(k: int, seed: int):
    rng = np.random.default_rng(seed)
    nums = rng.integers(-1000, 1001, size=k)
    dens = rng.integers(1, 100, size=k)
    return [Fraction(int(a), int(b)) for a, b in zip(nums, dens)]


def rotate_to_facet(M: np.ndarray, Mp: np.ndarray, d, f) -> np.ndarray:
    """Rotate a valid functional ``f`` (``M f >= 0``) until its zero set has
    rank ``k - 1``.  Each step keeps the zero set and adds at least one row."""
    k = M.shape[1]
    f = np.asarray(f, dtype=object)
    while True:
        vals = ring.dot_rows(M, f)
        signs = ring.sign_array(vals)
        zero = np.nonzero(signs == 0)[0]
        ker = ring.kernel(M[zero], Mp[zero], d) if len(zero) else \
            [np.array([1 if i == j else 0 for i in range(k)], dtype=object) for j in range(k)]
        if len(ker) == 1:
            return ring.normalize_ray(f, d)
        # direction in the kernel not proportional to f
        g = None
        for v in ker:
            gv = ring.dot_rows(M, v)
            # v proportional to f iff v*f0 - f*v0 vanishes; test on values instead
            if _independent(gv, vals):
                g, gvals = v, gv
                break
        if g is None:
            raise ArithmeticError("kernel does not contain a direction independent of f")
        gs = ring.sign_array(gvals)
        if not np.any(gs > 0):
            g, gvals, gs = -g, -gvals, -gs
        # largest t with f - t g >= 0: min over g > 0 of f/g
        best = None
        for i in np.nonzero(gs > 0)[0]:
            if best is None or ring.ring_compare_ratios(vals[i], gvals[i], vals[best], gvals[best]) < 0:
                best = i
        f = ring.normalize_ray(gvals[best] * f - vals[best] * g, d)


def _independent(a: np.ndarray, b: np.ndarray) -> bool:
    """True unless the value vectors ``a`` and ``b`` are proportional."""
    nz = next((i for i in range(len(b)) if b[i]), None)
    if nz is None:
        return any(x for x in a)
    for i in range(len(a)):
        if a[i] * b[nz] - b[i] * a[nz]:
            return True
    return False


def initial_facet(P: VPolytope, seed: int = 0, method: str = "vertex") -> Facet:
    """One facet of ``P``.

    A seeded generic objective is maximized, then the supporting hyperplane is
    rotated until it is facet-defining.  ``method="vertex"`` maximizes over
    convex combinations of the vertices (the optimum sits at a vertex);
    ``method="polar"`` solves the polar LP, whose optimal vertex is already a
    facet on small inputs.
    """
    if P.full_dim < 1:
        raise ValueError("a polytope of dimension 0 has no facets")
    f = initial_functional(P.H, P.Hp, P.d, seed, method)
    return P.facet_from_functional(f)


def initial_functional(M, Mp, d, seed: int = 0, method: str = "vertex"):
    """Facet functional of the cone matrix ``M`` (column 0 positive on all rows)."""
    k = M.shape[1]
    f = None
    if k > 1 and method == "polar":
        f = _polar_lp(M, Mp, d, seed)
    elif k > 1 and method == "vertex":
        f = _vertex_support(M, d, seed)
    elif method not in ("polar", "vertex"):
        raise ValueError(f"unknown method {method!r}")
    if f is None:
        f = np.array([1] + [0] * (k - 1), dtype=object)
        if d is not None:
            f = np.array([QuadInt(int(x), 0, d) for x in f], dtype=object)
    return rotate_to_facet(M, Mp, d, f)


def _vertex_support(M, d, seed):
    """Supporting functional at the vertex maximizing a generic objective."""
    k = M.shape[1]
    c, _ = ring.scale_to_ring(np.array(_generic_objective(k - 1, seed), dtype=object), None)
    if d is not None:
        c = np.array([QuadInt(int(x), 0, d) for x in c], dtype=object)
    vals = ring.dot_rows(M[:, 1:], c)
    top = _top_ratios(vals, M[:, 0], range(len(M)), 1)[0]
    f = np.empty(k, dtype=object)
    f[0] = vals[top]
    f[1:] = -M[top, 0] * c
    return ring.normalize_ray(f, d)


def _polar_lp(M, Mp, d, seed, batch: int | None = None, rounds: int = 6):
    """Supporting functional from a generic objective over the polar body.

    The polar LP ``max c.a`` s.t. ``a.M[i,1:] <= M[i,0]`` runs on a working set
    of rows that grows by the most violated rows (constraint generation), for
    at most ``rounds`` solves.  The final direction ``a`` is scaled so that
    its maximum over all rows is attained, giving a valid functional (a facet
    when the LP converged).  Returns None if the LP fails.
    """
    k = M.shape[1]
    batch = batch or k
    c = _generic_objective(k - 1, seed)
    if d is not None:
        c = [QuadExt(x, 0, d) for x in c]
    work = list(ring.modp_echelon(Mp, d)[0])
    tail = M[:, 1:]
    vec = None
    for _ in range(rounds):
        cons = [([ring.to_field_scalar(x, d) for x in M[i, 1:]], ring.to_field_scalar(M[i, 0], d))
                for i in work]
        res = lp_solve(cons, c, "max")
        if res.status == "infeasible":
            return None
        vec, den = ring.scale_to_ring(np.array(list(res.witness), dtype=object), d)
        vals = ring.dot_rows(tail, vec)
        inwork = set(work)
        if res.status == "unbounded":
            # the rows cutting the ray bound the next LP
            cand = [i for i in np.nonzero(ring.sign_array(vals) > 0)[0].tolist() if i not in inwork]
            if not cand:
                return None
            work.extend(_top_ratios(vals, M[:, 0], cand, batch))
            vec = None
            continue
        over = ring.sign_array(vals - den * M[:, 0])
        bad = [i for i in np.nonzero(over > 0)[0].tolist() if i not in inwork]
        if not bad:
            break
        work.extend(_top_ratios(vals, M[:, 0], bad, batch))
    if vec is None:
        return None
    vals = ring.dot_rows(tail, vec)
    top = _top_ratios(vals, M[:, 0], range(len(M)), 1)[0]
    if ring.sign_array([vals[top]])[0] <= 0:
        return None
    f = np.empty(k, dtype=object)
    f[0] = vals[top]
    f[1:] = -M[top, 0] * vec
    return ring.normalize_ray(f, d)


def _top_ratios(vals, den, idx, count):
    """Indices with the largest ``vals[i] / den[i]`` (``den > 0``), ties by index."""
    idx = list(idx)

    def cmp(i, j):
        s = ring.ring_compare_ratios(vals[j], den[j], vals[i], den[i])
        return s if s else (i > j) - (i < j)

    return sorted(idx, key=cmp_to_key(cmp))[:count]


# ------------------------------------------------------------- verification

@dataclass(frozen=True)
class InequalityReport:
    valid: bool
    incidence_count: int
    is_facet: bool
    rank_of_A: int
    incidence: tuple


def trace_values(G: MatGroup, A) -> tuple[np.ndarray, np.ndarray, int]:
    """Exact ``Tr(X A)`` for every element: ``(num_a + num_b sqrt(d)) / den``."""
    Am = as_matrix(A, G.d)
    if Am.shape != (G.dim, G.dim):
        raise ValueError(f"matrix must be {G.dim}x{G.dim}")
    a_vec = Am.T.reshape(-1)  # vec(A^T) pairs with row-major vec(X)
    ra, da = ring.scale_to_ring(a_vec, G.d)
    aa = np.array([x.a if isinstance(x, QuadInt) else int(x) for x in ra], dtype=object)
    ab = np.array([x.b if isinstance(x, QuadInt) else 0 for x in ra], dtype=object)
    n2 = G.dim * G.dim
    xa = G.A.reshape(len(G), n2).astype(object)
    xb = G.B.reshape(len(G), n2).astype(object)
    dd = G.d or 0
    num_a = xa.dot(aa) + dd * xb.dot(ab)
    num_b = xa.dot(ab) + xb.dot(aa)
    return num_a, num_b, G.D * da


def quad_signs(num_a, num_b, d) -> np.ndarray:
    from .scalar import quad_sign
    dd = d or 1
    return np.array([quad_sign(int(a), int(b), dd) for a, b in zip(num_a, num_b)], dtype=np.int8)


def verify_inequality(G: MatGroup, A, rhs=1) -> InequalityReport:
    """Check ``Tr(X A) <= rhs`` over all ``X`` in ``G``."""
    num_a, num_b, den = trace_values(G, A)
    r = as_field(rhs, G.d)
    ra, rb = (r.a, r.b) if isinstance(r, QuadExt) else (Fraction(r), Fraction(0))
    # value - rhs, scaled by den * lcm(rhs denominators)
    rden = int(np.lcm(ra.denominator, rb.denominator))
    da = num_a * rden - int(ra * rden) * den
    db = num_b * rden - int(rb * rden) * den
    signs = quad_signs(da, db, G.d)
    inc = tuple(int(i) for i in np.nonzero(signs == 0)[0])
    valid = bool(np.all(signs <= 0))
    P = polytope_of(G)
    is_facet = valid and len(inc) > 0 and P.is_facet_incidence(P.index_map[list(inc)])
    return InequalityReport(valid, len(inc), bool(is_facet), field_rank(as_matrix(A, G.d)), inc)


def facet_matrix(P: VPolytope, facet: Facet, dim: int) -> tuple[np.ndarray, object]:
    """The matrix ``A`` with ``Tr(X A) <= rhs`` describing ``facet`` of conv(G)."""
    a, rhs = P.ambient_inequality(facet)
    return a.reshape(dim, dim).T.copy(), rhs
