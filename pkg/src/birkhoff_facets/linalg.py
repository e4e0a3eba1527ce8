"""Exact dense linear algebra and linear programming over Q or Q[sqrt(d)].

Matrices and vectors are numpy object arrays whose entries are ``Fraction`` or
``QuadExt`` values.  Everything here is exact; pivots are chosen as the first
nonzero entry in (row, column) order so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .scalar import QuadExt, as_field, sign


def field_of(entries) -> int | None:
    for x in np.asarray(entries, dtype=object).flat:
        if isinstance(x, QuadExt):
            return x.d
    return None


def as_matrix(rows, d: int | None = None) -> np.ndarray:
    """Object array of field scalars; ``d=None`` infers the field from entries."""
    arr = np.array(rows, dtype=object)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    if d is None:
        d = field_of(arr)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = as_field(x, d)
    return out


def as_vector(entries, d: int | None = None) -> np.ndarray:
    arr = np.array(entries, dtype=object).ravel()
    if d is None:
        d = field_of(arr)
    return np.array([as_field(x, d) for x in arr], dtype=object)


def _zero_like(d):
    return Fraction(0) if d is None else QuadExt(0, 0, d)


def rref(m) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = as_matrix(m) if not (isinstance(m, np.ndarray) and m.dtype == object) else m.copy()
    n = a.shape[0]
    k = a.shape[1] if a.ndim == 2 else 0
    pivots: list[int] = []
    r = 0
    for c in range(k):
        if r == n:
            break
        nz = next((i for i in range(r, n) if a[i, c]), None)
        if nz is None:
            continue
        if nz != r:
            a[[r, nz]] = a[[nz, r]]
        a[r] = a[r] * (1 / a[r, c])
        for i in range(n):
            if i != r and a[i, c]:
                a[i] = a[i] - a[i, c] * a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m) -> int:
    a = as_matrix(m)
    if a.size == 0:
        return 0
    return len(rref(a)[1])


def kernel_basis(m) -> list[np.ndarray]:
    """Basis of the right kernel ``{x : m x = 0}``; one vector per free column."""
    a = as_matrix(m)
    n, k = a.shape
    d = field_of(a)
    one = Fraction(1) if d is None else QuadExt(1, 0, d)
    if n == 0:
        return [np.array([one if i == j else _zero_like(d) for i in range(k)], dtype=object)
                for j in range(k)]
    r, piv = rref(a)
    basis = []
    for f in range(k):
        if f in piv:
            continue
        v = np.array([_zero_like(d)] * k, dtype=object)
        v[f] = one
        for row, c in enumerate(piv):
            v[c] = -r[row, f]
        basis.append(v)
    return basis


class InconsistentSystem(ValueError):
    """Raised by :func:`solve`; ``certificate`` is a row combination ``y`` with
    ``y @ m == 0`` and ``y @ rhs != 0``."""

    def __init__(self, certificate: np.ndarray):
        super().__init__("linear system is inconsistent")
        self.certificate = certificate


def solve(m, rhs) -> np.ndarray:
    """A particular exact solution of ``m x = rhs`` (free variables set to 0)."""
    a = as_matrix(m)
    b = as_vector(rhs, field_of(a) or field_of(np.asarray(rhs, dtype=object)))
    n, k = a.shape
    if b.shape[0] != n:
        raise ValueError(f"rhs has length {b.shape[0]}, matrix has {n} rows")
    d = field_of(a) or field_of(b)
    one = Fraction(1) if d is None else QuadExt(1, 0, d)
    ident = np.array([[one if i == j else _zero_like(d) for j in range(n)] for i in range(n)],
                     dtype=object).reshape(n, n)
    aug = np.concatenate([a, b.reshape(n, 1), ident], axis=1) if n else np.zeros((0, k + 1), dtype=object)
    r, piv = rref(aug[:, : k + 1]) if n else (aug, [])
    if k in piv:
        # rhs column is a pivot: find the combination of original rows exposing 0 = nonzero
        full, fpiv = rref(aug)
        row = fpiv.index(k)
        cert = full[row, k + 1:]
        raise InconsistentSystem(cert)
    x = np.array([_zero_like(d)] * k, dtype=object)
    for row, c in enumerate(piv):
        x[c] = r[row, k]
    return x


def affine_hull(points: Sequence) -> tuple[np.ndarray, list[np.ndarray]]:
    """Origin (first point) and a basis of the direction space of the points."""
    pts = as_matrix(points)
    if pts.shape[0] == 0:
        raise ValueError("affine hull of an empty point set")
    origin = pts[0].copy()
    diffs = pts[1:] - origin
    if diffs.shape[0] == 0:
        return origin, []
    r, piv = rref(diffs)
    return origin, [r[i].copy() for i in range(len(piv))]


def hull_coordinates(point, origin, basis) -> np.ndarray:
    """Coordinates of ``point`` in the affine frame ``(origin, basis)``."""
    if not basis:
        return np.zeros(0, dtype=object)
    bmat = np.array(basis, dtype=object).T
    return solve(bmat, as_vector(point) - origin)


# --------------------------------------------------------------------- LP


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "unbounded" | "infeasible"
    optimum: object = None
    witness: np.ndarray | None = None


def _pivot(t: np.ndarray, r: int, c: int) -> None:
    t[r] = t[r] * (1 / t[r, c])
    for i in range(t.shape[0]):
        if i != r and t[i, c]:
            t[i] = t[i] - t[i, c] * t[r]


def _bland(t: np.ndarray, basis: list[int], allowed: int):
    """Run Bland-rule pivots on tableau ``t`` (last row = reduced costs, last
    column = rhs).  Returns None on optimality, or the unbounded column."""
    m = t.shape[0] - 1
    while True:
        enter = next((j for j in range(allowed) if sign(t[m, j]) < 0), None)
        if enter is None:
            return None
        best = None
        for i in range(m):
            if sign(t[i, enter]) > 0:
                ratio = t[i, -1] / t[i, enter]
                key = (ratio, basis[i])
                if best is None or sign(ratio - best[0]) < 0 or (ratio == best[0] and basis[i] < best[1]):
                    best = (ratio, basis[i], i)
        if best is None:
            return enter
        _pivot(t, best[2], enter)
        basis[best[2]] = enter


def simplex_standard(a, b, c):
    """Minimise ``c y`` subject to ``a y = b``, ``y >= 0``.

    Returns ``(status, y, basis)`` where ``basis`` lists the columns of ``a``
    that are basic at the end (only meaningful when optimal), and for
    ``unbounded`` ``y`` is a recession direction with ``c y < 0``.
    """
    a = as_matrix(a)
    m, n = a.shape
    d = field_of(a) or field_of(np.asarray(b, dtype=object)) or field_of(np.asarray(c, dtype=object))
    zero = _zero_like(d)
    one = zero + 1
    b = as_vector(b, d) if m else np.zeros(0, dtype=object)
    c = as_vector(c, d)
    a = a.copy()
    for i in range(m):
        if sign(b[i]) < 0:
            a[i] = -a[i]
            b[i] = -b[i]
    # phase 1 tableau: [a | I | b], cost row = -(sum of rows) on real columns
    t = np.empty((m + 1, n + m + 1), dtype=object)
    t[:, :] = zero
    t[:m, :n] = a
    for i in range(m):
        t[i, n + i] = one
    t[:m, -1] = b
    for i in range(m):
        t[m] = t[m] - t[i]
    for i in range(m):
        t[m, n + i] = zero
    basis = [n + i for i in range(m)]
    _bland(t, basis, n)
    if sign(t[m, -1]) < 0:
        return "infeasible", None, None
    # drive artificials out; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            j = next((j for j in range(n) if t[i, j]), None)
            if j is None:
                continue
            _pivot(t, i, j)
            basis[i] = j
        keep.append(i)
    t2 = np.empty((len(keep) + 1, n + 1), dtype=object)
    t2[:-1, :n] = t[keep, :n]
    t2[:-1, n] = t[keep, -1]
    basis = [basis[i] for i in keep]
    t2[-1, :n] = c
    t2[-1, n] = zero
    for i, j in enumerate(basis):
        if t2[-1, j]:
            t2[-1] = t2[-1] - t2[-1, j] * t2[i]
    unb = _bland(t2, basis, n)
    if unb is not None:
        ray = np.array([zero] * n, dtype=object)
        ray[unb] = one
        for i, j in enumerate(basis):
            ray[j] = -t2[i, unb]
        return "unbounded", ray, basis
    y = np.array([zero] * n, dtype=object)
    for i, j in enumerate(basis):
        y[j] = t2[i, n]
    return "optimal", y, basis


def lp_solve(constraints, objective, sense: str = "max") -> LpResult:
    """Optimise ``<objective, x>`` over ``{x : <c_i, x> <= beta_i}`` with ``x`` free.

    ``constraints`` is a sequence of ``(c_i, beta_i)`` pairs.  The problem is
    solved through its dual (one equality row per variable), which is small
    when there are many more constraints than variables.
    """
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    obj = as_vector(objective)
    d = field_of(obj)
    rows = [as_vector(c, d) for c, _ in constraints]
    for c, _ in constraints:
        d = d or field_of(np.asarray(c, dtype=object))
    nvar = obj.shape[0]
    if any(r.shape[0] != nvar for r in rows):
        raise ValueError("constraint and objective dimensions differ")
    a = as_matrix(rows, d) if rows else np.zeros((0, nvar), dtype=object)
    beta = as_vector([bt for _, bt in constraints], d) if rows else np.zeros(0, dtype=object)
    if d is not None:
        obj = as_vector(obj, d)
    c = obj if sense == "max" else -obj
    zero = _zero_like(d)
    m = a.shape[0]

    if m == 0:
        if any(c):
            return LpResult("unbounded", witness=c.copy())
        return LpResult("optimal", zero, np.array([zero] * nvar, dtype=object))

    status, y, basis = simplex_standard(a.T, c, beta)
    if status == "optimal":
        value = sum((beta[i] * y[i] for i in range(m)), zero)
        x = solve(a[basis], beta[basis]) if basis else np.array([zero] * nvar, dtype=object)
        if sense == "min":
            value = -value
        return LpResult("optimal", value, x)
    if status == "unbounded":
        return LpResult("infeasible")
    # dual infeasible: primal is unbounded or infeasible
    feas, _, _ = simplex_standard(a.T, [zero] * nvar, beta)
    if feas == "unbounded":
        return LpResult("infeasible")
    ray_constraints = [(a[i], zero) for i in range(m)] + [(c, zero + 1)]
    ray = lp_solve(ray_constraints, c, "max").witness
    return LpResult("unbounded", witness=ray)
