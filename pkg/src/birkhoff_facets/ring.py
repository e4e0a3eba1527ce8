"""Fraction-free linear algebra over Z or Z[sqrt(d)] for the polytope engine.

Matrices are numpy object arrays holding Python ``int`` (rational case) or
``QuadInt`` entries.  Rank and pivot discovery run modulo a word-size prime
where ``d`` is a quadratic residue, which gives a ring homomorphism
Z[sqrt(d)] -> F_p.  Independence found mod p is independence over the field,
so modular pivots are always sound; the exact kernel is then checked against
every row and a full exact elimination is the fallback.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np
from sympy import nextprime
from sympy.ntheory import sqrt_mod

from .scalar import QuadExt, QuadInt, components

_PRIME_START = 2**31 - 2**20


@lru_cache(maxsize=None)
def modulus(d: int | None) -> tuple[int, int]:
    """Prime ``p`` and a square root of ``d`` mod ``p`` (0 for the rational case)."""
    p = nextprime(_PRIME_START)
    if d is None:
        return p, 0
    while pow(d, (p - 1) // 2, p) != 1:
        p = nextprime(p)
    return p, int(sqrt_mod(d, p))


def ring_of(entries) -> int | None:
    for x in np.asarray(entries, dtype=object).flat:
        if isinstance(x, QuadInt):
            return x.d
    return None


def to_modp(m: np.ndarray, d: int | None) -> np.ndarray:
    p, s = modulus(d)
    flat = m.ravel()
    if d is None:
        out = np.fromiter((int(x) % p for x in flat), dtype=np.int64, count=flat.size)
    else:
        out = np.fromiter(((x.a + x.b * s) % p if isinstance(x, QuadInt) else int(x) % p
                           for x in flat), dtype=np.int64, count=flat.size)
    return out.reshape(m.shape)


def modp_echelon(mp: np.ndarray, d: int | None):
    """Row echelon form mod p.  Returns (pivot_rows, pivot_cols).

    Pivot rows are original row indices forming a basis of the row space mod p;
    they are picked greedily, first nonzero entry by (column, row) order.
    """
    p, _ = modulus(d)
    a = np.array(mp, dtype=np.int64) % p
    n, m = a.shape
    rows_left = np.ones(n, dtype=bool)
    prow, pcol = [], []
    for c in range(m):
        cand = np.nonzero(rows_left & (a[:, c] != 0))[0]
        if cand.size == 0:
            continue
        r = int(cand[0])
        rows_left[r] = False
        prow.append(r)
        pcol.append(c)
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        others = np.nonzero(rows_left & (a[:, c] != 0))[0]
        if others.size:
            a[others] = (a[others] - (a[others, c:c + 1] * a[r]) % p) % p
        if len(prow) == min(n, m):
            break
    return prow, pcol


def content(vec) -> int:
    """Integer gcd of all coordinates (rational and sqrt(d) parts)."""
    g = 0
    for x in vec:
        if isinstance(x, QuadInt):
            g = math.gcd(g, x.a, x.b)
        else:
            g = math.gcd(g, int(x))
        if g == 1:
            return 1
    return g


def primitive(vec: np.ndarray) -> np.ndarray:
    g = content(vec)
    if g > 1:
        vec = np.array([x // g for x in vec], dtype=object)
    return vec


def sign_array(vals) -> np.ndarray:
    return np.fromiter(((x.sign() if isinstance(x, QuadInt) else (x > 0) - (x < 0))
                        for x in vals), dtype=np.int8, count=len(vals))


def is_zero_array(vals) -> np.ndarray:
    return np.fromiter((not x for x in vals), dtype=bool, count=len(vals))


def _exact_kernel_full(m: np.ndarray) -> list[np.ndarray]:
    """Kernel basis by fraction-free Gauss-Jordan elimination (no modular help)."""
    a = np.array(m, dtype=object, copy=True)
    n, k = a.shape
    piv = []  # (row, col)
    r = 0
    for c in range(k):
        nz = [i for i in range(r, n) if a[i, c]]
        if not nz:
            continue
        i = nz[0]
        if i != r:
            a[[r, i]] = a[[i, r]]
        for j in range(n):
            if j != r and a[j, c]:
                a[j] = primitive(a[r, c] * a[j] - a[j, c] * a[r])
        a[r] = primitive(a[r])
        piv.append((r, c))
        r += 1
        if r == n:
            break
    return _kernel_from_reduced(a, piv, k)


def _kernel_from_reduced(a: np.ndarray, piv, k: int) -> list[np.ndarray]:
    pcols = {c for _, c in piv}
    basis = []
    for f in range(k):
        if f in pcols:
            continue
        v = np.zeros(k, dtype=object)
        # x_f = prod(pivots); x_c = -a[r, f] * prod(other pivots)
        prod_all = reduce(lambda x, y: x * y, (a[r, c] for r, c in piv), 1)
        v[f] = prod_all
        for r, c in piv:
            if a[r, f]:
                others = reduce(lambda x, y: x * y, (a[rr, cc] for rr, cc in piv if rr != r), 1)
                v[c] = -a[r, f] * others
        basis.append(primitive(v))
    return basis


def kernel(m: np.ndarray, mp: np.ndarray | None = None, d: int | None = None) -> list[np.ndarray]:
    """Exact right-kernel basis of an integral matrix (primitive vectors).

    ``mp`` is the matrix reduced mod p if already available.
    """
    m = np.asarray(m, dtype=object)
    n, k = m.shape
    if n == 0:
        return [np.array([1 if i == j else 0 for i in range(k)], dtype=object) for j in range(k)]
    if d is None:
        d = ring_of(m)
    if mp is None:
        mp = to_modp(m, d)
    prow, _ = modp_echelon(mp, d)
    basis = _exact_kernel_full(m[prow])
    if basis and len(prow) < n:
        check = m.dot(np.array(basis, dtype=object).T)
        if any(x for x in check.flat):
            # unlucky prime: rank mod p dropped; redo exactly
            return _exact_kernel_full(m)
    return basis


def rank(m: np.ndarray, mp: np.ndarray | None = None, d: int | None = None) -> int:
    m = np.asarray(m, dtype=object)
    if m.size == 0:
        return 0
    return m.shape[1] - len(kernel(m, mp, d))


def scale_to_ring(values, d: int | None):
    """Clear denominators of field scalars.

    Returns ``(ring_array, D)`` with ``ring_array = D * values`` entrywise and
    ``D`` a positive integer.
    """
    vals = np.asarray(values, dtype=object)
    den = 1
    comps = [components(x) for x in vals.flat]
    for a, b in comps:
        den = math.lcm(den, a.denominator, b.denominator)
    out = np.empty(vals.size, dtype=object)
    for i, (a, b) in enumerate(comps):
        ia, ib = int(a * den), int(b * den)
        out[i] = ia if d is None else QuadInt(ia, ib, d)
    return out.reshape(vals.shape), den


def to_field_scalar(x, d: int | None, den: int = 1):
    if d is None:
        return Fraction(int(x), den)
    if isinstance(x, QuadInt):
        return QuadExt(Fraction(x.a, den), Fraction(x.b, den), d)
    return QuadExt(Fraction(int(x), den), 0, d)


def normalize_ray(vec, d: int | None) -> np.ndarray:
    """Canonical positive multiple of a ring vector.

    Over Z[sqrt(d)] the vector is first multiplied by the (positively signed)
    conjugate of its leading entry, making that entry rational; the integer
    content is then removed.  Two vectors that differ by a positive field
    scalar normalize to the same result.
    """
    v = np.asarray(vec, dtype=object)
    if d is not None:
        lead = next((x for x in v if x), None)
        if lead is None:
            raise ValueError("cannot normalize the zero vector")
        if isinstance(lead, QuadInt) and lead.b != 0:
            c = QuadInt(lead.a, -lead.b, d)
            if c.sign() < 0:
                c = -c
            v = np.array([x * c for x in v], dtype=object)
    return primitive(v)


def dot_rows(m: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Exact products ``m @ vec`` as an object array (ring entries)."""
    if m.shape[0] == 0:
        return np.zeros(0, dtype=object)
    return np.asarray(m.dot(vec), dtype=object)


def ring_compare_ratios(num_i, den_i, num_j, den_j) -> int:
    """Sign of ``num_i/den_i - num_j/den_j`` for positive denominators."""
    diff = num_i * den_j - num_j * den_i
    return diff.sign() if isinstance(diff, QuadInt) else (diff > 0) - (diff < 0)


# split form: a ring matrix as integer parts (a, b) with value a + b*sqrt(d) --------

def split(m, d: int | None):
    """Object-int arrays ``(a, b)``; ``b`` is None in the rational case."""
    m = np.asarray(m, dtype=object)
    if d is None:
        return np.vectorize(int, otypes=[object])(m) if m.size else m.copy(), None
    a = np.empty(m.shape, dtype=object)
    b = np.empty(m.shape, dtype=object)
    for idx, x in np.ndenumerate(m):
        if isinstance(x, QuadInt):
            a[idx], b[idx] = x.a, x.b
        else:
            a[idx], b[idx] = int(x), 0
    return a, b


def join(a, b, d: int | None) -> np.ndarray:
    if d is None or b is None:
        return np.asarray(a, dtype=object)
    out = np.empty(np.shape(a), dtype=object)
    for idx in np.ndindex(out.shape):
        out[idx] = QuadInt(int(a[idx]), int(b[idx]), d)
    return out


def split_mul(xa, xb, ya, yb, d):
    """Elementwise product of split values (broadcasting)."""
    if d is None:
        return xa * ya, None
    return xa * ya + d * (xb * yb), xa * yb + xb * ya


def split_dot(ma, mb, va, vb, d):
    """``M @ v`` in split form."""
    if d is None:
        return ma.dot(va), None
    return ma.dot(va) + d * mb.dot(vb), ma.dot(vb) + mb.dot(va)


def _int_sign(x: np.ndarray) -> np.ndarray:
    return ((x > 0).astype(np.int8) - (x < 0).astype(np.int8)) if x.size else np.zeros(0, np.int8)


def split_sign(a, b, d) -> np.ndarray:
    """Vectorized exact signs of ``a + b*sqrt(d)``."""
    a = np.asarray(a, dtype=object)
    sa = _int_sign(a)
    if d is None or b is None:
        return sa
    b = np.asarray(b, dtype=object)
    sb = _int_sign(b)
    out = np.where(sb == 0, sa, np.where(sa == 0, sb, sa))
    mixed = np.nonzero((sa != 0) & (sb != 0) & (sa != sb))
    if mixed[0].size:
        am, bm = a[mixed], b[mixed]
        out[mixed] = sa[mixed] * _int_sign(am * am - d * (bm * bm))
    return out


def split_normalize_rows(ra, rb, d):
    """Row-wise :func:`normalize_ray` on split matrices."""
    ra = np.asarray(ra, dtype=object)
    if ra.shape[0] == 0:
        return ra, rb
    if d is not None:
        nz = (ra != 0) | (rb != 0)
        lead = nz.argmax(axis=1)
        rows = np.arange(ra.shape[0])
        la, lb = ra[rows, lead], rb[rows, lead]
        fix = np.nonzero(lb != 0)[0]
        if fix.size:
            ca, cb = la[fix], -lb[fix]
            s = split_sign(ca, cb, d)
            ca, cb = (ca * s).astype(object), (cb * s).astype(object)
            na, nb = split_mul(ra[fix], rb[fix], ca[:, None], cb[:, None], d)
            ra = ra.copy()
            rb = rb.copy()
            ra[fix], rb[fix] = na, nb
        g = np.gcd.reduce(np.concatenate([ra, rb], axis=1), axis=1)
    else:
        g = np.gcd.reduce(ra, axis=1)
    g = np.where(g == 0, 1, g).astype(object)[:, None]
    ra = ra // g
    if d is not None:
        rb = rb // g
    return ra, rb
