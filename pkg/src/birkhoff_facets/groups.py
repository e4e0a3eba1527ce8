"""Finite matrix groups over Q or Q[sqrt(d)] and their action on conv(G).

A group element ``X`` is stored as integer numerator matrices ``A``, ``B`` with
``X = (A + B*sqrt(d)) / D`` for one common denominator ``D``.  That keeps
closure, lookup and the vertex symmetry action in vectorized integer numpy.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Sequence

import numpy as np

from .linalg import as_matrix, field_of, rref
from .permgroup import PermGroup, StabChain, _complete, inverse, is_identity, schreier_sims
from .ring import scale_to_ring
from .scalar import QuadExt, QuadInt, qe_format, quad_sign

DEFAULT_ELEMENT_CAP = 1_000_000


class GroupTooLarge(RuntimeError):
    pass


class _Rescale(Exception):
    pass


def _split(mat, d):
    """Numerator pair and denominator of a field matrix."""
    ring, den = scale_to_ring(np.asarray(mat, dtype=object), d)
    a = np.vectorize(lambda x: x.a if isinstance(x, QuadInt) else int(x), otypes=[object])(ring)
    b = np.vectorize(lambda x: x.b if isinstance(x, QuadInt) else 0, otypes=[object])(ring)
    return a.astype(np.int64), b.astype(np.int64), den


def _matmul(a1, b1, a2, b2, d):
    """Numerators of (a1 + b1 r)(a2 + b2 r) with r = sqrt(d); batch-friendly."""
    if d is None:
        return a1 @ a2, np.zeros_like(a1 @ a2)
    return a1 @ a2 + d * (b1 @ b2), a1 @ b2 + b1 @ a2


@dataclass
class MatGroup:
    """Finite matrix group with elements in a deterministic order.

    ``A[i]``, ``B[i]`` and ``D`` encode element ``i``; ``elements`` gives the
    same matrices as object arrays of exact scalars.
    """

    dim: int
    d: int | None
    generators: list[np.ndarray]
    A: np.ndarray
    B: np.ndarray
    D: int
    name: str = ""
    conjugators: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self._index = {self._key(self.A[i], self.B[i]): i for i in range(len(self.A))}
        self._elements = None

    @staticmethod
    def _key(a, b) -> bytes:
        return a.tobytes() + b.tobytes()

    @property
    def order(self) -> int:
        return len(self.A)

    def __len__(self):
        return len(self.A)

    def scalar(self, a: int, b: int):
        if self.d is None:
            return Fraction(int(a), self.D)
        return QuadExt(Fraction(int(a), self.D), Fraction(int(b), self.D), self.d)

    def element(self, i: int) -> np.ndarray:
        n = self.dim
        out = np.empty((n, n), dtype=object)
        for r in range(n):
            for c in range(n):
                out[r, c] = self.scalar(self.A[i, r, c], self.B[i, r, c])
        return out

    @property
    def elements(self) -> list[np.ndarray]:
        if self._elements is None:
            self._elements = [self.element(i) for i in range(len(self))]
        return self._elements

    def lookup(self, a: np.ndarray, b: np.ndarray, den: int) -> np.ndarray:
        """Indices of matrices ``(a + b r)/den`` (batched); -1 when not in G."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        single = a.ndim == 2
        if single:
            a, b = a[None], b[None]
        out = np.full(len(a), -1, dtype=np.int64)
        sa, sb = a * self.D, b * self.D
        ok = np.all((sa % den == 0) & (sb % den == 0), axis=(1, 2))
        sa //= den
        sb //= den
        for i in np.nonzero(ok)[0]:
            out[i] = self._index.get(self._key(sa[i], sb[i]), -1)
        return out[0] if single else out

    def index_of(self, mat) -> int:
        a, b, den = _split(as_matrix(mat, self.d), self.d)
        return int(self.lookup(a, b, den))

    def contains(self, mat) -> bool:
        return self.index_of(mat) >= 0

    def left_perm(self, i: int) -> np.ndarray:
        """Permutation X -> X_i X of element indices."""
        a, b = _matmul(self.A[i], self.B[i], self.A, self.B, self.d)
        return self.lookup(a, b, self.D * self.D)

    def right_perm(self, i: int) -> np.ndarray:
        """Permutation X -> X X_i."""
        a, b = _matmul(self.A, self.B, self.A[i], self.B[i], self.d)
        return self.lookup(a, b, self.D * self.D)

    def transpose_perm(self) -> np.ndarray:
        return self.lookup(self.A.transpose(0, 2, 1), self.B.transpose(0, 2, 1), self.D)

    def inverse_perm(self) -> np.ndarray:
        ident = self.index_of(np.eye(self.dim, dtype=int))
        inv = np.full(len(self), -1, dtype=np.int64)
        for i in range(len(self)):
            if inv[i] < 0:
                j = int(np.nonzero(self.left_perm(i) == ident)[0][0])
                inv[i], inv[j] = j, i
        return inv

    def center(self) -> list[int]:
        """Indices of central elements."""
        gens = [self.index_of(g) for g in self.generators]
        mask = np.ones(len(self), dtype=bool)
        for g in gens:
            mask &= self.left_perm(g) == self.right_perm(g)
        return np.nonzero(mask)[0].tolist()

    def vertex_rows(self):
        """Flattened vertices as ring rows plus denominator: ``X_i = rows[i] / D``."""
        n2 = self.dim * self.dim
        fa = self.A.reshape(len(self), n2)
        fb = self.B.reshape(len(self), n2)
        rows = np.empty((len(self), n2), dtype=object)
        for i in range(len(self)):
            if self.d is None:
                rows[i] = [int(x) for x in fa[i]]
            else:
                rows[i] = [QuadInt(int(x), int(y), self.d) for x, y in zip(fa[i], fb[i])]
        return rows, self.D

    def export_text(self) -> str:
        """All elements, one row per line, blank line between matrices."""
        blocks = []
        for m in self.elements:
            blocks.append("\n".join(" ".join(qe_format(x) for x in row) for row in m))
        return "\n\n".join(blocks) + "\n"


def _sort_elements(A, B, d):
    """Permutation putting elements in exact entrywise lexicographic order."""
    n = len(A)
    flat_a = A.reshape(n, -1)
    flat_b = B.reshape(n, -1)
    pairs = np.stack([flat_a, flat_b], axis=-1).reshape(-1, 2)
    uniq, inv = np.unique(pairs, axis=0, return_inverse=True)
    dd = d or 1

    def cmp(i, j):
        return quad_sign(int(uniq[i, 0] - uniq[j, 0]), int(uniq[i, 1] - uniq[j, 1]), dd)

    order = sorted(range(len(uniq)), key=cmp_to_key(cmp))
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[order] = np.arange(len(uniq))
    keys = rank[inv.ravel()].reshape(n, -1)
    return np.lexsort(keys.T[::-1])


def generate_group(dim: int, generators: Sequence, d: int | None = None,
                   cap: int = DEFAULT_ELEMENT_CAP, name: str = "",
                   conjugators: Sequence = ()) -> MatGroup:
    """Breadth-first closure of ``generators`` (exact)."""
    gens = [as_matrix(g, d) for g in generators]
    if d is None:
        for g in gens:
            d = field_of(g)
            if d is not None:
                break
    gens = [as_matrix(g, d) for g in gens]
    for g in gens:
        if g.shape != (dim, dim):
            raise ValueError(f"generator of shape {g.shape}, expected {(dim, dim)}")
        if len(rref(g)[1]) != dim:
            raise ValueError("generator is singular")
    split = [_split(g, d) for g in gens]
    den = 1
    for _, _, dg in split:
        den = math.lcm(den, dg)
    for _ in range(12):
        try:
            A, B = _closure(dim, split, d, den, cap)
            break
        except _Rescale:
            den *= 2
    else:
        raise ValueError("group entries do not fit a common denominator; infinite group?")
    perm = _sort_elements(A, B, d)
    return MatGroup(dim, d, gens, A[perm], B[perm], den, name,
                    [as_matrix(c, d) for c in conjugators])


def _closure(dim, split, d, den, cap):
    ga = [a * (den // dg) for a, _, dg in split]
    gb = [b * (den // dg) for _, b, dg in split]
    eye = np.eye(dim, dtype=np.int64) * den
    zero = np.zeros((dim, dim), dtype=np.int64)
    seen = {eye.tobytes() + zero.tobytes()}
    all_a, all_b = [eye], [zero]
    fa, fb = eye[None], zero[None]
    while len(fa):
        new_a, new_b = [], []
        for a2, b2 in zip(ga, gb):
            pa, pb = _matmul(fa, fb, a2, b2, d)
            if np.any(pa % den) or np.any(pb % den):
                raise _Rescale
            pa //= den
            pb //= den
            for k in range(len(pa)):
                key = pa[k].tobytes() + pb[k].tobytes()
                if key not in seen:
                    seen.add(key)
                    new_a.append(pa[k])
                    new_b.append(pb[k])
                    if len(seen) > cap:
                        raise GroupTooLarge(f"closure exceeded {cap} elements")
        all_a += new_a
        all_b += new_b
        fa = np.array(new_a, dtype=np.int64).reshape(-1, dim, dim)
        fb = np.array(new_b, dtype=np.int64).reshape(-1, dim, dim)
    return np.array(all_a), np.array(all_b)


# ------------------------------------------------------------- named groups

def _q5(a, b=0):
    return QuadExt(a, b, 5)


def _f4_generators():
    h = Fraction(1, 2)
    g1 = [[1, -1, 1, 1], [-1, -1, -1, 1], [1, 1, -1, 1], [1, -1, -1, -1]]
    g2 = [[-1, 1, -1, -1], [1, -1, -1, -1], [-1, -1, 1, -1], [1, 1, 1, -1]]
    return [[[h * x for x in row] for row in g] for g in (g1, g2)]


# Normalizes the F4 matrices up to the scalar sqrt(2): X -> M X M^T / 2 is the
# diagram automorphism acting on the vertex set.
F4_AUTOMORPHISM = [[1, 1, 0, 0], [1, -1, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1]]


def _h4_generators():
    q = Fraction(1, 4)
    rat = [[1, -2, -1, 0], [2, 2, -2, 2], [1, -2, 0, 1], [0, -2, -1, 1]]
    irr = [[1, 0, 1, 0], [0, 0, 0, 0], [-1, 0, 0, 1], [0, 0, -1, -1]]
    g1 = [[_q5(q * rat[i][j], q * irr[i][j]) for j in range(4)] for i in range(4)]
    g2 = [[-1, 0, 0, 0], [0, 0, 0, -1], [0, -1, 0, 0], [0, 0, 1, 0]]
    g2 = [[_q5(x) for x in row] for row in g2]
    return [g1, g2]


def _reflection(normal):
    n = len(normal)
    nn = sum(x * x for x in normal)
    return [[(1 if i == j else 0) - 2 * normal[i] * normal[j] / nn for j in range(n)]
            for i in range(n)]


def _perm_matrix(perm):
    n = len(perm)
    return [[1 if perm[j] == i else 0 for j in range(n)] for i in range(n)]


def _transposition(n, i):
    p = list(range(n))
    p[i], p[i + 1] = p[i + 1], p[i]
    return _perm_matrix(p)


_I2_COS = {
    2: (0, 0, None),  # 2cos(pi/m) = a + b sqrt(d)
    3: (1, 0, None),
    4: (0, 1, 2),
    5: (Fraction(1, 2), Fraction(1, 2), 5),
    6: (0, 1, 3),
}


def _i2_generators(m):
    if m not in _I2_COS:
        raise ValueError(f"I2({m}) is not representable over Q or a quadratic field; "
                         f"supported m: {sorted(_I2_COS)}")
    a, b, d = _I2_COS[m]
    c = Fraction(a) if d is None else QuadExt(a, b, d)
    s1 = [[-1, c], [0, 1]]
    s2 = [[1, 0], [c, -1]]
    return [s1, s2], d




def parse_group_name(name: str) -> tuple[str, int]:
    s = name.strip().replace(" ", "").upper()
    m = re.match(r"^I2[_(]?(\d+)\)?$", s)
    if m:
        return "I2", int(m.group(1))
    m = re.match(r"^([ABDFH])_?(\d+)$", s)
    if not m:
        raise ValueError(f"unknown group name {name!r}")
    return m.group(1), int(m.group(2))


def coxeter_group(name: str, cap: int = DEFAULT_ELEMENT_CAP) -> MatGroup:
    """Named reflection group.

    ``A_n`` is realized by all permutation matrices of size n+1, ``B_n`` and
    ``D_n`` by signed permutation matrices, ``I2_m`` in its root basis.  F4 and
    H4 use fixed published generator pairs.
    """
    fam, n = parse_group_name(name)
    label = f"{fam}{n}" if fam != "I2" else f"I2_{n}"
    if fam == "A":
        if n < 1:
            raise ValueError("A_n needs n >= 1")
        gens = [_transposition(n + 1, i) for i in range(n)]
        return generate_group(n + 1, gens, None, cap, label)
    if fam in ("B", "D"):
        if n < 2:
            raise ValueError(f"{fam}_n needs n >= 2")
        gens = [_transposition(n, i) for i in range(n - 1)]
        flip = np.eye(n, dtype=object)
        if fam == "B":
            flip[0, 0] = -1
        else:
            flip[0, 0] = flip[1, 1] = 0
            flip[0, 1] = flip[1, 0] = -1
        gens.append(flip.tolist())
        return generate_group(n, gens, None, cap, label)
    if fam == "F" and n == 4:
        return generate_group(4, _f4_generators(), None, cap, label,
                              conjugators=[F4_AUTOMORPHISM])
    if fam == "H" and n == 4:
        return generate_group(4, _h4_generators(), 5, cap, label)
    if fam == "H" and n == 3:
        phi = QuadExt(Fraction(1, 2), Fraction(1, 2), 5)
        normals = [[_q5(1), _q5(0), _q5(0)], [_q5(1), phi, phi - 1], [_q5(0), _q5(0), _q5(1)]]
        return generate_group(3, [_reflection(v) for v in normals], 5, cap, label)
    if fam == "I2":
        gens, d = _i2_generators(n)
        return generate_group(2, gens, d, cap, label)
    raise ValueError(f"unknown group name {name!r}")


NAMED_GROUPS = ("A3", "B4", "F4", "H3", "H4", "I2_5")


# ------------------------------------------------------------ symmetry action

class TransposeError(ValueError):
    pass


@dataclass
class SymAction:
    """Permutation action of symmetries of conv(G) on the element indices."""

    group: MatGroup
    perm_group: PermGroup
    left: list[np.ndarray]
    right: list[np.ndarray]
    transpose: np.ndarray | None
    twisted: bool
    conjugations: list[np.ndarray]

    @property
    def degree(self) -> int:
        return len(self.group)


def _invariant_form(G: MatGroup):
    """Sum of X^T X over the group as a field matrix (positive definite)."""
    qa = np.zeros((G.dim, G.dim), dtype=object)
    qb = np.zeros((G.dim, G.dim), dtype=object)
    for i in range(len(G)):
        a, b = G.A[i].astype(object), G.B[i].astype(object)
        pa, pb = _matmul(a.T, b.T, a, b, G.d)
        qa += pa
        qb += pb
    den = G.D * G.D
    out = np.empty((G.dim, G.dim), dtype=object)
    for idx in np.ndindex(G.dim, G.dim):
        out[idx] = G.scalar(0, 0) + (Fraction(int(qa[idx]), den) if G.d is None
                                     else QuadExt(Fraction(int(qa[idx]), den),
                                                  Fraction(int(qb[idx]), den), G.d))
    return out


def _conjugation_perm(G: MatGroup, P) -> np.ndarray:
    """Permutation X -> P X P^-1; raises if P does not normalize G."""
    P = as_matrix(P, G.d)
    n = G.dim
    one = G.scalar(0, 0) + 1
    aug = np.concatenate([P, np.array([[one if i == j else one - 1 for j in range(n)]
                                       for i in range(n)], dtype=object)], axis=1)
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(piv) > n:
        raise ValueError("conjugating matrix is singular")
    Pinv = red[:, n:]
    pa, pb, pd = _split(P, G.d)
    qa, qb, qd = _split(Pinv, G.d)
    xa, xb = _matmul(pa, pb, G.A, G.B, G.d)
    ya, yb = _matmul(xa, xb, qa, qb, G.d)
    perm = G.lookup(ya, yb, pd * G.D * qd)
    if np.any(perm < 0):
        raise ValueError("conjugating matrix does not normalize the group")
    return perm


def build_symmetry_action(G: MatGroup, use_transpose: bool = True,
                          allow_twisted: bool = False,
                          extra_conjugators: Sequence | None = None,
                          seed: int = 0) -> SymAction:
    """Permutation group on element indices generated by X -> gX, X -> Xh^-1,
    optionally X -> X^T, and X -> P X P^-1 for normalizing matrices ``P``.

    When the representation is not orthogonal, ``X^T`` leaves the group; with
    ``allow_twisted`` the linear map X -> Q^-1 X^T Q (Q the invariant form) is
    used instead, which agrees with inversion on G.  The returned order is that
    of the group of permutations (the action is faithful by construction).
    """
    n = len(G)
    gidx = [G.index_of(g) for g in G.generators]
    left = [G.left_perm(i) for i in gidx]
    right = [G.right_perm(i) for i in gidx]
    gens = [p for p in left + right]
    twisted = False
    tperm = None
    if use_transpose:
        tperm = G.transpose_perm()
        if np.any(tperm < 0):
            if not allow_twisted:
                raise TransposeError("group is not closed under transpose")
            tperm = G.inverse_perm()
            twisted = True
    conj = []
    extra = G.conjugators if extra_conjugators is None else [as_matrix(c, G.d) for c in extra_conjugators]
    for P in extra:
        conj.append(_conjugation_perm(G, P))

    # left x right has kernel {(z, z) : z central}
    base_order = n * n // len(G.center())
    chain = schreier_sims([p.astype(np.int32) for p in gens], n, base_order, seed=seed)
    for p in ([tperm] if tperm is not None else []) + conj:
        p32 = p.astype(np.int32)
        if not chain.contains(p32):
            if p is tperm and not conj:
                # transpose normalizes left x right and has order 2
                chain = schreier_sims([q.astype(np.int32) for q in gens] + [p32], n,
                                      2 * chain.order(), seed=seed)
            else:
                chain.offer(p32)
                _complete(chain)
        gens.append(p)
    all_gens = [p.astype(np.int32) for p in gens if not is_identity(p.astype(np.int32))]
    pg = PermGroup(all_gens, max(n, 1), chain.order(), seed=seed)
    pg._chain = chain
    return SymAction(G, pg, left, right, tperm, twisted, conj)
