"""Direct facet enumeration by the incremental double description method.

Input is a cone matrix ``M`` (rows = homogenized vertices, full column rank)
over Z or Z[sqrt(d)].  Output is the list of extreme rays of ``{y : M y >= 0}``
together with their zero sets, i.e. the facets of the cone generated by the
rows.  Arithmetic is exact and fraction-free; adjacency of rays is decided
combinatorially from zero sets.
"""

from __future__ import annotations

import numpy as np

from . import ring


class ResourceCapExceeded(RuntimeError):
    pass


DEFAULT_RAY_CAP = 200_000


def _pack(rows_idx, words: int) -> np.ndarray:
    out = np.zeros(words, dtype=np.uint64)
    for i in rows_idx:
        out[i >> 6] |= np.uint64(1) << np.uint64(i & 63)
    return out


def _unpack(z: np.ndarray) -> tuple:
    bits = np.unpackbits(z.view(np.uint8), bitorder="little")
    return tuple(int(i) for i in np.nonzero(bits)[0])


def insertion_order(n: int, first, order: str = "index", seed: int = 0) -> list[int]:
    """Order in which the remaining rows are added."""
    rest = [i for i in range(n) if i not in set(first)]
    if order == "random":
        rng = np.random.default_rng(seed)
        rest = [rest[i] for i in rng.permutation(len(rest))]
    elif order != "index":
        raise ValueError(f"unknown insertion order {order!r}")
    return rest


def cone_facets(M: np.ndarray, Mp: np.ndarray | None = None, d: int | None = None,
                ray_cap: int = DEFAULT_RAY_CAP, order: str = "index",
                seed: int = 0) -> list[tuple[np.ndarray, tuple]]:
    """Extreme rays of ``{y : M y >= 0}`` as ``(ray, zero_rows)`` pairs.

    Rays are primitive (see :func:`ring.normalize_ray`) and the list is sorted
    by zero set, so the output does not depend on the insertion order.
    """
    M = np.asarray(M, dtype=object)
    n, k = M.shape
    if d is None:
        d = ring.ring_of(M)
    if Mp is None:
        Mp = ring.to_modp(M, d)
    if k == 0:
        return []
    if k == 1:
        signs = ring.sign_array(M[:, 0])
        if np.all(signs > 0):
            return [(np.array([1], dtype=object), ())]
        raise ValueError("cone matrix rows must lie in an open half-space")
    prow, _ = ring.modp_echelon(Mp, d)
    if len(prow) < k:
        prow = _exact_pivot_rows(M, d)
        if len(prow) < k:
            raise ValueError("cone matrix does not have full column rank")
    words = (n + 63) // 64

    rays = []
    for j in range(k):
        others = [prow[i] for i in range(k) if i != j]
        r = ring.kernel(M[others], Mp[others], d)[0]
        if ring.sign_array([M[prow[j]].dot(r)])[0] < 0:
            r = -r
        rays.append(r)
    Ra, Rb = ring.split(np.array(rays, dtype=object), d)
    Ra, Rb = ring.split_normalize_rows(Ra, Rb, d)
    Ma, Mb = ring.split(M, d)
    Z = np.zeros((k, words), dtype=np.uint64)
    for j in range(k):
        Z[j] = _pack([prow[i] for i in range(k) if i != j], words)

    for i in insertion_order(n, prow, order, seed):
        va, vb = ring.split_dot(Ra, Rb, Ma[i], None if Mb is None else Mb[i], d)
        s = ring.split_sign(va, vb, d)
        pos = np.nonzero(s > 0)[0]
        neg = np.nonzero(s < 0)[0]
        zer = np.nonzero(s == 0)[0]
        w, b = i >> 6, np.uint64(1) << np.uint64(i & 63)
        keep = np.concatenate([pos, zer])
        parts_a, parts_b = [Ra[keep]], [None if Rb is None else Rb[keep]]
        parts_z = [Z[keep]]
        parts_z[0][len(pos):, w] |= b
        if len(neg) and len(pos):
            A, B, zs = _adjacent_pairs(Z, pos, neg, k)
            if len(A):
                # val_a * ray_b - val_b * ray_a, exact
                xa, xb = ring.split_mul(va[A][:, None], None if vb is None else vb[A][:, None],
                                        Ra[B], None if Rb is None else Rb[B], d)
                ya, yb = ring.split_mul(va[B][:, None], None if vb is None else vb[B][:, None],
                                        Ra[A], None if Rb is None else Rb[A], d)
                na, nb = ring.split_normalize_rows(xa - ya, None if d is None else xb - yb, d)
                zs[:, w] |= b
                parts_a.append(na)
                parts_b.append(nb)
                parts_z.append(zs)
        Ra = np.concatenate(parts_a)
        Rb = None if d is None else np.concatenate(parts_b)
        Z = np.concatenate(parts_z)
        if len(Ra) > ray_cap:
            raise ResourceCapExceeded(f"more than {ray_cap} intermediate rays")

    rays = ring.join(Ra, Rb, d)
    out = [(rays[j], _unpack(Z[j])) for j in range(len(rays))]
    out.sort(key=lambda t: t[1])
    return out


def _adjacent_pairs(Z, pos, neg, k, chunk: int = 1 << 22):
    """Adjacent (positive, negative) ray pairs and their common zero sets.

    Two rays are adjacent iff their common zero set has at least ``k - 2``
    rows and lies in no other ray's zero set.
    """
    R, W = Z.shape
    notZ = ~Z
    pairs_a, pairs_b, zs = [], [], []
    step = max(1, chunk // max(1, len(neg) * W))
    zneg = Z[neg]
    for p0 in range(0, len(pos), step):
        pa = pos[p0:p0 + step]
        inter = Z[pa][:, None, :] & zneg[None, :, :]
        cnt = np.bitwise_count(inter).sum(axis=2)
        ia, ib = np.nonzero(cnt >= k - 2)
        if ia.size == 0:
            continue
        sub = inter[ia, ib]
        cstep = max(1, chunk // max(1, R * W))
        for c0 in range(0, len(sub), cstep):
            blk = sub[c0:c0 + cstep]
            contained = None
            for w in range(W):
                hit = (blk[:, None, w] & notZ[None, :, w]) == 0
                contained = hit if contained is None else contained & hit
            ok = np.nonzero(contained.sum(axis=1) == 2)[0]
            pairs_a.append(pa[ia[c0 + ok]])
            pairs_b.append(neg[ib[c0 + ok]])
            zs.append(blk[ok])
    if not pairs_a:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros((0, W), np.uint64)
    return np.concatenate(pairs_a), np.concatenate(pairs_b), np.concatenate(zs).reshape(-1, W)


def _exact_pivot_rows(M, d):
    """Row indices of a basis of the row space (exact, greedy)."""
    chosen = []
    for i in range(M.shape[0]):
        trial = chosen + [i]
        if M.shape[1] - len(ring._exact_kernel_full(M[trial])) == len(trial):
            chosen = trial
        if len(chosen) == M.shape[1]:
            break
    return chosen


def direct_dual_description(P) -> list:
    """All facets of a :class:`VPolytope`, sorted by incidence."""
    if P.full_dim == 0:
        return []
    facets = [P.facet_from_functional(r) for r, _ in cone_facets(P.H, P.Hp, P.d)]
    facets.sort(key=lambda f: f.incidence)
    return facets
