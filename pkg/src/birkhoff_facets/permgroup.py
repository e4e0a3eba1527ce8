"""Permutation groups: stabilizer chains, set stabilizers and canonical images.

Permutations are numpy ``int32`` arrays ``p`` with ``p[i]`` the image of point
``i``.  Composition ``p * q`` means "apply ``q`` first", i.e. ``p[q]``.

The canonical image of a subset is its lexicographically smallest image (as a
sorted index sequence).  It is found by a breadth-first search that descends
through point stabilizers, fixing the points of the minimal image one at a
time.  Candidates with equal partial images are merged, and the merge
multiplicities give the order of the set stabilizer for free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

_EXPLICIT_LIMIT = 20_000_000  # max entries of an explicit transversal table


def identity(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int32)


def inverse(p: np.ndarray) -> np.ndarray:
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p), dtype=p.dtype)
    return inv


def is_identity(p: np.ndarray) -> bool:
    return bool(np.all(p == np.arange(len(p))))


def _as_perm(p, n: int | None = None) -> np.ndarray:
    arr = np.asarray(p, dtype=np.int32)
    if arr.ndim != 1 or (n is not None and len(arr) != n):
        raise ValueError("not a permutation of the right degree")
    if not np.array_equal(np.sort(arr), np.arange(len(arr))):
        raise ValueError("not a permutation")
    return arr


class _Transversal:
    """Orbit of a point ``p`` with elements ``u_t`` mapping ``t`` back to ``p``."""

    def __init__(self, p: int, gens: Sequence[np.ndarray], n: int):
        self.point = p
        self.gens = list(gens)
        self.ginv = [inverse(g) for g in self.gens]
        parent = np.full(n, -1, dtype=np.int64)
        via = np.full(n, -1, dtype=np.int64)
        parent[p] = p
        orbit = [p]
        frontier = np.array([p], dtype=np.int64)
        while frontier.size:
            nxt = []
            for j, g in enumerate(self.gens):
                img = g[frontier]
                fresh = parent[img] < 0
                if np.any(fresh):
                    new, first = np.unique(img[fresh], return_index=True)
                    parent[new] = frontier[fresh][first]
                    via[new] = j
                    nxt.append(new)
                    orbit.extend(new.tolist())
            frontier = np.concatenate(nxt) if nxt else np.zeros(0, dtype=np.int64)
        self.orbit = np.array(orbit, dtype=np.int64)
        self.parent = parent
        self.via = via
        self.pos = np.full(n, -1, dtype=np.int64)
        self.pos[self.orbit] = np.arange(len(self.orbit))
        self.table = None
        if len(self.orbit) * n <= _EXPLICIT_LIMIT:
            self.table = np.empty((len(self.orbit), n), dtype=np.int32)
            self.table[0] = np.arange(n, dtype=np.int32)
            for k in range(1, len(self.orbit)):
                t = self.orbit[k]
                # u_t = u_parent * g^-1
                self.table[k] = self.table[self.pos[parent[t]]][self.ginv[via[t]]]

    def __len__(self):
        return len(self.orbit)

    def __contains__(self, t) -> bool:
        return self.parent[t] >= 0

    def element(self, t: int) -> np.ndarray:
        """``u_t`` with ``u_t[t] == point``."""
        if self.table is not None:
            return self.table[self.pos[t]]
        return self.apply(t, np.arange(len(self.parent), dtype=np.int32))

    def apply(self, t: int, x: np.ndarray) -> np.ndarray:
        """``u_t[x]`` (``x`` may be a permutation or a point array)."""
        if self.table is not None:
            return self.table[self.pos[t]][x]
        while t != self.point:
            j = self.via[t]
            x = self.ginv[j][x]
            t = self.parent[t]
        return x


class StabChain:
    """Base and strong generating set built by sifting."""

    def __init__(self, degree: int):
        self.degree = degree
        self.base: list[int] = []
        self.level_gens: list[list[np.ndarray]] = []
        self.trans: list[_Transversal] = []

    def order(self) -> int:
        return math.prod(len(t) for t in self.trans)

    def strong_generators(self) -> list[np.ndarray]:
        return list(self.level_gens[0]) if self.level_gens else []

    def sift(self, g: np.ndarray) -> tuple[np.ndarray, int]:
        for i, tr in enumerate(self.trans):
            b = self.base[i]
            img = int(g[b])
            if tr.parent[img] < 0:
                return g, i
            g = tr.apply(img, g)
        return g, len(self.trans)

    def contains(self, g: np.ndarray) -> bool:
        h, lvl = self.sift(g)
        return lvl == len(self.trans) and is_identity(h)

    def add(self, h: np.ndarray, level: int) -> None:
        """Insert a non-sifting residue ``h`` that fixes the first ``level`` base points."""
        if level == len(self.trans):
            moved = np.nonzero(h != np.arange(self.degree))[0]
            self.base.append(int(moved[0]))
            self.level_gens.append([])
            self.trans.append(None)
        for i in range(level + 1):
            self.level_gens[i].append(h)
            self.trans[i] = _Transversal(self.base[i], self.level_gens[i], self.degree)

    def offer(self, g: np.ndarray) -> bool:
        h, lvl = self.sift(g)
        if lvl == len(self.trans) and is_identity(h):
            return False
        self.add(h, lvl)
        return True


class _RandomElements:
    """Product-replacement generator of (nearly uniform) random group elements."""

    def __init__(self, gens: Sequence[np.ndarray], n: int, seed: int = 0):
        self.rng = np.random.default_rng(seed)
        gens = [g for g in gens] or [identity(n)]
        k = max(10, len(gens))
        self.state = [gens[i % len(gens)].copy() for i in range(k)]
        self.acc = identity(n)
        for _ in range(50):
            self()

    def __call__(self) -> np.ndarray:
        k = len(self.state)
        i, j = self.rng.choice(k, size=2, replace=False)
        if self.rng.random() < 0.5:
            self.state[i] = self.state[i][self.state[j]]
        else:
            self.state[i] = self.state[i][inverse(self.state[j])]
        self.acc = self.acc[self.state[i]]
        return self.acc


def schreier_sims(gens: Sequence[np.ndarray], degree: int, order: int | None = None,
                  seed: int = 0, max_tries: int = 10_000) -> StabChain:
    """Stabilizer chain for ``<gens>``.

    With a known ``order`` random elements are sifted until the chain reaches
    it (exact: the chain order is a lower bound that only equals the group
    order when complete).  Without it, every Schreier generator is sifted.
    """
    chain = StabChain(degree)
    for g in gens:
        if not is_identity(g):
            chain.offer(g)
    if order is not None:
        if chain.order() < order:
            rnd = _RandomElements(gens, degree, seed)
            tries = 0
            while chain.order() < order:
                chain.offer(rnd())
                tries += 1
                if tries > max_tries:
                    raise RuntimeError("random Schreier-Sims did not reach the stated order")
        if chain.order() != order:
            raise ValueError(f"generators produce order {chain.order()}, expected {order}")
        return chain
    _complete(chain)
    return chain


def _complete(chain: StabChain) -> None:
    """Deterministic Schreier-Sims: sift all Schreier generators level by level."""
    i = len(chain.trans) - 1
    while i >= 0:
        tr = chain.trans[i]
        restart = None
        for t in tr.orbit:
            ut = tr.element(int(t))
            wt = inverse(ut)
            for g in chain.level_gens[i]:
                s = tr.apply(int(g[t]), g[wt])
                h, lvl = chain.sift(s)
                if lvl == len(chain.trans) and is_identity(h):
                    continue
                chain.add(h, lvl)
                restart = lvl
                break
            if restart is not None:
                break
        if restart is not None:
            # chain changed; recheck from the deepest level
            i = len(chain.trans) - 1
            continue
        i -= 1


class _Node:
    """Pointwise stabilizer of a prefix of points, used by the image search."""

    __slots__ = ("gens", "order", "omin", "children", "trans", "rnd", "n")

    def __init__(self, gens: list[np.ndarray], order: int, n: int):
        self.gens = gens
        self.order = order
        self.n = n
        self.children: dict[int, _Node] = {}
        self.trans: dict[int, _Transversal] = {}
        self.rnd = None
        self.omin = _orbit_minima(gens, n)

    def transversal(self, p: int) -> _Transversal:
        tr = self.trans.get(p)
        if tr is None:
            tr = self.trans[p] = _Transversal(p, self.gens, self.n)
        return tr

    def child(self, p: int) -> "_Node":
        ch = self.children.get(p)
        if ch is not None:
            return ch
        tr = self.transversal(p)
        target = self.order // len(tr)
        gens: list[np.ndarray] = []
        if target > 1:
            sub = StabChain(self.n)
            if self.rnd is None:
                self.rnd = _RandomElements(self.gens, self.n, seed=p)
            # Schreier generators from the defining generators first, then random ones
            for t in tr.orbit[: min(len(tr), 8)]:
                wt = inverse(tr.element(int(t)))
                for g in self.gens:
                    sub.offer(tr.apply(int(g[t]), g[wt]))
                    if sub.order() == target:
                        break
                if sub.order() == target:
                    break
            tries = 0
            while sub.order() < target:
                x = self.rnd()
                sub.offer(tr.apply(int(x[p]), x))
                tries += 1
                if tries > 10_000:
                    raise RuntimeError("point stabilizer construction did not converge")
            if sub.order() != target:
                raise RuntimeError("point stabilizer larger than expected; inconsistent group order")
            gens = sub.strong_generators()
        ch = self.children[p] = _Node(gens, target, self.n)
        return ch


def _orbit_minima(gens: Sequence[np.ndarray], n: int) -> np.ndarray:
    label = np.arange(n, dtype=np.int64)
    if not gens:
        return label
    while True:
        old = label.copy()
        for g in gens:
            # points i and g[i] share an orbit
            np.minimum.at(label, g, label)
            label = np.minimum(label, label[g])
        label = label[label]
        if np.array_equal(label, old):
            return label


@dataclass
class CanonicalForm:
    """Result of a canonical-image search for one subset."""

    image: np.ndarray  # sorted canonical image
    stabilizer_order: int
    element: np.ndarray | None  # group element mapping the input set onto ``image``
    stabilizer_gens: list[np.ndarray] | None


class PermGroup:
    """Permutation group on ``range(degree)`` with exact order.

    ``order`` may be given when known from structure; it is then confirmed by
    building the stabilizer chain (random Schreier-Sims stops only when the
    stated order is reached).
    """

    def __init__(self, gens: Iterable, degree: int, order: int | None = None, seed: int = 0):
        self.degree = int(degree)
        self.gens = [_as_perm(g, self.degree) for g in gens]
        self.gens = [g for g in self.gens if not is_identity(g)]
        self.seed = seed
        self._chain: StabChain | None = None
        self._order = order
        self._root: _Node | None = None

    @property
    def chain(self) -> StabChain:
        if self._chain is None:
            self._chain = schreier_sims(self.gens, self.degree, self._order, seed=self.seed)
            self._order = self._chain.order()
        return self._chain

    @property
    def order(self) -> int:
        if self._order is None:
            self._order = self.chain.order()
        return self._order

    @property
    def base(self) -> list[int]:
        return list(self.chain.base)

    @property
    def strong_generators(self) -> list[np.ndarray]:
        return self.chain.strong_generators()

    def contains(self, g) -> bool:
        return self.chain.contains(_as_perm(g, self.degree))

    def random_element(self, seed: int = 0) -> np.ndarray:
        return _RandomElements(self.gens, self.degree, seed)()

    def orbit_minima(self) -> np.ndarray:
        return self._root_node().omin

    def is_transitive(self) -> bool:
        return bool(np.all(self.orbit_minima() == 0))

    def elements(self, limit: int = 1_000_000) -> list[np.ndarray]:
        """All elements by closure (small groups only)."""
        if self.order > limit:
            raise ValueError("group too large to enumerate")
        seen = {identity(self.degree).tobytes(): identity(self.degree)}
        frontier = [identity(self.degree)]
        while frontier:
            nxt = []
            for x in frontier:
                for g in self.gens:
                    y = g[x]
                    k = y.tobytes()
                    if k not in seen:
                        seen[k] = y
                        nxt.append(y)
            frontier = nxt
        return list(seen.values())

    def _root_node(self) -> _Node:
        if self._root is None:
            gens = self.strong_generators if self._order is None else self.gens
            self._root = _Node(list(gens) or [], self.order, self.degree)
        return self._root

    # ----------------------------------------------------------- set search
    def canonical_form(self, subset, with_stabilizer: bool = False) -> CanonicalForm:
        n = self.degree
        s = np.unique(np.asarray(subset, dtype=np.int64))
        if s.size and (s[0] < 0 or s[-1] >= n):
            raise ValueError("subset has points outside the permutation domain")
        k = len(s)
        ident = identity(n)
        root = self._root_node()
        if k == 0 or k == n or root.order == 1:
            return CanonicalForm(s, self.order, ident, list(self.gens) if with_stabilizer else None)
        track = with_stabilizer
        cands: dict[bytes, list] = {s.tobytes(): [s, 1, ident if track else None]}
        merges: list[np.ndarray] = []
        node = root
        depth = 0
        while node.order > 1 and depth < k:
            omin = node.omin
            best = n
            mins = {}
            for key, (t, mult, el) in cands.items():
                m = int(omin[t[depth:]].min())
                mins[key] = m
                if m < best:
                    best = m
            q = best
            tr = node.transversal(q)
            new: dict[bytes, list] = {}
            for key, (t, mult, el) in cands.items():
                if mins[key] != q:
                    continue
                rest = t[depth:]
                for pt in rest[omin[rest] == q]:
                    u = tr.element(int(pt))
                    t2 = np.sort(u[t])
                    k2 = t2.tobytes()
                    el2 = u[el] if track else None
                    hit = new.get(k2)
                    if hit is None:
                        new[k2] = [t2, mult, el2]
                    else:
                        hit[1] += mult
                        if track:
                            merges.append(inverse(hit[2])[el2])
            cands = new
            node = node.child(q)
            depth += 1
        key_min = min(cands, key=lambda kk: tuple(cands[kk][0].tolist()))
        image, mult, el = cands[key_min]
        stab = mult * node.order
        gens = None
        if track:
            elinv = inverse(el)
            gens = [m for m in merges if not is_identity(m)]
            gens += [elinv[h[el]] for h in node.gens]
        return CanonicalForm(image, stab, el, gens)

    def canonical_image(self, subset) -> np.ndarray:
        return self.canonical_form(subset).image

    def stabilizer_order(self, subset) -> int:
        return self.canonical_form(subset).stabilizer_order

    def orbit_size(self, subset) -> int:
        st = self.stabilizer_order(subset)
        q, r = divmod(self.order, st)
        if r:
            raise ArithmeticError("stabilizer order does not divide the group order")
        return q

    def set_orbit(self, subset, limit: int = 1_000_000) -> list[tuple]:
        """All images of ``subset`` as sorted tuples (closure under the generators)."""
        start = tuple(int(i) for i in np.unique(np.asarray(subset, dtype=np.int64)))
        seen = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for s in frontier:
                arr = np.asarray(s, dtype=np.int64)
                for g in self.gens:
                    t = tuple(int(i) for i in np.sort(g[arr]))
                    if t not in seen:
                        seen.add(t)
                        nxt.append(t)
                        if len(seen) > limit:
                            raise ValueError("orbit larger than the limit")
            frontier = nxt
        return sorted(seen)

    def set_stabilizer(self, subset) -> "PermGroup":
        cf = self.canonical_form(subset, with_stabilizer=True)
        return subgroup_from(cf.stabilizer_gens, self.degree, cf.stabilizer_order)

    def restricted(self, points) -> "PermGroup":
        """Induced action on an invariant set ``points`` (relabelled 0..len-1)."""
        pts = np.asarray(points, dtype=np.int64)
        pos = np.full(self.degree, -1, dtype=np.int64)
        pos[pts] = np.arange(len(pts))
        gens = []
        for g in self.gens:
            img = pos[g[pts]]
            if np.any(img < 0):
                raise ValueError("point set is not invariant under the group")
            gens.append(img.astype(np.int32))
        return PermGroup(gens, len(pts))


def subgroup_from(gens: Sequence[np.ndarray], degree: int, order: int) -> PermGroup:
    """Subgroup with known order, keeping only generators that extend the chain."""
    chain = StabChain(degree)
    kept = []
    for g in gens:
        if chain.order() == order:
            break
        if chain.offer(g):
            kept.append(g)
    if chain.order() < order:
        # sifting the generators alone is not a complete chain
        kept = [g for g in gens if not is_identity(g)]
        try:
            chain = schreier_sims(kept, degree, order)
        except (RuntimeError, ValueError) as exc:
            raise RuntimeError(f"stabilizer generators do not reach order {order}") from exc
    if chain.order() != order:
        raise RuntimeError(
            f"stabilizer generators give order {chain.order()}, expected {order}")
    grp = PermGroup(kept, degree, order)
    grp._chain = chain
    return grp
