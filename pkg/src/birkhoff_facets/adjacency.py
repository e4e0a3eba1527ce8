"""Facet enumeration up to symmetry by recursive adjacency decomposition.

Every level works on a cone problem: an integral cone matrix ``M`` (one row
per vertex, column 0 positive) and a permutation group acting on its rows.
One facet is found by rotating a supporting hyperplane; the ridges of a facet
are the facets of a smaller cone problem (the facet's own vertices, with the
facet stabilizer as symmetry), solved directly when small and recursively
otherwise.  Flipping each ridge gives the neighbouring facets, which are
deduplicated by canonical image.

The top level runs in rounds: all records unprocessed at the start of a round
are processed in ``(incidence, key)`` order and their neighbours are merged in
the same order, so the resulting database does not depend on the number of
workers or on checkpoint boundaries.
"""

from __future__ import annotations

import dataclasses
import logging
import multiprocessing
import time
from fractions import Fraction
from typing import Callable

import numpy as np

from . import ring
from .dd import DEFAULT_RAY_CAP, ResourceCapExceeded, cone_facets
from .permgroup import PermGroup, subgroup_from
from .polytope import Facet, VPolytope, _exact_pivot_cols, initial_functional
from .store import PROCESSED, OrbitDatabase, OrbitRecord, insert_or_find

log = logging.getLogger(__name__)


@dataclasses.dataclass
class EnumerationConfig:
    """Knobs of the adjacency decomposition.

    ``recursion_threshold`` is the vertex count above which a facet's ridges
    are found recursively; ``None`` means ``threshold_factor`` times the
    dimension of the facet.  Only ``recursion_threshold``, ``threshold_factor``,
    ``early_termination``, ``seed`` and ``initial_method`` affect results.
    """

    recursion_threshold: int | None = None
    threshold_factor: int = 4
    early_termination: bool = True
    parallel_workers: int = 1
    checkpoint_interval: float = 600.0
    seed: int = 0
    initial_method: str = "vertex"
    ray_cap: int = DEFAULT_RAY_CAP
    max_rounds: int | None = None

    def threshold(self, face_dim: int) -> int:
        if self.recursion_threshold is not None:
            return self.recursion_threshold
        return self.threshold_factor * face_dim

    def validate(self, full_dim: int) -> None:
        if self.recursion_threshold is not None and self.recursion_threshold < full_dim:
            raise ValueError(f"recursion_threshold {self.recursion_threshold} < full_dim {full_dim}")
        if self.threshold_factor < 1:
            raise ValueError("threshold_factor must be positive")
        if self.parallel_workers < 1:
            raise ValueError("parallel_workers must be at least 1")
        if self.checkpoint_interval < 0:
            raise ValueError("checkpoint_interval must be nonnegative")

    def result_config(self) -> dict:
        rt = "auto" if self.recursion_threshold is None else str(self.recursion_threshold)
        return {"recursion_threshold": rt, "threshold_factor": str(self.threshold_factor),
                "early_termination": str(int(self.early_termination)),
                "seed": str(self.seed), "initial": self.initial_method}


class ConeProblem:
    """Rows of ``M`` span a pointed cone; its facets correspond to zero sets."""

    def __init__(self, M, d, group: PermGroup, Mp=None):
        self.M = np.asarray(M, dtype=object)
        self.d = d
        self.Mp = ring.to_modp(self.M, d) if Mp is None else Mp
        self.group = group
        self.Ma, self.Mb = ring.split(self.M, d)
        self.n, self.k = self.M.shape
        self.columns = list(range(self.k))

    @property
    def face_dim(self) -> int:
        """Dimension of the polytope whose facets are sought."""
        return self.k - 1

    def values(self, f):
        fa, fb = ring.split(np.asarray(f, dtype=object), self.d)
        return ring.split_dot(self.Ma, self.Mb, fa, fb, self.d)

    def signs(self, f) -> np.ndarray:
        va, vb = self.values(f)
        return ring.split_sign(va, vb, self.d)

    def zero_set(self, f) -> np.ndarray:
        s = self.signs(f)
        if np.any(s < 0):
            raise ValueError("functional is not valid on the cone")
        return np.nonzero(s == 0)[0]

    def functional(self, J) -> np.ndarray:
        """Primitive functional vanishing on the facet with zero set ``J``."""
        J = np.asarray(J, dtype=np.int64)
        ker = ring.kernel(self.M[J], self.Mp[J], self.d)
        if len(ker) != 1:
            raise ValueError("zero set does not determine a facet")
        f = ker[0]
        s = self.signs(f)
        if np.any(s < 0):
            f = -f
            s = -s
        if np.any(s < 0):
            raise ValueError("zero set is not a face")
        if not np.array_equal(np.nonzero(s == 0)[0], J):
            raise ValueError("zero set is not closed")
        return ring.normalize_ray(f, self.d)

    def stabilizer_on(self, J) -> PermGroup:
        """Set stabilizer of ``J``, acting on ``J`` relabelled as ``0..len(J)-1``."""
        cf = self.group.canonical_form(J, with_stabilizer=True)
        stab = subgroup_from(cf.stabilizer_gens, self.n, cf.stabilizer_order)
        return stab.restricted(J)

    def subproblem(self, J, group: PermGroup) -> "ConeProblem":
        """Cone problem of the facet with zero set ``J``."""
        J = np.asarray(J, dtype=np.int64)
        sub, subp = self.M[J], self.Mp[J]
        _, pcol = ring.modp_echelon(subp, self.d)
        if len(pcol) != self.k - 1:
            pcol = _exact_pivot_cols(sub, self.d)
        if len(pcol) != self.k - 1 or pcol[0] != 0:
            raise ArithmeticError("facet rows do not have the expected rank")
        out = ConeProblem(sub[:, pcol], self.d, group, subp[:, pcol])
        out.columns = list(pcol)
        return out

    def flip(self, J, f, R):
        """Other facet through the ridge ``R`` of the facet ``(J, f)``.

        Returns ``(zero_set, functional)``.
        """
        J = np.asarray(J, dtype=np.int64)
        R = np.asarray(R, dtype=np.int64)
        ker = ring.kernel(self.M[R], self.Mp[R], self.d)
        if len(ker) != 2:
            raise ValueError("not a ridge: kernel dimension %d" % len(ker))
        j0 = int(np.setdiff1d(J, R)[0])
        h = None
        for v in ker:
            hv = self.values(v)
            s = ring.split_sign(hv[0][j0:j0 + 1], None if hv[1] is None else hv[1][j0:j0 + 1], self.d)[0]
            if s:
                h = v if s > 0 else -v
                break
        if h is None:
            raise ArithmeticError("ridge kernel vanishes on the facet")
        return self.rotate(f, h)

    def rotate(self, f, h):
        """Rotate the facet functional ``f`` about the ridge where ``h`` vanishes.

        ``h`` must be zero on the ridge and positive on the rest of the facet.
        The result is the neighbouring facet ``(zero_set, functional)``.
        """
        hvals = ring.join(*self.values(h), self.d)
        fvals = ring.join(*self.values(f), self.d)
        fs = ring.sign_array(fvals)
        outside = np.nonzero(fs > 0)[0]
        hs = ring.sign_array(hvals[outside])
        if np.any(hs < 0):
            outside = outside[hs < 0]
        best = _min_ratio(hvals, fvals, outside, self.d)
        g = fvals[best] * np.asarray(h, dtype=object) - hvals[best] * np.asarray(f, dtype=object)
        g = ring.normalize_ray(g, self.d)
        return self.zero_set(g), g


def _min_ratio(num, den, idx, d):
    """Index in ``idx`` minimizing ``num[i] / den[i]`` (first on ties)."""
    if d is None:
        return int(min(idx, key=lambda i: Fraction(int(num[i]), int(den[i]))))
    best = int(idx[0])
    for i in idx[1:]:
        if ring.ring_compare_ratios(num[i], den[i], num[best], den[best]) < 0:
            best = int(i)
    return best


# ---------------------------------------------------------- generic levels

@dataclasses.dataclass(frozen=True)
class OrbitRep:
    """One facet orbit of a cone problem.

    ``key`` is the canonical zero set; ``zero_set`` and ``functional`` describe
    the representative actually found (the first one, deterministically).
    """

    key: tuple
    stabilizer_order: int
    zero_set: tuple
    functional: tuple


def facet_orbits(cone: ConeProblem, cfg: EnumerationConfig, depth: int = 0) -> list[OrbitRep]:
    """Facet orbits of ``cone`` under its group, sorted by canonical key."""
    if cone.face_dim < 1:
        return []
    if cone.face_dim == 1 or cone.n <= cfg.threshold(cone.face_dim):
        return _direct_orbits(cone, cfg)
    return _adjacency_orbits(cone, cfg, depth)


def _direct_orbits(cone, cfg):
    reps = {}
    for ray, z in cone_facets(cone.M, cone.Mp, cone.d, ray_cap=cfg.ray_cap):
        cf = cone.group.canonical_form(z)
        key = tuple(int(i) for i in cf.image)
        if key not in reps:
            reps[key] = OrbitRep(key, cf.stabilizer_order, tuple(z), tuple(ray))
    return [reps[k] for k in sorted(reps)]


def _adjacency_orbits(cone, cfg, depth):
    f = initial_functional(cone.M, cone.Mp, cone.d, cfg.seed, cfg.initial_method)
    order = cone.group.order
    found: dict[tuple, OrbitRep] = {}
    todo: set[tuple] = set()

    def add(J, g):
        cf = cone.group.canonical_form(J)
        key = tuple(int(i) for i in cf.image)
        if key not in found:
            found[key] = OrbitRep(key, cf.stabilizer_order, tuple(int(i) for i in J), tuple(g))
            todo.add(key)

    add(cone.zero_set(f), f)
    processed = 0
    while todo:
        if cfg.early_termination and processed:
            remaining = sum(order // found[k].stabilizer_order for k in todo)
            if remaining < cone.face_dim:
                break
        key = min(todo, key=lambda t: (len(t), t))
        todo.discard(key)
        rep = found[key]
        for J, g in neighbours(cone, rep.zero_set, rep.functional, cfg, depth):
            add(J, g)
        processed += 1
    log.debug("depth %d: %d orbits (%d processed)", depth, len(found), processed)
    return [found[k] for k in sorted(found)]


def neighbours(cone: ConeProblem, J, f, cfg: EnumerationConfig, depth: int = 0) -> list[tuple]:
    """Facets adjacent to ``(J, f)``, one per ridge orbit of its stabilizer.

    Returns ``(zero_set, functional)`` pairs.
    """
    J = np.asarray(J, dtype=np.int64)
    f = np.asarray(f, dtype=object)
    sub = cone.subproblem(J, cone.stabilizer_on(J))
    out = []
    for rep in facet_orbits(sub, cfg, depth + 1):
        # the ridge functional on the facet's coordinates, extended by zero
        h = np.zeros(cone.k, dtype=object)
        h[sub.columns] = rep.functional
        out.append(cone.rotate(f, h))
    return out


# ------------------------------------------------------ polytope-level API

def _trivial_group(n: int) -> PermGroup:
    return PermGroup([], n, 1)


def top_cone(P: VPolytope, sym: PermGroup | None = None) -> ConeProblem:
    if sym is None:
        sym = _trivial_group(P.n_vertices)
    if sym.degree != P.n_vertices:
        raise ValueError("symmetry group degree does not match the vertex count")
    return ConeProblem(P.H, P.d, sym, P.Hp)


def ridges_of_facet(P: VPolytope, facet: Facet, cfg: EnumerationConfig | None = None,
                    sym: PermGroup | None = None) -> list[tuple]:
    """All ridges of ``facet`` as sorted vertex-index tuples.

    With ``sym`` the ridges are found up to the facet stabilizer (recursively
    when the facet is large) and then expanded.
    """
    cfg = cfg or EnumerationConfig()
    cone = top_cone(P, sym)
    J = np.asarray(facet.incidence, dtype=np.int64)
    stab = cone.stabilizer_on(J)
    sub = cone.subproblem(J, stab)
    out = set()
    for rep in facet_orbits(sub, cfg, 1):
        for r in stab.set_orbit(rep.key):
            out.add(tuple(int(J[i]) for i in r))
    return sorted(out)


def flip_ridge(P: VPolytope, facet: Facet, ridge) -> Facet:
    """The other facet of ``P`` containing ``ridge``."""
    cone = top_cone(P)
    f = P.functional_of(facet)
    J2, g = cone.flip(facet.incidence, f, sorted(ridge))
    return P.facet_from_functional(g)


def early_termination_check(db: OrbitDatabase, full_dim: int) -> bool:
    """True when the unprocessed orbits hold fewer than ``full_dim`` facets.

    The ridge graph of a ``full_dim``-polytope is ``full_dim``-connected, so
    a set of fewer facets cannot separate the processed orbits from an
    undiscovered one.
    """
    remaining = sum(r.orbit_size for r in db.records.values() if r.status != PROCESSED)
    return remaining < full_dim


def new_database(P: VPolytope, sym: PermGroup, cfg: EnumerationConfig, name: str = "") -> OrbitDatabase:
    return OrbitDatabase(group=name, d=P.d, symmetry_order=sym.order, n_vertices=P.n_vertices,
                         ambient_dim=P.ambient_dim, full_dim=P.full_dim,
                         config=cfg.result_config())


def make_recorder(P: VPolytope, order: int, matrix_dim: int | None = None) -> Callable:
    """Builder of :class:`OrbitRecord` objects for newly found canonical keys."""
    from .linalg import rank as field_rank
    from .polytope import facet_matrix

    def make(key, stab):
        facet = P.facet_from_incidence(key)
        if tuple(facet.incidence) != tuple(key):
            raise ArithmeticError("canonical key is not a facet")
        rk = None
        if matrix_dim is not None:
            A, _ = facet_matrix(P, facet, matrix_dim)
            rk = field_rank(A)
        q, r = divmod(order, stab)
        if r:
            raise ArithmeticError("stabilizer order does not divide the group order")
        return OrbitRecord(tuple(key), tuple(facet.normal), facet.rhs, len(key), stab, q, rk)

    return make


class Stopped(Exception):
    """Enumeration stopped early; ``db`` is the last consistent state."""

    def __init__(self, db: OrbitDatabase, reason: str):
        super().__init__(reason)
        self.db = db
        self.reason = reason


# worker state, set in the parent before forking
_WORK: dict = {}


def _work(key):
    cone, cfg = _WORK["cone"], _WORK["cfg"]
    out = []
    seen = set()
    for J, _ in neighbours(cone, key, cone.functional(key), cfg, 0):
        k2 = tuple(int(i) for i in cone.group.canonical_image(J))
        if k2 not in seen:
            seen.add(k2)
            out.append(k2)
    return out


def adjacency_decomposition(P: VPolytope, sym: PermGroup, cfg: EnumerationConfig | None = None,
                            db: OrbitDatabase | None = None, name: str = "",
                            matrix_dim: int | None = None,
                            on_round: Callable | None = None) -> OrbitDatabase:
    """Orbits of facets of ``P`` under ``sym``.

    ``db`` resumes a previous (checkpointed) run.  ``on_round(db)`` is called
    after every completed round, e.g. to write checkpoints.  Raises
    :class:`Stopped` (carrying the last round-boundary state) on interrupts,
    resource caps or when ``cfg.max_rounds`` is reached.
    """
    cfg = cfg or EnumerationConfig()
    cfg.validate(P.full_dim)
    if P.full_dim < 1:
        raise ValueError("a polytope of dimension 0 has no facets")
    cone = top_cone(P, sym)
    order = sym.order
    if db is None:
        db = new_database(P, sym, cfg, name)
    elif (db.symmetry_order, db.n_vertices, db.full_dim) != (order, P.n_vertices, P.full_dim):
        raise ValueError("checkpoint does not belong to this polytope and group")
    make = make_recorder(P, order, matrix_dim)

    if P.full_dim == 1 or not db.records:
        if P.full_dim == 1:
            # a segment: both endpoints directly
            for _, z in cone_facets(P.H, P.Hp, P.d):
                insert_or_find(db, z, sym, make)
        else:
            f = initial_functional(P.H, P.Hp, P.d, cfg.seed, cfg.initial_method)
            insert_or_find(db, cone.zero_set(f), sym, make)
        if P.full_dim == 1:
            for r in db.records.values():
                r.status = PROCESSED

    pool = None
    try:
        while True:
            pending = db.unprocessed()
            if not pending:
                break
            if cfg.early_termination and db.processed_count() and \
                    early_termination_check(db, P.full_dim):
                break
            if cfg.max_rounds is not None and db.rounds >= cfg.max_rounds:
                raise Stopped(db, "round limit reached")
            snapshot = {k: dataclasses.replace(r) for k, r in db.records.items()}
            t0 = time.time()
            try:
                if cfg.parallel_workers > 1 and len(pending) > 1 and pool is None:
                    _WORK.update(cone=cone, cfg=cfg)
                    pool = multiprocessing.get_context("fork").Pool(cfg.parallel_workers)
                keys = [r.canonical_key for r in pending]
                if pool is not None and len(pending) > 1:
                    results = pool.imap(_work, keys)
                else:
                    _WORK.update(cone=cone, cfg=cfg)
                    results = map(_work, keys)
                for rec, found in zip(pending, results):
                    if cfg.early_termination and db.processed_count() and \
                            early_termination_check(db, P.full_dim):
                        break
                    for key in found:
                        insert_or_find(db, key, sym, make)
                    rec.status = PROCESSED
            except BaseException as exc:
                db.records = snapshot
                if isinstance(exc, KeyboardInterrupt):
                    raise Stopped(db, "interrupted") from exc
                if isinstance(exc, ResourceCapExceeded):
                    raise Stopped(db, str(exc)) from exc
                raise
            db.rounds += 1
            log.info("round %d: %d orbits, %d processed, %.1fs", db.rounds, len(db),
                     db.processed_count(), time.time() - t0)
            if on_round is not None:
                on_round(db)
    finally:
        if pool is not None:
            pool.terminate()
            pool.join()
        _WORK.clear()
    return db


def expand_orbits(db: OrbitDatabase, sym: PermGroup, limit: int = 1_000_000) -> list[tuple]:
    """All facet incidence sets of a database (small groups only)."""
    out = set()
    for rec in db.sorted_records():
        orbit = sym.set_orbit(rec.canonical_key, limit)
        if len(orbit) != rec.orbit_size:
            raise ArithmeticError("orbit expansion disagrees with the stored orbit size")
        out.update(orbit)
    return sorted(out)
