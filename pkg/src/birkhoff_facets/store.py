"""Orbit database: records, checkpoint files and summary reports.

The checkpoint format is line-oriented text (``key value`` pairs), versioned,
with scalars in the canonical scalar grammar and records sorted by
``(incidence_count, canonical_key)``.  Saving is atomic (temp file + rename).
"""

from __future__ import annotations

import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .scalar import ScalarParseError, qe_format, qe_parse

FORMAT_NAME = "birkhoff-facets orbit database"
FORMAT_VERSION = 1

UNPROCESSED = "unprocessed"
PROCESSED = "processed"


class IntegrityError(ValueError):
    """A database or checkpoint violates its invariants."""


@dataclass
class OrbitRecord:
    canonical_key: tuple
    representative_normal: tuple
    representative_rhs: object
    incidence_count: int
    stabilizer_order: int
    orbit_size: int
    rank_of_A: int | None = None
    status: str = UNPROCESSED

    def sort_key(self):
        return (self.incidence_count, self.canonical_key)


@dataclass
class OrbitDatabase:
    """Orbit records keyed by canonical incidence set plus run metadata."""

    group: str = ""
    d: int | None = None
    symmetry_order: int = 1
    n_vertices: int = 0
    ambient_dim: int = 0
    full_dim: int = 0
    config: dict = field(default_factory=dict)
    rounds: int = 0
    records: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def sorted_records(self) -> list[OrbitRecord]:
        return sorted(self.records.values(), key=OrbitRecord.sort_key)

    def unprocessed(self) -> list[OrbitRecord]:
        return [r for r in self.sorted_records() if r.status == UNPROCESSED]

    def processed_count(self) -> int:
        return sum(1 for r in self.records.values() if r.status == PROCESSED)

    def total_facets(self) -> int:
        return sum(r.orbit_size for r in self.records.values())

    def get(self, key) -> OrbitRecord | None:
        return self.records.get(tuple(key))

    def add(self, rec: OrbitRecord) -> None:
        if rec.canonical_key in self.records:
            raise IntegrityError("duplicate canonical key")
        self.records[rec.canonical_key] = rec

    def validate(self) -> None:
        for key, rec in self.records.items():
            if key != rec.canonical_key:
                raise IntegrityError("record stored under the wrong key")
            if list(key) != sorted(set(key)):
                raise IntegrityError("canonical key is not a sorted set")
            if key and (key[0] < 0 or key[-1] >= max(self.n_vertices, 1)):
                raise IntegrityError("canonical key has indices outside the vertex range")
            if rec.incidence_count != len(key):
                raise IntegrityError(f"incidence count {rec.incidence_count} != |key| {len(key)}")
            if rec.orbit_size * rec.stabilizer_order != self.symmetry_order:
                raise IntegrityError(
                    f"orbit {rec.orbit_size} x stabilizer {rec.stabilizer_order} "
                    f"!= symmetry order {self.symmetry_order}")
            if rec.status not in (PROCESSED, UNPROCESSED):
                raise IntegrityError(f"bad status {rec.status!r}")
            if len(rec.representative_normal) != self.full_dim:
                raise IntegrityError("representative normal has the wrong length")

    def same_content(self, other: "OrbitDatabase") -> bool:
        return dumps(self) == dumps(other)


def insert_or_find(db: OrbitDatabase, incidence, sym, make_record: Callable):
    """Canonicalize ``incidence`` under ``sym`` and insert a new record if unseen.

    ``make_record(key, stabilizer_order)`` builds the record for a new key.
    Returns ``(record, was_new)``.
    """
    cf = sym.canonical_form(incidence)
    key = tuple(int(i) for i in cf.image)
    rec = db.get(key)
    if rec is not None:
        return rec, False
    rec = make_record(key, cf.stabilizer_order)
    db.add(rec)
    return rec, True


# ------------------------------------------------------------------ text I/O

def _fmt_d(d):
    return "Q" if d is None else str(d)


def dumps(db: OrbitDatabase) -> str:
    lines = [FORMAT_NAME, f"version {FORMAT_VERSION}", f"group {db.group}",
             f"field {_fmt_d(db.d)}", f"symmetry_order {db.symmetry_order}",
             f"vertices {db.n_vertices}", f"ambient_dim {db.ambient_dim}",
             f"full_dim {db.full_dim}"]
    cfg = " ".join(f"{k}={db.config[k]}" for k in sorted(db.config))
    lines.append(f"config {cfg}".rstrip())
    lines.append(f"rounds {db.rounds}")
    recs = db.sorted_records()
    lines.append(f"records {len(recs)}")
    for r in recs:
        lines.append("record")
        lines.append("key " + " ".join(str(i) for i in r.canonical_key))
        lines.append("normal " + " ".join(qe_format(x) for x in r.representative_normal))
        lines.append(f"rhs {qe_format(r.representative_rhs)}")
        lines.append(f"incidence {r.incidence_count}")
        lines.append(f"stabilizer {r.stabilizer_order}")
        lines.append(f"orbit {r.orbit_size}")
        lines.append(f"rank {'-' if r.rank_of_A is None else r.rank_of_A}")
        lines.append(f"status {r.status}")
        lines.append("end")
    return "\n".join(lines) + "\n"


def _expect(lines, i, name):
    if i >= len(lines):
        raise IntegrityError(f"truncated file: expected {name!r}")
    head, _, rest = lines[i].partition(" ")
    if head != name:
        raise IntegrityError(f"line {i + 1}: expected {name!r}, found {lines[i]!r}")
    return rest


def _int(text, what):
    try:
        return int(text)
    except ValueError:
        raise IntegrityError(f"bad integer for {what}: {text!r}") from None


def loads(text: str) -> OrbitDatabase:
    lines = text.splitlines()
    if not lines or lines[0] != FORMAT_NAME:
        raise IntegrityError("not an orbit database file")
    version = _int(_expect(lines, 1, "version"), "version")
    if version != FORMAT_VERSION:
        raise IntegrityError(f"unsupported format version {version}")
    db = OrbitDatabase()
    db.group = _expect(lines, 2, "group")
    fd = _expect(lines, 3, "field")
    db.d = None if fd == "Q" else _int(fd, "field")
    db.symmetry_order = _int(_expect(lines, 4, "symmetry_order"), "symmetry_order")
    db.n_vertices = _int(_expect(lines, 5, "vertices"), "vertices")
    db.ambient_dim = _int(_expect(lines, 6, "ambient_dim"), "ambient_dim")
    db.full_dim = _int(_expect(lines, 7, "full_dim"), "full_dim")
    cfg = _expect(lines, 8, "config") if lines[8].startswith("config") else ""
    db.config = dict(item.split("=", 1) for item in cfg.split())
    db.rounds = _int(_expect(lines, 9, "rounds"), "rounds")
    count = _int(_expect(lines, 10, "records"), "records")
    i = 11
    prev = None
    try:
        for _ in range(count):
            if i >= len(lines) or lines[i] != "record":
                raise IntegrityError(f"line {i + 1}: expected 'record'")
            key = tuple(_int(x, "key") for x in _expect(lines, i + 1, "key").split())
            normal = tuple(qe_parse(x, db.d) for x in _expect(lines, i + 2, "normal").split())
            rhs = qe_parse(_expect(lines, i + 3, "rhs"), db.d)
            inc = _int(_expect(lines, i + 4, "incidence"), "incidence")
            stab = _int(_expect(lines, i + 5, "stabilizer"), "stabilizer")
            orb = _int(_expect(lines, i + 6, "orbit"), "orbit")
            rk = _expect(lines, i + 7, "rank")
            status = _expect(lines, i + 8, "status")
            if i + 9 >= len(lines) or lines[i + 9] != "end":
                raise IntegrityError(f"line {i + 10}: expected 'end'")
            rec = OrbitRecord(key, normal, rhs, inc, stab, orb,
                              None if rk == "-" else _int(rk, "rank"), status)
            if prev is not None and rec.sort_key() <= prev:
                raise IntegrityError("records are not sorted by (incidence, key)")
            prev = rec.sort_key()
            db.add(rec)
            i += 10
    except ScalarParseError as exc:
        raise IntegrityError(f"bad scalar: {exc}") from None
    if i != len(lines):
        raise IntegrityError("trailing data after the last record")
    db.validate()
    return db


def save_checkpoint(db: OrbitDatabase, path) -> None:
    """Atomic write: temp file in the same directory, fsync, rename."""
    db.validate()
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".ckpt-", dir=folder)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps(db))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path) -> OrbitDatabase:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


# -------------------------------------------------------------------- report

@dataclass
class Report:
    orbit_count: int
    total_facets: int
    incidence_histogram: dict
    stabilizer_histogram: dict
    rank_histogram: dict
    processed: int

    def as_dict(self) -> dict:
        return {
            "orbit_count": self.orbit_count,
            "total_facets": self.total_facets,
            "incidence_histogram": dict(self.incidence_histogram),
            "stabilizer_histogram": dict(self.stabilizer_histogram),
            "rank_histogram": dict(self.rank_histogram),
            "processed": self.processed,
        }


def check_histogram_sums(rep: Report) -> None:
    """Every histogram must account for every orbit exactly once."""
    for name in ("incidence_histogram", "stabilizer_histogram"):
        total = sum(getattr(rep, name).values())
        if total != rep.orbit_count:
            raise IntegrityError(f"{name} sums to {total}, expected {rep.orbit_count}")
    ranked = sum(rep.rank_histogram.values())
    if rep.rank_histogram and ranked != rep.orbit_count:
        raise IntegrityError(f"rank histogram sums to {ranked}, expected {rep.orbit_count}")


def report(db: OrbitDatabase) -> Report:
    db.validate()
    recs = db.sorted_records()
    inc = Counter(r.incidence_count for r in recs)
    stab = Counter(r.stabilizer_order for r in recs)
    rank = Counter(r.rank_of_A for r in recs if r.rank_of_A is not None)
    rep = Report(len(recs), sum(r.orbit_size for r in recs), dict(sorted(inc.items())),
                 dict(sorted(stab.items())), dict(sorted(rank.items())), db.processed_count())
    check_histogram_sums(rep)
    return rep


def histogram_from_pairs(pairs) -> dict:
    return {int(k): int(v) for k, v in pairs}


def format_report(rep: Report, title: str = "") -> str:
    """Aligned text tables: incidence and stabilizer histograms."""
    out = []
    if title:
        out.append(title)
    out.append(f"orbits {rep.orbit_count}  facets {rep.total_facets}  processed {rep.processed}")
    out.append("")
    out += _table("incidence", "p", rep.incidence_histogram)
    out.append("")
    out += _table("stabilizer", "s", rep.stabilizer_histogram)
    if rep.rank_histogram:
        out.append("")
        out += _table("rank of A", "r", rep.rank_histogram)
    return "\n".join(out) + "\n"


def _table(name, col, hist):
    w = max([len(col)] + [len(str(k)) for k in hist]) + 2
    v = max([3] + [len(str(x)) for x in hist.values()]) + 2
    rows = [f"{name} histogram", f"{col:>{w}}{'Nr.':>{v}}"]
    rows += [f"{k:>{w}}{n:>{v}}" for k, n in hist.items()]
    rows.append(f"{'total':>{w}}{sum(hist.values()):>{v}}")
    return rows
