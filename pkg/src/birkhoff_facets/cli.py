"""Command line: build groups, enumerate facet orbits, verify inequalities, report.

Exit codes: 0 success, 1 internal error, 2 usage or parse error,
3 data-integrity error, 4 stopped early with a checkpoint saved.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from . import __version__

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_INTEGRITY, EXIT_STOPPED = 0, 1, 2, 3, 4

DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _field_label(d):
    return "Q" if d is None else f"Q(sqrt {d})"


def _load_group(name):
    from .groups import coxeter_group, parse_group_name
    try:
        parse_group_name(name)
        return coxeter_group(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _symmetry(G):
    from .groups import build_symmetry_action
    return build_symmetry_action(G, allow_twisted=True).perm_group


def read_matrix(path, d):
    """Matrix file: one row per line, scalar-grammar entries separated by whitespace."""
    from .scalar import ScalarParseError, qe_parse
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        rows = [[qe_parse(x, d) for x in ln] for ln in lines]
    except ScalarParseError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise UsageError(f"{path}: expected a square matrix")
    return rows


# ------------------------------------------------------------- subcommands

def cmd_group(args) -> int:
    G = _load_group(args.name)
    line = f"order {G.order}, dim {G.dim}"
    if G.d is not None:
        line += f", field {_field_label(G.d)}"
    print(line)
    if args.symmetry:
        print(f"symmetry order {_symmetry(G).order}")
    if args.dump:
        text = G.export_text()
        if args.dump == "-":
            sys.stdout.write(text)
        else:
            with open(args.dump, "w", encoding="utf-8") as fh:
                fh.write(text)
    return EXIT_OK


def _direct_database(P, sym, cfg, name, dim):
    from .adjacency import make_recorder, new_database
    from .dd import direct_dual_description
    from .store import PROCESSED, insert_or_find
    db = new_database(P, sym, cfg, name)
    db.config["method"] = "direct"
    make = make_recorder(P, sym.order, dim)
    for facet in direct_dual_description(P):
        rec, _ = insert_or_find(db, facet.incidence, sym, make)
        rec.status = PROCESSED
    return db


def cmd_enumerate(args) -> int:
    from .adjacency import EnumerationConfig, Stopped, adjacency_decomposition
    from .polytope import polytope_of
    from .store import format_report, load_checkpoint, report, save_checkpoint

    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    if args.direct and args.resume:
        raise UsageError("--resume applies to --adjacency only")
    cfg = EnumerationConfig(recursion_threshold=args.recursion_threshold,
                            early_termination=not args.no_early_termination,
                            parallel_workers=args.threads,
                            checkpoint_interval=args.checkpoint_interval,
                            seed=args.seed, max_rounds=args.max_rounds)
    G = _load_group(args.name)
    resume = None
    if args.resume:
        resume = load_checkpoint(args.resume)
        if resume.group != G.name:
            raise UsageError(f"checkpoint is for group {resume.group}, not {G.name}")
    P = polytope_of(G)
    try:
        cfg.validate(P.full_dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sym = _symmetry(G)
    output = args.output or f"{G.name}.facets"
    ckpt = args.checkpoint or args.resume

    if args.direct:
        db = _direct_database(P, sym, cfg, G.name, G.dim)
    else:
        last = [time.monotonic()]

        def on_round(db):
            if ckpt and time.monotonic() - last[0] >= cfg.checkpoint_interval:
                save_checkpoint(db, ckpt)
                last[0] = time.monotonic()

        try:
            db = adjacency_decomposition(P, sym, cfg, db=resume, name=G.name,
                                         matrix_dim=G.dim, on_round=on_round)
        except Stopped as stop:
            path = ckpt or output
            save_checkpoint(stop.db, path)
            print(f"stopped: {stop.reason}; checkpoint saved to {path}", file=sys.stderr)
            return EXIT_STOPPED
    save_checkpoint(db, output)
    rep = report(db)
    if args.json:
        print(json.dumps(rep.as_dict(), sort_keys=True))
    else:
        sys.stdout.write(format_report(rep, f"{G.name}: facet orbits of conv(G)"))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .linalg import as_matrix
    from .polytope import polytope_of, verify_inequality
    from .scalar import ScalarParseError, qe_parse

    G = _load_group(args.name)
    A = read_matrix(args.matrix, G.d)
    if len(A) != G.dim:
        raise UsageError(f"matrix is {len(A)}x{len(A)}, group has dim {G.dim}")
    try:
        rhs = qe_parse(args.rhs, G.d)
    except ScalarParseError as exc:
        raise UsageError(f"--rhs: {exc}") from None
    rep = verify_inequality(G, as_matrix(A, G.d), rhs)
    P = polytope_of(G)
    stab = None
    if rep.incidence_count:
        stab = _symmetry(G).stabilizer_order(P.index_map[list(rep.incidence)])
    parts = ["valid" if rep.valid else "invalid", f"incidence {rep.incidence_count}",
             f"facet: {'yes' if rep.is_facet else 'no'}", f"rank {rep.rank_of_A}"]
    if stab is not None:
        parts.append(f"stabilizer {stab}")
    print(", ".join(parts))
    return EXIT_OK


def cmd_report(args) -> int:
    from .store import format_report, load_checkpoint, report
    db = load_checkpoint(args.database)
    rep = report(db)
    if args.json:
        print(json.dumps(rep.as_dict(), sort_keys=True))
    else:
        sys.stdout.write(format_report(rep, db.group and f"{db.group}: facet orbits of conv(G)"))
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="birkhoff-facets",
                                description="Facets of convex hulls of finite matrix groups.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("group", help="build a named group and print its order")
    g.add_argument("name")
    g.add_argument("--dump", metavar="PATH", help="write all elements ('-' for stdout)")
    g.add_argument("--symmetry", action="store_true", help="also print the symmetry group order")
    g.set_defaults(func=cmd_group)

    e = sub.add_parser("enumerate", help="facet orbits of conv(G)")
    e.add_argument("name")
    mode = e.add_mutually_exclusive_group()
    mode.add_argument("--direct", action="store_true", help="double description, then group by orbit")
    mode.add_argument("--adjacency", action="store_true", help="adjacency decomposition (default)")
    e.add_argument("--threads", type=int, default=1)
    e.add_argument("--checkpoint", metavar="PATH")
    e.add_argument("--checkpoint-interval", type=float, default=600.0, metavar="SECONDS")
    e.add_argument("--resume", metavar="PATH")
    e.add_argument("--seed", type=int, default=DEFAULT_SEED)
    e.add_argument("--output", metavar="PATH", help="database file (default NAME.facets)")
    e.add_argument("--recursion-threshold", type=int, default=None)
    e.add_argument("--no-early-termination", action="store_true")
    e.add_argument("--max-rounds", type=int, default=None, help="stop after N rounds (exit 4)")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_enumerate)

    v = sub.add_parser("verify", help="check Tr(XA) <= rhs over the whole group")
    v.add_argument("name")
    v.add_argument("matrix")
    v.add_argument("--rhs", default="1")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="histograms of a database file")
    r.add_argument("database")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    from .store import IntegrityError
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_STOPPED
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
