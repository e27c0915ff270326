"""Command-line front end.

Exit codes: 0 ok, 1 validation failure, 2 registry conflict, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import construct, extend, matrix, refdata, spectrum
from .config import load_config, scan_options
from .errors import CapacityExceeded, ConfiguraError, RegistryConflict
from .matrix import IncidenceMatrix
from .ruler import ModularRuler, oracle_exists, quotient, validate_modular

OK, INVALID, CONFLICT, BUDGET = 0, 1, 2, 3


# -- input / output helpers ----------------------------------------------------

def read_ruler(arg: str) -> ModularRuler:
    """A ruler given inline as v:k:marks or as a file holding that text or JSON."""
    p = Path(arg)
    text = p.read_text() if p.exists() else arg
    text = text.strip()
    if text.startswith("{"):
        return ModularRuler.from_json(text)
    return ModularRuler.from_text(text)


def read_structure(path: str):
    """Ruler or incidence matrix from a file, format sniffed from content."""
    text = Path(path).read_text()
    s = text.strip()
    if s.startswith("{"):
        obj = json.loads(s)
        if "marks" in obj:
            return ModularRuler.from_json(obj)
        return IncidenceMatrix.from_json(obj)
    first = s.splitlines()[0]
    if ":" in first:
        return ModularRuler.from_text(first)
    if " " in first.strip():
        return IncidenceMatrix.from_alist(s)
    return IncidenceMatrix.from_text(s)


def write_out(obj, fmt: str, out: str | None) -> None:
    if isinstance(obj, ModularRuler):
        text = json.dumps(obj.to_json()) + "\n" if fmt == "json" else obj.to_text() + "\n"
    elif fmt == "json":
        text = json.dumps(obj.to_json()) + "\n"
    elif fmt == "alist":
        text = obj.to_alist()
    else:
        text = obj.to_text()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _ints(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def _krange(s: str) -> list[int]:
    return refdata.parse_intervals(s)


# -- subcommands -----------------------------------------------------------------

def cmd_construct(a) -> int:
    g = a.generator
    if g == "singer":
        obj = construct.singer_ruler(a.q)
    elif g == "bose":
        obj = construct.bose_ruler(a.q)
    elif g == "ruzsa":
        obj = construct.ruzsa_ruler(a.q, a.g)
    elif g == "pg":
        obj = construct.pg_incidence(a.q).to_matrix()
    elif g == "ag":
        obj = construct.ag_incidence(a.q, starred=a.starred).to_matrix()
    elif g == "removal":
        obj = construct.removal_family(a.q, a.s, a.on_line)
    elif g == "ag-family":
        obj = extend.extension_family_ag(a.q, a.s, a.delta, a.theta)
    else:
        gens = construct.point_set_generators(a.q)
        key = g.replace("-", "_")
        if key not in gens or key in ("baer_partition", "singer_suborbit"):
            print(f"generator {g} does not apply to q={a.q}", file=sys.stderr)
            return INVALID
        res = construct.construction_a(gens[key](), a.k)
        if not isinstance(res, IncidenceMatrix):
            print(f"not symmetric: {res.b} lines, {res.r} lines per point", file=sys.stderr)
            return INVALID
        obj = res
    write_out(obj, a.format, a.output)
    return OK


def cmd_validate(a) -> int:
    obj = read_structure(a.file)
    if isinstance(obj, ModularRuler):
        ok, prof = validate_modular(obj.marks, obj.v)
        print(f"ruler v={obj.v} k={obj.k}: {'valid' if ok else 'INVALID'}")
        print(f"  uncovered residues: {prof.uncovered_count}  collisions: {len(prof.collisions)}")
        return OK if ok else INVALID
    w = obj.row_weights()
    k = a.k if a.k is not None else (w[0] if w else 0)
    chk = matrix.is_configuration(obj, k)
    print(f"matrix {obj.n_rows}x{obj.n_cols} k={k}: {'configuration' if chk else 'INVALID'}"
          + ("" if chk else f" ({chk.reason})"))
    return OK if chk else INVALID


def cmd_quotient(a) -> int:
    r = read_ruler(a.ruler)
    for h, (qr, w) in enumerate(quotient(r, a.t)):
        print(f"h={h} w={w} {qr.to_text()}")
    return OK


def cmd_bdc(a) -> int:
    r = read_ruler(a.ruler)
    B = matrix.bdc_assemble(r, a.t)
    print(f"t={B.t} d={B.d} weights={list(B.weight_vector())} valid={B.is_valid()}")
    if a.output:
        write_out(B.expand(), a.format, a.output)
    return OK if B.is_valid() else INVALID


def cmd_trim(a) -> int:
    r = read_ruler(a.ruler)
    B = matrix.bdc_assemble(r, a.t)
    if a.select is not None:
        B = matrix.select_blocks(B, a.select, a.c or B.t)
    if a.deltas:
        B = matrix.trim_uniform(B, _ints(a.deltas))
    M = B.expand()
    chk = matrix.is_configuration(M, B.k)
    print(f"v'={B.v} k'={B.k} weights={list(B.weight_vector())} "
          f"{'configuration' if chk else 'INVALID'}", file=sys.stderr)
    write_out(M, a.format, a.output)
    return OK if chk else INVALID


def cmd_extend(a) -> int:
    M = read_structure(a.file)
    if isinstance(M, ModularRuler):
        M = matrix.circulant_from_ruler(M)
    k = a.k if a.k is not None else M.row_weights()[0]
    try:
        out = extend.extend_many(M, k, a.theta)
    except CapacityExceeded as e:
        print(f"extension capacity exceeded: {e}", file=sys.stderr)
        return BUDGET
    chk = matrix.is_configuration(out, k)
    print(f"{out.n_rows}_{k}: {'configuration' if chk else 'INVALID'}", file=sys.stderr)
    write_out(out, a.format, a.output)
    return OK if chk else INVALID


def cmd_oracle(a) -> int:
    res = oracle_exists(a.v, a.k, budget=a.budget)
    line = f"({a.v},{a.k}) {res.outcome} nodes={res.nodes}"
    if res.witness is not None:
        line += f" witness={res.witness.to_text()}"
    print(line)
    return BUDGET if res.outcome == "budget_exceeded" else OK


def cmd_scan(a) -> int:
    cfg = load_config(a.config)
    opts = scan_options(cfg, v_max=a.vmax)
    db = spectrum.WitnessDB(a.db) if a.db else None
    if db is not None and Path(a.db).exists():
        db, fails = spectrum.WitnessDB.load(a.db)
        if fails:
            print(f"{len(fails)} database entries failed replay", file=sys.stderr)
            return INVALID
    rec = spectrum.scan(a.k, opts, cyclic_only=a.cyclic, db=db)
    print(f"k={a.k} P={rec.P} G={rec.G}")
    print(f"  cyclic: {refdata.format_intervals(rec.achieved_cyclic)}")
    if rec.populated_cyclic:
        print(f"  E_c upper: {rec.ec_upper}")
    if not a.cyclic:
        print(f"  any:    {refdata.format_intervals(rec.achieved_any)}")
        if rec.populated_any:
            print(f"  E upper: {rec.e_upper}")
    return OK


def cmd_tables(a) -> int:
    ks = _krange(a.k)
    if a.db:
        db, fails = spectrum.WitnessDB.load(a.db)
        if fails:
            print(f"{len(fails)} database entries failed replay", file=sys.stderr)
            return INVALID
        records = []
        for k in ks:
            rec = spectrum.record_from_db(db, k)
            rec.populated_cyclic = rec.populated_any = True
            records.append(rec)
    else:
        opts = scan_options(load_config(a.config))
        records = [spectrum.scan(k, opts) for k in ks]
    text = spectrum.emit_tables(records, a.format, a.output)
    if not a.output:
        sys.stdout.write(text)
    if a.compare:
        diffs = spectrum.compare_reference(records)
        for d in diffs:
            print(f"k={d.k} v={d.v} {d.kind} {d.detail}", file=sys.stderr)
        if any(d.kind == "registry-conflict" for d in diffs):
            return CONFLICT
    return OK


def cmd_verify_db(a) -> int:
    db, fails = spectrum.WitnessDB.load(a.file)
    for ln, why in fails:
        print(f"line {ln}: {why}")
    print(f"{len(db)} witnesses verified, {len(fails)} failed")
    return INVALID if fails else OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="configura", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def fmt(p):
        p.add_argument("--format", choices=["text", "json", "alist"], default="text")
        p.add_argument("-o", "--output")

    p = sub.add_parser("construct", help="build a ruler or incidence matrix")
    p.add_argument("generator", choices=["singer", "bose", "ruzsa", "pg", "ag", "removal",
                                         "ag-family", "conic-internal", "conic-external",
                                         "hermitian-complement"])
    p.add_argument("--q", type=int, required=True, help="field order (the prime p for ruzsa)")
    p.add_argument("--g", type=int, help="primitive root for ruzsa")
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--on-line", action="store_true")
    p.add_argument("--starred", action="store_true")
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--theta", type=int, default=0)
    p.add_argument("--k", type=int, help="line size for construction A")
    fmt(p)
    p.set_defaults(fn=cmd_construct)

    p = sub.add_parser("validate", help="check a ruler or matrix file")
    p.add_argument("file")
    p.add_argument("--k", type=int)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("quotient", help="quotient rulers B_h of a ruler")
    p.add_argument("ruler")
    p.add_argument("t", type=int)
    p.set_defaults(fn=cmd_quotient)

    p = sub.add_parser("bdc", help="block double-circulant form of a ruler")
    p.add_argument("ruler")
    p.add_argument("t", type=int)
    fmt(p)
    p.set_defaults(fn=cmd_bdc)

    p = sub.add_parser("trim", help="select and trim blocks of a BDC matrix")
    p.add_argument("ruler")
    p.add_argument("t", type=int)
    p.add_argument("--select", type=int, help="diagonal class j for block selection")
    p.add_argument("--c", type=int)
    p.add_argument("--deltas", help="comma separated per-class trims")
    fmt(p)
    p.set_defaults(fn=cmd_trim)

    p = sub.add_parser("extend", help="apply Procedure E theta times")
    p.add_argument("file")
    p.add_argument("theta", type=int)
    p.add_argument("--k", type=int)
    fmt(p)
    p.set_defaults(fn=cmd_extend)

    p = sub.add_parser("oracle", help="exhaustive existence search for a (v,k) ruler")
    p.add_argument("v", type=int)
    p.add_argument("k", type=int)
    p.add_argument("--budget", type=int)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("scan", help="spectrum scan for one k")
    p.add_argument("k", type=int)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--cyclic", action="store_true")
    grp.add_argument("--all", action="store_true")
    p.add_argument("--vmax", type=int)
    p.add_argument("--db")
    p.add_argument("--config")
    p.set_defaults(fn=cmd_scan)

    p = sub.add_parser("tables", help="emit spectrum tables")
    p.add_argument("--k", default="3-9", help="k values, e.g. 3-9,16")
    p.add_argument("--format", choices=["csv", "json", "md"], default="md")
    p.add_argument("--db")
    p.add_argument("--config")
    p.add_argument("--compare", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_tables)

    p = sub.add_parser("verify-db", help="replay every witness in a database")
    p.add_argument("file")
    p.set_defaults(fn=cmd_verify_db)
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if a.verbose else logging.WARNING)
    try:
        return a.fn(a)
    except RegistryConflict as e:
        print(f"registry conflict: {e}", file=sys.stderr)
        return CONFLICT
    except ConfiguraError as e:
        print(f"error: {e}", file=sys.stderr)
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
