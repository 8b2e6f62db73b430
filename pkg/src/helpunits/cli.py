"""Command line front end.

    helpunits validate FILE...
    helpunits solve --tables DIR --order K [--chars X.2,X.4] [--charcs 0,3]
                    [--format json|md] [--max-cases N]
    helpunits run-all --tables DIR [--include-open-orders] [--format json|md]

Exit status: 0 when every requested order was decided, 2 when some order
was aborted or could not be attempted, 1 on errors (bad tables, bad
arguments, I/O).

A report is a JSON object with a ``metadata`` header (timestamp, versions)
and a ``report`` body; only the body is deterministic.
"""
from __future__ import annotations

import argparse
import datetime
import json
import logging
import sys
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import __version__
from .constraints import AugmentationTuple
from .orchestrator import (ABORTED, ELIMINATED, NOT_ATTEMPTED, Case, OrderVerdict,
                           PrimeGraphReport, Profile, kimmerle_report, run_all, run_divisors)
from .solver import SolutionSet
from .tables import CharacterTable, TableError, load_table, load_tables, ordinary_table

log = logging.getLogger("helpunits")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ABORTED = 2


# --- report documents --------------------------------------------------------

def _tuple_dict(t: AugmentationTuple) -> dict[str, int]:
    return {n: v for n, v in t.entries if v}


def verdict_to_dict(v: OrderVerdict) -> dict[str, Any]:
    cases = []
    for i, c in enumerate(v.cases, 1):
        cases.append({
            "case": i,
            "profile": {str(m): _tuple_dict(t) for m, t in c.profile.assignments},
            "constraints": c.constraint_count,
            "status": c.solutions.status,
            "solutions": [list(s) for s in c.solutions.solutions],
            "witness": c.solutions.witness,
        })
    return {
        "order": v.order,
        "status": v.status,
        "variables": list(v.variables),
        "note": v.note,
        "cases": cases,
        "merged": [list(s) for s in v.merged()],
        "trivial": [list(s) for s in v.trivial_solutions()],
    }


def verdict_from_dict(d: Mapping[str, Any]) -> OrderVerdict:
    k = int(d["order"])
    variables = list(d["variables"])
    cases = []
    for c in d["cases"]:
        assignments = {int(m): AugmentationTuple.make(int(m), vals)
                       for m, vals in c["profile"].items()}
        sol = SolutionSet(list(variables), [tuple(s) for s in c["solutions"]], c["status"],
                          witness=c.get("witness"))
        cases.append(Case(Profile.make(k, assignments), sol, int(c["constraints"])))
    return OrderVerdict(k, d["status"], variables, cases, d.get("note", ""))


def kc_summary(report: PrimeGraphReport | None) -> str:
    if report is None:
        return "(KC) undecided: some order pq has no verdict"
    if report.equal:
        return "(KC) holds: π(G) = π(V(ZG))"
    extra = sorted(report.unit_edges - report.group_edges)
    return "(KC) not established: unit edges " + ", ".join(f"{p}-{q}" for p, q in extra) + \
        " are not excluded"


def build_report(command: str, table: CharacterTable, verdicts: Mapping[int, OrderVerdict],
                 config: Mapping[str, Any], with_graph: bool) -> dict[str, Any]:
    body: dict[str, Any] = {
        "group": table.group_name,
        "command": command,
        "config": dict(config),
        "orders": [verdict_to_dict(verdicts[k]) for k in sorted(verdicts)],
    }
    if with_graph:
        try:
            g = kimmerle_report(table, verdicts)
        except KeyError:
            g = None
        if g is not None:
            body["prime_graph"] = {
                "primes": g.primes,
                "group_edges": sorted(list(e) for e in g.group_edges),
                "unit_edges": sorted(list(e) for e in g.unit_edges),
                "equal": g.equal,
            }
        body["summary"] = kc_summary(g)
    return {
        "metadata": {
            "tool": "helpunits",
            "version": __version__,
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        },
        "report": body,
    }


def parse_report(text: str) -> dict[str, Any]:
    """Inverse of the JSON rendering: the report body with verdict objects."""
    doc = json.loads(text)
    body = doc["report"]
    out = dict(body)
    out["verdicts"] = {int(d["order"]): verdict_from_dict(d) for d in body["orders"]}
    if "prime_graph" in body:
        g = body["prime_graph"]
        out["prime_graph"] = PrimeGraphReport(
            list(g["primes"]), {tuple(e) for e in g["group_edges"]},
            {tuple(e) for e in g["unit_edges"]})
    return out


def render_json(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


def _fmt_tuple(variables: Sequence[str], s: Sequence[int]) -> str:
    return "(" + ", ".join(str(x) for x in s) + ")"


def render_markdown(doc: Mapping[str, Any]) -> str:
    meta, body = doc["metadata"], doc["report"]
    lines = [f"<!-- {meta['tool']} {meta['version']} {meta['created']} -->", "",
             f"# HeLP report for {body['group']}", ""]
    cfg = ", ".join(f"{k}={v}" for k, v in body["config"].items() if v not in (None, False))
    if cfg:
        lines += [f"Configuration: {cfg}", ""]
    for v in body["orders"]:
        lines.append(f"## Order {v['order']}: {v['status']}")
        lines.append("")
        if v["note"]:
            lines += [v["note"], ""]
        if v["cases"]:
            lines.append("Unknowns: (" + ", ".join(f"nu_{c}" for c in v["variables"]) + ")")
            lines.append("")
        for c in v["cases"]:
            prof = "; ".join(f"order {m}: " + ", ".join(f"{n}={x}" for n, x in t.items())
                             for m, t in c["profile"].items()) or "no proper powers"
            lines.append(f"Case {c['case']} ({prof}), {c['constraints']} constraints:")
            if c["solutions"]:
                for s in c["solutions"]:
                    lines.append(f"- {_fmt_tuple(v['variables'], s)}")
            else:
                lines.append(f"- no solution ({c['witness'] or c['status']})")
            lines.append("")
        if v["merged"]:
            lines.append(f"Merged: {len(v['merged'])} tuples; "
                         f"{len(v['trivial'])} certified trivial")
            lines.append("")
    if "prime_graph" in body:
        g = body["prime_graph"]
        edges = lambda es: ", ".join(f"{p}-{q}" for p, q in es) or "none"  # noqa: E731
        lines += ["## Prime graphs", "",
                  f"Primes: {', '.join(map(str, g['primes']))}",
                  f"Group edges: {edges(g['group_edges'])}",
                  f"Unit edges: {edges(g['unit_edges'])}", ""]
    if "summary" in body:
        lines += [body["summary"], ""]
    return "\n".join(lines)


def _exit_status(verdicts: Mapping[int, OrderVerdict]) -> int:
    if any(v.status in (ABORTED, NOT_ATTEMPTED) for v in verdicts.values()):
        return EXIT_ABORTED
    return EXIT_OK


# --- commands ---------------------------------------------------------------

def _split(text: str | None, conv=str):
    if text is None:
        return None
    return [conv(x.strip()) for x in text.split(",") if x.strip()]


def _emit(doc, fmt: str, output: str | None):
    text = render_json(doc) if fmt == "json" else render_markdown(doc)
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(directory: str) -> list[CharacterTable]:
    tables = load_tables(directory)
    return tables


def cmd_validate(args) -> int:
    for name in args.files:
        try:
            t = load_table(name)
        except (OSError, TableError, ValueError) as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            return EXIT_ERROR
        print(f"{name}: ok ({t.label}, {len(t.classes)} classes, "
              f"{len(t.characters)} characters)")
    return EXIT_OK


def cmd_solve(args) -> int:
    tables = _load(args.tables)
    chars = _split(args.chars)
    charcs = _split(args.charcs, int)
    if args.order < 2:
        raise ValueError("--order must exceed 1")
    if charcs is not None:
        known = {t.characteristic for t in tables}
        bad = [p for p in charcs if p not in known]
        if bad:
            raise ValueError(f"no table in characteristic {bad[0]}")
    if chars is not None:
        pool = [t for t in tables if charcs is None or t.characteristic in charcs]
        names = {c.name for t in pool for c in t.characters}
        bad = [c for c in chars if c not in names]
        if bad:
            raise ValueError(f"unknown character {bad[0]} in the selected tables")
    verdicts = run_divisors(args.order, tables, max_cases=args.max_cases,
                            characters=chars, characteristics=charcs)
    config = {"order": args.order, "characters": chars, "characteristics": charcs,
              "max_cases": args.max_cases}
    doc = build_report("solve", ordinary_table(tables), {args.order: verdicts[args.order]},
                       config, with_graph=False)
    _emit(doc, args.format, args.output)
    return _exit_status({args.order: verdicts[args.order]})


def cmd_run_all(args) -> int:
    tables = _load(args.tables)
    verdicts = run_all(tables, include_open_orders=args.include_open_orders,
                       max_cases=args.max_cases)
    config = {"include_open_orders": args.include_open_orders, "max_cases": args.max_cases}
    doc = build_report("run-all", ordinary_table(tables), verdicts, config, with_graph=True)
    _emit(doc, args.format, args.output)
    return _exit_status(verdicts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helpunits",
        description="HeLP method for torsion units of integral group rings")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check character table files")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_validate)

    def common(p):
        p.add_argument("--tables", required=True, help="directory with the table files")
        p.add_argument("--format", choices=("json", "md"), default="json")
        p.add_argument("--max-cases", type=int, default=10_000,
                       help="abort an order with more cases than this (default 10000)")
        p.add_argument("-o", "--output", help="write the report here instead of stdout")

    p = sub.add_parser("solve", help="solve one order (its divisors use every character)")
    common(p)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--chars", help="comma separated character names, e.g. X.2,X.4")
    p.add_argument("--charcs", help="comma separated characteristics, e.g. 0,3")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("run-all", help="every candidate order and the prime graph verdict")
    common(p)
    p.add_argument("--include-open-orders", action="store_true",
                   help="also attempt orders above a divisor that is not an element order")
    p.set_defaults(func=cmd_run_all)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, TableError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
