"""Command-line front end.

Exit status: 0 success or property holds, 1 property fails or witness found,
2 usage or input error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Sequence

from . import __version__
from .core import EdgeSet, Shape, encode_edge, format_edge
from .formats import FormatError, format_configuration, format_edge_list, read_configuration, read_edge_list
from .geometry import clustered_configuration, configuration_hypergraph, random_configuration
from .oracle import brute_force_min_size
from .search import (
    BUDGET_EXCEEDED,
    WITNESS,
    BoundReport,
    Budget,
    CaseParams,
    CheckpointError,
    SearchOptions,
    generate_cases,
    prove_bound,
)
from .tables import LargeTable, row_transversals, small_table_of
from .verifier import report

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


@dataclass
class RunManifest:
    version: str
    command: list[str]
    inputs: dict[str, str] = field(default_factory=dict)
    seed: int | None = None
    started: str = ""
    elapsed: float = 0.0
    outcome: str = ""

    def add_input(self, path: str) -> None:
        with open(path, "rb") as fh:
            self.inputs[path] = "sha256:" + hashlib.sha256(fh.read()).hexdigest()

    def comment_lines(self) -> list[str]:
        lines = [f"octasys {self.version}", "command: " + " ".join(self.command)]
        lines += [f"input {p}: {digest}" for p, digest in self.inputs.items()]
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        lines.append(f"started: {self.started}")
        lines.append(f"elapsed: {self.elapsed:.3f}s")
        if self.outcome:
            lines.append(f"outcome: {self.outcome}")
        return lines


class _Run:
    def __init__(self, argv: Sequence[str]) -> None:
        self.manifest = RunManifest(__version__, ["octasys", *argv])
        self.manifest.started = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self._t0 = time.monotonic()

    def finish(self, outcome: str) -> RunManifest:
        self.manifest.elapsed = time.monotonic() - self._t0
        self.manifest.outcome = outcome
        return self.manifest

    def header(self, outcome: str) -> str:
        return "".join(f"# {line}\n" for line in self.finish(outcome).comment_lines())


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _case(text: str) -> tuple[int, int, int]:
    try:
        l, b, j = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected l,b,j, got {text!r}") from None
    return l, b, j


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _dimension(text: str) -> int:
    v = _positive(text)
    Shape(v)
    return v


def cmd_verify(args: argparse.Namespace, run: _Run) -> int:
    run.manifest.add_input(args.file)
    h = read_edge_list(args.file)
    r = report(h)
    outcome = "holds" if r.holds else "fails"
    if args.json:
        data = {
            "edges": len(h),
            "property1": r.isolated_vertex is None,
            "isolated_vertex": list(r.isolated_vertex) if r.isolated_vertex else None,
            "property2": r.octahedral.holds,
            "counterexample": str(r.octahedral.counterexample) if r.octahedral.counterexample else None,
            "parities": list(r.octahedral.profile.parities) if r.octahedral.profile else None,
            "isolated_edges": [format_edge(e) for e in r.isolated_edges],
            "score": r.score,
            "manifest": asdict(run.finish(outcome)),
        }
        _emit(json.dumps(data, indent=2) + "\n", None)
    else:
        lines = [f"edges: {len(h)}"]
        if r.isolated_vertex is None:
            lines.append("property 1: holds")
        else:
            c, x = r.isolated_vertex
            lines.append(f"property 1: fails, point {x} of colour {c} is isolated")
        if r.octahedral.holds:
            lines.append("property 2: holds")
        else:
            prof = r.octahedral.profile
            par = " ".join(map(str, prof.parities)) if prof else "?"
            lines.append(f"property 2: fails, octahedron {r.octahedral.counterexample} has parities {par}")
        iso = " ".join(format_edge(e) for e in r.isolated_edges) or "none"
        lines.append(f"isolated edges: {iso}")
        lines.append(f"score: {r.score}")
        _emit(run.header(outcome) + "\n".join(lines) + "\n", None)
    return EXIT_OK if r.holds else EXIT_FAIL


def cmd_score(args: argparse.Namespace, run: _Run) -> int:
    run.manifest.add_input(args.file)
    h = read_edge_list(args.file)
    if not 0 <= args.colour <= h.shape.d:
        raise FormatError(f"colour {args.colour} outside [0, {h.shape.d}]", None, args.file)
    s = LargeTable.build(h, args.colour).score
    _emit(run.header(f"score {s}") + f"{s}\n", None)
    return EXIT_OK


def cmd_table(args: argparse.Namespace, run: _Run) -> int:
    if args.file is not None:
        run.manifest.add_input(args.file)
        h = read_edge_list(args.file)
    else:
        if args.d is None or args.l is None:
            raise argparse.ArgumentTypeError("table needs FILE or both --d and --l")
        if not 0 <= args.l <= args.d + 1:
            raise argparse.ArgumentTypeError(f"--l must lie in [0, {args.d + 1}]")
        h = EdgeSet.from_codes(Shape(args.d), [encode_edge((x,) + (0,) * args.d) for x in range(args.l)])
    t = LargeTable.build(h)
    body = small_table_of(t).format() + "\n"
    if args.large:
        width = h.shape.d
        body += "\n" + " " * (width + 1) + " | " + " ".join(map(str, range(h.shape.colours))) + "\n"
        for u, row in zip(row_transversals(h.shape), t.rows()):
            body += "*" + "".join(map(str, u)) + " | " + " ".join(map(str, row)) + "\n"
    body += f"score: {t.score}\n"
    _emit(run.header(f"score {t.score}") + body, None)
    return EXIT_OK


def cmd_geom(args: argparse.Namespace, run: _Run) -> int:
    if args.geom_command == "random":
        run.manifest.seed = args.seed
        c = random_configuration(Shape(args.d), args.seed, scale=args.scale)
        _emit(format_configuration(c, run.finish("configuration").comment_lines()), args.output)
        return EXIT_OK
    if args.geom_command == "clustered":
        run.manifest.seed = args.seed
        c = clustered_configuration(Shape(args.d), args.seed)
        _emit(format_configuration(c, run.finish("configuration").comment_lines()), args.output)
        return EXIT_OK
    run.manifest.add_input(args.file)
    c = read_configuration(args.file)
    h = configuration_hypergraph(c, validate=not args.no_validate, core=not args.no_core)
    if args.geom_command == "count":
        _emit(run.header(f"{len(h)} edges") + f"{len(h)}\n", None)
    else:
        _emit(format_edge_list(h, run.finish(f"{len(h)} edges").comment_lines()), args.output)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, run: _Run) -> int:
    res = brute_force_min_size(Shape(args.d), args.max_edges, args.method)
    if res.found:
        outcome = f"smallest system has {res.size} edges"
        body = format_edge_list(res.witness, run.finish(outcome).comment_lines())
    else:
        outcome = f"no system with at most {args.max_edges} edges"
        body = run.header(outcome) + outcome + "\n"
    _emit(body, None)
    return EXIT_FAIL if res.found else EXIT_OK


def cmd_cases(args: argparse.Namespace, run: _Run) -> int:
    cases = generate_cases(args.d, args.target)
    lines = [f"{c.l},{c.b},{c.j}" for c in cases]
    _emit(run.header(f"{len(cases)} cases") + "".join(line + "\n" for line in lines), None)
    return EXIT_OK


def cmd_search(args: argparse.Namespace, run: _Run) -> int:
    d, target = args.d, args.target
    cases = None
    if args.case is not None:
        case = CaseParams(*args.case, target)
        case.validate(d)
        cases = [case]
    resume = None
    if args.resume is not None:
        run.manifest.add_input(args.resume)
        try:
            with open(args.resume, encoding="utf-8") as fh:
                resume = BoundReport.from_json(json.load(fh))
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"corrupt checkpoint {args.resume}: {exc}") from None
        if cases is None:
            cases = [c.case for c in resume.certificates]
    options = SearchOptions(symmetry=not args.no_symmetry, targeted=not args.free_branching)
    budget = Budget(args.node_limit, args.time_limit)
    rep = prove_bound(d, target, budget, options, jobs=args.jobs, cases=cases, resume=resume)
    data = rep.to_json()
    data["manifest"] = asdict(run.finish(rep.summary()))
    text = json.dumps(data, indent=2) + "\n"
    if args.checkpoint is not None:
        _emit(text, args.checkpoint)
    if args.format == "json":
        _emit(text, args.output)
    else:
        lines = [f"# {line}" for line in run.manifest.comment_lines()]
        for c in rep.certificates:
            s = c.statistics
            prunes = ", ".join(f"{k} {v}" for k, v in s.prunes.items())
            lines.append(f"case {c.case.l},{c.case.b},{c.case.j} target {c.case.target}: {c.outcome}; "
                         f"nodes {s.nodes}, leaves {s.leaves}, prunes ({prunes}), {s.wall_time:.2f}s")
            if c.witness is not None:
                lines.append("  witness: " + " ".join(format_edge(e) for e in c.witness))
        lines.append(rep.summary())
        _emit("\n".join(lines) + "\n", args.output)
    if any(c.outcome == WITNESS for c in rep.certificates):
        return EXIT_FAIL
    if any(c.outcome == BUDGET_EXCEEDED for c in rep.certificates):
        return EXIT_BUDGET
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="octasys", description="Octahedral systems toolkit.")
    p.add_argument("--version", action="version", version=f"octasys {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", help="check both properties of an edge list")
    s.add_argument("file")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("score", help="parity table score of an edge list")
    s.add_argument("file")
    s.add_argument("--colour", type=int, default=0)
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("table", help="print the small table and score")
    s.add_argument("file", nargs="?")
    s.add_argument("--d", type=_dimension, help="with --l, use the edges x0..0 for x < l")
    s.add_argument("--l", type=int)
    s.add_argument("--large", action="store_true", help="also print the large table")
    s.set_defaults(func=cmd_table)

    g = sub.add_parser("geom", help="geometric configurations")
    gsub = g.add_subparsers(dest="geom_command", required=True)
    for name, help_text in (("count", "number of colourful simplices containing the origin"),
                            ("hypergraph", "configuration hypergraph as an edge list")):
        s = gsub.add_parser(name, help=help_text)
        s.add_argument("file")
        s.add_argument("--no-validate", action="store_true", help="skip the general position check")
        s.add_argument("--no-core", action="store_true", help="allow classes not surrounding the origin")
        if name == "hypergraph":
            s.add_argument("--output", "-o")
    s = gsub.add_parser("random", help="seeded random valid configuration")
    s.add_argument("--d", type=_dimension, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--scale", type=_positive, default=1000)
    s.add_argument("--output", "-o")
    s = gsub.add_parser("clustered", help="configuration with every colourful simplex around the origin")
    s.add_argument("--d", type=_dimension, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", "-o")
    g.set_defaults(func=cmd_geom)

    s = sub.add_parser("oracle", help="brute-force smallest system (small d)")
    s.add_argument("--d", type=_dimension, required=True)
    s.add_argument("--max-edges", type=int, required=True)
    s.add_argument("--method", choices=("subsets", "partitions"))
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("cases", help="list the (l,b,j) cases for a target")
    s.add_argument("--d", type=_dimension, required=True)
    s.add_argument("--target", type=int, required=True)
    s.set_defaults(func=cmd_cases)

    s = sub.add_parser("search", help="exhaustive case search")
    s.add_argument("--d", type=_dimension, required=True)
    s.add_argument("--target", type=int, required=True)
    s.add_argument("--case", type=_case, help="only this case, as l,b,j")
    s.add_argument("--node-limit", type=int, help="per-case node budget")
    s.add_argument("--time-limit", type=float, help="per-case wall-clock budget in seconds")
    s.add_argument("--checkpoint", help="write the resumable report here")
    s.add_argument("--resume", help="continue from a report written with --checkpoint")
    s.add_argument("--jobs", type=_positive, default=1)
    s.add_argument("--no-symmetry", action="store_true", help="branch on the whole family at the root")
    s.add_argument("--free-branching", action="store_true",
                   help="branch on every free edge after table and isolated-edge repair")
    s.add_argument("--format", choices=("json", "text"), default="json")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_search)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    run = _Run(argv)
    try:
        return args.func(args, run)
    except (ValueError, OSError, argparse.ArgumentTypeError) as exc:
        # Format, checkpoint, oracle-range and general-position errors are all ValueErrors.
        print(f"octasys: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
