"""Command-line entry points: solve, explain, learn, verify, kb, serve.

Exit codes: 0 success, 1 usage error, 2 parse/lint error, 3 unsatisfiable
learning task, 4 corpus-gate failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .ground import GroundingError, ground_program
from .kb import KbError, LintError, _load_case, _load_meta, lint_program, load_kb_dir
from .learn import EmptySpaceError, SpaceCapError, UnsatisfiableTaskError, run_learning
from .explain import ExplanationError, export_dag, justification_tree, support_dag
from .parser import parse_ground_atom, parse_learning_task, parse_program
from .solve import enumerate_stable_models
from .syntax import DuplicateRuleIdError, Program, SourceError
from .verify import report_summary, report_to_dict, verify_case

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_UNSAT_LEARN = 3
EXIT_GATE = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lexasp", description="ASP workbench for criminal-code reasoning")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_solve = sub.add_parser("solve", help="enumerate stable models of program files")
    p_solve.add_argument("files", nargs="+", metavar="FILE")
    p_solve.add_argument("--models", type=int, default=None, help="stop after N models")
    p_solve.add_argument("--project", choices=["verdicts"], help="print only the verdict projection")
    p_solve.add_argument("--with-kb", action="store_true", help="include the knowledge base")
    p_solve.add_argument("--dump-ground", action="store_true", help="emit the ground program and stop")
    p_solve.add_argument("--kb-dir", default=None)

    p_explain = sub.add_parser("explain", help="justification tree or support DAG for a model atom")
    p_explain.add_argument("file", metavar="FILE")
    p_explain.add_argument("--query", help="ground atom to explain")
    p_explain.add_argument("--tree", action="store_true", help="print the justification tree (default)")
    p_explain.add_argument("--dag", choices=["dot", "json"], help="export the support DAG instead")
    p_explain.add_argument("--model", type=int, default=0, help="scenario index (default 0)")
    p_explain.add_argument("--render", metavar="PNG", help="also render the DAG to a PNG file")
    p_explain.add_argument("--with-kb", action="store_true")
    p_explain.add_argument("--kb-dir", default=None)

    p_learn = sub.add_parser("learn", help="learn an optimal hypothesis from a .task file")
    p_learn.add_argument("task", metavar="TASKFILE")
    p_learn.add_argument("--report", action="store_true", help="print the stage report")
    p_learn.add_argument("--report-dir", default=None, help="write hypothesis.lp, report.tsv and stages.png")

    p_verify = sub.add_parser("verify", help="run the refinement phases over judgment cases")
    p_verify.add_argument("cases", nargs="*", metavar="CASE", help="corpus ids or .case paths (default: whole corpus)")
    p_verify.add_argument("--subsets", action="store_true", help="run phase 3 subset exploration")
    p_verify.add_argument("--gap", type=int, default=2, help="max facts dropped in phase 3")
    p_verify.add_argument("--json", action="store_true", help="emit structured reports")
    p_verify.add_argument("--report-dir", default=None, help="write cases.tsv and corpus.png")
    p_verify.add_argument("--kb-dir", default=None)

    p_kb = sub.add_parser("kb", help="inspect the knowledge base")
    p_kb.add_argument("action", choices=["list", "lint"])
    p_kb.add_argument("--kb-dir", default=None)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--kb-dir", default=None)

    return parser


def _kb_dir_of(args) -> str | None:
    return getattr(args, "kb_dir", None) or os.environ.get("KB_DIR") or None


def _load_files(paths: list[str]) -> Program:
    rules = []
    for path in paths:
        text = Path(path).read_text(encoding="utf-8")
        rules.extend(parse_program(text, path).rules)
    return Program(tuple(rules))


def _merge_with_kb(program: Program, kb) -> Program:
    return Program(kb.program.rules + program.rules)


def cmd_solve(args) -> int:
    program = _load_files(args.files)
    kb = None
    if args.with_kb or args.project:
        kb = load_kb_dir(_kb_dir_of(args))
    if args.with_kb:
        program = _merge_with_kb(program, kb)
    gp = ground_program(program)
    if args.dump_ground:
        sys.stdout.write(gp.to_text())
        return EXIT_OK
    count = 0
    for model in enumerate_stable_models(gp, args.models):
        count += 1
        if args.project == "verdicts":
            atoms = [a for a in model if a.signature in kb.verdict_predicates]
            print(" ".join(str(a) for a in atoms))
        else:
            print(model.to_line())
    if count == 0:
        print("% no stable models", file=sys.stderr)
    return EXIT_OK


def cmd_explain(args) -> int:
    program = _load_files([args.file])
    if args.with_kb:
        program = _merge_with_kb(program, load_kb_dir(_kb_dir_of(args)))
    gp = ground_program(program)
    models = list(enumerate_stable_models(gp, (args.model or 0) + 1))
    if len(models) <= args.model:
        print(f"error: program has {len(models)} model(s); no scenario {args.model}", file=sys.stderr)
        return EXIT_PARSE
    model = models[args.model]
    if args.dag:
        dag = support_dag(gp, model)
        fmt = "graph-description" if args.dag == "dot" else "structured-document"
        print(export_dag(dag, fmt))
        if args.render:
            from .report import render_dag_png

            render_dag_png(dag, args.render)
        return EXIT_OK
    if not args.query:
        print("error: --tree explanations need --query ATOM", file=sys.stderr)
        return EXIT_USAGE
    query = parse_ground_atom(args.query)
    tree = justification_tree(gp, model, query)
    print(tree.render())
    if args.render:
        from .report import render_dag_png

        render_dag_png(support_dag(gp, model), args.render)
    return EXIT_OK


def cmd_learn(args) -> int:
    text = Path(args.task).read_text(encoding="utf-8")
    task = parse_learning_task(text, args.task)
    try:
        result = run_learning(task)
    except UnsatisfiableTaskError as exc:
        print(f"unsatisfiable: {exc}", file=sys.stderr)
        return EXIT_UNSAT_LEARN
    for line in result.hypothesis.texts():
        print(line)
    if not result.hypothesis.texts():
        print("% empty hypothesis (all examples covered by the background)", file=sys.stderr)
    if args.report:
        print()
        print(f"|S| = {result.report.space_size}")
        for row, secs in result.report.rows():
            print(f"{row:30s} {secs:10.3f}")
    if args.report_dir:
        from .report import write_learn_report

        for path in write_learn_report(result, args.report_dir):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _resolve_cases(kb, names: list[str]):
    if not names:
        return list(kb.judgments)
    by_id = {c.id: c for c in kb.judgments}
    out = []
    for name in names:
        if name in by_id:
            out.append(by_id[name])
            continue
        path = Path(name)
        if not path.exists():
            raise KbError(f"unknown case {name!r}: not a corpus id and not a file")
        meta_path = path.with_name(path.name[: -len(".case")] + ".meta.json") if path.name.endswith(".case") else None
        if meta_path is None or not meta_path.exists():
            raise KbError(f"{name}: case files need a .case suffix and a .meta.json sidecar")
        out.append(_load_case(path, _load_meta(meta_path)))
    return out


def cmd_verify(args) -> int:
    kb = load_kb_dir(_kb_dir_of(args))
    cases = _resolve_cases(kb, args.cases)
    reports = [
        verify_case(kb, case, max_gap=args.gap, cumulative=True, subsets=args.subsets)
        for case in cases
    ]
    if args.json:
        print(json.dumps([report_to_dict(r) for r in reports], indent=2))
    else:
        for r in reports:
            print(report_summary(r))
    if args.report_dir:
        from .report import write_verify_report

        for path in write_verify_report(reports, args.report_dir):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_GATE


def cmd_kb(args) -> int:
    kb_dir = _kb_dir_of(args)
    if args.action == "list":
        kb = load_kb_dir(kb_dir)
        for s in kb.article_sets:
            print(f"{s.id}: articles {', '.join(s.articles)} ({', '.join(s.files)})")
        print(f"judgments: {', '.join(c.id for c in kb.judgments)}")
        print(f"learned rules: {', '.join(sorted(r.id for r in kb.program.rules if r.origin == 'learned-judgment'))}")
        return EXIT_OK
    # lint: report findings even when loading would fail strict checks
    from .kb import _load_wordlist, default_kb_dir, load_kb
    from pathlib import Path as _P

    base = _P(kb_dir) if kb_dir else default_kb_dir()
    manifest = json.loads((base / "manifest.json").read_text(encoding="utf-8"))
    files = [base / f for s in manifest["article_sets"] for f in s["files"]]
    files += [base / f for f in manifest.get("support_files", ())]
    program = load_kb(files, strict=False)
    report = lint_program(program, _load_wordlist(base))
    for err in report.errors:
        print(f"error: {err}")
    for warning in report.warnings:
        print(f"warning: {warning}")
    if report.ok:
        print(f"lint ok: {len(program.rules)} rules, {len(report.warnings)} warning(s)")
        return EXIT_OK
    return EXIT_PARSE


def cmd_serve(args) -> int:
    from .service import main as serve_main

    serve_main(port=args.port, kb_dir=args.kb_dir)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "explain": cmd_explain,
        "learn": cmd_learn,
        "verify": cmd_verify,
        "kb": cmd_kb,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (SourceError, DuplicateRuleIdError, GroundingError, LintError, ExplanationError,
            EmptySpaceError, SpaceCapError, KbError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
