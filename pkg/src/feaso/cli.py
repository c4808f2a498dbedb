"""Command line interface.

Exit codes: 0 for a usable outcome (including a high-risk verdict), 1 when a
completed batch assessment concludes infeasible, 2 for bad input (unreadable
files, validation errors, malformed answers), 3 for internal failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import kb as kbmod
from . import kbdsl, report
from .engine import EngineError, NotDerivedError, NotPendingError
from .kbdsl import KnowledgeBaseError
from .session import Session, apply_answers, load_session

PROG = "feaso"


class InputError(Exception):
    """Bad input from the user; reported on stderr with exit code 2."""


def _load_kb(path: str | None) -> kbdsl.KnowledgeBase:
    path = path or os.environ.get("FEASO_KB")
    if path is None:
        return kbmod.load_bundled_kb()
    try:
        with open(path, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read knowledge base: {exc}") from None
    return kbdsl.load_kb(source)


def _load_answer_session(kb: kbdsl.KnowledgeBase, args: argparse.Namespace) -> Session:
    session = Session(kb)
    if getattr(args, "fixture", None):
        try:
            fx = kbmod.fixture(args.fixture, kb)
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
        apply_answers(session, fx.answers)
    elif getattr(args, "answers", None):
        try:
            with open(args.answers, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read answers file: {exc}") from None
        apply_answers(session, kbmod.parse_answer_lines(kb, text, source=args.answers))
    elif getattr(args, "session", None):
        try:
            with open(args.session, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read session file: {exc}") from None
        session = load_session(kb, text)
    else:
        raise InputError("give one of --fixture, --answers or --session")
    return session


def _write_output(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text)


def _verdict_exit(verdict: str) -> int:
    return 1 if verdict == "infeasible" else 0


# --- commands ---------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    path = args.kb or os.environ.get("FEASO_KB")
    source = kbmod.bundled_kb_text()
    name = "bundled knowledge base"
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                source = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read knowledge base: {exc}") from None
        name = path
    result = kbdsl.parse_kb(source)
    for diag in sorted(result.diagnostics, key=lambda d: (d.line, d.column)):
        print(diag.format())
    if result.kb is None:
        print(f"{name}: rejected ({len(result.errors)} error(s))", file=sys.stderr)
        return 2
    print(
        f"{name}: ok — {len(result.kb.attributes)} attributes, "
        f"{len(result.kb.rules)} rules, {len(result.kb.computes)} compute bindings, "
        f"{len(result.warnings)} warning(s)"
    )
    return 0


def cmd_fixtures(args: argparse.Namespace) -> int:
    kb = _load_kb(args.kb)
    for name in kbmod.fixture_names():
        fx = kbmod.fixture(name, kb)
        print(f"{name}: {fx.description}")
    return 0


def cmd_assess(args: argparse.Namespace) -> int:
    kb = _load_kb(args.kb)
    session = _load_answer_session(kb, args)
    assessment = session.assess()
    _write_output(report.render_report(assessment, args.report), args.out)
    return _verdict_exit(assessment.overall_verdict)


def _print_why(session: Session, attribute: str) -> None:
    chain = session.why(attribute)
    goal = chain[0]["attribute"]
    print(f"  needed to settle {goal}")
    for frame in chain[1:]:
        line = f"  via rule {frame['rule']} (concluding {frame['attribute']})"
        if frame["citation"]:
            line += f"\n    cite: {frame['citation']}"
        print(line)


def _prompt_text(question) -> str:
    extras = []
    if question.kind == "bool":
        extras.append("yes/no")
    elif question.kind == "enum":
        extras.append("/".join(question.values))
    elif question.kind == "number" and question.unit:
        extras.append(question.unit)
    hint = f" [{'; '.join(extras)}]" if extras else ""
    return f"({question.dimension}) {question.prompt}{hint}"


def cmd_consult(args: argparse.Namespace) -> int:
    kb = _load_kb(args.kb)
    session = Session(kb)
    if args.session and os.path.exists(args.session):
        with open(args.session, encoding="utf-8") as fh:
            session = load_session(kb, fh.read())
        print(f"resuming session from {args.session} ({len(session.events)} answers)")

    def persist() -> None:
        if args.session:
            with open(args.session, "w", encoding="utf-8") as fh:
                fh.write(session.serialize())

    while True:
        question = session.next_question()
        if question is None:
            break
        print(_prompt_text(question))
        try:
            line = input("> ").strip()
        except EOFError:
            print()
            persist()
            print("consultation suspended; resume with --session", file=sys.stderr)
            return 0
        if not line:
            continue
        if line in ("quit", "exit"):
            persist()
            print("consultation suspended; resume with --session", file=sys.stderr)
            return 0
        if line == "why":
            _print_why(session, question.attribute)
            continue
        if line == "back":
            undone = session.retract_last()
            if undone is None:
                print("  nothing to take back")
            else:
                print(f"  took back {undone.attribute}")
            persist()
            continue
        value_text, cf = line, 1.0
        if " cf " in line:
            value_text, _, cf_text = line.rpartition(" cf ")
            try:
                cf = float(cf_text)
            except ValueError:
                print(f"  bad certainty {cf_text!r}; answer like: yes cf 0.8")
                continue
        try:
            value = kbmod.parse_answer_text(kb.attributes[question.attribute], value_text)
            session.answer(question.attribute, value, cf)
        except ValueError as exc:
            print(f"  {exc}")
            continue
        persist()

    assessment = session.assess()
    persist()
    _write_output(report.render_report(assessment, args.report), args.out)
    return _verdict_exit(assessment.overall_verdict)


def cmd_explain(args: argparse.Namespace) -> int:
    kb = _load_kb(args.kb)
    session = _load_answer_session(kb, args)
    if args.mode == "why":
        try:
            _print_why(session, args.attribute)
        except NotPendingError as exc:
            raise InputError(str(exc)) from None
        return 0
    try:
        trees = session.how(args.attribute)
    except NotDerivedError as exc:
        raise InputError(str(exc)) from None
    for tree in trees:
        _print_proof(tree)
    return 0


def _print_proof(tree: dict, indent: int = 0) -> None:
    pad = "  " * indent
    value = tree["value"]
    shown = {True: "yes", False: "no"}.get(value, value)
    print(f"{pad}{tree['attribute']} = {shown} (cf {tree['cf']:.2f}) [{tree['source']}]")
    if tree.get("citation"):
        print(f"{pad}  cite: {tree['citation']}")
    for child in tree.get("children", []):
        _print_proof(child, indent + 1)


def cmd_whatif(args: argparse.Namespace) -> int:
    kb = _load_kb(args.kb)
    session = _load_answer_session(kb, args)
    overrides: dict[str, object] = {}
    for setting in args.set:
        attr, sep, value_text = setting.partition("=")
        if not sep:
            raise InputError(f"--set wants attr=value, got {setting!r}")
        attr = attr.strip()
        decl = kb.attributes.get(attr)
        if decl is None:
            raise InputError(f"attribute {attr!r} is not declared in the knowledge base")
        try:
            overrides[attr] = kbmod.parse_answer_text(decl, value_text.strip())
        except ValueError as exc:
            raise InputError(str(exc)) from None
    result = session.whatif(overrides)
    out = {
        "baseline": {"verdict": result.baseline.overall_verdict, "cf": result.baseline.overall_cf},
        "variant": {"verdict": result.variant.overall_verdict, "cf": result.variant.overall_cf},
        "changed": result.changed,
    }
    _write_output(json.dumps(out, indent=2), args.out)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(_load_kb(args.kb))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# --- wiring -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Screen proposed knowledge-based systems for feasibility.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, func) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument(
            "kb",
            nargs="?",
            default=None,
            help="knowledge base file (default: $FEASO_KB, else the bundled one)",
        )
        p.set_defaults(func=func)
        return p

    add("validate", "check a knowledge base and print diagnostics", cmd_validate)
    add("fixtures", "list the bundled case studies", cmd_fixtures)

    p = add("consult", "run an interactive consultation", cmd_consult)
    p.add_argument("--session", help="file to persist answers to (resumes if it exists)")
    p.add_argument("--report", choices=("md", "json"), default="md")
    p.add_argument("--out", help="write the final report here instead of stdout")

    p = add("assess", "assess a recorded answer set without interaction", cmd_assess)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fixture", help="bundled case study name")
    src.add_argument("--answers", help="answers file, one `attr = value` per line")
    src.add_argument("--session", help="serialized session file")
    p.add_argument("--report", choices=("md", "json"), default="md")
    p.add_argument("--out", help="write the report here instead of stdout")

    p = add("explain", "explain a derived value (how) or a pending question (why)", cmd_explain)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fixture", help="bundled case study name")
    src.add_argument("--answers", help="answers file")
    src.add_argument("--session", help="serialized session file")
    p.add_argument("--attribute", required=True)
    p.add_argument("--mode", choices=("how", "why"), default="how")

    p = add("whatif", "re-run an assessment with some answers overridden", cmd_whatif)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fixture", help="bundled case study name")
    src.add_argument("--answers", help="answers file")
    src.add_argument("--session", help="serialized session file")
    p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="ATTR=VALUE",
        help="override one answer (repeatable); VALUE may be 'unknown'",
    )
    p.add_argument("--out", help="write the result here instead of stdout")

    p = add("serve", "serve the HTTP API", cmd_serve)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 2
    except (KnowledgeBaseError, kbmod.InvalidAnswerError) as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print(file=sys.stderr)
        return 2
    except EngineError as exc:
        print(f"{PROG}: internal error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001
        print(f"{PROG}: internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
