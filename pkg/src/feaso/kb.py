"""The shipped knowledge base, case fixtures, and the answers file format.

An answers file is one answer per line in knowledge base syntax:

    expertise_scarce = yes
    expert_task_minutes = 15
    solution_value = high cf 0.8
    annual_benefit = unknown

Blank lines and `#` comments are ignored; a later line for the same
attribute replaces the earlier one. The same format is used for the case
fixtures bundled with the package, for CLI --session files, and for the
service's session store.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from . import kbdsl
from .engine import Answer
from .kbdsl import AttributeDecl, KnowledgeBase, Token


class InvalidAnswerError(ValueError):
    """An answer that cannot be recorded; names the attribute and constraint."""

    def __init__(self, attribute: str, constraint: str):
        super().__init__(f"{attribute}: {constraint}")
        self.attribute = attribute
        self.constraint = constraint


def bundled_kb_text() -> str:
    return (resources.files("feaso.data") / "feasibility.fkb").read_text(encoding="utf-8")


def load_bundled_kb() -> KnowledgeBase:
    return kbdsl.load_kb(bundled_kb_text())


def coerce_answer(kb: KnowledgeBase, attribute: str, value: object, cf: float = 1.0) -> Answer:
    """Validate a raw answer value against the attribute declaration.

    value None means the user answered unknown. Numbers are normalised to
    float so equal answers compare equal regardless of how they arrived.
    """
    decl = kb.attributes.get(attribute)
    if decl is None:
        raise InvalidAnswerError(attribute, "attribute is not declared in the knowledge base")
    if not decl.askable:
        raise InvalidAnswerError(attribute, "attribute is not askable")
    try:
        cf = float(cf)
    except (TypeError, ValueError):
        raise InvalidAnswerError(attribute, f"certainty {cf!r} is not a number") from None
    if not 0.0 <= cf <= 1.0:
        raise InvalidAnswerError(attribute, f"certainty {cf} outside [0.0, 1.0]")
    if value is None:
        return Answer(None, 0.0)
    if decl.type == "bool":
        if value in ("yes", "no"):
            # the literal form used in answer files; API clients echo it back
            value = value == "yes"
        if not isinstance(value, bool):
            raise InvalidAnswerError(attribute, f"expected yes or no, got {value!r}")
        return Answer(value, cf)
    if decl.type == "enum":
        if not isinstance(value, str) or value not in decl.values:
            raise InvalidAnswerError(
                attribute, f"expected one of {', '.join(decl.values)}; got {value!r}"
            )
        return Answer(value, cf)
    if decl.type == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidAnswerError(attribute, f"expected a number, got {value!r}")
        return Answer(float(value), cf)
    if not isinstance(value, str):
        raise InvalidAnswerError(attribute, f"expected text, got {value!r}")
    return Answer(value, cf)


def parse_answer_text(decl: AttributeDecl, text: str) -> object:
    """Interpret typed-in text (CLI input) as a value for the attribute."""
    if text.strip().lower() == "unknown":
        return None
    return kbdsl.parse_literal(decl, text)


# --- Answers file format --------------------------------------------------------


def _token_value(decl: AttributeDecl, tok: Token) -> object:
    if decl.type == "bool":
        if tok.kind == kbdsl.IDENT and tok.text in ("yes", "true"):
            return True
        if tok.kind == kbdsl.IDENT and tok.text in ("no", "false"):
            return False
        raise ValueError(f"{decl.id} expects yes or no, got {tok.text!r}")
    if decl.type == "enum":
        if tok.kind != kbdsl.IDENT or tok.text not in decl.values:
            raise ValueError(f"{decl.id} expects one of {', '.join(decl.values)}; got {tok.text!r}")
        return tok.text
    if decl.type == "number":
        if tok.kind != kbdsl.NUMBER:
            raise ValueError(f"{decl.id} expects a number, got {tok.text!r}")
        return tok.value
    if tok.kind != kbdsl.STRING:
        raise ValueError(f"{decl.id} expects a quoted string, got {tok.text!r}")
    return tok.value


def parse_answer_line(kb: KnowledgeBase, line: str) -> tuple[str, Answer]:
    """One `attr = value [cf x]` line to a validated (attribute, Answer)."""
    diags: list[kbdsl.Diagnostic] = []
    toks = kbdsl.tokenize(line, diags)[:-1]
    if diags:
        raise ValueError(diags[0].message)
    if toks and toks[-1].kind == kbdsl.OP and toks[-1].text == ";":
        toks.pop()
    if len(toks) < 3 or toks[0].kind != kbdsl.IDENT or toks[1].text != "=":
        raise ValueError(f"expected 'attribute = value', got {line.strip()!r}")
    attr = toks[0].text
    decl = kb.attributes.get(attr)
    if decl is None:
        raise ValueError(f"attribute {attr!r} is not declared in the knowledge base")
    if not decl.askable:
        raise ValueError(f"attribute {attr!r} is not askable")
    cf = 1.0
    rest = toks[2:]
    if len(rest) == 3 and rest[1].kind == kbdsl.IDENT and rest[1].text == "cf":
        if rest[2].kind != kbdsl.NUMBER:
            raise ValueError(f"cf needs a number, got {rest[2].text!r}")
        cf = float(rest[2].value)  # type: ignore[arg-type]
        rest = rest[:1]
    if len(rest) != 1:
        raise ValueError(f"expected 'attribute = value', got {line.strip()!r}")
    tok = rest[0]
    if tok.kind == kbdsl.IDENT and tok.text == "unknown":
        return attr, Answer(None, 0.0)
    value = _token_value(decl, tok)
    if not 0.0 <= cf <= 1.0:
        raise ValueError(f"cf {cf} outside [0.0, 1.0]")
    return attr, Answer(value, cf)


def parse_answer_lines(kb: KnowledgeBase, text: str, source: str = "<answers>") -> dict[str, Answer]:
    """Whole answers file; later lines for the same attribute win."""
    answers: dict[str, Answer] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            attr, answer = parse_answer_line(kb, stripped)
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
        answers[attr] = answer
    return answers


def format_answer_line(kb: KnowledgeBase, attribute: str, answer: Answer) -> str:
    if answer.value is None:
        return f"{attribute} = unknown"
    text = f"{attribute} = {kbdsl.format_value(kb, attribute, answer.value)}"
    if answer.cf != 1.0:
        text += f" cf {answer.cf!r}"
    return text


# --- Case fixtures ---------------------------------------------------------------


@dataclass(frozen=True)
class CaseFixture:
    """A recorded screening consultation shipped with the knowledge base."""

    name: str
    description: str
    answers: dict[str, Answer]


def fixture_names() -> list[str]:
    files = resources.files("feaso.data") / "fixtures"
    return sorted(p.name[: -len(".answers")] for p in files.iterdir() if p.name.endswith(".answers"))


def fixture(name: str, kb: KnowledgeBase | None = None) -> CaseFixture:
    if kb is None:
        kb = load_bundled_kb()
    path = resources.files("feaso.data") / "fixtures" / f"{name}.answers"
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyError(f"no fixture named {name!r}; have {', '.join(fixture_names())}") from None
    description_lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            description_lines.append(line.lstrip("# ").rstrip())
        elif line.strip():
            break
    answers = parse_answer_lines(kb, text, source=f"{name}.answers")
    return CaseFixture(name, " ".join(d for d in description_lines if d), answers)
