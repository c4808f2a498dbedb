"""Knowledge base text format: parser, validator, serializer.

The format is line-friendly and diffable. Top-level blocks:

    kb { name: "demo"; version: "1.0"; cf_threshold: 0.2; }

    attribute task_type {
      type: enum(diagnosis, planning);
      askable;
      question: "What type of task is it?";
      dimension: technical;
    }

    rule r1 {
      if task_type = diagnosis and minutes <= 60 then verdict = feasible cf 0.7;
      cite "evidence the rule encodes";
    }

    compute band using expert_time_band(minutes);

    fixture demo_case {
      task_type = diagnosis;
      minutes = 45 cf 0.9;
      budget = unknown;
    }

`#` starts a comment. Attribute types: bool (yes/no), enum(...), number with an
optional unit, text (quoted strings). Conditions use and / or / not, the
comparators = != < <= > >=, and `in (a, b, c)` for enum membership; `not`
binds tightest, then `and`, then `or`.

parse_kb never raises on bad input: it returns every problem as a Diagnostic
with a stable code and a line/column, and a KnowledgeBase only when there are
no errors. serialize_kb emits blocks sorted by id, so serializing twice gives
byte-identical text, and parsing serialized output reproduces the same
knowledge base.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import calculators as _calculators
from .engine import (
    Comparison,
    Condition,
    Conjunction,
    Disjunction,
    Membership,
    Negation,
    Rule,
    condition_attributes,
    condition_leaves,
)

Value = object

ERROR = "error"
WARNING = "warning"

_TOP_KEYWORDS = ("kb", "attribute", "rule", "compute", "fixture")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    column: int
    message: str
    code: str

    def format(self) -> str:
        return f"{self.severity}[{self.code}] {self.line}:{self.column} {self.message}"


@dataclass
class KbHeader:
    name: str = "kb"
    version: str = "0"
    cf_threshold: float = 0.2


@dataclass(frozen=True)
class AttributeDecl:
    id: str
    type: str  # bool | enum | number | text
    values: tuple[str, ...] = ()
    unit: str | None = None
    askable: bool = False
    question: str | None = None
    dimension: str | None = None


@dataclass(frozen=True)
class ComputeBinding:
    target: str
    calculator: str
    inputs: tuple[str, ...]


@dataclass(frozen=True)
class Fixture:
    name: str
    entries: dict[str, tuple[Value, float]]  # value None means answered unknown


@dataclass
class KnowledgeBase:
    header: KbHeader = field(default_factory=KbHeader)
    attributes: dict[str, AttributeDecl] = field(default_factory=dict)
    rules: dict[str, Rule] = field(default_factory=dict)
    computes: dict[str, ComputeBinding] = field(default_factory=dict)
    fixtures: dict[str, Fixture] = field(default_factory=dict)
    locations: dict[str, tuple[int, int]] = field(default_factory=dict, compare=False)

    def decl_index(self, attribute: str) -> int:
        for i, a in enumerate(self.attributes):
            if a == attribute:
                return i
        return len(self.attributes)


@dataclass
class ParseResult:
    kb: KnowledgeBase | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.kb is not None

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == ERROR]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == WARNING]


class KnowledgeBaseError(Exception):
    """Raised by load_kb when the source has error diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        lines = [d.format() for d in diagnostics if d.severity == ERROR]
        super().__init__("knowledge base rejected:\n" + "\n".join(lines))
        self.diagnostics = diagnostics


# --- Lexer ------------------------------------------------------------------

IDENT, NUMBER, STRING, OP, EOF = "ident", "number", "string", "op", "eof"

_OPS = ("<=", ">=", "!=", "{", "}", "(", ")", ";", ":", ",", "=", "<", ">")
_NUMBER_RE = re.compile(r"-?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    value: object
    line: int
    column: int


def tokenize(source: str, diagnostics: list[Diagnostic] | None = None) -> list[Token]:
    """Split source into tokens; lexical problems go into diagnostics."""
    diags = diagnostics if diagnostics is not None else []
    toks: list[Token] = []
    line, col, i, n = 1, 1, 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            closed = False
            while i < n:
                c = source[i]
                if c == "\n":
                    break
                if c == "\\" and i + 1 < n and source[i + 1] in _ESCAPES:
                    buf.append(_ESCAPES[source[i + 1]])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    closed = True
                    break
                buf.append(c)
                i += 1
                col += 1
            if not closed:
                diags.append(Diagnostic(ERROR, start_line, start_col, "unterminated string", "lexical_error"))
            toks.append(Token(STRING, "".join(buf), "".join(buf), start_line, start_col))
            continue
        m = _NUMBER_RE.match(source, i)
        if m and (ch.isdigit() or ch == "." or (ch == "-" and m.end() > i + 1)):
            text = m.group(0)
            toks.append(Token(NUMBER, text, float(text), line, col))
            i = m.end()
            col += len(text)
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            toks.append(Token(IDENT, text, text, line, col))
            col += j - i
            i = j
            continue
        for op in _OPS:
            if source.startswith(op, i):
                toks.append(Token(OP, op, op, line, col))
                i += len(op)
                col += len(op)
                break
        else:
            diags.append(Diagnostic(ERROR, line, col, f"unexpected character {ch!r}", "lexical_error"))
            i += 1
            col += 1
    toks.append(Token(EOF, "", None, line, col))
    return toks


# --- Parser -----------------------------------------------------------------


@dataclass(frozen=True)
class _Raw:
    """Literal before typing: kind is ident/number/string."""

    kind: str
    text: str
    value: object
    line: int
    column: int


class _ParseAbort(Exception):
    pass


@dataclass
class _RawRule:
    id: str
    condition: Condition  # leaves carry _Raw literals
    concl_attr: str
    concl_value: _Raw
    cf: float
    cf_line: int
    cf_column: int
    citation: str
    line: int
    column: int


@dataclass
class _RawFixtureEntry:
    attribute: str
    value: _Raw | None  # None means unknown
    cf: float | None
    line: int
    column: int


class _Parser:
    def __init__(self, source: str):
        self.diags: list[Diagnostic] = []
        self.toks = tokenize(source, self.diags)
        self.i = 0
        self.header = KbHeader()
        self.header_seen = False
        self.attributes: dict[str, AttributeDecl] = {}
        self.raw_rules: list[_RawRule] = []
        self.raw_computes: list[tuple[str, str, tuple[str, ...], int, int]] = []
        self.raw_fixtures: list[tuple[str, list[_RawFixtureEntry], int, int]] = []
        self.locations: dict[str, tuple[int, int]] = {}

    # token helpers

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != EOF:
            self.i += 1
        return tok

    def error(self, tok: Token, message: str, code: str = "syntax_error") -> None:
        self.diags.append(Diagnostic(ERROR, tok.line, tok.column, message, code))

    def expect_op(self, op: str) -> Token:
        tok = self.next()
        if tok.kind != OP or tok.text != op:
            self.error(tok, f"expected {op!r}, found {tok.text or 'end of input'!r}")
            raise _ParseAbort
        return tok

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.next()
        if tok.kind != IDENT:
            self.error(tok, f"expected {what}, found {tok.text or 'end of input'!r}")
            raise _ParseAbort
        return tok

    def expect_keyword(self, word: str) -> Token:
        tok = self.next()
        if tok.kind != IDENT or tok.text != word:
            self.error(tok, f"expected {word!r}, found {tok.text or 'end of input'!r}")
            raise _ParseAbort
        return tok

    def expect_string(self) -> Token:
        tok = self.next()
        if tok.kind != STRING:
            self.error(tok, f"expected a quoted string, found {tok.text or 'end of input'!r}")
            raise _ParseAbort
        return tok

    def expect_number(self) -> Token:
        tok = self.next()
        if tok.kind != NUMBER:
            self.error(tok, f"expected a number, found {tok.text or 'end of input'!r}")
            raise _ParseAbort
        return tok

    def recover(self) -> None:
        """Skip to the next top-level keyword at brace depth zero."""
        depth = 0
        while True:
            tok = self.peek()
            if tok.kind == EOF:
                return
            if tok.kind == OP and tok.text == "{":
                depth += 1
            elif tok.kind == OP and tok.text == "}":
                depth = max(0, depth - 1)
                self.next()
                if depth == 0:
                    return
                continue
            elif depth == 0 and tok.kind == IDENT and tok.text in _TOP_KEYWORDS:
                return
            self.next()

    # grammar

    def parse(self) -> None:
        while True:
            tok = self.peek()
            if tok.kind == EOF:
                return
            if tok.kind != IDENT:
                self.error(tok, f"expected a declaration, found {tok.text!r}")
                self.next()
                self.recover()
                continue
            try:
                if tok.text == "kb":
                    self.parse_header()
                elif tok.text == "attribute":
                    self.parse_attribute()
                elif tok.text == "rule":
                    self.parse_rule()
                elif tok.text == "compute":
                    self.parse_compute()
                elif tok.text == "fixture":
                    self.parse_fixture()
                else:
                    self.error(tok, f"unknown keyword {tok.text!r}", "unknown_keyword")
                    self.next()
                    self.recover()
            except _ParseAbort:
                self.recover()

    def parse_header(self) -> None:
        kw = self.next()
        if self.header_seen:
            self.error(kw, "kb header declared more than once", "duplicate_id")
        self.header_seen = True
        self.expect_op("{")
        while True:
            tok = self.peek()
            if tok.kind == OP and tok.text == "}":
                self.next()
                return
            name = self.expect_ident("header field")
            self.expect_op(":")
            if name.text == "name":
                self.header.name = self.expect_string().value  # type: ignore[assignment]
            elif name.text == "version":
                self.header.version = self.expect_string().value  # type: ignore[assignment]
            elif name.text == "cf_threshold":
                self.header.cf_threshold = self.expect_number().value  # type: ignore[assignment]
            else:
                self.error(name, f"unknown header field {name.text!r}", "unknown_keyword")
                self.next()
            self.expect_op(";")

    def parse_attribute(self) -> None:
        self.next()
        ident = self.expect_ident("attribute id")
        self.expect_op("{")
        a_type: str | None = None
        values: tuple[str, ...] = ()
        unit: str | None = None
        askable = False
        question: str | None = None
        dimension: str | None = None
        while True:
            tok = self.peek()
            if tok.kind == OP and tok.text == "}":
                self.next()
                break
            fld = self.expect_ident("attribute field")
            if fld.text == "askable":
                askable = True
                self.expect_op(";")
                continue
            self.expect_op(":")
            if fld.text == "type":
                a_type, values, unit = self.parse_type()
            elif fld.text == "question":
                question = self.expect_string().value  # type: ignore[assignment]
            elif fld.text == "dimension":
                dimension = self.expect_ident("dimension tag").text
            else:
                self.error(fld, f"unknown attribute field {fld.text!r}", "unknown_keyword")
                self.next()
            self.expect_op(";")
        if a_type is None:
            self.error(ident, f"attribute {ident.text!r} has no type", "syntax_error")
            return
        if askable and not question:
            self.diags.append(
                Diagnostic(
                    ERROR, ident.line, ident.column,
                    f"askable attribute {ident.text!r} has no question prompt",
                    "missing_question",
                )
            )
        if ident.text in self.attributes:
            self.error(ident, f"duplicate attribute id {ident.text!r}", "duplicate_id")
            return
        self.attributes[ident.text] = AttributeDecl(
            ident.text, a_type, values, unit, askable, question, dimension
        )
        self.locations[ident.text] = (ident.line, ident.column)

    def parse_type(self) -> tuple[str, tuple[str, ...], str | None]:
        tok = self.expect_ident("type")
        if tok.text in ("bool", "text"):
            return tok.text, (), None
        if tok.text == "enum":
            self.expect_op("(")
            values: list[str] = []
            while True:
                sym = self.expect_ident("enum value")
                if sym.text in values:
                    self.error(sym, f"duplicate enum value {sym.text!r}", "duplicate_value")
                else:
                    values.append(sym.text)
                nxt = self.next()
                if nxt.kind == OP and nxt.text == ")":
                    break
                if not (nxt.kind == OP and nxt.text == ","):
                    self.error(nxt, "expected ',' or ')' in enum values")
                    raise _ParseAbort
            return "enum", tuple(values), None
        if tok.text == "number":
            unit = None
            if self.peek().kind == OP and self.peek().text == "(":
                self.next()
                unit = self.expect_ident("unit").text
                self.expect_op(")")
            return "number", (), unit
        self.error(tok, f"unknown type {tok.text!r}", "unknown_keyword")
        raise _ParseAbort

    def parse_rule(self) -> None:
        self.next()
        ident = self.expect_ident("rule id")
        self.expect_op("{")
        self.expect_keyword("if")
        condition = self.parse_expr()
        self.expect_keyword("then")
        concl_attr = self.expect_ident("conclusion attribute")
        self.expect_op("=")
        concl_value = self.parse_value()
        self.expect_keyword("cf")
        cf_tok = self.expect_number()
        self.expect_op(";")
        citation = ""
        tok = self.peek()
        if tok.kind == IDENT and tok.text == "cite":
            self.next()
            citation = self.expect_string().value  # type: ignore[assignment]
            self.expect_op(";")
        self.expect_op("}")
        if any(r.id == ident.text for r in self.raw_rules):
            self.error(ident, f"duplicate rule id {ident.text!r}", "duplicate_id")
            return
        self.raw_rules.append(
            _RawRule(
                ident.text, condition, concl_attr.text, concl_value,
                float(cf_tok.value), cf_tok.line, cf_tok.column,  # type: ignore[arg-type]
                citation, ident.line, ident.column,
            )
        )
        self.locations[ident.text] = (ident.line, ident.column)

    def parse_value(self) -> _Raw:
        tok = self.next()
        if tok.kind in (IDENT, NUMBER, STRING):
            return _Raw(tok.kind, tok.text, tok.value, tok.line, tok.column)
        self.error(tok, f"expected a value, found {tok.text or 'end of input'!r}")
        raise _ParseAbort

    def parse_expr(self) -> Condition:
        items = [self.parse_and()]
        while self.peek().kind == IDENT and self.peek().text == "or":
            self.next()
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else Disjunction(tuple(items))

    def parse_and(self) -> Condition:
        items = [self.parse_unary()]
        while self.peek().kind == IDENT and self.peek().text == "and":
            self.next()
            items.append(self.parse_unary())
        return items[0] if len(items) == 1 else Conjunction(tuple(items))

    def parse_unary(self) -> Condition:
        tok = self.peek()
        if tok.kind == IDENT and tok.text == "not":
            self.next()
            return Negation(self.parse_unary())
        if tok.kind == OP and tok.text == "(":
            self.next()
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        return self.parse_atom()

    def parse_atom(self) -> Condition:
        attr = self.expect_ident("attribute reference")
        tok = self.next()
        if tok.kind == IDENT and tok.text == "in":
            self.expect_op("(")
            members: list[_Raw] = []
            while True:
                members.append(self.parse_value())
                nxt = self.next()
                if nxt.kind == OP and nxt.text == ")":
                    break
                if not (nxt.kind == OP and nxt.text == ","):
                    self.error(nxt, "expected ',' or ')' in membership list")
                    raise _ParseAbort
            return Membership(attr.text, tuple(members))
        if tok.kind == OP and tok.text in ("=", "!=", "<", "<=", ">", ">="):
            return Comparison(attr.text, tok.text, self.parse_value())
        self.error(tok, f"expected a comparator or 'in', found {tok.text or 'end of input'!r}")
        raise _ParseAbort

    def parse_compute(self) -> None:
        kw = self.next()
        target = self.expect_ident("target attribute")
        self.expect_keyword("using")
        calc = self.expect_ident("calculator id")
        self.expect_op("(")
        inputs: list[str] = []
        while True:
            inputs.append(self.expect_ident("input attribute").text)
            tok = self.next()
            if tok.kind == OP and tok.text == ")":
                break
            if not (tok.kind == OP and tok.text == ","):
                self.error(tok, "expected ',' or ')' in calculator inputs")
                raise _ParseAbort
        self.expect_op(";")
        if any(t == target.text for t, *_ in self.raw_computes):
            self.error(target, f"duplicate compute target {target.text!r}", "duplicate_id")
            return
        self.raw_computes.append((target.text, calc.text, tuple(inputs), kw.line, kw.column))
        self.locations.setdefault(target.text, (target.line, target.column))

    def parse_fixture(self) -> None:
        self.next()
        ident = self.expect_ident("fixture name")
        self.expect_op("{")
        entries: list[_RawFixtureEntry] = []
        while True:
            tok = self.peek()
            if tok.kind == OP and tok.text == "}":
                self.next()
                break
            attr = self.expect_ident("attribute")
            self.expect_op("=")
            nxt = self.peek()
            if nxt.kind == IDENT and nxt.text == "unknown":
                self.next()
                value: _Raw | None = None
            else:
                value = self.parse_value()
            cf: float | None = None
            cf_line, cf_col = attr.line, attr.column
            if self.peek().kind == IDENT and self.peek().text == "cf":
                self.next()
                cf_tok = self.expect_number()
                cf = float(cf_tok.value)  # type: ignore[arg-type]
                cf_line, cf_col = cf_tok.line, cf_tok.column
            self.expect_op(";")
            entries.append(_RawFixtureEntry(attr.text, value, cf, cf_line, cf_col))
        if any(n == ident.text for n, *_ in self.raw_fixtures):
            self.error(ident, f"duplicate fixture name {ident.text!r}", "duplicate_id")
            return
        self.raw_fixtures.append((ident.text, entries, ident.line, ident.column))
        self.locations.setdefault(ident.text, (ident.line, ident.column))


def _type_literal(
    raw: _Raw, decl: AttributeDecl, diags: list[Diagnostic], *, numeric_op: bool = False
) -> tuple[bool, Value]:
    """Turn a raw token into a typed value for the attribute."""
    if numeric_op:
        if raw.kind != NUMBER:
            diags.append(Diagnostic(ERROR, raw.line, raw.column,
                                    f"ordering comparison on {decl.id!r} needs a number literal",
                                    "type_mismatch"))
            return False, None
        return True, float(raw.value)  # type: ignore[arg-type]
    if decl.type == "bool":
        if raw.kind == IDENT and raw.text in ("yes", "true"):
            return True, True
        if raw.kind == IDENT and raw.text in ("no", "false"):
            return True, False
        diags.append(Diagnostic(ERROR, raw.line, raw.column,
                                f"{decl.id!r} is a bool attribute; expected yes or no",
                                "type_mismatch"))
        return False, None
    if decl.type == "enum":
        if raw.kind != IDENT:
            diags.append(Diagnostic(ERROR, raw.line, raw.column,
                                    f"{decl.id!r} is an enum attribute; expected a symbol",
                                    "type_mismatch"))
            return False, None
        if raw.text not in decl.values:
            diags.append(Diagnostic(ERROR, raw.line, raw.column,
                                    f"value {raw.text!r} is not declared for enum {decl.id!r}",
                                    "undeclared_value"))
            return False, None
        return True, raw.text
    if decl.type == "number":
        if raw.kind != NUMBER:
            diags.append(Diagnostic(ERROR, raw.line, raw.column,
                                    f"{decl.id!r} is a number attribute; expected a number",
                                    "type_mismatch"))
            return False, None
        return True, float(raw.value)  # type: ignore[arg-type]
    if raw.kind != STRING:
        diags.append(Diagnostic(ERROR, raw.line, raw.column,
                                f"{decl.id!r} is a text attribute; expected a quoted string",
                                "type_mismatch"))
        return False, None
    return True, raw.value


def _type_condition(
    cond: Condition, attributes: dict[str, AttributeDecl], diags: list[Diagnostic]
) -> Condition | None:
    if isinstance(cond, Comparison):
        raw = cond.literal
        decl = attributes.get(cond.attribute)
        if decl is None:
            diags.append(Diagnostic(ERROR, raw.line, raw.column,
                                    f"condition references undeclared attribute {cond.attribute!r}",
                                    "undeclared_attribute"))
            return None
        ok, value = _type_literal(raw, decl, diags, numeric_op=cond.op in ("<", "<=", ">", ">="))
        return Comparison(cond.attribute, cond.op, value) if ok else None
    if isinstance(cond, Membership):
        decl = attributes.get(cond.attribute)
        first = cond.members[0]
        if decl is None:
            diags.append(Diagnostic(ERROR, first.line, first.column,
                                    f"condition references undeclared attribute {cond.attribute!r}",
                                    "undeclared_attribute"))
            return None
        if decl.type != "enum":
            diags.append(Diagnostic(ERROR, first.line, first.column,
                                    f"membership test on non-enum attribute {cond.attribute!r}",
                                    "type_mismatch"))
            return None
        members: list[Value] = []
        ok_all = True
        for raw in cond.members:
            ok, value = _type_literal(raw, decl, diags)
            ok_all = ok_all and ok
            if ok:
                members.append(value)
        return Membership(cond.attribute, tuple(members)) if ok_all else None
    if isinstance(cond, Negation):
        child = _type_condition(cond.child, attributes, diags)
        return Negation(child) if child is not None else None
    children = []
    for child in cond.children:
        typed = _type_condition(child, attributes, diags)
        if typed is None:
            return None
        children.append(typed)
    cls = Conjunction if isinstance(cond, Conjunction) else Disjunction
    return cls(tuple(children))


def parse_kb(source: str) -> ParseResult:
    """Parse and validate source text. kb is None when any error was found."""
    parser = _Parser(source)
    parser.parse()
    diags = parser.diags
    kb = KnowledgeBase(parser.header, dict(parser.attributes), locations=parser.locations)

    for rr in parser.raw_rules:
        condition = _type_condition(rr.condition, kb.attributes, diags)
        decl = kb.attributes.get(rr.concl_attr)
        if decl is None:
            diags.append(Diagnostic(ERROR, rr.line, rr.column,
                                    f"rule {rr.id!r} concludes undeclared attribute {rr.concl_attr!r}",
                                    "undeclared_attribute"))
            continue
        ok, value = _type_literal(rr.concl_value, decl, diags)
        if not 0.0 < rr.cf <= 1.0:
            diags.append(Diagnostic(ERROR, rr.cf_line, rr.cf_column,
                                    f"rule {rr.id!r} cf {rr.cf} outside (0.0, 1.0]",
                                    "cf_out_of_range"))
            continue
        if condition is None or not ok:
            continue
        kb.rules[rr.id] = Rule(rr.id, condition, (rr.concl_attr, value), rr.cf, rr.citation)

    for target, calc, inputs, line, col in parser.raw_computes:
        missing = [a for a in (target, *inputs) if a not in kb.attributes]
        for a in missing:
            diags.append(Diagnostic(ERROR, line, col,
                                    f"compute statement references undeclared attribute {a!r}",
                                    "undeclared_attribute"))
        if not missing:
            kb.computes[target] = ComputeBinding(target, calc, inputs)

    for name, raw_entries, line, col in parser.raw_fixtures:
        entries: dict[str, tuple[Value, float]] = {}
        for e in raw_entries:
            decl = kb.attributes.get(e.attribute)
            if decl is None:
                diags.append(Diagnostic(ERROR, e.line, e.column,
                                        f"fixture {name!r} references undeclared attribute {e.attribute!r}",
                                        "undeclared_attribute"))
                continue
            cf = 1.0 if e.cf is None else e.cf
            if not 0.0 <= cf <= 1.0:
                diags.append(Diagnostic(ERROR, e.line, e.column,
                                        f"fixture answer cf {cf} outside [0.0, 1.0]",
                                        "cf_out_of_range"))
                continue
            if e.value is None:
                entries[e.attribute] = (None, 0.0)
                continue
            ok, value = _type_literal(e.value, decl, diags)
            if ok:
                entries[e.attribute] = (value, cf)
        kb.fixtures[name] = Fixture(name, entries)

    if not any(d.severity == ERROR for d in diags):
        diags.extend(d for d in validate_kb(kb) if d not in diags)
    if any(d.severity == ERROR for d in diags):
        return ParseResult(None, diags)
    return ParseResult(kb, diags)


def load_kb(source: str) -> KnowledgeBase:
    """parse_kb, raising KnowledgeBaseError when the source has errors."""
    result = parse_kb(source)
    if result.kb is None:
        raise KnowledgeBaseError(result.diagnostics)
    return result.kb


def load_kb_path(path: str) -> KnowledgeBase:
    with open(path, encoding="utf-8") as fh:
        return load_kb(fh.read())


# --- Validation ---------------------------------------------------------------


def _loc(kb: KnowledgeBase, owner: str) -> tuple[int, int]:
    return kb.locations.get(owner, (1, 1))


def _check_value(kb: KnowledgeBase, owner: str, attr: str, value: Value,
                 diags: list[Diagnostic]) -> None:
    decl = kb.attributes[attr]
    line, col = _loc(kb, owner)
    if decl.type == "bool" and not isinstance(value, bool):
        diags.append(Diagnostic(ERROR, line, col,
                                f"{owner}: value {value!r} is not a bool for {attr!r}", "type_mismatch"))
    elif decl.type == "enum" and value not in decl.values:
        diags.append(Diagnostic(ERROR, line, col,
                                f"{owner}: value {value!r} is not declared for enum {attr!r}",
                                "undeclared_value"))
    elif decl.type == "number" and (isinstance(value, bool) or not isinstance(value, (int, float))):
        diags.append(Diagnostic(ERROR, line, col,
                                f"{owner}: value {value!r} is not a number for {attr!r}", "type_mismatch"))
    elif decl.type == "text" and not isinstance(value, str):
        diags.append(Diagnostic(ERROR, line, col,
                                f"{owner}: value {value!r} is not text for {attr!r}", "type_mismatch"))


def _cf_bounds(cond: Condition) -> tuple[float, float]:
    """Reachable [min, max] CF of a condition given facts range over [0, 1]."""
    if isinstance(cond, (Comparison, Membership)):
        return 0.0, 1.0
    if isinstance(cond, Negation):
        lo, hi = _cf_bounds(cond.child)
        return -hi, -lo
    bounds = [_cf_bounds(c) for c in cond.children]
    if isinstance(cond, Conjunction):
        return min(b[0] for b in bounds), min(b[1] for b in bounds)
    return max(b[0] for b in bounds), max(b[1] for b in bounds)


def validate_kb(kb: KnowledgeBase) -> list[Diagnostic]:
    """Structural checks: reference integrity, types, calculator bindings,
    dependency cycles (errors); unreachable rules, dead attributes, missing
    citations (warnings)."""
    diags: list[Diagnostic] = []
    registry = _calculators.REGISTRY

    if not 0.0 < kb.header.cf_threshold <= 1.0:
        diags.append(Diagnostic(ERROR, 1, 1,
                                f"cf_threshold {kb.header.cf_threshold} outside (0.0, 1.0]",
                                "cf_out_of_range"))

    for attr, decl in kb.attributes.items():
        line, col = _loc(kb, attr)
        if decl.type == "enum" and not decl.values:
            diags.append(Diagnostic(ERROR, line, col,
                                    f"enum attribute {attr!r} declares no values", "type_mismatch"))
        if decl.askable and not decl.question:
            diags.append(Diagnostic(ERROR, line, col,
                                    f"askable attribute {attr!r} has no question prompt",
                                    "missing_question"))

    for rule in kb.rules.values():
        line, col = _loc(kb, rule.id)
        for leaf in condition_leaves(rule.condition):
            decl = kb.attributes.get(leaf.attribute)
            if decl is None:
                diags.append(Diagnostic(ERROR, line, col,
                                        f"rule {rule.id!r} references undeclared attribute {leaf.attribute!r}",
                                        "undeclared_attribute"))
                continue
            if isinstance(leaf, Membership):
                if decl.type != "enum":
                    diags.append(Diagnostic(ERROR, line, col,
                                            f"rule {rule.id!r}: membership test on non-enum {leaf.attribute!r}",
                                            "type_mismatch"))
                else:
                    for m in leaf.members:
                        _check_value(kb, rule.id, leaf.attribute, m, diags)
            elif leaf.op in ("<", "<=", ">", ">="):
                if decl.type != "number":
                    diags.append(Diagnostic(ERROR, line, col,
                                            f"rule {rule.id!r}: ordering comparison on non-number {leaf.attribute!r}",
                                            "type_mismatch"))
            else:
                _check_value(kb, rule.id, leaf.attribute, leaf.literal, diags)
        concl_attr, concl_value = rule.conclusion
        if concl_attr not in kb.attributes:
            diags.append(Diagnostic(ERROR, line, col,
                                    f"rule {rule.id!r} concludes undeclared attribute {concl_attr!r}",
                                    "undeclared_attribute"))
        else:
            _check_value(kb, rule.id, concl_attr, concl_value, diags)
        if not rule.citation.strip():
            diags.append(Diagnostic(WARNING, line, col,
                                    f"rule {rule.id!r} has no citation", "missing_citation"))
        lo, hi = _cf_bounds(rule.condition)
        if hi < kb.header.cf_threshold:
            diags.append(Diagnostic(WARNING, line, col,
                                    f"rule {rule.id!r} can never fire: condition CF is at most "
                                    f"{hi:g}, below threshold {kb.header.cf_threshold:g}",
                                    "unreachable_rule"))

    for binding in kb.computes.values():
        line, col = _loc(kb, binding.target)
        spec = registry.get(binding.calculator)
        if spec is None:
            diags.append(Diagnostic(ERROR, line, col,
                                    f"unknown calculator {binding.calculator!r}", "unknown_calculator"))
            continue
        for a in (binding.target, *binding.inputs):
            if a not in kb.attributes:
                diags.append(Diagnostic(ERROR, line, col,
                                        f"compute statement references undeclared attribute {a!r}",
                                        "undeclared_attribute"))
        if any(a not in kb.attributes for a in (binding.target, *binding.inputs)):
            continue
        n = len(binding.inputs)
        if n < spec.min_arity or (spec.max_arity is not None and n > spec.max_arity) or \
                (spec.paired and n % 2 != 0):
            diags.append(Diagnostic(ERROR, line, col,
                                    f"calculator {binding.calculator!r} takes {spec.arity_text()}, got {n}",
                                    "arity_mismatch"))
        for a in binding.inputs:
            if kb.attributes[a].type != spec.input_type:
                diags.append(Diagnostic(ERROR, line, col,
                                        f"calculator {binding.calculator!r} input {a!r} must be "
                                        f"{spec.input_type}, is {kb.attributes[a].type}",
                                        "type_mismatch"))
        target_decl = kb.attributes[binding.target]
        if target_decl.type != spec.output_type:
            diags.append(Diagnostic(ERROR, line, col,
                                    f"calculator {binding.calculator!r} produces {spec.output_type}, "
                                    f"but {binding.target!r} is {target_decl.type}",
                                    "type_mismatch"))
        elif spec.output_values and target_decl.type == "enum" and \
                not set(spec.output_values) <= set(target_decl.values):
            diags.append(Diagnostic(ERROR, line, col,
                                    f"enum {binding.target!r} is missing calculator outputs "
                                    f"{sorted(set(spec.output_values) - set(target_decl.values))}",
                                    "type_mismatch"))

    for fixture in kb.fixtures.values():
        line, col = _loc(kb, fixture.name)
        for attr, (value, cf) in fixture.entries.items():
            decl = kb.attributes.get(attr)
            if decl is None:
                diags.append(Diagnostic(ERROR, line, col,
                                        f"fixture {fixture.name!r} references undeclared attribute {attr!r}",
                                        "undeclared_attribute"))
                continue
            if not decl.askable:
                diags.append(Diagnostic(ERROR, line, col,
                                        f"fixture {fixture.name!r} answers non-askable attribute {attr!r}",
                                        "not_askable"))
            if value is not None:
                _check_value(kb, fixture.name, attr, value, diags)
            if not 0.0 <= cf <= 1.0:
                diags.append(Diagnostic(ERROR, line, col,
                                        f"fixture answer cf {cf} outside [0.0, 1.0]", "cf_out_of_range"))

    diags.extend(_cycle_diagnostics(kb))

    concluded = {rule.conclusion[0] for rule in kb.rules.values()} | set(kb.computes)
    for attr, decl in kb.attributes.items():
        if not decl.askable and attr not in concluded:
            line, col = _loc(kb, attr)
            diags.append(Diagnostic(WARNING, line, col,
                                    f"attribute {attr!r} is never concluded and not askable",
                                    "dead_attribute"))
    return diags


def _cycle_diagnostics(kb: KnowledgeBase) -> list[Diagnostic]:
    deps: dict[str, list[str]] = {}
    for rule in kb.rules.values():
        target = rule.conclusion[0]
        for attr in condition_attributes(rule.condition):
            deps.setdefault(target, []).append(attr)
    for binding in kb.computes.values():
        deps.setdefault(binding.target, []).extend(binding.inputs)

    state: dict[str, int] = {}  # 1 visiting, 2 done
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        state[node] = 1
        stack.append(node)
        for dep in deps.get(node, ()):
            if state.get(dep) == 1:
                return stack[stack.index(dep):] + [dep]
            if state.get(dep, 0) == 0:
                cycle = visit(dep)
                if cycle is not None:
                    return cycle
        stack.pop()
        state[node] = 2
        return None

    for node in deps:
        if state.get(node, 0) == 0:
            cycle = visit(node)
            if cycle is not None:
                involved = []
                pairs = list(zip(cycle, cycle[1:]))
                for rule in kb.rules.values():
                    refs = set(condition_attributes(rule.condition))
                    if any(rule.conclusion[0] == a and b in refs for a, b in pairs):
                        involved.append(rule.id)
                for binding in kb.computes.values():
                    if any(binding.target == a and b in binding.inputs for a, b in pairs):
                        involved.append(f"compute {binding.target}")
                line, col = _loc(kb, involved[0]) if involved else (1, 1)
                return [Diagnostic(
                    ERROR, line, col,
                    "rule dependency cycle: " + " -> ".join(cycle)
                    + " (" + ", ".join(sorted(involved)) + ")",
                    "dependency_cycle",
                )]
    return []


# --- Serialization -------------------------------------------------------------


def _format_number(x: float) -> str:
    if isinstance(x, (int, float)) and float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'


def format_value(kb: KnowledgeBase, attr: str, value: Value) -> str:
    decl = kb.attributes.get(attr)
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (int, float)):
        return _format_number(float(value))
    if decl is not None and decl.type == "text":
        return _quote(str(value))
    if isinstance(value, str) and _IDENT_RE.match(value):
        return value
    return _quote(str(value))


def _format_condition(kb: KnowledgeBase, cond: Condition, parent: str = "or") -> str:
    if isinstance(cond, Comparison):
        return f"{cond.attribute} {cond.op} {format_value(kb, cond.attribute, cond.literal)}"
    if isinstance(cond, Membership):
        members = ", ".join(format_value(kb, cond.attribute, m) for m in cond.members)
        return f"{cond.attribute} in ({members})"
    if isinstance(cond, Negation):
        return f"not ({_format_condition(kb, cond.child)})"
    word = " and " if isinstance(cond, Conjunction) else " or "
    parts = []
    for child in cond.children:
        text = _format_condition(kb, child)
        if isinstance(child, (Conjunction, Disjunction)):
            text = f"({text})"
        parts.append(text)
    return word.join(parts)


def serialize_kb(kb: KnowledgeBase) -> str:
    """Deterministic text for a knowledge base: blocks sorted by id."""
    blocks: list[str] = []
    h = kb.header
    blocks.append(
        "kb {\n"
        f"  name: {_quote(h.name)};\n"
        f"  version: {_quote(h.version)};\n"
        f"  cf_threshold: {_format_number(h.cf_threshold)};\n"
        "}"
    )
    for aid in sorted(kb.attributes):
        decl = kb.attributes[aid]
        if decl.type == "enum":
            type_text = "enum(" + ", ".join(decl.values) + ")"
        elif decl.type == "number" and decl.unit:
            type_text = f"number({decl.unit})"
        else:
            type_text = decl.type
        lines = [f"attribute {aid} {{", f"  type: {type_text};"]
        if decl.askable:
            lines.append("  askable;")
        if decl.question is not None:
            lines.append(f"  question: {_quote(decl.question)};")
        if decl.dimension is not None:
            lines.append(f"  dimension: {decl.dimension};")
        lines.append("}")
        blocks.append("\n".join(lines))
    for target in sorted(kb.computes):
        binding = kb.computes[target]
        blocks.append(
            f"compute {binding.target} using {binding.calculator}(" + ", ".join(binding.inputs) + ");"
        )
    for rid in sorted(kb.rules):
        rule = kb.rules[rid]
        attr, value = rule.conclusion
        lines = [
            f"rule {rid} {{",
            f"  if {_format_condition(kb, rule.condition)} then {attr} = "
            f"{format_value(kb, attr, value)} cf {_format_number(rule.cf)};",
        ]
        if rule.citation:
            lines.append(f"  cite {_quote(rule.citation)};")
        lines.append("}")
        blocks.append("\n".join(lines))
    for name in sorted(kb.fixtures):
        fixture = kb.fixtures[name]
        lines = [f"fixture {name} {{"]
        for attr in sorted(fixture.entries):
            value, cf = fixture.entries[attr]
            if value is None:
                lines.append(f"  {attr} = unknown;")
            elif cf == 1.0:
                lines.append(f"  {attr} = {format_value(kb, attr, value)};")
            else:
                lines.append(f"  {attr} = {format_value(kb, attr, value)} cf {_format_number(cf)};")
        lines.append("}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def parse_literal(decl: AttributeDecl, text: str) -> Value:
    """Interpret a plain string (CLI input, answer file token) for an attribute."""
    text = text.strip()
    if decl.type == "bool":
        if text.lower() in ("yes", "true", "y"):
            return True
        if text.lower() in ("no", "false", "n"):
            return False
        raise ValueError(f"{decl.id} expects yes or no, got {text!r}")
    if decl.type == "enum":
        if text in decl.values:
            return text
        raise ValueError(f"{decl.id} expects one of {', '.join(decl.values)}; got {text!r}")
    if decl.type == "number":
        try:
            return float(text)
        except ValueError:
            raise ValueError(f"{decl.id} expects a number, got {text!r}") from None
    if len(text) >= 2 and text.startswith('"') and text.endswith('"'):
        return text[1:-1]
    return text
