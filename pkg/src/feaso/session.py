"""Consultation sessions: question sequencing, assessment, what-if analysis.

A session is an append-only list of answer events over one knowledge base.
Everything else is recomputed from scratch on demand: the next question,
explanations, and the assessment are all pure functions of (knowledge base,
events), so replaying a session's events always reproduces its state.

Assessment reads the five assessed dimensions off the verdict attributes.
Within a dimension the worst sufficiently certain verdict wins (infeasible
over high_risk over feasible_with_caveats over feasible); a dimension whose
questions are still unanswered is capped at high_risk, since missing
answers must never make a proposal look safer. The overall verdict is the
worst dimension verdict; its certainty is that of the strongest dimension
at that level (one proven failure makes the bottom line certain), except
that a unanimous feasible is only as certain as its weakest dimension.

A showstopper (any dimension verdict of infeasible held with certainty)
ends the interview early: the overall verdict can no longer change, so
asking further questions would waste the client's time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import kb as kbmod
from .calculators import REGISTRY, PaybackResult
from .engine import Answer, Derivation, NotPendingError, ProofNode
from .kbdsl import KnowledgeBase

# Question groups in the order a consultation works through them.
DIMENSIONS = (
    "business",
    "organisational",
    "technical",
    "complexity",
    "stakeholder",
    "risk",
    "costbenefit",
)

# The five dimensions that carry a verdict; the other groups report into them.
ASSESSED_DIMENSIONS = ("business", "organisational", "technical", "stakeholder", "costbenefit")

_REPORTS_INTO = {
    "business": "business",
    "organisational": "organisational",
    "technical": "technical",
    "complexity": "technical",
    "stakeholder": "stakeholder",
    "risk": "costbenefit",
    "costbenefit": "costbenefit",
}

# Worst first. Combining dimensions takes the minimum by this order.
VERDICT_ORDER = ("infeasible", "high_risk", "feasible_with_caveats", "feasible")

IN_PROGRESS = "in_progress"
COMPLETE = "complete"


def verdict_rank(verdict: str) -> int:
    return VERDICT_ORDER.index(verdict)


def worst_verdict(verdicts: list[str]) -> str:
    return min(verdicts, key=verdict_rank)


@dataclass(frozen=True)
class AnswerEvent:
    attribute: str
    value: object  # None means answered unknown
    cf: float = 1.0


@dataclass(frozen=True)
class Question:
    attribute: str
    prompt: str
    kind: str  # bool | enum | number | text
    values: tuple[str, ...]
    unit: str | None
    dimension: str
    goal: str


@dataclass(frozen=True)
class Caveat:
    dimension: str
    symbol: str
    cf: float
    rules: tuple[str, ...]


@dataclass(frozen=True)
class DimensionAssessment:
    dimension: str
    verdict: str
    cf: float
    caveats: tuple[Caveat, ...]
    pending: tuple[str, ...]  # askables still open that feed this dimension


@dataclass(frozen=True)
class RiskEntry:
    risk: str
    likelihood: str
    impact: str
    serious: bool


@dataclass(frozen=True)
class Assessment:
    kb_name: str
    kb_version: str
    status: str
    overall_verdict: str
    overall_cf: float
    dimensions: tuple[DimensionAssessment, ...]
    caveats: tuple[Caveat, ...]
    figures: dict[str, object]
    risk_register: tuple[RiskEntry, ...]
    unresolved: tuple[Question, ...]
    notes: tuple[str, ...]
    rule_citations: dict[str, str]


@dataclass(frozen=True)
class WhatIf:
    baseline: Assessment
    variant: Assessment
    changed: dict[str, dict[str, object]]  # name -> {"before": x, "after": y}


class Session:
    """One consultation over a knowledge base."""

    def __init__(self, kb: KnowledgeBase, session_id: str = ""):
        self.kb = kb
        self.id = session_id
        self.events: list[AnswerEvent] = []
        self._goals = tuple(
            itertools.chain.from_iterable(
                (
                    attr
                    for attr, decl in kb.attributes.items()
                    if not decl.askable and decl.dimension == dim
                )
                for dim in DIMENSIONS
            )
        )

    @property
    def goals(self) -> tuple[str, ...]:
        return self._goals

    @property
    def answers(self) -> dict[str, Answer]:
        current: dict[str, Answer] = {}
        for event in self.events:
            current[event.attribute] = Answer(event.value, event.cf)
        return current

    def answer(self, attribute: str, value: object, cf: float = 1.0) -> AnswerEvent:
        checked = kbmod.coerce_answer(self.kb, attribute, value, cf)
        event = AnswerEvent(attribute, checked.value, checked.cf)
        self.events.append(event)
        return event

    def retract_last(self) -> AnswerEvent | None:
        return self.events.pop() if self.events else None

    def derive(self, goals: tuple[str, ...] | None = None) -> Derivation:
        return Derivation(self.kb, self.answers, goals or self._goals, REGISTRY)

    def _certain_showstopper(self, derivation: Derivation) -> bool:
        """True when some dimension verdict holds infeasible with certainty.

        The overall verdict is the worst dimension verdict, so once any
        dimension is infeasible at full certainty no later answer can change
        the outcome. The consultation stops asking at that point.
        """
        for dim in ASSESSED_DIMENSIONS:
            fact = derivation.facts_for(f"{dim}_verdict").get("infeasible")
            if fact is not None and fact.cf >= 1.0:
                return True
        return False

    def _narrowed(self, full: Derivation) -> Derivation:
        """Derivation over goals still worth pursuing.

        A goal already held with certainty 1.0 cannot change whatever else
        is answered, so its open questions are dropped; restricting the goal
        list reattributes shared questions to the goals that still need them.
        """
        open_goals = tuple(g for g in self._goals if not full.has_certain(g))
        if not open_goals or len(open_goals) == len(self._goals):
            return full
        return self.derive(open_goals)

    def _demanded_questions(self, derivation: Derivation) -> list[Question]:
        questions: list[Question] = []
        for goal in derivation.goals:
            goal_demands = [d for d in derivation.demands if d.goal == goal]
            goal_demands.sort(key=lambda d: self.kb.decl_index(d.attribute))
            for demand in goal_demands:
                questions.append(self._question(demand.attribute, goal))
        return questions

    def open_questions(self) -> list[Question]:
        """Questions the goals still want answered, showstopper or not.

        Feeds the assessment's unresolved list: a consultation cut short by
        a showstopper must still report which evidence was never collected.
        """
        return self._demanded_questions(self._narrowed(self.derive()))

    def pending_questions(self) -> list[Question]:
        full = self.derive()
        if self._certain_showstopper(full):
            return []
        return self._demanded_questions(self._narrowed(full))

    def next_question(self) -> Question | None:
        pending = self.pending_questions()
        return pending[0] if pending else None

    def _question(self, attribute: str, goal: str) -> Question:
        decl = self.kb.attributes[attribute]
        return Question(
            attribute,
            decl.question or attribute,
            decl.type,
            decl.values,
            decl.unit,
            decl.dimension or "",
            goal,
        )

    @property
    def status(self) -> str:
        return COMPLETE if self.next_question() is None else IN_PROGRESS

    # -- explanations --

    def why(self, attribute: str) -> list[dict[str, str]]:
        """Why a pending question is being asked: the goal chain behind it."""
        full = self.derive()
        if self._certain_showstopper(full):
            raise NotPendingError(f"no question pending for {attribute}")
        derivation = self._narrowed(full)
        demand = next((d for d in derivation.demands if d.attribute == attribute), None)
        if demand is None:
            raise NotPendingError(f"no question pending for {attribute}")
        chain = [{"attribute": demand.goal, "rule": "", "citation": ""}]
        for attr, rule_id in demand.stack:
            rule = self.kb.rules[rule_id]
            chain.append({"attribute": attr, "rule": rule_id, "citation": rule.citation})
        return chain

    def how(self, attribute: str) -> list[dict[str, object]]:
        """Proof trees for every held value of the attribute, best first."""
        derivation = self.derive()
        proofs = derivation.how(attribute)
        trees = [proof_tree(self.kb, node) for node in proofs.values()]
        trees.sort(key=lambda t: -float(t["cf"]))  # type: ignore[arg-type]
        return trees

    # -- assessment --

    def assess(self) -> Assessment:
        return run_assessment(self)

    def whatif(self, overrides: dict[str, object], cf: float = 1.0) -> WhatIf:
        baseline = self.assess()
        variant_session = Session(self.kb, self.id)
        variant_session.events = list(self.events)
        for attribute, value in overrides.items():
            variant_session.answer(attribute, value, cf)
        variant = variant_session.assess()
        return WhatIf(baseline, variant, assessment_delta(baseline, variant))

    # -- persistence --

    def serialize(self) -> str:
        lines = []
        if self.id:
            lines.append(
                f'session {self.id} kb {_quote(self.kb.header.name)} '
                f'version {_quote(self.kb.header.version)}'
            )
        for event in self.events:
            lines.append(kbmod.format_answer_line(self.kb, event.attribute, Answer(event.value, event.cf)))
        return "\n".join(lines) + "\n"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def load_session(kb: KnowledgeBase, text: str, session_id: str = "") -> Session:
    """Rebuild a session from its serialized event log."""
    session = Session(kb, session_id)
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("session "):
            parts = stripped.split(None, 2)
            if not session.id and len(parts) >= 2:
                session.id = parts[1]
            continue
        try:
            attr, answer = kbmod.parse_answer_line(kb, stripped)
        except ValueError as exc:
            raise ValueError(f"session log line {lineno}: {exc}") from None
        session.events.append(AnswerEvent(attr, answer.value, answer.cf))
    return session


def apply_answers(session: Session, answers: dict[str, Answer]) -> None:
    for attribute, answer in answers.items():
        session.answer(attribute, answer.value, answer.cf)


# --- Proof trees as plain data ------------------------------------------------------


def proof_tree(kb: KnowledgeBase, node: ProofNode) -> dict[str, object]:
    """A proof as JSON-friendly nested dicts."""
    fact = node.conclusion
    out: dict[str, object] = {
        "attribute": fact.attribute,
        "value": fact.value,
        "cf": fact.cf,
        "source": node.rule,
    }
    rule = kb.rules.get(node.rule)
    if rule is not None and rule.citation:
        out["citation"] = rule.citation
    if node.children:
        out["children"] = [proof_tree(kb, child) for child in node.children]
    return out


def _fired_rules(kb: KnowledgeBase, node: ProofNode, seen: set[str]) -> None:
    if node.rule in kb.rules:
        seen.add(node.rule)
    for child in node.children:
        _fired_rules(kb, child, seen)


# --- Assessment -----------------------------------------------------------------------

_FIGURE_ATTRS = (
    "initial_cost_estimate",
    "annual_cost_estimate",
    "payback_months_est",
    "task_time_band",
    "interface_share",
    "effort_multiplier",
    "contingency_needed",
)


def run_assessment(session: Session) -> Assessment:
    kb = session.kb
    derivation = session.derive()
    # Interview status and evidence gaps diverge after a showstopper: no
    # further questions are asked, but the report must still say what was
    # never collected (and missing evidence keeps capping dimensions).
    asking = session.pending_questions()
    pending = session.open_questions()
    threshold = kb.header.cf_threshold

    pending_by_dim: dict[str, list[str]] = {}
    for question in pending:
        goal_decl = kb.attributes.get(question.goal)
        tag = goal_decl.dimension if goal_decl is not None and goal_decl.dimension else "technical"
        dim = _REPORTS_INTO.get(tag, "technical")
        pending_by_dim.setdefault(dim, []).append(question.attribute)

    # Needed askables answered "unknown" also leave a dimension unsupported.
    answers = session.answers
    unknown_needed = [
        a
        for a in derivation.unresolved
        if a in answers and answers[a].value is None
    ]
    for attr in unknown_needed:
        decl = kb.attributes.get(attr)
        tag = decl.dimension if decl is not None and decl.dimension else "technical"
        dim = _REPORTS_INTO.get(tag, "technical")
        pending_by_dim.setdefault(dim, []).append(attr)

    fired: set[str] = set()
    dims: list[DimensionAssessment] = []
    all_caveats: list[Caveat] = []
    for dim in ASSESSED_DIMENSIONS:
        verdict_attr = f"{dim}_verdict"
        caveat_attr = f"{dim}_caveat"
        held = {
            value: fact
            for value, fact in derivation.facts_for(verdict_attr).items()
            if fact.cf >= threshold
        }
        for value in held:
            _fired_rules(kb, derivation.proof(verdict_attr, value), fired)

        caveats = []
        for value, fact in sorted(
            derivation.facts_for(caveat_attr).items(), key=lambda kv: -kv[1].cf
        ):
            if fact.cf < threshold:
                continue
            node = derivation.proof(caveat_attr, value)
            rules: set[str] = set()
            _fired_rules(kb, node, rules)
            fired |= rules
            caveats.append(Caveat(dim, str(value), fact.cf, tuple(sorted(rules))))

        dim_pending = tuple(dict.fromkeys(pending_by_dim.get(dim, [])))
        if held:
            verdict = worst_verdict([str(v) for v in held])
            cf = held[verdict].cf
        else:
            verdict, cf = "high_risk", 0.0
        if dim_pending and verdict_rank(verdict) > verdict_rank("high_risk"):
            verdict, cf = "high_risk", 0.0
        dims.append(DimensionAssessment(dim, verdict, cf, tuple(caveats), dim_pending))
        all_caveats.extend(caveats)

    overall = worst_verdict([d.verdict for d in dims])
    if overall == "feasible":
        # unanimous all-clear: only as certain as the weakest dimension
        overall_cf = min((d.cf for d in dims), default=0.0)
    else:
        # the verdict is set by the worst dimensions, and the strongest of
        # them carries the confidence: a proven showstopper stays certain
        # even when another dimension only weakly agrees
        overall_cf = max((d.cf for d in dims if d.verdict == overall), default=0.0)

    figures = _collect_figures(session, derivation)
    register = _risk_register(session, derivation)
    citations = {rule_id: kb.rules[rule_id].citation for rule_id in sorted(fired)}
    for caveat in all_caveats:
        for rule_id in caveat.rules:
            citations.setdefault(rule_id, kb.rules[rule_id].citation)

    return Assessment(
        kb_name=kb.header.name,
        kb_version=kb.header.version,
        status=COMPLETE if not asking else IN_PROGRESS,
        overall_verdict=overall,
        overall_cf=overall_cf,
        dimensions=tuple(dims),
        caveats=tuple(all_caveats),
        figures=figures,
        risk_register=register,
        unresolved=tuple(pending),
        notes=tuple(derivation.notes),
        rule_citations=citations,
    )


def _collect_figures(session: Session, derivation: Derivation) -> dict[str, object]:
    figures: dict[str, object] = {}
    for attr in _FIGURE_ATTRS:
        if attr not in session.kb.attributes:
            continue
        fact = derivation.best_fact(attr)
        if fact is not None:
            figures[attr] = fact.value
    benefit = session.answers.get("annual_benefit")
    if benefit is not None and benefit.value is not None:
        figures["annual_benefit"] = benefit.value

    # Payback that never happens is information, not a missing figure: make
    # it explicit when the inputs are all present but no payback was derived.
    if (
        "payback_months_est" not in figures
        and "initial_cost_estimate" in figures
        and "annual_cost_estimate" in figures
        and "annual_benefit" in figures
    ):
        figures["payback_months_est"] = None
    return figures


def _risk_register(session: Session, derivation: Derivation) -> tuple[RiskEntry, ...]:
    binding = next(
        (b for b in session.kb.computes.values() if b.calculator == "contingency_required"),
        None,
    )
    if binding is None:
        return ()
    entries = []
    for lik_attr, imp_attr in zip(binding.inputs[0::2], binding.inputs[1::2]):
        lik = derivation.best_fact(lik_attr)
        imp = derivation.best_fact(imp_attr)
        if lik is None or imp is None:
            continue
        label = lik_attr
        for suffix in ("_likelihood", "_impact"):
            if label.endswith(suffix):
                label = label[: -len(suffix)]
        levels = ("low", "medium", "high")
        serious = levels.index(str(lik.value)) >= 1 and levels.index(str(imp.value)) >= 1
        entries.append(RiskEntry(label, str(lik.value), str(imp.value), serious))
    return tuple(entries)


def assessment_delta(baseline: Assessment, variant: Assessment) -> dict[str, dict[str, object]]:
    """What changed between two assessments, keyed by a stable name."""
    changed: dict[str, dict[str, object]] = {}
    if baseline.overall_verdict != variant.overall_verdict:
        changed["overall_verdict"] = {
            "before": baseline.overall_verdict,
            "after": variant.overall_verdict,
        }
    before_dims = {d.dimension: d.verdict for d in baseline.dimensions}
    after_dims = {d.dimension: d.verdict for d in variant.dimensions}
    for dim, verdict in before_dims.items():
        if after_dims.get(dim) != verdict:
            changed[f"{dim}_verdict"] = {"before": verdict, "after": after_dims.get(dim)}
    keys = set(baseline.figures) | set(variant.figures)
    for key in sorted(keys):
        before, after = baseline.figures.get(key), variant.figures.get(key)
        if before != after:
            changed[key] = {"before": before, "after": after}
    before_caveats = {c.symbol for c in baseline.caveats}
    after_caveats = {c.symbol for c in variant.caveats}
    if before_caveats != after_caveats:
        changed["caveats"] = {
            "before": sorted(before_caveats),
            "after": sorted(after_caveats),
        }
    return changed


def payback_text(months: object) -> str:
    """Display text for a payback figure (None means never)."""
    if months is None:
        return PaybackResult(None).describe()
    return PaybackResult(float(months)).describe()  # type: ignore[arg-type]
