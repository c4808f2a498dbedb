"""Backward-chaining inference over attribute/value facts with certainty factors.

This is the domain-independent core. It evaluates rule conditions against
working memory, chains backwards from goal attributes, combines evidence when
the same conclusion is derived more than once, and keeps proof trees so every
derived fact can be explained. What to ask, in which order, and what the
attributes mean is the business of the knowledge base and the session layer.

Certainty factors live in [-1.0, 1.0]. A condition "holds" (lets a rule fire)
when its CF reaches the knowledge base's firing threshold, 0.2 by default.
Unknown values carry CF 0.0 and never fire anything.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Iterator, Mapping

if TYPE_CHECKING:  # only for annotations; the engine is imported by kbdsl
    from .kbdsl import AttributeDecl, KnowledgeBase

Value = Any  # bool | float | str once typed by a knowledge base

DEFAULT_THRESHOLD = 0.2

# Provenance kinds.
USER_ANSWER = "user_answer"
RULE_DERIVED = "rule_derived"
COMPUTED = "computed"
UNRESOLVED = "unresolved"

# ProofNode.rule markers for nodes that are not rule applications.
ANSWER_NODE = "answer"
COMBINED_NODE = "combined"
UNRESOLVED_NODE = "unresolved"


class EngineError(Exception):
    """Base class for inference failures."""


class EvaluationError(EngineError):
    """A condition or calculator could not be evaluated; names the attribute."""

    def __init__(self, attribute: str, message: str):
        super().__init__(f"{attribute}: {message}")
        self.attribute = attribute


class CycleError(EngineError):
    """Backchaining re-entered an attribute already being resolved."""

    def __init__(self, path: tuple[str, ...]):
        super().__init__("rule dependency cycle: " + " -> ".join(path))
        self.path = path


class NotDerivedError(EngineError):
    """An explanation was requested for an attribute with no facts."""


class NotPendingError(EngineError):
    """A why-explanation was requested for an attribute not awaiting an answer."""


def _check_cf(x: float) -> None:
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"certainty factor {x!r} outside [-1.0, 1.0]")


def _clamp(x: float) -> float:
    return max(-1.0, min(1.0, x)) + 0.0  # +0.0 normalises -0.0


def combine_parallel(a: float, b: float) -> float:
    """Combine two certainty factors supporting the same conclusion.

    Same-sign evidence reinforces without leaving [-1, 1]; mixed-sign evidence
    is discounted by the weaker side. Total on the domain: the one undefined
    point of the classical mixed-sign formula, (1.0, -1.0), is defined as 0.0
    (full confirmation and full refutation cancel).
    """
    _check_cf(a)
    _check_cf(b)
    if a >= 0.0 and b >= 0.0:
        out = a + b * (1.0 - a)
    elif a <= 0.0 and b <= 0.0:
        out = -combine_parallel(-a, -b)
    else:
        denom = 1.0 - min(abs(a), abs(b))
        out = 0.0 if denom == 0.0 else (a + b) / denom
    return _clamp(out)


@dataclass(frozen=True)
class Provenance:
    """Where a fact came from: user_answer, rule_derived(rule), computed(calc)."""

    kind: str
    ref: str | None = None

    def label(self) -> str:
        return self.kind if self.ref is None else f"{self.kind}({self.ref})"


@dataclass(frozen=True)
class Fact:
    attribute: str
    value: Value
    cf: float
    provenance: Provenance

    def __post_init__(self) -> None:
        _check_cf(self.cf)


# --- Condition nodes ---------------------------------------------------------

COMPARATORS = ("=", "!=", "<", "<=", ">", ">=")
_NUMERIC_OPS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class Comparison:
    attribute: str
    op: str
    literal: Value


@dataclass(frozen=True)
class Membership:
    attribute: str
    members: tuple[Value, ...]


@dataclass(frozen=True)
class Conjunction:
    children: tuple["Condition", ...]


@dataclass(frozen=True)
class Disjunction:
    children: tuple["Condition", ...]


@dataclass(frozen=True)
class Negation:
    child: "Condition"


Condition = Comparison | Membership | Conjunction | Disjunction | Negation


def condition_attributes(cond: Condition) -> Iterator[str]:
    """Attributes referenced anywhere in a condition, in traversal order."""
    if isinstance(cond, (Comparison, Membership)):
        yield cond.attribute
    elif isinstance(cond, Negation):
        yield from condition_attributes(cond.child)
    else:
        for child in cond.children:
            yield from condition_attributes(child)


def condition_leaves(cond: Condition) -> Iterator[Comparison | Membership]:
    if isinstance(cond, (Comparison, Membership)):
        yield cond
    elif isinstance(cond, Negation):
        yield from condition_leaves(cond.child)
    else:
        for child in cond.children:
            yield from condition_leaves(child)


@dataclass(frozen=True)
class Rule:
    """if <condition> then <attribute> = <value> cf <x>, with a citation."""

    id: str
    condition: Condition
    conclusion: tuple[str, Value]
    cf: float
    citation: str = ""

    def __post_init__(self) -> None:
        if not 0.0 < self.cf <= 1.0:
            raise ValueError(f"rule {self.id}: cf {self.cf!r} outside (0.0, 1.0]")


@dataclass(frozen=True)
class ProofNode:
    """Explanation tree node. rule is a rule id or one of the node markers."""

    conclusion: Fact
    rule: str
    children: tuple["ProofNode", ...] = ()


Facts = dict[str, dict[Value, Fact]]


def _leaf_match(
    leaf: Comparison | Membership,
    facts: Facts,
    attributes: Mapping[str, "AttributeDecl"] | None,
) -> tuple[float, Fact | None]:
    """CF of the best fact satisfying the leaf, 0.0 if none does."""
    attr = leaf.attribute
    if attributes is not None and attr not in attributes:
        raise EvaluationError(attr, "attribute is not declared")
    held = facts.get(attr, {})
    if isinstance(leaf, Comparison):
        if leaf.op in _NUMERIC_OPS:
            if attributes is not None and attributes[attr].type != "number":
                raise EvaluationError(attr, f"operator {leaf.op!r} needs a number attribute")
            if not isinstance(leaf.literal, (int, float)) or isinstance(leaf.literal, bool):
                raise EvaluationError(attr, f"operator {leaf.op!r} needs a numeric literal")
        matched = [f for v, f in held.items() if _compare(leaf.op, v, leaf.literal, attr)]
    else:
        matched = [f for v, f in held.items() if v in leaf.members]
    best: Fact | None = None
    for f in matched:
        if best is None or f.cf > best.cf:
            best = f
    return (best.cf if best is not None else 0.0), best


def _compare(op: str, value: Value, literal: Value, attr: str) -> bool:
    if op == "=":
        return value == literal
    if op == "!=":
        return value != literal
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise EvaluationError(attr, f"operator {op!r} applied to non-numeric value {value!r}")
    if op == "<":
        return value < literal
    if op == "<=":
        return value <= literal
    if op == ">":
        return value > literal
    return value >= literal


def evaluate_condition(
    cond: Condition,
    facts: Facts,
    attributes: Mapping[str, "AttributeDecl"] | None = None,
) -> float:
    """CF of a condition against working memory.

    Conjunction takes the minimum of its children, disjunction the maximum,
    negation the arithmetic negation. A comparison or membership leaf takes
    the CF of the best matching fact, 0.0 when nothing matches.
    """
    if isinstance(cond, (Comparison, Membership)):
        cf, _ = _leaf_match(cond, facts, attributes)
        return cf
    if isinstance(cond, Conjunction):
        return min(evaluate_condition(c, facts, attributes) for c in cond.children)
    if isinstance(cond, Disjunction):
        return max(evaluate_condition(c, facts, attributes) for c in cond.children)
    return _clamp(-evaluate_condition(cond.child, facts, attributes))


# --- Backchaining ------------------------------------------------------------


@dataclass(frozen=True)
class Answer:
    """Effective answer for one attribute. value None means answered unknown."""

    value: Value | None
    cf: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.cf <= 1.0:
            raise ValueError(f"answer cf {self.cf!r} outside [0.0, 1.0]")


@dataclass(frozen=True)
class Demand:
    """An askable attribute the engine needed but had no answer for."""

    attribute: str
    goal: str
    stack: tuple[tuple[str, str], ...]  # (attribute being resolved, rule id)


@dataclass(frozen=True)
class GoalResult:
    goal: str
    facts: tuple[Fact, ...]
    proof: ProofNode


class Derivation:
    """One backchaining pass: a snapshot of answers resolved against goals.

    Building the object does all the work; afterwards it is read-only. The
    same answers and goals always produce the same facts, CFs, proof trees
    and demand order.
    """

    def __init__(
        self,
        kb: "KnowledgeBase",
        answers: Mapping[str, Answer],
        goals: list[str] | tuple[str, ...],
        calculators: Mapping[str, Any] | None = None,
    ):
        self.kb = kb
        self.threshold = kb.header.cf_threshold
        self.goals = tuple(goals)
        self._calculators = calculators or {}
        self._facts: Facts = {}
        self._contribs: dict[tuple[str, Value], list[ProofNode]] = {}
        self._attempts: dict[str, list[ProofNode]] = {}
        self._demands: dict[str, Demand] = {}
        self._needed_unknowns: list[str] = []
        self._notes: list[str] = []
        self._resolved: set[str] = set()
        self._resolving: list[str] = []
        self._frames: list[tuple[str, str]] = []
        self._current_goal = ""

        self._rules_for: dict[str, list[Rule]] = {}
        for rule in kb.rules.values():
            self._rules_for.setdefault(rule.conclusion[0], []).append(rule)

        self._answers = dict(answers)
        for attr, ans in self._answers.items():
            if ans.value is not None:
                node = ProofNode(
                    Fact(attr, ans.value, ans.cf, Provenance(USER_ANSWER)), ANSWER_NODE
                )
                self._assert(attr, ans.value, ans.cf, Provenance(USER_ANSWER), node)

        self._goal_results: dict[str, GoalResult] = {}
        for goal in self.goals:
            self._current_goal = goal
            self._frames.clear()
            self._resolve(goal)
            self._goal_results[goal] = self._make_goal_result(goal)

    # -- read API --

    def facts_for(self, attribute: str) -> dict[Value, Fact]:
        return dict(self._facts.get(attribute, {}))

    def best_fact(self, attribute: str, min_cf: float | None = None) -> Fact | None:
        """Highest-CF fact for the attribute at or above min_cf (the threshold)."""
        floor = self.threshold if min_cf is None else min_cf
        best: Fact | None = None
        for fact in self._facts.get(attribute, {}).values():
            if fact.cf >= floor and (best is None or fact.cf > best.cf):
                best = fact
        return best

    def has_certain(self, attribute: str) -> bool:
        return any(f.cf >= 1.0 for f in self._facts.get(attribute, {}).values())

    def proof(self, attribute: str, value: Value) -> ProofNode:
        nodes = self._contribs.get((attribute, value))
        if not nodes:
            raise NotDerivedError(f"no fact for {attribute} = {value!r}")
        if len(nodes) == 1:
            return nodes[0]
        return ProofNode(self._facts[attribute][value], COMBINED_NODE, tuple(nodes))

    def proofs_for(self, attribute: str) -> dict[Value, ProofNode]:
        held = self._facts.get(attribute, {})
        return {v: self.proof(attribute, v) for v in held}

    def how(self, attribute: str) -> dict[Value, ProofNode]:
        proofs = self.proofs_for(attribute)
        if not proofs:
            raise NotDerivedError(f"{attribute} was never derived or answered")
        return proofs

    def why(self, attribute: str) -> tuple[tuple[str, str], ...]:
        """Rule stack (outermost goal first) behind a pending question."""
        demand = self._demands.get(attribute)
        if demand is None:
            raise NotPendingError(f"no question pending for {attribute}")
        return demand.stack

    def goal_result(self, goal: str) -> GoalResult:
        return self._goal_results[goal]

    @property
    def demands(self) -> list[Demand]:
        return list(self._demands.values())

    @property
    def unresolved(self) -> list[str]:
        """Askables that were needed but have no usable answer (incl. unknowns)."""
        seen = list(self._demands)
        for attr in self._needed_unknowns:
            if attr not in seen:
                seen.append(attr)
        return seen

    @property
    def notes(self) -> list[str]:
        return list(self._notes)

    # -- resolution --

    def _resolve(self, attr: str) -> None:
        if attr in self._resolved:
            return
        if attr in self._resolving:
            raise CycleError(tuple(self._resolving[self._resolving.index(attr):]) + (attr,))
        decl = self.kb.attributes.get(attr)
        if decl is None:
            raise EvaluationError(attr, "attribute is not declared")
        self._resolving.append(attr)
        try:
            if decl.askable and attr not in self._answers:
                self._record_demand(attr)
            elif self._answers.get(attr) is not None and self._answers[attr].value is None:
                if attr not in self._needed_unknowns:
                    self._needed_unknowns.append(attr)
            binding = self.kb.computes.get(attr)
            if binding is not None:
                self._run_calculator(attr, binding)
            for rule in self._rules_for.get(attr, ()):
                self._apply_rule(attr, rule)
        finally:
            self._resolving.pop()
        self._resolved.add(attr)

    def _record_demand(self, attr: str) -> None:
        if attr not in self._demands:
            self._demands[attr] = Demand(attr, self._current_goal, tuple(self._frames))

    def _apply_rule(self, attr: str, rule: Rule) -> None:
        self._frames.append((attr, rule.id))
        try:
            cond_cf = self._eval_resolving(rule.condition)
        finally:
            self._frames.pop()
        leaves = tuple(self._leaf_proof(leaf) for leaf in condition_leaves(rule.condition))
        value = rule.conclusion[1]
        if cond_cf >= self.threshold:
            derived = _clamp(rule.cf * cond_cf)
            node = ProofNode(
                Fact(attr, value, derived, Provenance(RULE_DERIVED, rule.id)), rule.id, leaves
            )
            self._assert(attr, value, derived, Provenance(RULE_DERIVED, rule.id), node)
        else:
            node = ProofNode(
                Fact(attr, value, 0.0, Provenance(RULE_DERIVED, rule.id)), rule.id, leaves
            )
            self._attempts.setdefault(attr, []).append(node)

    def _eval_resolving(self, cond: Condition) -> float:
        """Evaluate while resolving sub-goals and demanding missing answers.

        Conjunctions stop resolving further children once one falls below the
        firing threshold: the minimum can no longer reach it, so the remaining
        children's questions are not actually needed.
        """
        if isinstance(cond, (Comparison, Membership)):
            self._resolve(cond.attribute)
            cf, _ = _leaf_match(cond, self._facts, self.kb.attributes)
            return cf
        if isinstance(cond, Conjunction):
            lowest = 1.0
            for child in cond.children:
                cf = self._eval_resolving(child)
                lowest = min(lowest, cf)
                if cf < self.threshold:
                    break
            return lowest
        if isinstance(cond, Disjunction):
            return max(self._eval_resolving(child) for child in cond.children)
        return _clamp(-self._eval_resolving(cond.child))

    def _leaf_proof(self, leaf: Comparison | Membership) -> ProofNode:
        _, best = _leaf_match(leaf, self._facts, self.kb.attributes)
        if best is None:
            placeholder = Fact(leaf.attribute, None, 0.0, Provenance(UNRESOLVED))
            return ProofNode(placeholder, UNRESOLVED_NODE)
        return self.proof(best.attribute, best.value)

    def _run_calculator(self, attr: str, binding: Any) -> None:
        spec = self._calculators.get(binding.calculator)
        if spec is None:
            raise EvaluationError(attr, f"unknown calculator {binding.calculator!r}")
        values, cfs, nodes = [], [], []
        missing = False
        for inp in binding.inputs:
            # Every input is needed unconditionally, so resolve (and demand)
            # them all even once one is known to be missing.
            self._resolve(inp)
            fact = self.best_fact(inp)
            if fact is None:
                missing = True
                continue
            values.append(fact.value)
            cfs.append(fact.cf)
            nodes.append(self.proof(fact.attribute, fact.value))
        if missing:
            return  # the target stays underived
        try:
            result = spec.run(values)
        except ValueError as exc:
            self._notes.append(f"{attr}: {exc}")
            return
        if result is None:
            return
        cf = min(cfs) if cfs else 1.0
        prov = Provenance(COMPUTED, binding.calculator)
        node = ProofNode(Fact(attr, result, cf, prov), f"computed:{binding.calculator}", tuple(nodes))
        self._assert(attr, result, cf, prov, node)

    def _assert(self, attr: str, value: Value, cf: float, prov: Provenance, node: ProofNode) -> None:
        held = self._facts.setdefault(attr, {})
        current = held.get(value)
        if current is None:
            held[value] = Fact(attr, value, _clamp(cf), prov)
        else:
            held[value] = replace(current, cf=combine_parallel(current.cf, cf))
        self._contribs.setdefault((attr, value), []).append(node)

    def _make_goal_result(self, goal: str) -> GoalResult:
        facts = tuple(self._facts.get(goal, {}).values())
        if facts:
            best = max(facts, key=lambda f: f.cf)
            return GoalResult(goal, facts, self.proof(goal, best.value))
        blocked = ProofNode(
            Fact(goal, None, 0.0, Provenance(UNRESOLVED)),
            UNRESOLVED_NODE,
            tuple(self._attempts.get(goal, ())),
        )
        return GoalResult(goal, (), blocked)


def replay_proof(
    node: ProofNode,
    kb: "KnowledgeBase",
    calculators: Mapping[str, Any] | None = None,
) -> float:
    """Recompute a proof tree's root CF bottom-up from its leaves.

    Used to check that explanations are faithful: the returned CF must equal
    the recorded conclusion CF exactly.
    """
    if node.rule in (ANSWER_NODE, UNRESOLVED_NODE):
        return node.conclusion.cf
    if node.rule == COMBINED_NODE:
        acc = replay_proof(node.children[0], kb, calculators)
        for child in node.children[1:]:
            acc = combine_parallel(acc, replay_proof(child, kb, calculators))
        return acc
    if node.rule.startswith("computed:"):
        cfs = [replay_proof(child, kb, calculators) for child in node.children]
        if calculators is not None:
            calc_id = node.rule.split(":", 1)[1]
            values = [child.conclusion.value for child in node.children]
            recomputed = calculators[calc_id].run(values)
            if recomputed != node.conclusion.value:
                raise EngineError(
                    f"proof replay mismatch for {node.conclusion.attribute}: "
                    f"{recomputed!r} != {node.conclusion.value!r}"
                )
        return min(cfs) if cfs else 1.0
    rule = kb.rules[node.rule]
    facts: Facts = {}
    for child in node.children:
        replay_proof(child, kb, calculators)
        leaf = child.conclusion
        if leaf.provenance.kind != UNRESOLVED:
            facts.setdefault(leaf.attribute, {})[leaf.value] = leaf
    cond_cf = evaluate_condition(rule.condition, facts, kb.attributes)
    return _clamp(rule.cf * cond_cf)
