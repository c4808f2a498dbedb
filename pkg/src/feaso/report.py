"""Feasibility reports: a JSON-friendly payload and a markdown rendering.

The payload is the single source of truth: render_markdown works from the
payload alone (never from live session objects), so the two formats cannot
drift apart and the markdown can be regenerated from stored JSON.
"""

from __future__ import annotations

import json

from .calculators import format_gbp, round_cost
from .session import Assessment, payback_text

_VERDICT_TEXT = {
    "feasible": "feasible",
    "feasible_with_caveats": "feasible with caveats",
    "high_risk": "high risk",
    "infeasible": "infeasible",
}

_CONCLUSION_TEXT = {
    "feasible": "Proceed: the proposal holds up on every dimension assessed.",
    "feasible_with_caveats": (
        "Proceed with caution: the proposal is workable provided the caveats above "
        "are addressed in the project plan."
    ),
    "high_risk": (
        "Defer: open risks or unanswered questions leave the case unproven. "
        "Strengthen the weak dimensions before committing to a build."
    ),
    "infeasible": "Do not proceed: at least one dimension fails outright.",
}


def assessment_payload(assessment: Assessment) -> dict:
    """Everything a report needs, as plain JSON-safe data."""
    figures = dict(assessment.figures)
    if "initial_cost_estimate" in figures and figures["initial_cost_estimate"] is not None:
        figures["initial_cost_display"] = format_gbp(round_cost(float(figures["initial_cost_estimate"])))
    if "annual_cost_estimate" in figures and figures["annual_cost_estimate"] is not None:
        figures["annual_cost_display"] = format_gbp(round_cost(float(figures["annual_cost_estimate"])))
    if "annual_benefit" in figures and figures["annual_benefit"] is not None:
        figures["annual_benefit_display"] = format_gbp(round_cost(float(figures["annual_benefit"])))
    if "payback_months_est" in figures:
        figures["payback_display"] = payback_text(figures["payback_months_est"])

    return {
        "kb": {"name": assessment.kb_name, "version": assessment.kb_version},
        "status": assessment.status,
        "verdict": assessment.overall_verdict,
        "cf": assessment.overall_cf,
        "dimensions": [
            {
                "dimension": d.dimension,
                "verdict": d.verdict,
                "cf": d.cf,
                "caveats": [
                    {
                        "symbol": c.symbol,
                        "cf": c.cf,
                        "rules": list(c.rules),
                    }
                    for c in d.caveats
                ],
                "pending": list(d.pending),
            }
            for d in assessment.dimensions
        ],
        "caveats": [
            {"dimension": c.dimension, "symbol": c.symbol, "cf": c.cf, "rules": list(c.rules)}
            for c in assessment.caveats
        ],
        "figures": figures,
        "risk_register": [
            {
                "risk": r.risk,
                "likelihood": r.likelihood,
                "impact": r.impact,
                "serious": r.serious,
            }
            for r in assessment.risk_register
        ],
        "unresolved": [
            {
                "attribute": q.attribute,
                "prompt": q.prompt,
                "dimension": q.dimension,
                "goal": q.goal,
            }
            for q in assessment.unresolved
        ],
        "notes": list(assessment.notes),
        "rule_citations": dict(assessment.rule_citations),
    }


def _verdict(text: str) -> str:
    return _VERDICT_TEXT.get(text, text)


def _caveat_lines(payload: dict, caveats: list[dict]) -> list[str]:
    lines = []
    citations = payload.get("rule_citations", {})
    for caveat in caveats:
        texts = []
        for rule_id in caveat.get("rules", []):
            citation = citations.get(rule_id, "")
            if citation and citation not in texts:
                texts.append(citation)
        tail = f" — {'; '.join(texts)}" if texts else ""
        lines.append(f"  - concern `{caveat['symbol']}` (certainty {caveat['cf']:.2f}){tail}")
    return lines


def _dimension_block(payload: dict, name: str) -> list[str]:
    dim = next(d for d in payload["dimensions"] if d["dimension"] == name)
    title = {"costbenefit": "Cost and benefit"}.get(name, name.capitalize())
    lines = [f"- **{title}: {_verdict(dim['verdict'])}** (certainty {dim['cf']:.2f})"]
    lines.extend(_caveat_lines(payload, dim["caveats"]))
    if dim["pending"]:
        lines.append(f"  - unanswered: {', '.join(dim['pending'])}")
    return lines


def render_markdown(payload: dict) -> str:
    kb = payload["kb"]
    figures = payload.get("figures", {})
    out: list[str] = []
    out.append(f"# Feasibility assessment — {kb['name']} {kb['version']}")
    out.append("")
    out.append(
        f"**Overall verdict: {_verdict(payload['verdict'])}** "
        f"(certainty {payload['cf']:.2f})"
    )
    n_open = len(payload.get("unresolved", []))
    plural = "question" if n_open == 1 else "questions"
    if payload.get("status") != "complete":
        out.append(f"Consultation incomplete: {n_open} {plural} still unanswered.")
    elif n_open:
        # A showstopper ends the interview early; say what was never collected.
        out.append(
            f"Consultation stopped early: the verdict was already settled, "
            f"leaving {n_open} {plural} unasked."
        )
    else:
        out.append("Consultation complete: every question the rules needed was answered.")
    out.append("")

    out.append("## Business case")
    out.append("")
    out.extend(_dimension_block(payload, "business"))
    out.extend(_dimension_block(payload, "organisational"))
    out.extend(_dimension_block(payload, "costbenefit"))
    out.append("")

    cost_lines = []
    if "initial_cost_display" in figures:
        cost_lines.append(f"- Build cost: {figures['initial_cost_display']}")
    if "annual_cost_display" in figures:
        cost_lines.append(f"- Running cost: {figures['annual_cost_display']} per year")
    if "annual_benefit_display" in figures:
        cost_lines.append(f"- Benefit: {figures['annual_benefit_display']} per year")
    if "payback_display" in figures:
        cost_lines.append(f"- Payback: {figures['payback_display']}")
    if cost_lines:
        out.extend(cost_lines)
        out.append("")

    register = payload.get("risk_register", [])
    if register:
        out.append("### Risk register")
        out.append("")
        out.append("| Risk | Likelihood | Impact | Serious |")
        out.append("| --- | --- | --- | --- |")
        for entry in register:
            serious = "yes" if entry["serious"] else "no"
            out.append(
                f"| {entry['risk']} | {entry['likelihood']} | {entry['impact']} | {serious} |"
            )
        out.append("")

    out.append("## Technical issues")
    out.append("")
    out.extend(_dimension_block(payload, "technical"))
    sizing = []
    if "task_time_band" in figures:
        sizing.append(f"- Expert task time band: {figures['task_time_band']}")
    if "interface_share" in figures:
        sizing.append(f"- Interface share of build effort: {float(figures['interface_share']):.2f}")
    if "effort_multiplier" in figures:
        sizing.append(f"- Coverage effort multiplier: {float(figures['effort_multiplier']):.1f}x")
    if "contingency_needed" in figures:
        needed = "yes" if figures["contingency_needed"] else "no"
        sizing.append(f"- Contingency plan needed: {needed}")
    if sizing:
        out.append("")
        out.extend(sizing)
    out.append("")

    out.append("## Stakeholder issues")
    out.append("")
    out.extend(_dimension_block(payload, "stakeholder"))
    out.append("")

    out.append("## Unresolved questions")
    out.append("")
    unresolved = payload.get("unresolved", [])
    if unresolved:
        for q in unresolved:
            out.append(f"- `{q['attribute']}` — {q['prompt']}")
    else:
        out.append("None.")
    for note in payload.get("notes", []):
        out.append(f"- note: {note}")
    out.append("")

    out.append("## Conclusion")
    out.append("")
    out.append(_CONCLUSION_TEXT.get(payload["verdict"], _verdict(payload["verdict"])))
    caveat_symbols = [c["symbol"] for c in payload.get("caveats", [])]
    if caveat_symbols:
        out.append("")
        out.append("Caveats carried forward: " + ", ".join(f"`{s}`" for s in caveat_symbols) + ".")
    out.append("")
    return "\n".join(out)


def render_report(assessment: Assessment, fmt: str = "md") -> str:
    payload = assessment_payload(assessment)
    if fmt == "json":
        return json.dumps(payload, indent=2)
    if fmt == "md":
        return render_markdown(payload)
    raise ValueError(f"unknown report format {fmt!r}; use md or json")
